/*
 * Copyright 2026 The AlphaTree Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ALPHATREE_ERRORS_H_
#define ALPHATREE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace alphatree {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value lies outside the domain of a transform (e.g. logit of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A record or file does not match the expected columns / features.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Conditioning produced a measure with no mass.
class EmptyMeasureError : public Error {
 public:
  using Error::Error;
};

// A tree has a leaf with alpha ~ 0 and cannot be inverted.
class NonInvertibleError : public Error {
 public:
  using Error::Error;
};

// Malformed model / config / data file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration (flags, strategy parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace alphatree

#endif  // ALPHATREE_ERRORS_H_
