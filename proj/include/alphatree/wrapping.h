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

// Pointwise posterior transforms: clipping, logits and the alpha wrapping
//
//   q_fair = q^a / (q^a + (1 - q)^a) = sigmoid(a * logit(q)).
//
// Everything here is templated on the scalar type and has an Eigen-array
// overload so whole score columns can be transformed in one expression.

#ifndef ALPHATREE_WRAPPING_H_
#define ALPHATREE_WRAPPING_H_

#include <cmath>
#include <string>
#include <type_traits>

#include <Eigen/Core>

#include "alphatree/errors.h"

namespace alphatree {

// Default cap on |alpha| for leaf labels.
inline constexpr double kDefaultAlphaCap = 50.0;
// Below this magnitude a leaf alpha is treated as zero (non-invertible).
inline constexpr double kAlphaZeroTolerance = 1e-12;

// Half-width B of the clipping interval in logit space. The induced interval
// I = [1/(1+e^B), 1/(1+e^-B)] is symmetric about 1/2.
class ClipBound {
 public:
  explicit ClipBound(double half_width) : half_width_(half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw DomainError("clip bound must be a positive finite real, got " +
                        std::to_string(half_width));
    }
  }

  double half_width() const { return half_width_; }
  double lower() const { return 1.0 / (1.0 + std::exp(half_width_)); }
  double upper() const { return 1.0 / (1.0 + std::exp(-half_width_)); }
  bool Contains(double u) const { return u >= lower() && u <= upper(); }

  friend bool operator==(const ClipBound&, const ClipBound&) = default;

 private:
  double half_width_;
};

template <typename Scalar>
Scalar Sigmoid(Scalar z) {
  using std::exp;
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-z));
  const Scalar e = exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
Scalar Logit(Scalar u) {
  using std::log;
  using std::log1p;
  if (!(u > Scalar(0) && u < Scalar(1))) {
    throw DomainError("logit is only defined on (0,1), got " +
                      std::to_string(static_cast<double>(u)));
  }
  return log(u) - log1p(-u);
}

// logit(u) / B, mapping I onto [-1, 1].
template <typename Scalar>
Scalar NormalizedLogit(Scalar u, const ClipBound& bound) {
  if (!(u >= Scalar(bound.lower()) && u <= Scalar(bound.upper()))) {
    throw DomainError("normalized logit requires u inside the clip interval, got " +
                      std::to_string(static_cast<double>(u)));
  }
  const Scalar value = Logit(u) / Scalar(bound.half_width());
  // The interval endpoints round-trip to +-1 up to one ulp.
  if (value > Scalar(1)) return Scalar(1);
  if (value < Scalar(-1)) return Scalar(-1);
  return value;
}

template <typename Scalar>
Scalar ClipScore(Scalar q, const ClipBound& bound) {
  if (!std::isfinite(static_cast<double>(q))) {
    throw DomainError("cannot clip a non-finite score");
  }
  const Scalar lo(bound.lower());
  const Scalar hi(bound.upper());
  return q < lo ? lo : (q > hi ? hi : q);
}

// Computed as sigmoid(alpha * logit(q)); identical to the power form but does
// not overflow for large |alpha|.
template <typename Scalar>
  requires std::is_floating_point_v<Scalar>
Scalar ApplyAlpha(Scalar q, Scalar alpha) {
  if (!std::isfinite(static_cast<double>(alpha))) {
    throw DomainError("alpha must be finite");
  }
  return Sigmoid(alpha * Logit(q));
}

template <typename Scalar>
Scalar ComposeAlpha(Scalar first, Scalar second) {
  return first * second;
}

// Alpha that maps posterior `source` onto `target` (twist-properness).
template <typename Scalar>
Scalar TwistAlpha(Scalar source, Scalar target) {
  const Scalar denominator = Logit(source);
  if (denominator == Scalar(0)) {
    throw DomainError("no alpha can move a posterior of exactly 1/2");
  }
  return Logit(target) / denominator;
}

// Eigen overloads. These return expressions; assign them to materialize.

template <typename Derived>
auto ClipScores(const Eigen::ArrayBase<Derived>& q, const ClipBound& bound) {
  return q.derived().unaryExpr(
      [bound](typename Derived::Scalar v) { return ClipScore(v, bound); });
}

template <typename Derived>
auto Logits(const Eigen::ArrayBase<Derived>& u) {
  return u.derived().unaryExpr(
      [](typename Derived::Scalar v) { return Logit(v); });
}

template <typename Derived>
auto NormalizedLogits(const Eigen::ArrayBase<Derived>& u, const ClipBound& bound) {
  return u.derived().unaryExpr(
      [bound](typename Derived::Scalar v) { return NormalizedLogit(v, bound); });
}

template <typename DerivedQ, typename DerivedA>
auto ApplyAlpha(const Eigen::ArrayBase<DerivedQ>& q,
                const Eigen::ArrayBase<DerivedA>& alpha) {
  return q.derived().binaryExpr(
      alpha.derived(), [](typename DerivedQ::Scalar v, typename DerivedA::Scalar a) {
        return ApplyAlpha<typename DerivedQ::Scalar>(v, a);
      });
}

}  // namespace alphatree

#endif  // ALPHATREE_WRAPPING_H_
