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

// Command-line front end: train, apply, eval, inspect, trace and split.

#ifndef ALPHATREE_CLI_H_
#define ALPHATREE_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "alphatree/alpha_tree.h"

namespace alphatree {

// `args` excludes the program name. Returns the process exit status; errors
// are reported on `err` with a nonzero status.
int RunMain(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// One line per node, indented by depth; leaves carry their classification.
void PrintTree(const AlphaTree& tree, std::ostream& out);
// "identity (α=1)", "sharpening", "dampening", "flattening (α=0)" or
// "polarity-reversing".
std::string ClassifyAlpha(double alpha);

}  // namespace alphatree

#endif  // ALPHATREE_CLI_H_
