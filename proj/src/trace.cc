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

#include "alphatree/trace.h"

#include <cstdio>
#include <stdexcept>

namespace alphatree {

void RunTrace::Add(int iteration, std::string metric, double value, std::string group,
                   std::string event) {
  if (iteration < last_iteration()) {
    throw std::logic_error("trace rows must not go back in iteration");
  }
  rows_.push_back({iteration, std::move(metric), value, std::move(group), std::move(event)});
}

void RunTrace::Append(const RunTrace& other, int iteration_offset) {
  for (const TraceRow& row : other.rows_) {
    Add(row.iteration + iteration_offset, row.metric, row.value, row.group, row.event);
  }
}

std::vector<double> RunTrace::Series(const std::string& metric,
                                     const std::optional<std::string>& group) const {
  std::vector<double> values;
  for (const TraceRow& row : rows_) {
    if (row.metric == metric && (!group || row.group == *group)) values.push_back(row.value);
  }
  return values;
}

bool RunTrace::HasEvent(const std::string& event) const {
  for (const TraceRow& row : rows_) {
    if (row.event == event) return true;
  }
  return false;
}

void RunTrace::WriteCsv(std::ostream& out) const {
  out << "iteration,metric,value,group,event\n";
  char buffer[32];
  for (const TraceRow& row : rows_) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", row.value);
    out << row.iteration << ',' << row.metric << ',' << buffer << ',' << row.group << ','
        << row.event << '\n';
  }
}

}  // namespace alphatree
