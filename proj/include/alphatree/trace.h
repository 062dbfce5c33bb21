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

#ifndef ALPHATREE_TRACE_H_
#define ALPHATREE_TRACE_H_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace alphatree {

struct TraceRow {
  int iteration = 0;
  std::string metric;
  double value = 0.0;
  std::string group;  // empty when the metric is not group specific
  std::string event;  // e.g. "split", "init", "switch"; empty otherwise

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

// Append-only log of per-iteration metrics. Iteration indices never go back.
class RunTrace {
 public:
  // Throws std::logic_error if `iteration` is below the last appended one.
  void Add(int iteration, std::string metric, double value, std::string group = {},
           std::string event = {});
  void Append(const RunTrace& other, int iteration_offset);

  const std::vector<TraceRow>& rows() const { return rows_; }
  bool empty() const { return rows_.empty(); }
  int last_iteration() const { return rows_.empty() ? -1 : rows_.back().iteration; }

  // Values of one metric in iteration order, across groups unless `group`
  // is given.
  std::vector<double> Series(const std::string& metric,
                             const std::optional<std::string>& group = std::nullopt) const;
  bool HasEvent(const std::string& event) const;

  // Comma-separated table with header "iteration,metric,value,group,event".
  void WriteCsv(std::ostream& out) const;

 private:
  std::vector<TraceRow> rows_;
};

}  // namespace alphatree

#endif  // ALPHATREE_TRACE_H_
