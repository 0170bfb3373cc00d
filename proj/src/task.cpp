/*
 * Copyright 2026 The SPLASH Authors.
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

#include "splash/task.hpp"

#include <cmath>
#include <string>

namespace splash {

std::string_view task_name(TaskKind t) {
  switch (t) {
    case TaskKind::Classification:
      return "classification";
    case TaskKind::Anomaly:
      return "anomaly";
    case TaskKind::Affinity:
      return "affinity";
  }
  return "?";
}

TaskKind parse_task(std::string_view name) {
  if (name == "classification") return TaskKind::Classification;
  if (name == "anomaly") return TaskKind::Anomaly;
  if (name == "affinity") return TaskKind::Affinity;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

void PropertySet::validate() const {
  if (label_dim == 0) throw FormatError("property set has zero label dimension");
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& q = queries[i];
    if (i > 0 && (q.time < queries[i - 1].time || q.stream_pos < queries[i - 1].stream_pos)) {
      throw FormatError("property queries out of chronological order at index " +
                        std::to_string(i));
    }
    if (task == TaskKind::Affinity) {
      if (q.affinity.size() != label_dim) {
        throw FormatError("affinity vector of length " + std::to_string(q.affinity.size()) +
                          ", expected " + std::to_string(label_dim));
      }
      double s = 0.0;
      for (double a : q.affinity) {
        if (a < 0.0) throw FormatError("negative affinity value");
        s += a;
      }
      // All-zero vectors are allowed: the node had no edges in the window.
      if (s != 0.0 && std::abs(s - 1.0) > 1e-6) {
        throw FormatError("affinity vector does not sum to 1");
      }
    } else if (q.label < 0 || static_cast<std::size_t>(q.label) >= label_dim) {
      throw FormatError("label " + std::to_string(q.label) + " out of range");
    }
  }
}

void StreamCursor::advance_to(std::size_t target) {
  if (target > edges_.size()) throw ContractError("stream position beyond the edge list");
  if (target < pos_) throw StreamOrderError("stream cursor cannot move backwards");
  for (; pos_ < target; ++pos_) state_.ingest_edge(edges_[pos_]);
}

}  // namespace splash
