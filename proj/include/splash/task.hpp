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

// Labeled node-property queries and the cursor that replays an edge list up
// to a query's position in the stream.

#ifndef SPLASH_TASK_HPP_
#define SPLASH_TASK_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "splash/ctdg.hpp"
#include "splash/nn.hpp"

namespace splash {

enum class TaskKind { Classification, Anomaly, Affinity };

std::string_view task_name(TaskKind t);
TaskKind parse_task(std::string_view name);

struct PropertyQuery {
  NodeId node = 0;
  double time = 0.0;
  int label = -1;                // class index (classification, anomaly)
  std::vector<double> affinity;  // normalised distribution (affinity)
  // Number of edges of the stream ingested before the query is answered.
  std::size_t stream_pos = 0;

  Target target() const {
    return label >= 0 ? Target{label, {}} : Target{-1, std::span<const double>(affinity)};
  }
};

struct PropertySet {
  TaskKind task = TaskKind::Classification;
  std::size_t label_dim = 0;
  std::vector<PropertyQuery> queries;  // chronological

  std::size_t size() const { return queries.size(); }
  // Throws FormatError on unsorted times, labels out of range, or
  // affinity vectors of the wrong length.
  void validate() const;
};

// Feeds edges[pos, target) into a stream state.
class StreamCursor {
 public:
  StreamCursor(StreamState& state, std::span<const TemporalEdge> edges)
      : state_(state), edges_(edges) {}

  void advance_to(std::size_t target);
  std::size_t position() const { return pos_; }
  StreamState& state() { return state_; }

 private:
  StreamState& state_;
  std::span<const TemporalEdge> edges_;
  std::size_t pos_ = 0;
};

}  // namespace splash

#endif  // SPLASH_TASK_HPP_
