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

// Continuous-time dynamic graph data model and the single-writer stream
// state: per-node degrees, bounded buffers of the k most recent incident
// edges (with feature snapshots of the other endpoint), and the accumulated
// training snapshot.

#ifndef SPLASH_CTDG_HPP_
#define SPLASH_CTDG_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "splash/common.hpp"
#include "splash/features.hpp"

namespace splash {

struct TemporalEdge {
  NodeId src = 0;
  NodeId dst = 0;
  double timestamp = 0.0;
  std::vector<double> edge_feature;
  double weight = 1.0;

  bool operator==(const TemporalEdge&) const = default;
};

struct NeighborEntry {
  NodeId other = 0;
  double timestamp = 0.0;
  std::vector<double> edge_feature;
  double weight = 1.0;
  // Other endpoint's features right after this edge was ingested, one d_v
  // block per snapshot slot (see StreamState::slots()).
  std::vector<double> features;
};

// Undirected accumulated graph; pairs are stored with first <= second.
struct StaticGraph {
  std::set<NodeId> nodes;
  std::map<std::pair<NodeId, NodeId>, double> edge_weights;

  std::size_t num_edges() const { return edge_weights.size(); }
  bool empty() const { return nodes.empty(); }
  double weight(NodeId u, NodeId v) const;
  bool has_edge(NodeId u, NodeId v) const;
  void add(NodeId u, NodeId v, double w);
};

struct StreamConfig {
  std::size_t d_e = 0;
  std::size_t k = 100;
  double t_seen = std::numeric_limits<double>::infinity();
  std::vector<Process> processes;  // active processes; Joint expands
  AugConfig aug;
  bool track_snapshot = true;      // accumulate edges with ts <= t_seen
};

// Work done by ingest_edge, for asserting per-event cost.
struct OpCounters {
  std::uint64_t edges = 0;
  std::uint64_t endpoint_updates = 0;
  std::uint64_t values_written = 0;   // doubles written to features/snapshots
  std::uint64_t evictions = 0;
};

class StreamState {
 public:
  // `tables` must supply the seen values for every active R/P process.
  explicit StreamState(StreamConfig cfg, std::unordered_set<NodeId> seen = {},
                       std::vector<FeatureTable> tables = {});

  // Ingestion order: read pre-edge degrees and features, propagate R/P into
  // unseen endpoints, bump degrees, append snapshot entries (evicting the
  // oldest beyond k), advance the clock.
  void ingest_edge(const TemporalEdge& edge);

  // Stored entries with timestamp <= t, oldest first.
  std::vector<NeighborEntry> recent_neighbors(NodeId node, double t) const;

  template <typename Fn>
  void for_each_recent(NodeId node, double t, Fn&& fn) const;

  std::uint64_t degree_at(NodeId node) const;
  StaticGraph snapshot() const { return graph_; }

  double current_time() const { return current_time_; }
  const StreamConfig& config() const { return cfg_; }
  bool is_seen(NodeId node) const { return seen_.count(node) != 0; }
  const std::unordered_set<NodeId>& seen_set() const { return seen_; }
  bool is_active(Process p) const;

  // Base processes that are snapshotted into every NeighborEntry.
  const std::vector<Process>& slots() const { return slots_; }
  const FeatureTable* table(Process p) const;

  // Current value under a process, written into `out` (size feature_dim).
  void feature_into(Process p, NodeId node, std::span<double> out) const;
  // Snapshot value stored in an entry under a process.
  void entry_feature_into(const NeighborEntry& e, Process p, std::span<double> out) const;

  const OpCounters& counters() const { return counters_; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  class RecentBuffer {
   public:
    std::size_t size() const { return size_; }
    const NeighborEntry& at(std::size_t i) const {
      return slots_[(head_ + i) % slots_.size()];
    }
    // Returns the slot for a new newest entry; `evicted` reports overwrite.
    NeighborEntry& push(std::size_t capacity, bool& evicted);

   private:
    std::vector<NeighborEntry> slots_;
    std::size_t head_ = 0;
    std::size_t size_ = 0;
  };

  struct NodeRecord {
    std::uint64_t degree = 0;
    RecentBuffer buffer;
  };

  int slot_index(Process p) const;
  void base_value_into(Process p, NodeId node, std::uint64_t degree, std::span<double> out) const;
  void write_snapshot(NodeId other, std::uint64_t other_degree, std::vector<double>& dst);

  StreamConfig cfg_;
  std::unordered_set<NodeId> seen_;
  std::vector<Process> slots_;
  std::vector<FeatureTable> tables_;  // R and/or P
  std::unordered_map<NodeId, NodeRecord> nodes_;
  StaticGraph graph_;
  double current_time_ = 0.0;
  OpCounters counters_;
  std::vector<double> scratch_a_, scratch_b_;
};

template <typename Fn>
void StreamState::for_each_recent(NodeId node, double t, Fn&& fn) const {
  auto it = nodes_.find(node);
  if (it == nodes_.end()) return;
  const RecentBuffer& buf = it->second.buffer;
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const NeighborEntry& e = buf.at(i);
    if (e.timestamp > t) break;
    fn(e);
  }
}

}  // namespace splash

#endif  // SPLASH_CTDG_HPP_
