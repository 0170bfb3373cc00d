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

#include "splash/ctdg.hpp"

#include <algorithm>
#include <string>

namespace splash {

namespace {

std::pair<NodeId, NodeId> ordered(NodeId u, NodeId v) {
  return u <= v ? std::make_pair(u, v) : std::make_pair(v, u);
}

bool propagates(Process p) { return p == Process::R || p == Process::P; }

}  // namespace

double StaticGraph::weight(NodeId u, NodeId v) const {
  auto it = edge_weights.find(ordered(u, v));
  return it == edge_weights.end() ? 0.0 : it->second;
}

bool StaticGraph::has_edge(NodeId u, NodeId v) const {
  return edge_weights.count(ordered(u, v)) != 0;
}

void StaticGraph::add(NodeId u, NodeId v, double w) {
  nodes.insert(u);
  nodes.insert(v);
  edge_weights[ordered(u, v)] += w;
}

NeighborEntry& StreamState::RecentBuffer::push(std::size_t capacity, bool& evicted) {
  evicted = false;
  if (slots_.size() < capacity) {
    slots_.emplace_back();
    ++size_;
    return slots_.back();
  }
  // Full: overwrite the oldest slot in place so its vectors are reused.
  NeighborEntry& slot = slots_[head_];
  head_ = (head_ + 1) % slots_.size();
  evicted = true;
  return slot;
}

StreamState::StreamState(StreamConfig cfg, std::unordered_set<NodeId> seen,
                         std::vector<FeatureTable> tables)
    : cfg_(std::move(cfg)), seen_(std::move(seen)) {
  if (cfg_.k == 0) throw ConfigError("recent-neighbor capacity k must be positive");
  cfg_.aug.validate();
  for (Process p : cfg_.processes) {
    for (Process b : base_processes(p)) {
      if (b == Process::ZF) continue;
      if (std::find(slots_.begin(), slots_.end(), b) == slots_.end()) slots_.push_back(b);
    }
  }
  for (Process b : slots_) {
    if (!propagates(b)) continue;
    auto it = std::find_if(tables.begin(), tables.end(),
                           [b](const FeatureTable& t) { return t.process() == b; });
    if (it == tables.end()) {
      throw ConfigError("no feature table supplied for active process " +
                        std::string(process_name(b)));
    }
    if (it->dim() != cfg_.aug.d_v) throw ConfigError("feature table dimension differs from d_v");
    tables_.push_back(std::move(*it));
  }
  scratch_a_.resize(cfg_.aug.d_v);
  scratch_b_.resize(cfg_.aug.d_v);
}

bool StreamState::is_active(Process p) const {
  if (p == Process::ZF) {
    return std::find(cfg_.processes.begin(), cfg_.processes.end(), Process::ZF) !=
           cfg_.processes.end();
  }
  for (Process b : base_processes(p)) {
    if (slot_index(b) < 0) return false;
  }
  return true;
}

int StreamState::slot_index(Process p) const {
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    if (slots_[i] == p) return static_cast<int>(i);
  }
  return -1;
}

const FeatureTable* StreamState::table(Process p) const {
  for (const auto& t : tables_) {
    if (t.process() == p) return &t;
  }
  return nullptr;
}

std::uint64_t StreamState::degree_at(NodeId node) const {
  auto it = nodes_.find(node);
  return it == nodes_.end() ? 0 : it->second.degree;
}

void StreamState::base_value_into(Process p, NodeId node, std::uint64_t degree,
                                  std::span<double> out) const {
  switch (p) {
    case Process::R:
    case Process::P: {
      auto v = table(p)->value(node);
      std::copy(v.begin(), v.end(), out.begin());
      break;
    }
    case Process::S:
      structural_encode_into(degree, cfg_.aug, out);
      break;
    case Process::RF: {
      auto v = random_feature(node, cfg_.aug);
      std::copy(v.begin(), v.end(), out.begin());
      break;
    }
    case Process::ZF:
      std::fill(out.begin(), out.end(), 0.0);
      break;
    case Process::Joint:
      throw ContractError("Joint is not a base process");
  }
}

void StreamState::feature_into(Process p, NodeId node, std::span<double> out) const {
  const std::size_t d = cfg_.aug.d_v;
  if (out.size() != feature_dim(p, d)) throw ShapeError("feature output span has wrong length");
  if (!is_active(p)) {
    throw ConfigError("process " + std::string(process_name(p)) + " is not active");
  }
  const std::uint64_t deg = degree_at(node);
  std::size_t off = 0;
  for (Process b : base_processes(p)) {
    base_value_into(b, node, deg, out.subspan(off, d));
    off += d;
  }
}

void StreamState::entry_feature_into(const NeighborEntry& e, Process p,
                                     std::span<double> out) const {
  const std::size_t d = cfg_.aug.d_v;
  if (out.size() != feature_dim(p, d)) throw ShapeError("feature output span has wrong length");
  if (p == Process::ZF) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::size_t off = 0;
  for (Process b : base_processes(p)) {
    const int slot = slot_index(b);
    if (slot < 0) {
      throw StateError("neighbor entry carries no snapshot for process " +
                       std::string(process_name(b)));
    }
    std::copy_n(e.features.begin() + static_cast<std::ptrdiff_t>(slot * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(off));
    off += d;
  }
}

void StreamState::write_snapshot(NodeId other, std::uint64_t other_degree,
                                 std::vector<double>& dst) {
  const std::size_t d = cfg_.aug.d_v;
  dst.resize(slots_.size() * d);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    base_value_into(slots_[s], other, other_degree,
                    std::span<double>(dst).subspan(s * d, d));
  }
  counters_.values_written += dst.size();
}

void StreamState::ingest_edge(const TemporalEdge& edge) {
  if (edge.timestamp < current_time_) {
    throw StreamOrderError("edge at t=" + std::to_string(edge.timestamp) +
                           " arrives after t=" + std::to_string(current_time_));
  }
  if (edge.edge_feature.size() != cfg_.d_e) {
    throw FormatError("edge feature has length " + std::to_string(edge.edge_feature.size()) +
                      ", stream declares " + std::to_string(cfg_.d_e));
  }
  const NodeId u = edge.src;
  const NodeId v = edge.dst;
  const bool self_loop = (u == v);
  NodeRecord& ru = nodes_[u];
  NodeRecord& rv = nodes_[v];  // reference stability: unordered_map nodes are stable

  // (1)-(2) propagate pre-edge values into unseen endpoints; both updates read
  // pre-edge values so the result does not depend on endpoint order.
  const std::uint64_t du = ru.degree;
  const std::uint64_t dv = rv.degree;
  for (FeatureTable& t : tables_) {
    const bool u_unseen = !seen_.count(u);
    const bool v_unseen = !self_loop && !seen_.count(v);
    if (!u_unseen && !v_unseen) continue;
    auto fu = t.value(u);
    auto fv = t.value(v);
    std::copy(fu.begin(), fu.end(), scratch_a_.begin());
    std::copy(fv.begin(), fv.end(), scratch_b_.begin());
    if (u_unseen) {
      propagate_on_edge(t, u, scratch_b_, du);
      counters_.values_written += t.dim();
    }
    if (v_unseen) {
      propagate_on_edge(t, v, scratch_a_, dv);
      counters_.values_written += t.dim();
    }
  }

  // (3) degrees count incidences; a self-loop is a single incidence.
  ru.degree += 1;
  if (!self_loop) rv.degree += 1;

  // (4) snapshot the other endpoint's post-update features.
  auto append = [&](NodeRecord& rec, NodeId other, std::uint64_t other_degree) {
    bool evicted = false;
    NeighborEntry& e = rec.buffer.push(cfg_.k, evicted);
    e.other = other;
    e.timestamp = edge.timestamp;
    e.edge_feature.assign(edge.edge_feature.begin(), edge.edge_feature.end());
    e.weight = edge.weight;
    write_snapshot(other, other_degree, e.features);
    counters_.values_written += e.edge_feature.size();
    if (evicted) ++counters_.evictions;
  };
  append(ru, v, rv.degree);
  counters_.endpoint_updates += 1;
  if (!self_loop) {
    append(rv, u, ru.degree);
    counters_.endpoint_updates += 1;
  }

  if (cfg_.track_snapshot && edge.timestamp <= cfg_.t_seen) graph_.add(u, v, edge.weight);

  // (5)
  current_time_ = edge.timestamp;
  counters_.edges += 1;
}

std::vector<NeighborEntry> StreamState::recent_neighbors(NodeId node, double t) const {
  std::vector<NeighborEntry> out;
  for_each_recent(node, t, [&](const NeighborEntry& e) { out.push_back(e); });
  return out;
}

}  // namespace splash
