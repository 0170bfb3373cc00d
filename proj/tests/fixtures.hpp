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

// Constructed datasets shared by the unit tests and the acceptance binary.

#ifndef SPLASH_TESTS_FIXTURES_HPP_
#define SPLASH_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <random>
#include <unordered_map>

#include "splash/harness.hpp"

namespace splash::fixture {

// Communities of equal size with near-uniform activity; nearly every edge
// stays inside the source's community and the label is that community, so
// only position carries the signal.
inline Dataset community_dataset(std::uint64_t seed, std::size_t communities = 4,
                                 std::size_t size = 50, std::size_t n_edges = 6000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> member(0, size - 1);
  std::uniform_int_distribution<std::size_t> comm(0, communities - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset ds;
  ds.name = "community";
  ds.props.task = TaskKind::Classification;
  ds.props.label_dim = communities;
  for (std::size_t i = 0; i < n_edges; ++i) {
    const std::size_t c = comm(rng);
    const auto src = static_cast<NodeId>(c * size + member(rng));
    const std::size_t dc = u(rng) < 0.95 ? c : comm(rng);
    auto dst = static_cast<NodeId>(dc * size + member(rng));
    if (dst == src) dst = static_cast<NodeId>(dc * size + (static_cast<std::size_t>(dst) + 1) % size);
    TemporalEdge e;
    e.src = src;
    e.dst = dst;
    e.timestamp = static_cast<double>(i + 1);
    ds.edges.push_back(e);
    PropertyQuery q;
    q.node = src;
    q.time = e.timestamp;
    q.label = static_cast<int>(c);
    q.stream_pos = i + 1;
    ds.props.queries.push_back(q);
  }
  return ds;
}

// A rolling pool of live nodes: a new node replaces the oldest every few
// edges and endpoints are drawn uniformly from the pool. Each node passes
// through every degree bucket during its life, so the bucket of the source's
// current degree (the label) is visible only through degree. Queries start
// after `warmup` edges, once the pool has turned over.
inline Dataset degree_dataset(std::uint64_t seed, std::size_t pool = 50,
                              std::size_t n_edges = 6000, std::size_t birth_every = 10,
                              std::size_t warmup = 1000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> slot(0, pool - 1);
  std::vector<NodeId> live(pool);
  for (std::size_t i = 0; i < pool; ++i) live[i] = static_cast<NodeId>(i);
  NodeId next_id = static_cast<NodeId>(pool);
  std::size_t oldest = 0;
  std::unordered_map<NodeId, std::size_t> degree;
  Dataset ds;
  ds.name = "degree";
  ds.props.task = TaskKind::Classification;
  ds.props.label_dim = 3;
  for (std::size_t i = 0; i < n_edges; ++i) {
    if (i > 0 && i % birth_every == 0) {
      live[oldest] = next_id++;
      oldest = (oldest + 1) % pool;
    }
    const std::size_t a = slot(rng);
    std::size_t b = slot(rng);
    if (b == a) b = (b + 1) % pool;
    TemporalEdge e;
    e.src = live[a];
    e.dst = live[b];
    e.timestamp = static_cast<double>(i + 1);
    ds.edges.push_back(e);
    ++degree[e.src];
    ++degree[e.dst];
    const std::size_t d = degree[e.src];
    if (i < warmup) continue;
    PropertyQuery q;
    q.node = e.src;
    q.time = e.timestamp;
    q.label = d < 6 ? 0 : d < 14 ? 1 : 2;
    q.stream_pos = i + 1;
    ds.props.queries.push_back(q);
  }
  return ds;
}

// Selection-only pipeline settings used for the sanity datasets.
inline ExperimentConfig selection_config() {
  ExperimentConfig cfg;
  cfg.process = "auto";
  cfg.select_only = true;
  return cfg;
}

}  // namespace splash::fixture

#endif  // SPLASH_TESTS_FIXTURES_HPP_
