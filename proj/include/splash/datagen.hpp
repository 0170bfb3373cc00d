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

// Synthetic edge streams: the class-shift benchmark (node class = id / 100,
// source nodes drawn from "class-known" sets during training and from the
// complementary sets afterwards, with shift intensity p), and a lazily
// generated uniform stream for throughput runs.

#ifndef SPLASH_DATAGEN_HPP_
#define SPLASH_DATAGEN_HPP_

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "splash/ctdg.hpp"
#include "splash/task.hpp"

namespace splash {

struct ShiftGenConfig {
  std::size_t n_nodes = 1000;
  std::size_t n_classes = 10;
  std::size_t nodes_per_class = 100;
  std::size_t n_edges = 20000;
  double t_end = 1e6;
  int p = 90;                   // shift intensity in [50, 100]
  double same_class_prob = 0.9;
  std::array<double, 3> fractions = {0.1, 0.1, 0.8};
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct ShiftDataset {
  ShiftGenConfig config;
  std::vector<TemporalEdge> edges;
  PropertySet props;  // one query per edge: (source, time, source class)
  // Per class: nodes allowed as training-portion sources, and the rest.
  std::vector<std::vector<NodeId>> known, unknown;

  int class_of(NodeId v) const {
    return static_cast<int>(static_cast<std::size_t>(v) / config.nodes_per_class);
  }
  std::string manifest_json() const;
};

ShiftDataset gen_synthetic_shift(const ShiftGenConfig& cfg);

// Uniform random endpoint pairs (no self-loops) at timestamps 1, 2, 3, ...
// State is a handful of integers and an engine, whatever n_edges is.
class ScalabilityStream {
 public:
  ScalabilityStream(std::size_t n_nodes, std::size_t n_edges, std::uint64_t rng_seed);

  // Fills `edge` and returns true while edges remain.
  bool next(TemporalEdge& edge);
  std::size_t emitted() const { return emitted_; }
  std::size_t size() const { return n_edges_; }

 private:
  std::size_t n_nodes_;
  std::size_t n_edges_;
  std::size_t emitted_ = 0;
  std::mt19937_64 rng_;
};

inline ScalabilityStream gen_scalability(std::size_t n_nodes, std::size_t n_edges,
                                         std::uint64_t rng_seed) {
  return ScalabilityStream(n_nodes, n_edges, rng_seed);
}

}  // namespace splash

#endif  // SPLASH_DATAGEN_HPP_
