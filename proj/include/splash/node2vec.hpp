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

// Positional embedding of the training snapshot: second-order biased random
// walks followed by skip-gram with negative sampling.

#ifndef SPLASH_NODE2VEC_HPP_
#define SPLASH_NODE2VEC_HPP_

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "splash/ctdg.hpp"
#include "splash/features.hpp"

namespace splash {

struct WalkConfig {
  std::size_t walk_length = 10;
  std::size_t walks_per_node = 80;
  double return_p = 10.0;
  double inout_q = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct SkipGramConfig {
  std::size_t embed_dim = 100;
  std::size_t window = 10;
  std::size_t negatives_per_positive = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of its value
  std::uint64_t rng_seed = 0;
};

using Walk = std::vector<NodeId>;

// Adjacency in compressed rows, neighbors sorted by node id.
class WalkGraph {
 public:
  explicit WalkGraph(const StaticGraph& g);

  std::size_t size() const { return ids_.size(); }
  NodeId id(std::size_t i) const { return ids_[i]; }
  std::size_t index(NodeId v) const;
  std::span<const std::uint32_t> neighbors(std::size_t i) const;
  std::span<const double> weights(std::size_t i) const;
  bool adjacent(std::size_t i, std::size_t j) const;

 private:
  std::vector<NodeId> ids_;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> adj_;
  std::vector<double> w_;
};

// One walk of at most `walk_length` nodes starting at `start`; shorter only
// at a dead end. Unnormalised transition weight from cur (having come from
// prev) to x: w(cur, x) * {1/p if x == prev, 1 if x ~ prev, 1/q otherwise}.
Walk node2vec_walk(const WalkGraph& g, std::size_t start, const WalkConfig& cfg,
                   std::uint64_t stream_seed);

// walks_per_node rounds; each round visits every node once in a seeded
// shuffled order. Walks are generated in parallel; the output is independent
// of the worker count.
std::vector<Walk> generate_walks(const StaticGraph& graph, const WalkConfig& cfg);

// Serial reference for generate_walks, kept for testing and benchmarking.
std::vector<Walk> generate_walks_serial(const StaticGraph& graph, const WalkConfig& cfg);

struct SkipGramResult {
  std::unordered_map<NodeId, std::vector<double>> embeddings;
  std::vector<double> epoch_loss;  // mean negative-sampling loss per epoch
};

// Serialised SGD; deterministic per seed. Nodes listed in `vocabulary` but
// absent from every walk get a zero vector and a warning.
SkipGramResult train_skipgram(const std::vector<Walk>& walks, const SkipGramConfig& cfg,
                              std::span<const NodeId> vocabulary = {});

FeatureTable fit_positional(const StaticGraph& graph, const WalkConfig& wcfg,
                            const SkipGramConfig& scfg);

}  // namespace splash

#endif  // SPLASH_NODE2VEC_HPP_
