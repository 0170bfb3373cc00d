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

// Node-feature augmentation: random (R), positional (P, stored here once
// node2vec has produced it), and structural (S) features for seen nodes, plus
// the running-mean propagation that carries R/P into nodes first observed
// after the training period.

#ifndef SPLASH_FEATURES_HPP_
#define SPLASH_FEATURES_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "splash/common.hpp"

namespace splash {

class StreamState;

struct AugConfig {
  std::size_t d_v = 100;
  double degree_alpha = 10.0;  // resolution of the degree encoding, > 1
  std::uint64_t rng_seed = 0;

  void validate() const;
};

// Per-process node features. Seen values are fixed once initialised; unseen
// values start at zero and move only through propagate_on_edge.
class FeatureTable {
 public:
  using ValueMap = std::unordered_map<NodeId, std::vector<double>>;

  FeatureTable() = default;
  FeatureTable(Process process, std::size_t dim);

  Process process() const { return process_; }
  std::size_t dim() const { return dim_; }

  // Initialisation only: throws ContractError if the node already has a
  // seen value or the vector has the wrong length.
  void set_seen(NodeId node, std::vector<double> value);

  bool is_seen(NodeId node) const { return seen_.count(node) != 0; }

  // Seen value, propagated unseen value, or the zero vector.
  std::span<const double> value(NodeId node) const;

  const ValueMap& seen_values() const { return seen_; }
  const ValueMap& unseen_values() const { return unseen_; }

 private:
  friend void propagate_on_edge(FeatureTable&, NodeId, std::span<const double>,
                                std::uint64_t);

  Process process_ = Process::R;
  std::size_t dim_ = 0;
  ValueMap seen_;
  ValueMap unseen_;
  std::vector<double> zeros_;
};

// Standard-normal d_v-vector for one node, a pure function of (seed, node).
std::vector<double> random_feature(NodeId node, const AugConfig& cfg);

FeatureTable init_random_features(std::span<const NodeId> seen, const AugConfig& cfg);

// Sinusoidal degree encoding: component n is cos(alpha^(-n / (2 sqrt d_v)) deg)
// for even n and sin(alpha^(-(n-1) / (2 sqrt d_v)) deg) for odd n.
std::vector<double> structural_encode(std::uint64_t degree, const AugConfig& cfg);
void structural_encode_into(std::uint64_t degree, const AugConfig& cfg, std::span<double> out);

// new = (pre_edge_degree * old + neighbor_feature) / (pre_edge_degree + 1).
// Only unseen nodes of R/P tables propagate; anything else is a ContractError.
void propagate_on_edge(FeatureTable& table, NodeId node,
                       std::span<const double> neighbor_feature,
                       std::uint64_t pre_edge_degree);

// Current feature of a node under a process (Joint concatenates R, P, S).
std::vector<double> feature_at(const StreamState& state, Process process, NodeId node);

// CSV rows `node_id,process,v_0,...,v_{d-1}`; seen values only, written with
// round-trip precision.
void write_feature_csv(std::ostream& out, std::span<const FeatureTable* const> tables);
std::vector<FeatureTable> read_feature_csv(std::istream& in);

}  // namespace splash

#endif  // SPLASH_FEATURES_HPP_
