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

#include "splash/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace splash {

void ShiftGenConfig::validate() const {
  if (p < 50 || p > 100) throw ConfigError("shift intensity p must be in [50, 100]");
  if (n_classes < 2 || n_classes % 2 != 0) throw ConfigError("need an even number of classes");
  if (n_nodes != n_classes * nodes_per_class) {
    throw ConfigError("n_nodes must equal n_classes * nodes_per_class");
  }
  if (nodes_per_class != 100) {
    // p and 100 - p are node counts per class.
    throw ConfigError("the shift generator is defined for 100 nodes per class");
  }
  if (n_edges == 0 || !(t_end > 0.0)) throw ConfigError("need edges and a positive time span");
  const double s = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(s - 1.0) > 1e-9 || fractions[0] <= 0.0 || fractions[1] <= 0.0 ||
      fractions[2] <= 0.0) {
    throw ConfigError("portion fractions must be positive and sum to 1");
  }
  if (!(same_class_prob >= 0.0 && same_class_prob <= 1.0)) {
    throw ConfigError("same-class probability must be in [0, 1]");
  }
}

ShiftDataset gen_synthetic_shift(const ShiftGenConfig& cfg) {
  cfg.validate();
  ShiftDataset ds;
  ds.config = cfg;
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, {0x53484946u, static_cast<std::uint64_t>(cfg.p)}));
  const std::size_t C = cfg.n_classes;
  const std::size_t per = cfg.nodes_per_class;
  const std::size_t half = C / 2;

  ds.known.resize(C);
  ds.unknown.resize(C);
  for (std::size_t c = 0; c < C; ++c) {
    std::vector<NodeId> members(per);
    std::iota(members.begin(), members.end(), static_cast<NodeId>(c * per));
    std::shuffle(members.begin(), members.end(), rng);
    const std::size_t n_known = c < half ? static_cast<std::size_t>(cfg.p)
                                         : per - static_cast<std::size_t>(cfg.p);
    ds.known[c].assign(members.begin(), members.begin() + static_cast<long>(n_known));
    ds.unknown[c].assign(members.begin() + static_cast<long>(n_known), members.end());
    std::sort(ds.known[c].begin(), ds.known[c].end());
    std::sort(ds.unknown[c].begin(), ds.unknown[c].end());
  }

  // Sources of a group come from the union of that group's sets; every class
  // set of a group has the same size, so this is class-uniform.
  auto pool = [&](const std::vector<std::vector<NodeId>>& sets, std::size_t group) {
    std::vector<NodeId> out;
    for (std::size_t c = group * half; c < (group + 1) * half; ++c) {
      out.insert(out.end(), sets[c].begin(), sets[c].end());
    }
    return out;
  };
  const std::vector<NodeId> train_pool[2] = {pool(ds.known, 0), pool(ds.known, 1)};
  const std::vector<NodeId> test_pool[2] = {pool(ds.unknown, 0), pool(ds.unknown, 1)};
  const double p = static_cast<double>(cfg.p) / 100.0;

  const std::size_t n_train = static_cast<std::size_t>(std::llround(cfg.fractions[0] * cfg.n_edges));
  const std::size_t n_val = static_cast<std::size_t>(std::llround(cfg.fractions[1] * cfg.n_edges));
  const std::size_t counts[3] = {n_train, n_val, cfg.n_edges - n_train - n_val};
  const double bounds[4] = {0.0, cfg.fractions[0] * cfg.t_end,
                            (cfg.fractions[0] + cfg.fractions[1]) * cfg.t_end, cfg.t_end};

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<NodeId> any_node(0, static_cast<NodeId>(cfg.n_nodes) - 1);
  std::uniform_int_distribution<NodeId> same_class_other(0, static_cast<NodeId>(per) - 2);

  ds.edges.reserve(cfg.n_edges);
  for (int portion = 0; portion < 3; ++portion) {
    // Group-1 probability: p during training, 1 - p afterwards.
    const double g1 = portion == 0 ? p : 1.0 - p;
    const auto& pools = portion == 0 ? train_pool : test_pool;
    std::uniform_real_distribution<double> when(bounds[portion], bounds[portion + 1]);
    std::vector<double> times(counts[portion]);
    for (double& t : times) t = when(rng);
    std::sort(times.begin(), times.end());
    for (double t : times) {
      std::size_t group = unit(rng) < g1 ? 0 : 1;
      if (pools[group].empty()) group = 1 - group;  // only at p = 100
      const auto& src_pool = pools[group];
      std::uniform_int_distribution<std::size_t> pick(0, src_pool.size() - 1);
      const NodeId src = src_pool[pick(rng)];
      NodeId dst;
      if (unit(rng) < cfg.same_class_prob) {
        // Another member of the source's class.
        const NodeId base = static_cast<NodeId>(ds.class_of(src)) * static_cast<NodeId>(per);
        NodeId off = same_class_other(rng);
        if (base + off >= src) ++off;
        dst = base + off;
      } else {
        dst = any_node(rng);
      }
      TemporalEdge e;
      e.src = src;
      e.dst = dst;
      e.timestamp = t;
      ds.edges.push_back(std::move(e));
    }
  }

  ds.props.task = TaskKind::Classification;
  ds.props.label_dim = C;
  ds.props.queries.reserve(ds.edges.size());
  for (std::size_t i = 0; i < ds.edges.size(); ++i) {
    PropertyQuery q;
    q.node = ds.edges[i].src;
    q.time = ds.edges[i].timestamp;
    q.label = ds.class_of(q.node);
    q.stream_pos = i + 1;
    ds.props.queries.push_back(std::move(q));
  }
  return ds;
}

std::string ShiftDataset::manifest_json() const {
  nlohmann::ordered_json j;
  j["generator"] = "class_shift";
  j["p"] = config.p;
  j["seed"] = config.rng_seed;
  j["n_nodes"] = config.n_nodes;
  j["n_classes"] = config.n_classes;
  j["n_edges"] = config.n_edges;
  j["t_end"] = config.t_end;
  j["same_class_prob"] = config.same_class_prob;
  j["fractions"] = config.fractions;
  j["known"] = known;
  j["unknown"] = unknown;
  return j.dump(2);
}

ScalabilityStream::ScalabilityStream(std::size_t n_nodes, std::size_t n_edges,
                                     std::uint64_t rng_seed)
    : n_nodes_(n_nodes), n_edges_(n_edges), rng_(derive_seed(rng_seed, {0x5343414cu})) {
  if (n_edges == 0) throw ConfigError("scalability stream needs at least one edge");
  if (n_nodes < 2) throw ConfigError("scalability stream needs at least two nodes");
}

bool ScalabilityStream::next(TemporalEdge& edge) {
  if (emitted_ >= n_edges_) return false;
  std::uniform_int_distribution<std::size_t> first(0, n_nodes_ - 1);
  std::uniform_int_distribution<std::size_t> second(0, n_nodes_ - 2);
  const std::size_t u = first(rng_);
  std::size_t v = second(rng_);
  if (v >= u) ++v;
  edge.src = static_cast<NodeId>(u);
  edge.dst = static_cast<NodeId>(v);
  edge.timestamp = static_cast<double>(++emitted_);
  edge.weight = 1.0;
  edge.edge_feature.clear();
  return true;
}

}  // namespace splash
