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

#include "splash/node2vec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "splash/kernels.hpp"

namespace splash {

void WalkConfig::validate() const {
  if (walk_length < 2) throw ConfigError("walk_length must be at least 2");
  if (!(return_p > 0.0) || !(inout_q > 0.0)) throw ConfigError("p and q must be positive");
}

WalkGraph::WalkGraph(const StaticGraph& g) : ids_(g.nodes.begin(), g.nodes.end()) {
  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(ids_.size());
  for (const auto& [pair, w] : g.edge_weights) {
    const auto a = static_cast<std::uint32_t>(index(pair.first));
    const auto b = static_cast<std::uint32_t>(index(pair.second));
    rows[a].emplace_back(b, w);
    if (a != b) rows[b].emplace_back(a, w);
  }
  offsets_.assign(ids_.size() + 1, 0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::sort(rows[i].begin(), rows[i].end());
    offsets_[i + 1] = offsets_[i] + rows[i].size();
    for (const auto& [j, w] : rows[i]) {
      adj_.push_back(j);
      w_.push_back(w);
    }
  }
}

std::size_t WalkGraph::index(NodeId v) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), v);
  if (it == ids_.end() || *it != v) throw ContractError("node not in walk graph");
  return static_cast<std::size_t>(it - ids_.begin());
}

std::span<const std::uint32_t> WalkGraph::neighbors(std::size_t i) const {
  return {adj_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> WalkGraph::weights(std::size_t i) const {
  return {w_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

bool WalkGraph::adjacent(std::size_t i, std::size_t j) const {
  auto nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), static_cast<std::uint32_t>(j));
}

Walk node2vec_walk(const WalkGraph& g, std::size_t start, const WalkConfig& cfg,
                   std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> cum;
  Walk walk;
  walk.reserve(cfg.walk_length);
  walk.push_back(g.id(start));
  std::size_t prev = start;
  std::size_t cur = start;
  const double inv_p = 1.0 / cfg.return_p;
  const double inv_q = 1.0 / cfg.inout_q;
  while (walk.size() < cfg.walk_length) {
    auto nb = g.neighbors(cur);
    auto wt = g.weights(cur);
    if (nb.empty()) break;
    cum.resize(nb.size());
    double total = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      double w = wt[i];
      if (walk.size() > 1) {
        if (nb[i] == prev) {
          w *= inv_p;
        } else if (!g.adjacent(prev, nb[i])) {
          w *= inv_q;
        }
      }
      total += w;
      cum[i] = total;
    }
    const double r = unif(rng) * total;
    std::size_t pick = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), r) - cum.begin());
    if (pick >= nb.size()) pick = nb.size() - 1;
    prev = cur;
    cur = nb[pick];
    walk.push_back(g.id(cur));
  }
  return walk;
}

namespace {

// Round-major order of (round, start node) pairs, each round shuffled.
std::vector<std::size_t> walk_starts(std::size_t n, const WalkConfig& cfg) {
  std::vector<std::size_t> order;
  order.reserve(n * cfg.walks_per_node);
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, {0x5741u}));
  std::vector<std::size_t> perm(n);
  for (std::size_t r = 0; r < cfg.walks_per_node; ++r) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    order.insert(order.end(), perm.begin(), perm.end());
  }
  return order;
}

std::uint64_t walk_seed(const WalkConfig& cfg, std::size_t slot) {
  return derive_seed(cfg.rng_seed, {0x57414cu, static_cast<std::uint64_t>(slot)});
}

}  // namespace

std::vector<Walk> generate_walks(const StaticGraph& graph, const WalkConfig& cfg) {
  cfg.validate();
  if (graph.empty()) throw ConfigError("cannot generate walks on an empty graph");
  WalkGraph g(graph);
  const auto starts = walk_starts(g.size(), cfg);
  std::vector<Walk> walks(starts.size());
  const long total = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic, 256) num_threads(worker_count())
  for (long i = 0; i < total; ++i) {
    const auto s = static_cast<std::size_t>(i);
    walks[s] = node2vec_walk(g, starts[s], cfg, walk_seed(cfg, s));
  }
  return walks;
}

std::vector<Walk> generate_walks_serial(const StaticGraph& graph, const WalkConfig& cfg) {
  cfg.validate();
  if (graph.empty()) throw ConfigError("cannot generate walks on an empty graph");
  WalkGraph g(graph);
  const auto starts = walk_starts(g.size(), cfg);
  std::vector<Walk> walks;
  walks.reserve(starts.size());
  for (std::size_t s = 0; s < starts.size(); ++s) {
    walks.push_back(node2vec_walk(g, starts[s], cfg, walk_seed(cfg, s)));
  }
  return walks;
}

namespace {

double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

SkipGramResult train_skipgram(const std::vector<Walk>& walks, const SkipGramConfig& cfg,
                              std::span<const NodeId> vocabulary) {
  if (walks.empty()) throw ConfigError("skip-gram needs at least one walk");
  if (cfg.embed_dim == 0) throw ConfigError("embedding dimension must be positive");

  std::map<NodeId, std::size_t> counts;
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (NodeId v : w) ++counts[v];
    tokens += w.size();
  }
  std::vector<NodeId> vocab;
  std::vector<double> freq;
  for (const auto& [v, c] : counts) {
    vocab.push_back(v);
    freq.push_back(std::pow(static_cast<double>(c), 0.75));
  }
  auto idx_of = [&](NodeId v) {
    return static_cast<std::uint32_t>(std::lower_bound(vocab.begin(), vocab.end(), v) -
                                      vocab.begin());
  };
  std::vector<std::vector<std::uint32_t>> corpus;
  corpus.reserve(walks.size());
  for (const auto& w : walks) {
    std::vector<std::uint32_t> c;
    c.reserve(w.size());
    for (NodeId v : w) c.push_back(idx_of(v));
    corpus.push_back(std::move(c));
  }

  // Unigram^0.75 negative table.
  const std::size_t V = vocab.size();
  const std::size_t table_size = std::clamp<std::size_t>(100 * V, 100000, 10000000);
  std::vector<std::uint32_t> table(table_size);
  {
    const double norm = std::accumulate(freq.begin(), freq.end(), 0.0);
    std::size_t w = 0;
    double cum = freq[0] / norm;
    for (std::size_t a = 0; a < table_size; ++a) {
      table[a] = static_cast<std::uint32_t>(w);
      if (static_cast<double>(a + 1) / static_cast<double>(table_size) > cum && w + 1 < V) {
        ++w;
        cum += freq[w] / norm;
      }
    }
  }

  const std::size_t d = cfg.embed_dim;
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, {0x5347u}));
  std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(d),
                                              0.5 / static_cast<double>(d));
  std::vector<double> syn0(V * d);
  for (auto& x : syn0) x = init(rng);
  std::vector<double> syn1(V * d, 0.0);
  std::vector<double> neu1e(d);

  SkipGramResult result;
  const double total_work = static_cast<double>(cfg.epochs * tokens);
  std::size_t processed = 0;
  std::uniform_int_distribution<std::size_t> window_draw(0, cfg.window > 0 ? cfg.window - 1 : 0);
  std::uniform_int_distribution<std::size_t> table_draw(0, table_size - 1);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const auto& walk : corpus) {
      for (std::size_t i = 0; i < walk.size(); ++i, ++processed) {
        const double lr = cfg.learning_rate *
                          std::max(1e-4, 1.0 - static_cast<double>(processed) / total_work);
        const std::size_t reach = cfg.window - window_draw(rng);
        const std::size_t lo = i >= reach ? i - reach : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + reach);
        double* in = syn0.data() + walk[i] * d;
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          std::fill(neu1e.begin(), neu1e.end(), 0.0);
          for (std::size_t s = 0; s <= cfg.negatives_per_positive; ++s) {
            std::uint32_t target;
            double label;
            if (s == 0) {
              target = walk[j];
              label = 1.0;
            } else {
              target = table[table_draw(rng)];
              if (target == walk[j]) continue;
              label = 0.0;
            }
            double* out = syn1.data() + target * d;
            const double f = kernels::dot(in, out, d);
            loss_sum -= label > 0.0 ? log_sigmoid(f) : log_sigmoid(-f);
            const double g = (label - sigmoid(f)) * lr;
            kernels::axpy(g, out, neu1e.data(), d);
            kernels::axpy(g, in, out, d);
          }
          kernels::axpy(1.0, neu1e.data(), in, d);
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }

  for (std::size_t v = 0; v < V; ++v) {
    result.embeddings.emplace(vocab[v],
                              std::vector<double>(syn0.begin() + static_cast<long>(v * d),
                                                  syn0.begin() + static_cast<long>((v + 1) * d)));
  }
  for (NodeId v : vocabulary) {
    if (!result.embeddings.count(v)) {
      warn("node " + std::to_string(v) + " appears in no walk; using a zero embedding");
      result.embeddings.emplace(v, std::vector<double>(d, 0.0));
    }
  }
  return result;
}

FeatureTable fit_positional(const StaticGraph& graph, const WalkConfig& wcfg,
                            const SkipGramConfig& scfg) {
  if (graph.empty()) throw ConfigError("positional features need a non-empty snapshot");
  const auto walks = generate_walks(graph, wcfg);
  const std::vector<NodeId> nodes(graph.nodes.begin(), graph.nodes.end());
  auto sg = train_skipgram(walks, scfg, nodes);
  FeatureTable table(Process::P, scfg.embed_dim);
  for (NodeId v : nodes) table.set_seen(v, std::move(sg.embeddings.at(v)));
  return table;
}

}  // namespace splash
