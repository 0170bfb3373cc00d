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

#include "splash/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "json.hpp"

namespace splash {

void encode_node_into(const StreamState& state, NodeId node, double t, Process process,
                      std::span<double> out) {
  const std::size_t d = feature_dim(process, state.config().aug.d_v);
  if (out.size() != 2 * d) throw ShapeError("encoding output has wrong length");
  state.feature_into(process, node, out.subspan(0, d));
  std::span<double> mean = out.subspan(d, d);
  std::fill(mean.begin(), mean.end(), 0.0);
  std::vector<double> snap(d);
  std::size_t n = 0;
  state.for_each_recent(node, t, [&](const NeighborEntry& e) {
    state.entry_feature_into(e, process, snap);
    for (std::size_t j = 0; j < d; ++j) mean[j] += snap[j];
    ++n;
  });
  if (n > 0) {
    for (double& v : mean) v /= static_cast<double>(n);
  }
}

std::vector<double> encode_node(const StreamState& state, NodeId node, double t, Process process) {
  std::vector<double> out(2 * feature_dim(process, state.config().aug.d_v));
  encode_node_into(state, node, t, process, out);
  return out;
}

SplitPlan make_split_plan(const PropertySet& props, std::span<const double> fractions) {
  if (props.queries.empty()) throw ConfigError("split plan over an empty property set");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0.0 && fractions[i] < 1.0) || (i > 0 && fractions[i] <= fractions[i - 1])) {
      throw ConfigError("split fractions must be strictly increasing in (0, 1)");
    }
  }
  SplitPlan plan;
  const std::size_t n = props.size();
  for (double f : fractions) {
    const auto n_train = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
      warn("split fraction " + std::to_string(f) + " leaves an empty side; dropped");
      continue;
    }
    plan.pairs.push_back(SplitPair{f, n_train, props.queries[n_train - 1].time});
  }
  return plan;
}

void LinearModel::logits_into(std::span<const double> x, std::span<double> out) const {
  const std::size_t stride = in_dim + 1;
  for (std::size_t c = 0; c < label_dim; ++c) {
    const double* wc = w.data() + c * stride;
    out[c] = kernels::dot(wc, x.data(), in_dim) + wc[in_dim];
  }
}

LinearModel fit_linear(const Matrix& x, std::span<const Target> targets, std::size_t label_dim,
                       const LinearFitConfig& cfg, std::size_t rows) {
  const std::size_t n = std::min(rows, x.rows());
  const std::size_t d = x.cols();
  if (n == 0) throw ConfigError("fit_linear needs at least one example");
  if (targets.size() < n) throw ShapeError("fewer targets than examples");
  if (label_dim == 0) throw ConfigError("label dimension must be positive");
  const std::size_t C = label_dim;
  // Flat parameters: C x d weights, then C biases.
  std::vector<double> params(C * d + C, 0.0);
  std::vector<double> grads(params.size());
  std::vector<double> mask(params.size(), 0.0);
  std::fill_n(mask.begin(), C * d, 1.0);
  AdamState adam;
  AdamConfig acfg;
  acfg.learning_rate = cfg.learning_rate;
  acfg.weight_decay = cfg.weight_decay;
  Matrix z(n, C);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    kernels::gemm_nt(x.data(), params.data(), z.data(), n, d, C, false);
    const double* b = params.data() + C * d;
    for (std::size_t i = 0; i < n; ++i) {
      double* zi = z.row(i);
      for (std::size_t c = 0; c < C; ++c) zi[c] += b[c];
      cross_entropy(std::span<const double>(zi, C), targets[i], std::span<double>(zi, C));
      for (std::size_t c = 0; c < C; ++c) zi[c] *= inv_n;
    }
    std::fill(grads.begin(), grads.end(), 0.0);
    kernels::gemm_tn_acc(z.data(), x.data(), grads.data(), n, C, d);
    double* gb = grads.data() + C * d;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < C; ++c) gb[c] += z(i, c);
    }
    adam_step(params, grads, mask, adam, acfg);
  }
  LinearModel m;
  m.label_dim = C;
  m.in_dim = d;
  m.w.resize(C * (d + 1));
  for (std::size_t c = 0; c < C; ++c) {
    std::copy_n(params.data() + c * d, d, m.w.data() + c * (d + 1));
    m.w[c * (d + 1) + d] = params[C * d + c];
  }
  return m;
}

double empirical_risk(const LinearModel& model, const Matrix& x, std::span<const Target> targets,
                      std::size_t begin, std::size_t end) {
  end = std::min(end, x.rows());
  if (begin >= end) throw ConfigError("empirical risk over an empty set");
  if (x.cols() != model.in_dim) throw ShapeError("encoding width differs from the model");
  std::vector<double> z(model.label_dim);
  double sum = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    model.logits_into(x.row_span(i), z);
    sum += cross_entropy(z, targets[i]);
  }
  return sum / static_cast<double>(end - begin);
}

std::vector<Matrix> collect_encodings(StreamCursor& cursor, std::span<const PropertyQuery> queries,
                                      std::span<const Process> candidates) {
  const std::size_t d_v = cursor.state().config().aug.d_v;
  std::vector<Matrix> out;
  for (Process p : candidates) out.emplace_back(queries.size(), 2 * feature_dim(p, d_v));
  for (std::size_t i = 0; i < queries.size(); ++i) {
    cursor.advance_to(queries[i].stream_pos);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      encode_node_into(cursor.state(), queries[i].node, queries[i].time, candidates[c],
                       out[c].row_span(i));
    }
  }
  return out;
}

namespace {

int preference(Process p) {
  switch (p) {
    case Process::S:
      return 0;
    case Process::P:
      return 1;
    case Process::R:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

SelectionReport select_from_encodings(std::span<const Process> candidates,
                                      std::span<const Matrix> encodings,
                                      const PropertySet& props, const SplitPlan& plan,
                                      const LinearFitConfig& cfg) {
  if (candidates.empty()) throw ConfigError("no candidate processes");
  if (encodings.size() != candidates.size()) throw ShapeError("one encoding matrix per candidate");
  if (plan.pairs.empty()) throw SelectionError("no usable train/validation split");
  std::vector<Target> targets;
  targets.reserve(props.size());
  for (const auto& q : props.queries) targets.push_back(q.target());

  SelectionReport rep;
  rep.candidates.assign(candidates.begin(), candidates.end());
  rep.splits = plan.pairs;
  const std::size_t S = plan.pairs.size();
  const std::size_t K = candidates.size();
  rep.risks.assign(K, std::vector<double>(S, 0.0));
  const long jobs = static_cast<long>(K * S);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (long j = 0; j < jobs; ++j) {
    const std::size_t c = static_cast<std::size_t>(j) / S;
    const std::size_t s = static_cast<std::size_t>(j) % S;
    const std::size_t n_train = plan.pairs[s].n_train;
    // Each split refits from zero; nothing carries over between splits.
    try {
      const LinearModel m = fit_linear(encodings[c], targets, props.label_dim, cfg, n_train);
      rep.risks[c][s] = empirical_risk(m, encodings[c], targets, n_train, props.size());
    } catch (const DivergenceError&) {
      // Exceptions must not leave the parallel region.
      rep.risks[c][s] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  rep.summed.assign(K, 0.0);
  for (std::size_t c = 0; c < K; ++c) {
    for (double r : rep.risks[c]) rep.summed[c] += r;
    if (!std::isfinite(rep.summed[c])) {
      warn("candidate " + std::string(process_name(candidates[c])) +
           " has a non-finite validation risk");
    }
  }
  std::vector<std::size_t> order(K);
  for (std::size_t i = 0; i < K; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return preference(candidates[a]) < preference(candidates[b]);
  });
  double best = std::numeric_limits<double>::infinity();
  int chosen = -1;
  for (std::size_t i : order) {
    if (std::isfinite(rep.summed[i]) && rep.summed[i] < best) {
      best = rep.summed[i];
      chosen = static_cast<int>(i);
    }
  }
  if (chosen < 0) throw SelectionError("every candidate has a non-finite validation risk");
  rep.chosen = candidates[static_cast<std::size_t>(chosen)];
  return rep;
}

SelectionReport select_process(StreamState& state, std::span<const TemporalEdge> edges,
                               const PropertySet& props, std::span<const Process> candidates,
                               std::span<const double> fractions, const LinearFitConfig& cfg) {
  for (Process p : candidates) {
    if (p != Process::R && p != Process::P && p != Process::S) {
      throw ConfigError("selection candidates must be among R, P, S");
    }
  }
  StreamCursor cursor(state, edges);
  const auto enc = collect_encodings(cursor, props.queries, candidates);
  return select_from_encodings(candidates, enc, props, make_split_plan(props, fractions), cfg);
}

std::string selection_report_json(const SelectionReport& r) {
  nlohmann::ordered_json j;
  j["chosen"] = std::string(process_name(r.chosen));
  nlohmann::ordered_json splits = nlohmann::json::array();
  for (const auto& s : r.splits) {
    splits.push_back({{"fraction", s.fraction}, {"n_train", s.n_train}, {"t_split", s.t_split}});
  }
  j["splits"] = splits;
  nlohmann::ordered_json cands = nlohmann::json::array();
  for (std::size_t c = 0; c < r.candidates.size(); ++c) {
    cands.push_back({{"process", std::string(process_name(r.candidates[c]))},
                     {"split_risks", r.risks[c]},
                     {"summed_risk", r.summed[c]}});
  }
  j["candidates"] = cands;
  return j.dump(2);
}

}  // namespace splash
