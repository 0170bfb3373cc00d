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

#include "splash/slim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "splash/metrics.hpp"

namespace splash {

// ---------------------------------------------------------------------------
// Time encoding

void TimeEncodingConfig::validate() const {
  if (d_t == 0) throw ConfigError("time encoding dimension must be positive");
  if (!(alpha > 0.0) || !(beta > 0.0)) throw ConfigError("time encoding alpha, beta must be > 0");
}

std::vector<double> time_frequencies(const TimeEncodingConfig& cfg) {
  std::vector<double> f(cfg.d_t);
  for (std::size_t n = 0; n < cfg.d_t; ++n) {
    f[n] = std::pow(cfg.alpha, -static_cast<double>(n) / cfg.beta);
  }
  return f;
}

void time_encode_into(double delta_t, std::span<const double> freqs, std::span<double> out) {
  if (out.size() != freqs.size()) throw ShapeError("time encoding output has wrong length");
  for (std::size_t n = 0; n < freqs.size(); ++n) out[n] = std::cos(delta_t * freqs[n]);
}

void time_encode_into(double delta_t, const TimeEncodingConfig& cfg, std::span<double> out) {
  time_encode_into(delta_t, time_frequencies(cfg), out);
}

std::vector<double> time_encode(double delta_t, const TimeEncodingConfig& cfg) {
  std::vector<double> out(cfg.d_t);
  time_encode_into(delta_t, cfg, out);
  return out;
}

// ---------------------------------------------------------------------------
// Config

void SlimConfig::validate() const {
  if (d_v == 0 || d_h == 0 || label_dim == 0) throw ConfigError("SLIM dimensions must be positive");
  if (message_layers == 0 || aggregate_layers == 0 || decoder_layers == 0) {
    throw ConfigError("SLIM MLPs need at least one layer");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
  time.validate();
}

void TrainConfig::validate() const {
  if (batch_size == 0 || eval_batch == 0) throw ConfigError("batch size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
}

namespace {

std::vector<std::size_t> mlp_dims(std::size_t in, std::size_t hidden, std::size_t out,
                                  std::size_t layers) {
  std::vector<std::size_t> d{in};
  for (std::size_t l = 1; l < layers; ++l) d.push_back(hidden);
  d.push_back(out);
  return d;
}

}  // namespace

SlimModel::SlimModel(SlimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const std::size_t dh = cfg_.d_h;
  mlp1_ = Mlp(store_, "mlp1", mlp_dims(cfg_.raw_dim(), dh, dh, cfg_.message_layers));
  mlp2_ = Mlp(store_, "mlp2", mlp_dims(cfg_.feature_dim() + dh, dh, dh, cfg_.aggregate_layers));
  ln1_ = LayerNorm(store_, "ln1", dh);
  ln2_ = LayerNorm(store_, "ln2", dh);
  decoder_ = Mlp(store_, "decoder", mlp_dims(dh, dh, cfg_.label_dim, cfg_.decoder_layers));
  std::mt19937_64 rng(derive_seed(cfg_.rng_seed, {0x494e4954u}));
  mlp1_.init(store_, rng);
  mlp2_.init(store_, rng);
  decoder_.init(store_, rng);
  ln1_.init(store_);
  ln2_.init(store_);
  time_freq_ = time_frequencies(cfg_.time);
}

// ---------------------------------------------------------------------------
// Contexts

void SlimModel::build_raw_message(const StreamState& state, const NeighborEntry& e, double t,
                                  std::span<double> out) const {
  if (out.size() != cfg_.raw_dim()) throw ShapeError("raw message has wrong length");
  if (e.edge_feature.size() != cfg_.d_e) throw ShapeError("edge feature length differs from d_e");
  const std::size_t dx = cfg_.feature_dim();
  state.entry_feature_into(e, cfg_.process, out.subspan(0, dx));
  std::copy(e.edge_feature.begin(), e.edge_feature.end(), out.begin() + static_cast<long>(dx));
  time_encode_into(t - e.timestamp, time_freq_, out.subspan(dx + cfg_.d_e));
}

QueryContext SlimModel::make_context(const StreamState& state, NodeId node, double t) const {
  QueryContext ctx;
  ctx.own.resize(cfg_.feature_dim());
  state.feature_into(cfg_.process, node, ctx.own);
  std::size_t n = 0;
  state.for_each_recent(node, t, [&](const NeighborEntry&) { ++n; });
  ctx.raw.resize(n, cfg_.raw_dim());
  ctx.weights.reserve(n);
  ctx.delta_t.reserve(n);
  std::size_t r = 0;
  state.for_each_recent(node, t, [&](const NeighborEntry& e) {
    build_raw_message(state, e, t, ctx.raw.row_span(r++));
    ctx.weights.push_back(e.weight);
    ctx.delta_t.push_back(t - e.timestamp);
  });
  return ctx;
}

// ---------------------------------------------------------------------------
// Forward / backward

struct SlimModel::Pass {
  std::vector<std::size_t> offsets;  // message rows of query q: [offsets[q], offsets[q+1])
  Matrix raw;
  MlpCache c1;
  Matrix a1;         // MLP1 outputs, before edge weighting
  Matrix sum, mean;  // per query
  Matrix in2;
  MlpCache c2;
  Matrix ht;
  LayerNormCache n1, n2;
  Matrix y1, y2;
  Matrix h;
  MlpCache cd;
  Matrix logits;
};

void SlimModel::forward(std::span<const QueryContext* const> batch, Pass& p,
                        const Dropout& dropout) const {
  const std::size_t Q = batch.size();
  const std::size_t dh = cfg_.d_h;
  const std::size_t dx = cfg_.feature_dim();
  const std::size_t rd = cfg_.raw_dim();
  p.offsets.assign(Q + 1, 0);
  for (std::size_t q = 0; q < Q; ++q) {
    const QueryContext& c = *batch[q];
    if (c.own.size() != dx) throw ShapeError("query context own feature has wrong length");
    if (c.raw.rows() > 0 && c.raw.cols() != rd) throw ShapeError("raw message width differs");
    if (c.weights.size() != c.raw.rows()) throw ShapeError("one weight per raw message expected");
    p.offsets[q + 1] = p.offsets[q] + c.raw.rows();
  }
  const std::size_t M = p.offsets[Q];
  counters_.queries += Q;
  counters_.message_rows += M;

  p.raw.resize(M, rd);
  for (std::size_t q = 0; q < Q; ++q) {
    const QueryContext& c = *batch[q];
    std::copy(c.raw.storage().begin(), c.raw.storage().end(),
              p.raw.data() + p.offsets[q] * rd);
  }
  mlp_forward(mlp1_, store_, p.raw, p.a1, p.c1, dropout);

  p.sum.resize(Q, dh);
  p.mean.resize(Q, dh);
  p.in2.resize(Q, dx + dh);
  for (std::size_t q = 0; q < Q; ++q) {
    const QueryContext& c = *batch[q];
    double* s = p.sum.row(q);
    for (std::size_t r = p.offsets[q]; r < p.offsets[q + 1]; ++r) {
      kernels::axpy(c.weights[r - p.offsets[q]], p.a1.row(r), s, dh);
    }
    const std::size_t n = p.offsets[q + 1] - p.offsets[q];
    double* m = p.mean.row(q);
    if (n > 0) {
      for (std::size_t j = 0; j < dh; ++j) m[j] = s[j] / static_cast<double>(n);
    }
    double* in = p.in2.row(q);
    std::copy(c.own.begin(), c.own.end(), in);
    std::copy(m, m + dh, in + dx);
  }
  mlp_forward(mlp2_, store_, p.in2, p.ht, p.c2, dropout);
  layer_norm_forward(ln1_, store_, p.ht, p.y1, p.n1);
  p.h = p.y1;
  if (cfg_.skip_weight != 0.0) {
    layer_norm_forward(ln2_, store_, p.sum, p.y2, p.n2);
    double* h = p.h.data();
    const double* y2 = p.y2.data();
    for (std::size_t i = 0; i < Q * dh; ++i) h[i] += cfg_.skip_weight * y2[i];
  }
  mlp_forward(decoder_, store_, p.h, p.logits, p.cd, dropout);
}

Matrix SlimModel::logits(std::span<const QueryContext* const> batch) const {
  Pass p;
  forward(batch, p, Dropout{});
  return std::move(p.logits);
}

Matrix SlimModel::representations(std::span<const QueryContext* const> batch) const {
  Pass p;
  forward(batch, p, Dropout{});
  return std::move(p.h);
}

Matrix SlimModel::predict(std::span<const QueryContext* const> batch) const {
  Matrix z = logits(batch);
  Matrix out(z.rows(), z.cols());
  for (std::size_t q = 0; q < z.rows(); ++q) softmax(z.row_span(q), out.row_span(q));
  return out;
}

std::vector<double> SlimModel::compute_representation(const StreamState& state, NodeId node,
                                                      double t) const {
  const QueryContext ctx = make_context(state, node, t);
  const QueryContext* one[] = {&ctx};
  Matrix h = representations(one);
  return {h.data(), h.data() + h.size()};
}

std::vector<double> SlimModel::predict(const StreamState& state, NodeId node, double t) const {
  const QueryContext ctx = make_context(state, node, t);
  const QueryContext* one[] = {&ctx};
  Matrix pr = predict(one);
  return {pr.data(), pr.data() + pr.size()};
}

double SlimModel::loss_and_grad(std::span<const QueryContext* const> batch,
                                std::span<const Target> targets, std::span<double> grads,
                                const Dropout& dropout, InputGrads* input_grads) const {
  const std::size_t Q = batch.size();
  if (targets.size() != Q) throw ShapeError("one target per query expected");
  if (Q == 0) throw ShapeError("empty batch");
  const bool want_params = !grads.empty();
  if (want_params && grads.size() != store_.size()) throw ShapeError("gradient buffer length");

  Pass p;
  forward(batch, p, dropout);
  const std::size_t C = cfg_.label_dim;
  const double inv_q = 1.0 / static_cast<double>(Q);
  Matrix dlogits(Q, C);
  double loss = 0.0;
  for (std::size_t q = 0; q < Q; ++q) {
    loss += cross_entropy(p.logits.row_span(q), targets[q], dlogits.row_span(q));
  }
  loss *= inv_q;
  if (!want_params && input_grads == nullptr) return loss;
  for (double& g : dlogits.storage()) g *= inv_q;

  // Parameter gradients are accumulated into a scratch buffer when the
  // caller only wants input gradients.
  std::vector<double> scratch;
  std::span<double> g = grads;
  if (!want_params) {
    scratch.assign(store_.size(), 0.0);
    g = scratch;
  }

  const std::size_t dh = cfg_.d_h;
  const std::size_t dx = cfg_.feature_dim();
  Matrix dh_mat;
  mlp_backward(decoder_, store_, p.cd, dlogits, g, &dh_mat);
  Matrix dht;
  layer_norm_backward(ln1_, store_, p.n1, dh_mat, g, &dht);
  Matrix dsum;
  if (cfg_.skip_weight != 0.0) {
    Matrix dy2 = dh_mat;
    for (double& v : dy2.storage()) v *= cfg_.skip_weight;
    layer_norm_backward(ln2_, store_, p.n2, dy2, g, &dsum);
  }
  Matrix din2;
  mlp_backward(mlp2_, store_, p.c2, dht, g, &din2);

  const std::size_t M = p.offsets[Q];
  Matrix da1(M, dh);
  for (std::size_t q = 0; q < Q; ++q) {
    const std::size_t n = p.offsets[q + 1] - p.offsets[q];
    if (n == 0) continue;
    const double* dmean = din2.row(q) + dx;
    const double* ds = cfg_.skip_weight != 0.0 ? dsum.row(q) : nullptr;
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t r = p.offsets[q]; r < p.offsets[q + 1]; ++r) {
      const double w = batch[q]->weights[r - p.offsets[q]];
      double* d = da1.row(r);
      for (std::size_t j = 0; j < dh; ++j) {
        // sum = sum_r w_r a1_r ; mean = sum / n
        const double dmsg = dmean[j] * inv_n + (ds ? ds[j] : 0.0);
        d[j] = dmsg * w;
      }
    }
  }
  Matrix draw;
  mlp_backward(mlp1_, store_, p.c1, da1, g, input_grads ? &draw : nullptr);

  if (input_grads != nullptr) {
    const std::size_t rd = cfg_.raw_dim();
    const std::size_t t0 = dx + cfg_.d_e;
    input_grads->own.assign(Q, {});
    input_grads->raw.assign(Q, Matrix());
    input_grads->delta_t.assign(Q, {});
    for (std::size_t q = 0; q < Q; ++q) {
      input_grads->own[q].assign(din2.row(q), din2.row(q) + dx);
      const std::size_t n = p.offsets[q + 1] - p.offsets[q];
      Matrix& gr = input_grads->raw[q];
      gr.resize(n, rd);
      std::vector<double>& gdt = input_grads->delta_t[q];
      gdt.assign(n, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const double* src = draw.row(p.offsets[q] + r);
        std::copy(src, src + rd, gr.row(r));
        const double dt = batch[q]->delta_t.empty() ? 0.0 : batch[q]->delta_t[r];
        double acc = 0.0;
        for (std::size_t k = 0; k < cfg_.time.d_t; ++k) {
          const double w = std::pow(cfg_.time.alpha, -static_cast<double>(k) / cfg_.time.beta);
          acc += src[t0 + k] * (-w * std::sin(dt * w));
        }
        gdt[r] = acc;
      }
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// Serialization

std::vector<Tensor> SlimModel::to_tensors() const {
  std::vector<Tensor> out;
  for (const auto& s : store_.segments()) {
    const double* v = store_.at(s.offset);
    out.push_back(Tensor{s.name, s.rows, s.cols, std::vector<double>(v, v + s.size())});
  }
  return out;
}

void SlimModel::load_tensors(const std::vector<Tensor>& tensors) {
  for (const auto& s : store_.segments()) {
    auto it = std::find_if(tensors.begin(), tensors.end(),
                           [&](const Tensor& t) { return t.name == s.name; });
    if (it == tensors.end()) throw FormatError("checkpoint lacks parameter " + s.name);
    if (it->rows != s.rows || it->cols != s.cols) {
      throw FormatError("checkpoint parameter " + s.name + " has incompatible shape");
    }
    std::copy(it->data.begin(), it->data.end(), store_.at(s.offset));
  }
  store_.touch();
}

// ---------------------------------------------------------------------------
// Training

ValidationMetric task_validation_metric(TaskKind task, std::span<const PropertyQuery> val) {
  return [task, val](const Matrix& probs) {
    try {
      return evaluate(task, probs, val).value;
    } catch (const UndefinedMetricError& e) {
      warn(std::string("validation metric undefined (") + e.what() +
           "); using negative cross entropy");
      double loss = 0.0;
      for (std::size_t i = 0; i < val.size(); ++i) {
        std::vector<double> logp(probs.cols());
        for (std::size_t c = 0; c < probs.cols(); ++c) {
          logp[c] = std::log(std::max(probs(i, c), 1e-300));
        }
        loss += cross_entropy(logp, val[i].target());
      }
      return -loss / static_cast<double>(std::max<std::size_t>(1, val.size()));
    }
  };
}

std::vector<QueryContext> collect_contexts(const SlimModel& model, StreamCursor& cursor,
                                           std::span<const PropertyQuery> queries) {
  std::vector<QueryContext> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    cursor.advance_to(q.stream_pos);
    out.push_back(model.make_context(cursor.state(), q.node, q.time));
  }
  return out;
}

Matrix predict_all(const SlimModel& model, std::span<const QueryContext> contexts,
                   std::size_t batch) {
  Matrix out(contexts.size(), model.config().label_dim);
  std::vector<const QueryContext*> ptrs;
  for (std::size_t b = 0; b < contexts.size(); b += batch) {
    const std::size_t e = std::min(contexts.size(), b + batch);
    ptrs.clear();
    for (std::size_t i = b; i < e; ++i) ptrs.push_back(&contexts[i]);
    Matrix pr = model.predict(ptrs);
    std::copy(pr.storage().begin(), pr.storage().end(), out.row(b));
  }
  return out;
}

TrainHistory train_slim(SlimModel& model, std::span<const QueryContext> train,
                        std::span<const Target> targets, std::span<const QueryContext> val,
                        const ValidationMetric& metric, const TrainConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw ConfigError("no training queries");
  if (targets.size() != train.size()) throw ShapeError("one target per training query expected");
  ParamStore& store = model.params();
  const auto mask = store.decay_mask();
  AdamState adam;
  std::vector<double> grads(store.size());
  std::vector<double> best(store.values().begin(), store.values().end());
  TrainHistory hist;
  hist.best_metric = -std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::vector<const QueryContext*> ptrs;
  std::vector<Target> tg;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(cfg.rng_seed, {0x53485546u, epoch}));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    std::mt19937_64 drop_rng(derive_seed(cfg.rng_seed, {0x44524f50u, epoch}));
    const Dropout dropout{model.config().dropout, &drop_rng};
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      ptrs.clear();
      tg.clear();
      for (std::size_t i = b; i < e; ++i) {
        ptrs.push_back(&train[order[i]]);
        tg.push_back(targets[order[i]]);
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      const double loss = model.loss_and_grad(ptrs, tg, grads, dropout);
      if (!std::isfinite(loss)) {
        throw DivergenceError("non-finite training loss in epoch " + std::to_string(epoch));
      }
      try {
        adam_step(store.values(), grads, mask, adam, cfg.adam);
      } catch (const DivergenceError& err) {
        throw DivergenceError("epoch " + std::to_string(epoch) + ": " + err.what());
      }
      store.touch();
      loss_sum += loss * static_cast<double>(e - b);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.val_metric = val.empty() ? -rec.train_loss
                                 : metric(predict_all(model, val, cfg.eval_batch));
    hist.epochs.push_back(rec);
    if (rec.val_metric > hist.best_metric) {
      hist.best_metric = rec.val_metric;
      hist.best_epoch = epoch;
      std::copy(store.values().begin(), store.values().end(), best.begin());
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  store.assign(best);
  return hist;
}

TrainHistory train(SlimModel& model, StreamState& state, std::span<const TemporalEdge> edges,
                   const PropertySet& train_props, const PropertySet& val_props,
                   const TrainConfig& cfg) {
  StreamCursor cursor(state, edges);
  const auto train_ctx = collect_contexts(model, cursor, train_props.queries);
  const auto val_ctx = collect_contexts(model, cursor, val_props.queries);
  std::vector<Target> targets;
  targets.reserve(train_props.size());
  for (const auto& q : train_props.queries) targets.push_back(q.target());
  return train_slim(model, train_ctx, targets, val_ctx,
                    task_validation_metric(val_props.task, val_props.queries), cfg);
}

}  // namespace splash
