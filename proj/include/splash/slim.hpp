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

// SLIM: messages from the k most recent incident edges through an MLP, mean
// aggregation combined with the node's own feature through a second MLP, a
// layer-normalised skip connection over the message sum, and an MLP decoder.
//
// A query is first turned into a QueryContext (own feature plus one raw
// message row per recent edge) by reading the stream state; the network then
// runs on batches of contexts. Batching never changes a query's result.

#ifndef SPLASH_SLIM_HPP_
#define SPLASH_SLIM_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "splash/ctdg.hpp"
#include "splash/nn.hpp"
#include "splash/task.hpp"

namespace splash {

struct TimeEncodingConfig {
  std::size_t d_t = 100;
  double alpha = 10.0;
  double beta = 10.0;

  void validate() const;
};

// Component n is cos(dt * alpha^(-n / beta)).
std::vector<double> time_encode(double delta_t, const TimeEncodingConfig& cfg);
void time_encode_into(double delta_t, const TimeEncodingConfig& cfg, std::span<double> out);
// The per-component frequencies alpha^(-n/beta), for repeated encodings.
std::vector<double> time_frequencies(const TimeEncodingConfig& cfg);
void time_encode_into(double delta_t, std::span<const double> freqs, std::span<double> out);

struct SlimConfig {
  Process process = Process::S;
  std::size_t d_v = 100;
  std::size_t d_e = 0;
  std::size_t d_h = 100;
  std::size_t label_dim = 2;
  std::size_t message_layers = 2;
  std::size_t aggregate_layers = 2;
  std::size_t decoder_layers = 2;
  double skip_weight = 1.0;  // lambda_s
  double dropout = 0.2;
  TimeEncodingConfig time;
  std::uint64_t rng_seed = 0;

  void validate() const;
  std::size_t feature_dim() const { return splash::feature_dim(process, d_v); }
  std::size_t raw_dim() const { return feature_dim() + d_e + time.d_t; }
};

struct QueryContext {
  std::vector<double> own;      // x_i(t)
  Matrix raw;                   // one raw message per recent edge
  std::vector<double> weights;  // edge weights
  std::vector<double> delta_t;  // t - t_l per row
};

// Gradients of the batch loss with respect to the query inputs.
struct InputGrads {
  std::vector<std::vector<double>> own;
  std::vector<Matrix> raw;
  std::vector<std::vector<double>> delta_t;  // through the time encoding
};

struct InferenceCounters {
  std::uint64_t queries = 0;
  std::uint64_t message_rows = 0;
};

class SlimModel {
 public:
  explicit SlimModel(SlimConfig cfg);

  const SlimConfig& config() const { return cfg_; }
  void set_skip_weight(double lambda) { cfg_.skip_weight = lambda; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const LayerNorm& ln2() const { return ln2_; }

  // [x_j(t_l) | edge feature | phi(t - t_l)]; the edge block is absent when
  // d_e = 0.
  void build_raw_message(const StreamState& state, const NeighborEntry& e, double t,
                         std::span<double> out) const;
  QueryContext make_context(const StreamState& state, NodeId node, double t) const;

  // Eval-mode forward passes.
  Matrix representations(std::span<const QueryContext* const> batch) const;
  Matrix logits(std::span<const QueryContext* const> batch) const;
  Matrix predict(std::span<const QueryContext* const> batch) const;  // softmax rows
  std::vector<double> compute_representation(const StreamState& state, NodeId node,
                                             double t) const;
  std::vector<double> predict(const StreamState& state, NodeId node, double t) const;

  // Mean cross entropy over the batch. Accumulates parameter gradients into
  // `grads` when non-empty and input gradients into `input_grads` when given.
  double loss_and_grad(std::span<const QueryContext* const> batch,
                       std::span<const Target> targets, std::span<double> grads,
                       const Dropout& dropout, InputGrads* input_grads = nullptr) const;

  std::vector<Tensor> to_tensors() const;
  void load_tensors(const std::vector<Tensor>& tensors);

  InferenceCounters& counters() const { return counters_; }

 private:
  struct Pass;
  void forward(std::span<const QueryContext* const> batch, Pass& pass,
               const Dropout& dropout) const;

  SlimConfig cfg_;
  ParamStore store_;
  Mlp mlp1_, mlp2_, decoder_;
  LayerNorm ln1_, ln2_;
  std::vector<double> time_freq_;
  mutable InferenceCounters counters_;
};

struct TrainConfig {
  std::size_t batch_size = 600;
  std::size_t max_epochs = 50;
  std::size_t patience = 10;
  std::size_t eval_batch = 600;
  AdamConfig adam;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
};

// Validation score, larger is better, from softmax rows of the validation
// contexts.
using ValidationMetric = std::function<double(const Matrix& probs)>;

// The task metric over validation queries; falls back to the negative mean
// cross entropy (with a warning) when the metric is undefined on the set.
ValidationMetric task_validation_metric(TaskKind task, std::span<const PropertyQuery> val);

// Replays the cursor's stream up to each query and captures its context.
std::vector<QueryContext> collect_contexts(const SlimModel& model, StreamCursor& cursor,
                                           std::span<const PropertyQuery> queries);

// Eval-mode predictions in batches of `batch` contexts.
Matrix predict_all(const SlimModel& model, std::span<const QueryContext> contexts,
                   std::size_t batch);

// Shuffled mini-batch Adam over the training contexts, validation after every
// epoch, best parameters restored at the end. Throws DivergenceError naming
// the epoch when the loss stops being finite.
TrainHistory train_slim(SlimModel& model, std::span<const QueryContext> train,
                        std::span<const Target> targets, std::span<const QueryContext> val,
                        const ValidationMetric& metric, const TrainConfig& cfg);

// Convenience wrapper: replays `edges` through `state` to build contexts for
// the two property sets and trains with the task metric for validation.
TrainHistory train(SlimModel& model, StreamState& state, std::span<const TemporalEdge> edges,
                   const PropertySet& train_props, const PropertySet& val_props,
                   const TrainConfig& cfg);

}  // namespace splash

#endif  // SPLASH_SLIM_HPP_
