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

// Dense network primitives with hand-written reverse mode. Parameters of a
// model live in one flat ParamStore; layers refer to it by offset, gradients
// are flat vectors of the same length, and Adam runs over the flat arrays.
// All batched passes are row independent: a row's forward result does not
// depend on the other rows in the batch.

#ifndef SPLASH_NN_HPP_
#define SPLASH_NN_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "splash/common.hpp"
#include "splash/kernels.hpp"

namespace splash {

struct ParamSegment {
  std::string name;
  std::size_t offset = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool decay = false;  // weight decay applies (weight matrices only)

  std::size_t size() const { return rows * cols; }
};

class ParamStore {
 public:
  // Reserves a rows x cols block; returns its offset.
  std::size_t add(std::string name, std::size_t rows, std::size_t cols, bool decay);

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* at(std::size_t offset) { return values_.data() + offset; }
  const double* at(std::size_t offset) const { return values_.data() + offset; }

  const std::vector<ParamSegment>& segments() const { return segments_; }
  const ParamSegment& segment(const std::string& name) const;
  std::vector<double> decay_mask() const;

  // Incremented by every mutation made through the store's update paths;
  // caches remember the version they were produced under.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  void assign(std::span<const double> v);

 private:
  std::vector<double> values_;
  std::vector<ParamSegment> segments_;
  std::uint64_t version_ = 0;
};

// ---------------------------------------------------------------------------
// MLP: rectifier on hidden layers, identity on the output layer. Weights are
// stored (out x in) row-major so a forward pass is X * W^T + b.
// ---------------------------------------------------------------------------

class Mlp {
 public:
  Mlp() = default;
  // dims = {d_in, hidden..., d_out}; registers segments "<name>.w<l>" and
  // "<name>.b<l>".
  Mlp(ParamStore& store, const std::string& name, std::vector<std::size_t> dims);

  std::size_t layers() const { return dims_.size() - 1; }
  std::size_t in_dim() const { return dims_.front(); }
  std::size_t out_dim() const { return dims_.back(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t weight_offset(std::size_t l) const { return w_off_[l]; }
  std::size_t bias_offset(std::size_t l) const { return b_off_[l]; }

  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  void init(ParamStore& store, std::mt19937_64& rng) const;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> w_off_, b_off_;
};

// Dropout on hidden activations. rng == nullptr or rate == 0 means eval mode.
struct Dropout {
  double rate = 0.0;
  std::mt19937_64* rng = nullptr;

  bool active() const { return rng != nullptr && rate > 0.0; }
};

struct MlpCache {
  std::vector<Matrix> acts;  // acts[l] is the input of layer l
  double hidden_scale = 1.0;
  const Mlp* owner = nullptr;
  std::uint64_t version = 0;
};

void mlp_forward(const Mlp& mlp, const ParamStore& store, const Matrix& in, Matrix& out,
                 MlpCache& cache, const Dropout& dropout = {});

// Accumulates parameter gradients into `grads` (same layout as the store) and
// writes the input gradient when grad_in is non-null. Throws ContractError if
// the cache came from another network or the parameters changed since.
void mlp_backward(const Mlp& mlp, const ParamStore& store, const MlpCache& cache,
                  const Matrix& grad_out, std::span<double> grads, Matrix* grad_in);

// ---------------------------------------------------------------------------
// Layer normalization over each row.
// ---------------------------------------------------------------------------

class LayerNorm {
 public:
  static constexpr double kEps = 1e-5;

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t gain_offset() const { return gain_off_; }
  std::size_t bias_offset() const { return bias_off_; }
  void init(ParamStore& store) const;  // gain 1, bias 0

 private:
  std::size_t dim_ = 0;
  std::size_t gain_off_ = 0, bias_off_ = 0;
};

struct LayerNormCache {
  Matrix xhat;
  std::vector<double> inv_std;
};

void layer_norm_forward(const LayerNorm& ln, const ParamStore& store, const Matrix& x, Matrix& y,
                        LayerNormCache& cache);
void layer_norm_backward(const LayerNorm& ln, const ParamStore& store,
                         const LayerNormCache& cache, const Matrix& grad_y,
                         std::span<double> grads, Matrix* grad_x);

// ---------------------------------------------------------------------------
// Optimizer and loss.
// ---------------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // L2 term added to the gradient
};

struct AdamState {
  std::vector<double> m, v;
  std::uint64_t step = 0;
};

// One bias-corrected Adam step. `decay_mask` (empty = all ones) selects the
// entries that receive weight decay. Throws DivergenceError on a non-finite
// gradient, leaving params and state untouched.
void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<const double> decay_mask, AdamState& state, const AdamConfig& cfg);

struct Target {
  int index = -1;                // class index, or
  std::span<const double> probs;  // probability vector when index < 0
};

void softmax(std::span<const double> logits, std::span<double> out);

// -sum_c target_c log softmax(logits)_c with max-shift; writes the logit
// gradient softmax * sum(target) - target when `grad` is non-empty.
double cross_entropy(std::span<const double> logits, const Target& target,
                     std::span<double> grad = {});

// Max over `coords` (all when empty) of |a - n| / max(1e-8, |a| + |n|) where n
// is the central difference of f at x with step h.
double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic, double h = 1e-5,
                  std::span<const std::size_t> coords = {});

// ---------------------------------------------------------------------------
// Checkpoint container: a version-tagged list of named row-major arrays.
// ---------------------------------------------------------------------------

struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
};

void write_tensors(std::ostream& out, const std::vector<Tensor>& tensors);
std::vector<Tensor> read_tensors(std::istream& in);

}  // namespace splash

#endif  // SPLASH_NN_HPP_
