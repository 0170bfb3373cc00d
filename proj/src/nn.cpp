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

#include "splash/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

namespace splash {

// ---------------------------------------------------------------------------
// ParamStore

std::size_t ParamStore::add(std::string name, std::size_t rows, std::size_t cols, bool decay) {
  for (const auto& s : segments_) {
    if (s.name == name) throw ContractError("duplicate parameter segment " + name);
  }
  ParamSegment seg{std::move(name), values_.size(), rows, cols, decay};
  values_.resize(values_.size() + rows * cols, 0.0);
  segments_.push_back(seg);
  ++version_;
  return seg.offset;
}

const ParamSegment& ParamStore::segment(const std::string& name) const {
  for (const auto& s : segments_) {
    if (s.name == name) return s;
  }
  throw ContractError("no parameter segment " + name);
}

std::vector<double> ParamStore::decay_mask() const {
  std::vector<double> mask(values_.size(), 0.0);
  for (const auto& s : segments_) {
    if (s.decay) std::fill_n(mask.begin() + static_cast<long>(s.offset), s.size(), 1.0);
  }
  return mask;
}

void ParamStore::assign(std::span<const double> v) {
  if (v.size() != values_.size()) throw ShapeError("parameter vector has wrong length");
  std::copy(v.begin(), v.end(), values_.begin());
  ++version_;
}

// ---------------------------------------------------------------------------
// MLP

Mlp::Mlp(ParamStore& store, const std::string& name, std::vector<std::size_t> dims)
    : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ConfigError("an MLP needs at least one layer");
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    if (dims_[l] == 0 || dims_[l + 1] == 0) throw ConfigError("MLP layer width must be positive");
    w_off_.push_back(store.add(name + ".w" + std::to_string(l), dims_[l + 1], dims_[l], true));
    b_off_.push_back(store.add(name + ".b" + std::to_string(l), 1, dims_[l + 1], false));
  }
}

void Mlp::init(ParamStore& store, std::mt19937_64& rng) const {
  for (std::size_t l = 0; l < layers(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(dims_[l] + dims_[l + 1]));
    std::uniform_real_distribution<double> u(-bound, bound);
    double* w = store.at(w_off_[l]);
    for (std::size_t i = 0; i < dims_[l] * dims_[l + 1]; ++i) w[i] = u(rng);
    std::fill_n(store.at(b_off_[l]), dims_[l + 1], 0.0);
  }
  store.touch();
}

void mlp_forward(const Mlp& mlp, const ParamStore& store, const Matrix& in, Matrix& out,
                 MlpCache& cache, const Dropout& dropout) {
  if (in.cols() != mlp.in_dim()) {
    throw ShapeError("MLP input has " + std::to_string(in.cols()) + " columns, expected " +
                     std::to_string(mlp.in_dim()));
  }
  const std::size_t m = in.rows();
  const std::size_t L = mlp.layers();
  cache.owner = &mlp;
  cache.version = store.version();
  cache.acts.resize(L);
  cache.acts[0] = in;
  const bool drop = dropout.active();
  cache.hidden_scale = drop ? 1.0 / (1.0 - dropout.rate) : 1.0;
  std::bernoulli_distribution keep(drop ? 1.0 - dropout.rate : 1.0);

  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t din = mlp.dims()[l];
    const std::size_t dout = mlp.dims()[l + 1];
    Matrix& y = (l + 1 < L) ? cache.acts[l + 1] : out;
    y.resize(m, dout);
    kernels::gemm_nt(cache.acts[l].data(), store.at(mlp.weight_offset(l)), y.data(), m, din, dout,
                     false);
    const double* b = store.at(mlp.bias_offset(l));
    double* yd = y.data();
    for (std::size_t i = 0; i < m; ++i) {
      double* row = yd + i * dout;
      for (std::size_t j = 0; j < dout; ++j) row[j] += b[j];
    }
    if (l + 1 < L) {
      // One draw per unit regardless of its sign, so the mask sequence does
      // not depend on the parameters.
      for (std::size_t i = 0; i < m * dout; ++i) {
        const bool kept = !drop || keep(*dropout.rng);
        yd[i] = (yd[i] > 0.0 && kept) ? yd[i] * cache.hidden_scale : 0.0;
      }
    }
  }
}

void mlp_backward(const Mlp& mlp, const ParamStore& store, const MlpCache& cache,
                  const Matrix& grad_out, std::span<double> grads, Matrix* grad_in) {
  if (cache.owner != &mlp) throw ContractError("MLP cache belongs to another network");
  if (cache.version != store.version()) {
    throw ContractError("stale MLP cache: parameters changed since the forward pass");
  }
  if (grads.size() != store.size()) throw ShapeError("gradient buffer has wrong length");
  const std::size_t L = mlp.layers();
  const std::size_t m = cache.acts[0].rows();
  if (grad_out.rows() != m || grad_out.cols() != mlp.out_dim()) {
    throw ShapeError("MLP output gradient has wrong shape");
  }
  Matrix dy = grad_out;
  Matrix dx;
  for (std::size_t l = L; l-- > 0;) {
    const std::size_t din = mlp.dims()[l];
    const std::size_t dout = mlp.dims()[l + 1];
    const Matrix& x = cache.acts[l];
    kernels::gemm_tn_acc(dy.data(), x.data(), grads.data() + mlp.weight_offset(l), m, dout, din);
    double* gb = grads.data() + mlp.bias_offset(l);
    for (std::size_t i = 0; i < m; ++i) {
      const double* row = dy.row(i);
      for (std::size_t j = 0; j < dout; ++j) gb[j] += row[j];
    }
    if (l == 0 && grad_in == nullptr) break;
    dx.resize(m, din);
    kernels::gemm_nn(dy.data(), store.at(mlp.weight_offset(l)), dx.data(), m, dout, din, false);
    if (l > 0) {
      // Rectifier and dropout: x holds post-dropout activations, so x > 0
      // exactly where the unit was both active and kept.
      double* d = dx.data();
      const double* a = x.data();
      for (std::size_t i = 0; i < m * din; ++i) d[i] = a[i] > 0.0 ? d[i] * cache.hidden_scale : 0.0;
    }
    std::swap(dy, dx);
  }
  if (grad_in != nullptr) *grad_in = std::move(dy);
}

// ---------------------------------------------------------------------------
// LayerNorm

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::size_t dim) : dim_(dim) {
  if (dim == 0) throw ConfigError("layer norm dimension must be positive");
  gain_off_ = store.add(name + ".gain", 1, dim, false);
  bias_off_ = store.add(name + ".bias", 1, dim, false);
}

void LayerNorm::init(ParamStore& store) const {
  std::fill_n(store.at(gain_off_), dim_, 1.0);
  std::fill_n(store.at(bias_off_), dim_, 0.0);
  store.touch();
}

void layer_norm_forward(const LayerNorm& ln, const ParamStore& store, const Matrix& x, Matrix& y,
                        LayerNormCache& cache) {
  const std::size_t n = ln.dim();
  if (x.cols() != n) throw ShapeError("layer norm input has wrong width");
  const std::size_t m = x.rows();
  y.resize(m, n);
  cache.xhat.resize(m, n);
  cache.inv_std.assign(m, 0.0);
  const double* g = store.at(ln.gain_offset());
  const double* b = store.at(ln.bias_offset());
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x.row(i);
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += xi[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xi[j] - mean) * (xi[j] - mean);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + LayerNorm::kEps);
    cache.inv_std[i] = inv;
    double* h = cache.xhat.row(i);
    double* yi = y.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      h[j] = (xi[j] - mean) * inv;
      yi[j] = g[j] * h[j] + b[j];
    }
  }
}

void layer_norm_backward(const LayerNorm& ln, const ParamStore& store,
                         const LayerNormCache& cache, const Matrix& grad_y,
                         std::span<double> grads, Matrix* grad_x) {
  const std::size_t n = ln.dim();
  const std::size_t m = cache.xhat.rows();
  if (grad_y.rows() != m || grad_y.cols() != n) throw ShapeError("layer norm gradient shape");
  const double* g = store.at(ln.gain_offset());
  double* gg = grads.data() + ln.gain_offset();
  double* gb = grads.data() + ln.bias_offset();
  if (grad_x != nullptr) grad_x->resize(m, n);
  std::vector<double> dh(n);
  const double nn = static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* dy = grad_y.row(i);
    const double* h = cache.xhat.row(i);
    double sum_dh = 0.0, sum_dh_h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      gg[j] += dy[j] * h[j];
      gb[j] += dy[j];
      dh[j] = dy[j] * g[j];
      sum_dh += dh[j];
      sum_dh_h += dh[j] * h[j];
    }
    if (grad_x == nullptr) continue;
    double* dx = grad_x->row(i);
    const double inv = cache.inv_std[i];
    for (std::size_t j = 0; j < n; ++j) {
      dx[j] = inv / nn * (nn * dh[j] - sum_dh - h[j] * sum_dh_h);
    }
  }
}

// ---------------------------------------------------------------------------
// Adam

void adam_step(std::span<double> params, std::span<const double> grads,
               std::span<const double> decay_mask, AdamState& state, const AdamConfig& cfg) {
  const std::size_t n = params.size();
  if (grads.size() != n || (!decay_mask.empty() && decay_mask.size() != n)) {
    throw ShapeError("Adam: parameter, gradient and mask lengths differ");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(grads[i])) {
      throw DivergenceError("non-finite gradient at parameter " + std::to_string(i));
    }
  }
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
    state.step = 0;
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    const double decay = decay_mask.empty() ? 1.0 : decay_mask[i];
    const double g = grads[i] + cfg.weight_decay * decay * params[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = state.m[i] / c1;
    const double vhat = state.v[i] / c2;
    params[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps);
  }
}

// ---------------------------------------------------------------------------
// Loss

void softmax(std::span<const double> logits, std::span<double> out) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out[c] = std::exp(logits[c] - mx);
    z += out[c];
  }
  for (std::size_t c = 0; c < logits.size(); ++c) out[c] /= z;
}

double cross_entropy(std::span<const double> logits, const Target& target,
                     std::span<double> grad) {
  const std::size_t C = logits.size();
  if (C == 0) throw ShapeError("cross entropy over zero classes");
  if (target.index < 0 && target.probs.size() != C) {
    throw ShapeError("soft target length differs from logit count");
  }
  if (target.index >= static_cast<int>(C)) throw ShapeError("target class out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  if (target.index >= 0 && !grad.empty()) {
    // Hard target: one exponential per class; grad may alias logits.
    const double picked = logits[static_cast<std::size_t>(target.index)];
    double z = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      grad[c] = std::exp(logits[c] - mx);
      z += grad[c];
    }
    const double inv_z = 1.0 / z;
    for (std::size_t c = 0; c < C; ++c) grad[c] *= inv_z;
    grad[static_cast<std::size_t>(target.index)] -= 1.0;
    return (mx + std::log(z)) - picked;
  }
  double z = 0.0;
  for (double l : logits) z += std::exp(l - mx);
  const double lse = mx + std::log(z);
  double loss = 0.0;
  double mass = 1.0;
  if (target.index >= 0) {
    loss = lse - logits[static_cast<std::size_t>(target.index)];
  } else {
    mass = 0.0;
    for (std::size_t c = 0; c < C; ++c) {
      if (target.probs[c] != 0.0) loss -= target.probs[c] * (logits[c] - lse);
      mass += target.probs[c];
    }
  }
  if (!grad.empty()) {
    for (std::size_t c = 0; c < C; ++c) {
      const double p = std::exp(logits[c] - lse);
      const double t = target.index >= 0 ? (static_cast<int>(c) == target.index ? 1.0 : 0.0)
                                         : target.probs[c];
      grad[c] = p * mass - t;
    }
  }
  return loss;
}

double grad_check(const std::function<double(std::span<const double>)>& f,
                  std::span<const double> x, std::span<const double> analytic, double h,
                  std::span<const std::size_t> coords) {
  if (analytic.size() != x.size()) throw ShapeError("analytic gradient length differs");
  std::vector<double> probe(x.begin(), x.end());
  double worst = 0.0;
  auto check = [&](std::size_t i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double fp = f(probe);
    probe[i] = saved - h;
    const double fm = f(probe);
    probe[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1e-8, std::abs(analytic[i]) + std::abs(numeric));
    worst = std::max(worst, err);
  };
  if (coords.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) check(i);
  } else {
    for (std::size_t i : coords) check(i);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Tensor container

namespace {

constexpr char kMagic[8] = {'S', 'P', 'L', 'T', 'E', 'N', 'S', '1'};
constexpr std::uint32_t kTensorVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw FormatError("truncated tensor container");
  }
  return v;
}

}  // namespace

void write_tensors(std::ostream& out, const std::vector<Tensor>& tensors) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kTensorVersion);
  put<std::uint64_t>(out, tensors.size());
  for (const auto& t : tensors) {
    if (t.data.size() != t.rows * t.cols) throw ShapeError("tensor " + t.name + " size mismatch");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    put<std::uint64_t>(out, t.rows);
    put<std::uint64_t>(out, t.cols);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!out) throw Error("failed writing tensor container");
}

std::vector<Tensor> read_tensors(std::istream& in) {
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a tensor container");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kTensorVersion) {
    throw FormatError("unsupported tensor container version " + std::to_string(version));
  }
  const auto count = get<std::uint64_t>(in);
  std::vector<Tensor> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    Tensor t;
    const auto len = get<std::uint32_t>(in);
    t.name.resize(len);
    if (!in.read(t.name.data(), len)) throw FormatError("truncated tensor name");
    t.rows = get<std::uint64_t>(in);
    t.cols = get<std::uint64_t>(in);
    t.data.resize(t.rows * t.cols);
    if (!in.read(reinterpret_cast<char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(double)))) {
      throw FormatError("truncated data for tensor " + t.name);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace splash
