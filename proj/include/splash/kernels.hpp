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

// Dense kernels. The `kernels::` functions are the production paths: row
// parallel under OpenMP, with a fixed per-element summation order so a row's
// result does not depend on how many rows share the call or on the worker
// count. The `reference::` functions are plain triple loops kept as oracles
// for the tests and as the serial side of the benchmark.

#ifndef SPLASH_KERNELS_HPP_
#define SPLASH_KERNELS_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace splash {

// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  std::span<double> row_span(std::size_t r) { return {row(r), cols_}; }
  std::span<const double> row_span(std::size_t r) const { return {row(r), cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  // Keeps capacity; contents are zeroed.
  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(rows * cols, 0.0);
  }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace kernels {

// Blocked dot product with eight independent accumulators combined in a
// fixed order.
double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// C (m x n) = A (m x k) * B (k x n) [+ C if accumulate]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);

// C (m x n) = A (m x k) * B^T, with B stored (n x k) [+ C if accumulate]
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);

// C (k x n) += A^T * B with A (m x k) and B (m x n); rows of A/B are summed in
// ascending order.
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n);

}  // namespace kernels

namespace reference {

double dot(const double* a, const double* b, std::size_t n);
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate);
void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n);

}  // namespace reference

}  // namespace splash

#endif  // SPLASH_KERNELS_HPP_
