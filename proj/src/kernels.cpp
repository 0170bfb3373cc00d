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

#include "splash/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstring>

#include "splash/common.hpp"

namespace splash {

namespace {

// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1u << 15;

int threads_for(std::size_t work) {
  return work >= kParallelWork ? worker_count() : 1;
}

// Eight lanes, matching the eight accumulators of dot(). Lane-wise vector
// arithmetic rounds exactly like the scalar loop.
typedef double Lanes __attribute__((vector_size(64)));

inline Lanes load_lanes(const double* p) {
  Lanes v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

// R dots against consecutive rows of b (row stride k), each summed in
// exactly the order dot() uses. Several rows keep independent accumulator
// chains in flight to hide the add latency.
template <std::size_t R>
void dot_rows(const double* a, const double* b, std::size_t k, double* out) {
  Lanes acc[R];
  for (std::size_t r = 0; r < R; ++r) acc[r] = Lanes{};
  std::size_t i = 0;
  for (; i + 8 <= k; i += 8) {
    const Lanes x = load_lanes(a + i);
    for (std::size_t r = 0; r < R; ++r) acc[r] += x * load_lanes(b + r * k + i);
  }
  for (std::size_t r = 0; r < R; ++r) {
    double tail = 0.0;
    for (std::size_t t = i; t < k; ++t) tail += a[t] * b[r * k + t];
    const Lanes q = acc[r];
    out[r] = ((q[0] + q[4]) + (q[1] + q[5])) + ((q[2] + q[6]) + (q[3] + q[7])) + tail;
  }
}

}  // namespace

namespace kernels {

double dot(const double* a, const double* b, std::size_t n) {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t u = 0; u < 8; ++u) acc[u] += a[i + u] * b[i + u];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) +
         tail;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  const long mm = static_cast<long>(m);
#pragma omp parallel for schedule(static) num_threads(threads_for(m * k * n))
  for (long i = 0; i < mm; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::fill(ci, ci + n, 0.0);
    const double* ai = a + static_cast<std::size_t>(i) * k;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4) {
      const double s0 = ai[p], s1 = ai[p + 1], s2 = ai[p + 2], s3 = ai[p + 3];
      if (s0 == 0.0 && s1 == 0.0 && s2 == 0.0 && s3 == 0.0) continue;
      const double* b0 = b + p * n;
      const double* b1 = b0 + n;
      const double* b2 = b1 + n;
      const double* b3 = b2 + n;
      for (std::size_t j = 0; j < n; ++j) {
        double v = ci[j];
        v += s0 * b0[j];
        v += s1 * b1[j];
        v += s2 * b2[j];
        v += s3 * b3[j];
        ci[j] = v;
      }
    }
    for (; p < k; ++p) {
      const double s = ai[p];
      if (s == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  const long mm = static_cast<long>(m);
#pragma omp parallel for schedule(static) num_threads(threads_for(m * k * n))
  for (long i = 0; i < mm; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    const double* ai = a + static_cast<std::size_t>(i) * k;
    std::size_t j = 0;
    double v[8];
    for (; j + 8 <= n; j += 8) {
      dot_rows<8>(ai, b + j * k, k, v);
      for (std::size_t u = 0; u < 8; ++u) ci[j + u] = accumulate ? ci[j + u] + v[u] : v[u];
    }
    const std::size_t rest = n - j;
    switch (rest) {
      case 7: dot_rows<7>(ai, b + j * k, k, v); break;
      case 6: dot_rows<6>(ai, b + j * k, k, v); break;
      case 5: dot_rows<5>(ai, b + j * k, k, v); break;
      case 4: dot_rows<4>(ai, b + j * k, k, v); break;
      case 3: dot_rows<3>(ai, b + j * k, k, v); break;
      case 2: dot_rows<2>(ai, b + j * k, k, v); break;
      case 1: dot_rows<1>(ai, b + j * k, k, v); break;
      default: break;
    }
    for (std::size_t u = 0; u < rest; ++u) ci[j + u] = accumulate ? ci[j + u] + v[u] : v[u];
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  // Each output row p is owned by one thread and sums input rows in
  // ascending order. Rows of b are walked in blocks so a block stays in cache
  // while every owned p consumes it.
  constexpr std::size_t kBlock = 32;
  const int nt = threads_for(m * k * n);
#pragma omp parallel num_threads(nt)
  {
    const std::size_t t = static_cast<std::size_t>(omp_get_thread_num());
    const std::size_t T = static_cast<std::size_t>(omp_get_num_threads());
    const std::size_t p0 = k * t / T;
    const std::size_t p1 = k * (t + 1) / T;
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock) {
      const std::size_t i1 = std::min(m, i0 + kBlock);
      for (std::size_t p = p0; p < p1; ++p) {
        double* cp = c + p * n;
        std::size_t i = i0;
        for (; i + 4 <= i1; i += 4) {
          const double s0 = a[i * k + p], s1 = a[(i + 1) * k + p];
          const double s2 = a[(i + 2) * k + p], s3 = a[(i + 3) * k + p];
          if (s0 == 0.0 && s1 == 0.0 && s2 == 0.0 && s3 == 0.0) continue;
          const double* b0 = b + i * n;
          const double* b1 = b0 + n;
          const double* b2 = b1 + n;
          const double* b3 = b2 + n;
          for (std::size_t j = 0; j < n; ++j) {
            double v = cp[j];
            v += s0 * b0[j];
            v += s1 * b1[j];
            v += s2 * b2[j];
            v += s3 * b3[j];
            cp[j] = v;
          }
        }
        for (; i < i1; ++i) {
          const double s = a[i * k + p];
          if (s == 0.0) continue;
          const double* bi = b + i * n;
          for (std::size_t j = 0; j < n; ++j) cp[j] += s * bi[j];
        }
      }
    }
  }
}

}  // namespace kernels

namespace reference {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = accumulate ? c[i * n + j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
  }
}

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = accumulate ? c[i * n + j] + s : s;
    }
  }
}

void gemm_tn_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                 std::size_t n) {
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += a[i * k + p] * b[i * n + j];
      c[p * n + j] += s;
    }
  }
}

}  // namespace reference

}  // namespace splash
