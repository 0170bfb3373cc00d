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

// Serial reference kernels against the blocked/OpenMP ones, and serial
// against parallel walk generation.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "splash/kernels.hpp"
#include "splash/node2vec.hpp"

namespace {

using namespace splash;

std::vector<double> random_buffer(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <bool kReference>
void BM_GemmNN(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_buffer(m * k, 1), b = random_buffer(k * n, 2);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    if constexpr (kReference) {
      reference::gemm_nn(a.data(), b.data(), c.data(), m, k, n, false);
    } else {
      kernels::gemm_nn(a.data(), b.data(), c.data(), m, k, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * k * n));
}

template <bool kReference>
void BM_GemmNT(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_buffer(m * k, 3), b = random_buffer(n * k, 4);
  std::vector<double> c(m * n);
  for (auto _ : state) {
    if constexpr (kReference) {
      reference::gemm_nt(a.data(), b.data(), c.data(), m, k, n, false);
    } else {
      kernels::gemm_nt(a.data(), b.data(), c.data(), m, k, n, false);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * k * n));
}

template <bool kReference>
void BM_GemmTN(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_buffer(m * k, 8), b = random_buffer(m * n, 9);
  std::vector<double> c(k * n);
  for (auto _ : state) {
    std::fill(c.begin(), c.end(), 0.0);
    if constexpr (kReference) {
      reference::gemm_tn_acc(a.data(), b.data(), c.data(), m, k, n);
    } else {
      kernels::gemm_tn_acc(a.data(), b.data(), c.data(), m, k, n);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(m * k * n));
}

template <bool kReference>
void BM_Dot(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_buffer(n, 5), b = random_buffer(n, 6);
  for (auto _ : state) {
    double r = kReference ? reference::dot(a.data(), b.data(), n)
                          : kernels::dot(a.data(), b.data(), n);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

StaticGraph ring_graph(std::size_t n) {
  StaticGraph g;
  std::mt19937_64 rng(7);
  for (std::size_t i = 0; i < n; ++i) {
    const auto u = static_cast<NodeId>(i);
    g.add(u, static_cast<NodeId>((i + 1) % n), 1.0);
    g.add(u, static_cast<NodeId>(rng() % n), 0.5);
  }
  return g;
}

template <bool kSerial>
void BM_Walks(benchmark::State& state) {
  const StaticGraph g = ring_graph(static_cast<std::size_t>(state.range(0)));
  WalkConfig cfg;
  cfg.walks_per_node = 10;
  for (auto _ : state) {
    auto w = kSerial ? generate_walks_serial(g, cfg) : generate_walks(g, cfg);
    benchmark::DoNotOptimize(w.data());
  }
}

// Shapes seen in inference (k message rows by raw width into d_h) and in
// the selection fits (queries by encoding width into classes).
void GemmArgs(benchmark::internal::Benchmark* b) {
  b->Args({100, 200, 100})->Args({600, 100, 100})->Args({6000, 116, 100})->Args({4000, 200, 10})->Args({500, 200, 10});
}

BENCHMARK(BM_GemmNN<true>)->Name("gemm_nn/reference")->Apply(GemmArgs);
BENCHMARK(BM_GemmNN<false>)->Name("gemm_nn/kernel")->Apply(GemmArgs);
BENCHMARK(BM_GemmNT<true>)->Name("gemm_nt/reference")->Apply(GemmArgs);
BENCHMARK(BM_GemmNT<false>)->Name("gemm_nt/kernel")->Apply(GemmArgs);
BENCHMARK(BM_GemmTN<true>)->Name("gemm_tn_acc/reference")->Args({600, 100, 116})->Args({4000, 10, 200});
BENCHMARK(BM_GemmTN<false>)->Name("gemm_tn_acc/kernel")->Args({600, 100, 116})->Args({4000, 10, 200});
BENCHMARK(BM_Dot<true>)->Name("dot/reference")->Arg(100)->Arg(10000);
BENCHMARK(BM_Dot<false>)->Name("dot/kernel")->Arg(100)->Arg(10000);
BENCHMARK(BM_Walks<true>)->Name("walks/serial")->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Walks<false>)->Name("walks/parallel")->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
