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

#include "splash/common.hpp"

#include <omp.h>

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace splash {

std::string_view process_name(Process p) {
  switch (p) {
    case Process::R: return "R";
    case Process::P: return "P";
    case Process::S: return "S";
    case Process::Joint: return "Joint";
    case Process::ZF: return "ZF";
    case Process::RF: return "RF";
  }
  return "?";
}

Process parse_process(std::string_view name) {
  if (name == "R") return Process::R;
  if (name == "P") return Process::P;
  if (name == "S") return Process::S;
  if (name == "Joint") return Process::Joint;
  if (name == "ZF") return Process::ZF;
  if (name == "RF") return Process::RF;
  throw ConfigError("unknown feature process '" + std::string(name) + "'");
}

std::vector<Process> base_processes(Process p) {
  if (p == Process::Joint) return {Process::R, Process::P, Process::S};
  return {p};
}

std::size_t feature_dim(Process p, std::size_t d_v) {
  return p == Process::Joint ? 3 * d_v : d_v;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = splitmix64(base);
  for (auto t : tags) s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

namespace {

int initial_workers() {
  if (const char* env = std::getenv("SPLASH_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

std::atomic<int>& workers() {
  static std::atomic<int> n{initial_workers()};
  return n;
}

std::atomic<std::size_t> g_warnings{0};
std::atomic<bool> g_quiet{false};

}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int n) { workers().store(n > 0 ? n : 1); }

std::optional<std::uint64_t> seed_override() {
  if (const char* env = std::getenv("SPLASH_SEED")) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (end != env) return v;
  }
  return std::nullopt;
}

void warn(const std::string& message) {
  ++g_warnings;
  if (g_quiet.load()) return;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "warning: " << message << '\n';
}

std::size_t warning_count() { return g_warnings.load(); }

void set_warnings_quiet(bool quiet) { g_quiet.store(quiet); }

}  // namespace splash
