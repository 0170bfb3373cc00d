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

// Shared vocabulary: node ids, feature processes, error types, seeding and
// worker-count helpers.

#ifndef SPLASH_COMMON_HPP_
#define SPLASH_COMMON_HPP_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace splash {

using NodeId = std::int64_t;

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library derives from splash::Error so
// callers can catch one type; the subclasses identify the failing contract.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Edge or event timestamps went backwards.
class StreamOrderError : public Error {
 public:
  using Error::Error;
};

// Input whose shape does not match the declared stream layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Malformed text input; carries the 1-based line number.
class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : FormatError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke a precondition that the type system could not express.
class ContractError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Feature augmentation processes.
//   R     random Gaussian features for seen nodes, propagated to unseen ones
//   P     node2vec positional features, propagated to unseen ones
//   S     sinusoidal degree encoding, computed for every node on demand
//   Joint concatenation [R | P | S]
//   ZF    all-zero features (ablation)
//   RF    random features for every node, no propagation (ablation)
// ---------------------------------------------------------------------------

enum class Process { R, P, S, Joint, ZF, RF };

std::string_view process_name(Process p);
Process parse_process(std::string_view name);

// Processes whose per-node value is stored and snapshotted by the stream
// state. Joint expands to its three components.
std::vector<Process> base_processes(Process p);

// Length of the feature vector a process produces for a given d_v.
std::size_t feature_dim(Process p, std::size_t d_v);

// ---------------------------------------------------------------------------
// Seeding.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);

// Derives an independent stream seed from a base seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

// ---------------------------------------------------------------------------
// Parallelism. SPLASH_THREADS caps the OpenMP worker count; every parallel
// region in the library produces results independent of that count.
// ---------------------------------------------------------------------------

int worker_count();
void set_worker_count(int n);

// SPLASH_SEED, when set, overrides configured seeds.
std::optional<std::uint64_t> seed_override();

// Diagnostics for recoverable conditions (dropped splits, skipped queries).
void warn(const std::string& message);
std::size_t warning_count();
void set_warnings_quiet(bool quiet);

}  // namespace splash

#endif  // SPLASH_COMMON_HPP_
