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

// Choosing an augmentation process with linear models: each candidate's node
// encodings [own feature | mean neighbor snapshot] are fitted on the early
// part of the labeled history and scored on the rest, over several
// chronological split points; the candidate with the lowest summed
// validation risk wins.

#ifndef SPLASH_SELECT_HPP_
#define SPLASH_SELECT_HPP_

#include <span>
#include <string>
#include <vector>

#include "splash/ctdg.hpp"
#include "splash/kernels.hpp"
#include "splash/nn.hpp"
#include "splash/task.hpp"

namespace splash {

// [x_i(t) | mean of x_j(t_l) over the recent neighbors with t_l <= t]; the
// second half is zero for an empty neighborhood.
std::vector<double> encode_node(const StreamState& state, NodeId node, double t, Process process);
void encode_node_into(const StreamState& state, NodeId node, double t, Process process,
                      std::span<double> out);

struct SplitPair {
  double fraction = 0.0;
  std::size_t n_train = 0;  // queries [0, n_train) train, the rest validate
  double t_split = 0.0;     // time of the last training query
};

struct SplitPlan {
  std::vector<SplitPair> pairs;
};

inline const std::vector<double> kDefaultSplitFractions = {0.1, 0.3, 0.5, 0.7, 0.9};

// ceil(f * n) training queries per fraction; degenerate splits are dropped
// with a warning.
SplitPlan make_split_plan(const PropertySet& props,
                          std::span<const double> fractions = kDefaultSplitFractions);

struct LinearFitConfig {
  double learning_rate = 0.1;
  std::size_t iterations = 200;
  double weight_decay = 1e-4;  // weights only, not the bias column
};

struct LinearModel {
  std::size_t label_dim = 0;
  std::size_t in_dim = 0;
  std::vector<double> w;  // label_dim x (in_dim + 1), bias last

  void logits_into(std::span<const double> x, std::span<double> out) const;
};

// Full-batch Adam from zero weights on the first `rows` rows of `x`.
LinearModel fit_linear(const Matrix& x, std::span<const Target> targets, std::size_t label_dim,
                       const LinearFitConfig& cfg = {}, std::size_t rows = SIZE_MAX);

// Mean cross entropy of the model over rows [begin, end) of `x`.
double empirical_risk(const LinearModel& model, const Matrix& x,
                      std::span<const Target> targets, std::size_t begin = 0,
                      std::size_t end = SIZE_MAX);

struct SelectionReport {
  std::vector<Process> candidates;
  std::vector<SplitPair> splits;
  std::vector<std::vector<double>> risks;  // [candidate][split]
  std::vector<double> summed;
  Process chosen = Process::S;
};

// Encodings of every query under each candidate, from one replay of the
// cursor's stream.
std::vector<Matrix> collect_encodings(StreamCursor& cursor, std::span<const PropertyQuery> queries,
                                      std::span<const Process> candidates);

// Per-(split, candidate) fits run in parallel; ties resolve S, then P, then R.
SelectionReport select_from_encodings(std::span<const Process> candidates,
                                      std::span<const Matrix> encodings,
                                      const PropertySet& props, const SplitPlan& plan,
                                      const LinearFitConfig& cfg = {});

// Replays `edges` through `state` (which must have every candidate active)
// and selects over `props`, all of which must precede t_test.
SelectionReport select_process(StreamState& state, std::span<const TemporalEdge> edges,
                               const PropertySet& props, std::span<const Process> candidates,
                               std::span<const double> fractions = kDefaultSplitFractions,
                               const LinearFitConfig& cfg = {});

std::string selection_report_json(const SelectionReport& report);

}  // namespace splash

#endif  // SPLASH_SELECT_HPP_
