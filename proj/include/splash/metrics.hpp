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

// Task metrics: ROC AUC (anomaly), micro/macro F1 (classification) and
// NDCG@k (affinity).

#ifndef SPLASH_METRICS_HPP_
#define SPLASH_METRICS_HPP_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "splash/kernels.hpp"
#include "splash/task.hpp"

namespace splash {

// P(score+ > score-) + 0.5 P(tie). UndefinedMetricError without both classes.
double auc(std::span<const double> scores, std::span<const int> labels);

struct F1Scores {
  double micro = 0.0;
  double macro = 0.0;  // over classes present in truth or prediction
  std::vector<std::pair<int, double>> per_class;
};

F1Scores f1_scores(std::span<const int> predicted, std::span<const int> truth);
inline double f1(std::span<const int> predicted, std::span<const int> truth) {
  return f1_scores(predicted, truth).micro;
}

// DCG over the top-k items of the predicted ranking (ties by ascending index)
// with truth values as relevances, divided by the ideal DCG. Throws
// UndefinedMetricError when truth is all zero.
double ndcg_at_k(std::span<const double> predicted, std::span<const double> truth,
                 std::size_t k = 10);

// Index of the largest entry; the lowest index wins ties.
int argmax(std::span<const double> v);

struct EvalReport {
  std::string metric;
  double value = 0.0;
  std::size_t query_count = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, double>> breakdown;
};

// Scores softmax rows against the queries' labels with the task's metric.
EvalReport evaluate(TaskKind task, const Matrix& probs, std::span<const PropertyQuery> queries,
                    std::size_t ndcg_k = 10);

std::string metric_name(TaskKind task);

}  // namespace splash

#endif  // SPLASH_METRICS_HPP_
