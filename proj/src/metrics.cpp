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

#include "splash/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace splash {

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks (doubled to stay integral) summed over positives.
  double pos_rank2 = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double mid2 = static_cast<double>(i + 1 + j);  // 2 * average 1-based rank
    for (std::size_t r = i; r < j; ++r) {
      if (labels[order[r]] == 1) {
        pos_rank2 += mid2;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("auc needs both classes present");
  const double np = static_cast<double>(n_pos);
  // Twice the Mann-Whitney U: sum of doubled ranks minus n_pos (n_pos + 1).
  const double u2 = pos_rank2 - np * (np + 1.0);
  return u2 / (2.0 * np * static_cast<double>(n_neg));
}

F1Scores f1_scores(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("f1: lengths differ");
  if (predicted.empty()) throw UndefinedMetricError("f1 of an empty set");
  std::map<int, std::array<std::size_t, 3>> counts;  // tp, fp, fn
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == truth[i]) {
      ++correct;
      ++counts[truth[i]][0];
    } else {
      ++counts[predicted[i]][1];
      ++counts[truth[i]][2];
    }
  }
  F1Scores out;
  // Single-label multiclass: micro precision = micro recall = accuracy.
  out.micro = static_cast<double>(correct) / static_cast<double>(truth.size());
  double sum = 0.0;
  for (const auto& [c, k] : counts) {
    const double denom = static_cast<double>(2 * k[0] + k[1] + k[2]);
    const double f = denom > 0.0 ? 2.0 * static_cast<double>(k[0]) / denom : 0.0;
    out.per_class.emplace_back(c, f);
    sum += f;
  }
  out.macro = sum / static_cast<double>(counts.size());
  return out;
}

int argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return static_cast<int>(best);
}

double ndcg_at_k(std::span<const double> predicted, std::span<const double> truth,
                 std::size_t k) {
  if (predicted.size() != truth.size()) throw ShapeError("ndcg: lengths differ");
  const std::size_t n = truth.size();
  const std::size_t top = std::min(k, n);
  auto ranking = [n](std::span<const double> s) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
    return order;
  };
  const auto pred_order = ranking(predicted);
  const auto ideal_order = ranking(truth);
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t r = 0; r < top; ++r) {
    const double disc = std::log2(static_cast<double>(r) + 2.0);
    dcg += truth[pred_order[r]] / disc;
    idcg += truth[ideal_order[r]] / disc;
  }
  if (!(idcg > 0.0)) throw UndefinedMetricError("ndcg with all-zero truth");
  return dcg / idcg;
}

std::string metric_name(TaskKind task) {
  switch (task) {
    case TaskKind::Classification:
      return "micro_f1";
    case TaskKind::Anomaly:
      return "auc";
    case TaskKind::Affinity:
      return "ndcg@10";
  }
  return "?";
}

EvalReport evaluate(TaskKind task, const Matrix& probs, std::span<const PropertyQuery> queries,
                    std::size_t ndcg_k) {
  if (probs.rows() != queries.size()) throw ShapeError("evaluate: one row per query expected");
  EvalReport rep;
  rep.metric = metric_name(task);
  if (task == TaskKind::Affinity && ndcg_k != 10) rep.metric = "ndcg@" + std::to_string(ndcg_k);
  rep.query_count = queries.size();
  switch (task) {
    case TaskKind::Classification: {
      std::vector<int> pred(queries.size()), truth(queries.size());
      for (std::size_t i = 0; i < queries.size(); ++i) {
        pred[i] = argmax(probs.row_span(i));
        truth[i] = queries[i].label;
      }
      const auto s = f1_scores(pred, truth);
      rep.value = s.micro;
      rep.breakdown.emplace_back("macro_f1", s.macro);
      for (const auto& [c, f] : s.per_class) {
        rep.breakdown.emplace_back("f1_class_" + std::to_string(c), f);
      }
      break;
    }
    case TaskKind::Anomaly: {
      if (probs.cols() < 2) throw ShapeError("anomaly scores need two output classes");
      std::vector<double> score(queries.size());
      std::vector<int> truth(queries.size());
      for (std::size_t i = 0; i < queries.size(); ++i) {
        score[i] = probs(i, 1);
        truth[i] = queries[i].label;
      }
      rep.value = auc(score, truth);
      break;
    }
    case TaskKind::Affinity: {
      double sum = 0.0;
      std::size_t used = 0;
      for (std::size_t i = 0; i < queries.size(); ++i) {
        try {
          sum += ndcg_at_k(probs.row_span(i), queries[i].affinity, ndcg_k);
          ++used;
        } catch (const UndefinedMetricError&) {
          ++rep.skipped;
        }
      }
      if (rep.skipped > 0) {
        warn(std::to_string(rep.skipped) + " affinity queries with all-zero truth skipped");
      }
      if (used == 0) throw UndefinedMetricError("no affinity query with non-zero truth");
      rep.value = sum / static_cast<double>(used);
      break;
    }
  }
  return rep;
}

}  // namespace splash
