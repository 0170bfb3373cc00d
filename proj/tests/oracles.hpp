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

// Brute-force metric oracles shared by the unit tests and the acceptance
// binary. Written directly from the definitions, independent of the library.

#ifndef SPLASH_TESTS_ORACLES_HPP_
#define SPLASH_TESTS_ORACLES_HPP_

#include <cmath>
#include <map>
#include <set>
#include <vector>

namespace splash::oracle {

// Fraction of (positive, negative) pairs ordered correctly, ties count half.
inline double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

struct F1Pair {
  double micro;
  double macro;
};

// Micro and macro F1 from a full confusion matrix.
inline F1Pair confusion_f1(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::map<std::pair<int, int>, double> cm;
  std::set<int> classes;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    cm[{truth[i], pred[i]}] += 1.0;
    classes.insert(truth[i]);
    classes.insert(pred[i]);
  }
  double tp_all = 0.0, fp_all = 0.0, fn_all = 0.0, macro = 0.0;
  for (int c : classes) {
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (const auto& [key, n] : cm) {
      if (key.first == c && key.second == c) tp += n;
      else if (key.second == c) fp += n;
      else if (key.first == c) fn += n;
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    const double prec = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    const double rec = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    macro += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  const double p = tp_all / (tp_all + fp_all), r = tp_all / (tp_all + fn_all);
  return {2 * p * r / (p + r), macro / static_cast<double>(classes.size())};
}

// Explicit position-by-position DCG: the item at predicted rank r is the one
// with the most items scoring strictly above it (ties by index), computed by
// counting rather than sorting.
inline double direct_ndcg(const std::vector<double>& pred, const std::vector<double>& truth,
                          std::size_t k) {
  const std::size_t n = pred.size();
  auto rank_of = [n](const std::vector<double>& s, std::size_t i) {
    std::size_t r = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (s[j] > s[i] || (s[j] == s[i] && j < i)) ++r;
    }
    return r;
  };
  double dcg = 0.0, idcg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rp = rank_of(pred, i), rt = rank_of(truth, i);
    if (rp < k) dcg += truth[i] / std::log2(static_cast<double>(rp) + 2.0);
    if (rt < k) idcg += truth[i] / std::log2(static_cast<double>(rt) + 2.0);
  }
  return dcg / idcg;
}

}  // namespace splash::oracle

#endif  // SPLASH_TESTS_ORACLES_HPP_
