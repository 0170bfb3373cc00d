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

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "splash/select.hpp"
#include "test_util.hpp"

namespace splash {
namespace {

using test::make_edge;

StreamState r_state(std::size_t d_v) {
  StreamConfig cfg;
  cfg.k = 10;
  cfg.aug.d_v = d_v;
  cfg.processes = {Process::R};
  FeatureTable r(Process::R, d_v);
  r.set_seen(1, std::vector<double>(d_v, 1.0));
  r.set_seen(2, {0.5, -1.0});
  r.set_seen(3, {2.0, 4.0});
  r.set_seen(4, {-3.0, 0.25});
  r.set_seen(9, {7.0, 8.0});
  return StreamState(cfg, {1, 2, 3, 4, 9}, {r});
}

TEST(EncodeNodeTest, OwnAndNeighbourMean) {
  StreamState s = r_state(2);
  EXPECT_EQ(encode_node(s, 9, 0.0, Process::R), (std::vector<double>{7, 8, 0, 0}));
  s.ingest_edge(make_edge(1, 2, 1.0));
  EXPECT_EQ(encode_node(s, 1, 1.0, Process::R), (std::vector<double>{1, 1, 0.5, -1.0}));
  s.ingest_edge(make_edge(3, 1, 2.0));
  s.ingest_edge(make_edge(1, 4, 3.0));
  auto e = encode_node(s, 1, 3.0, Process::R);
  test::expect_near_vec(e, std::vector<double>{1, 1, (0.5 + 2 - 3) / 3, (-1 + 4 + 0.25) / 3},
                        1e-12);
  // Time cut: only neighbours up to t = 2.
  e = encode_node(s, 1, 2.0, Process::R);
  test::expect_near_vec(e, std::vector<double>{1, 1, 1.25, 1.5}, 1e-12);
}

PropertySet numbered(std::size_t n) {
  PropertySet p;
  for (std::size_t i = 0; i < n; ++i) {
    PropertyQuery q;
    q.time = static_cast<double>(i) * 2.0;
    q.label = 0;
    p.queries.push_back(q);
  }
  p.label_dim = 1;
  return p;
}

TEST(SplitPlanTest, CeilingAndSizes) {
  std::vector<double> half = {0.5};
  auto p = make_split_plan(numbered(10), half);
  ASSERT_EQ(p.pairs.size(), 1u);
  EXPECT_EQ(p.pairs[0].n_train, 5u);
  EXPECT_EQ(p.pairs[0].t_split, 8.0);
  auto d = make_split_plan(numbered(100));
  ASSERT_EQ(d.pairs.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(d.pairs[i].n_train, 10 + 20 * i);
  std::vector<double> tenth = {0.1};
  EXPECT_EQ(make_split_plan(numbered(3), tenth).pairs[0].n_train, 1u);
  std::vector<double> high = {0.1, 0.9};
  EXPECT_EQ(make_split_plan(numbered(2), high).pairs.size(), 1u);  // 0.9 leaves no validation
  std::vector<double> bad = {0.5, 0.3};
  EXPECT_THROW(make_split_plan(numbered(10), bad), ConfigError);
  EXPECT_THROW(make_split_plan(PropertySet{}), ConfigError);
}

struct Labeled {
  Matrix x;
  std::vector<Target> t;
  std::vector<int> y;
};

Labeled blobs(std::uint64_t seed, std::size_t n, double gap, bool informative = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Labeled d;
  d.x.resize(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % 2);
    d.y.push_back(c);
    for (int j = 0; j < 3; ++j) d.x(i, j) = g(rng) * 0.5 + (informative && j == 0 ? (c ? gap : -gap) : 0.0);
  }
  for (int c : d.y) d.t.push_back(Target{c, {}});
  return d;
}

TEST(LinearTest, SeparableFitsWell) {
  auto d = blobs(1, 200, 4.0);
  auto m = fit_linear(d.x, d.t, 2);
  EXPECT_LT(empirical_risk(m, d.x, d.t), 0.05);
}

TEST(LinearTest, IdenticalLabelsConcentrate) {
  auto d = blobs(2, 50, 1.0);
  for (auto& t : d.t) t.index = 1;
  auto m = fit_linear(d.x, d.t, 3);
  EXPECT_LT(empirical_risk(m, d.x, d.t), 0.05);
  std::vector<double> z(3), p(3);
  m.logits_into(d.x.row_span(0), z);
  softmax(z, p);
  EXPECT_GT(p[1], 0.95);
}

TEST(LinearTest, InformativeBeatsNoise) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    auto good = blobs(seed, 300, 1.0);
    auto noise = blobs(seed + 50, 300, 1.0, false);
    auto mg = fit_linear(good.x, good.t, 2, {}, 150);
    auto mn = fit_linear(noise.x, good.t, 2, {}, 150);
    EXPECT_LT(empirical_risk(mg, good.x, good.t, 150, 300),
              empirical_risk(mn, noise.x, good.t, 150, 300));
  }
}

TEST(LinearTest, RiskValues) {
  auto d = blobs(6, 20, 1.0);
  LinearModel zero;
  zero.label_dim = 4;
  zero.in_dim = 3;
  zero.w.assign(4 * 4, 0.0);
  std::vector<Target> t;
  for (int i = 0; i < 20; ++i) t.push_back(Target{i % 4, {}});
  EXPECT_NEAR(empirical_risk(zero, d.x, t), std::log(4.0), 1e-14);
  // Bias-only model putting a huge margin on the right class of constant labels.
  LinearModel sure = zero;
  sure.w[1 * 4 + 3] = 60.0;
  std::vector<Target> ones(20, Target{1, {}});
  EXPECT_LT(empirical_risk(sure, d.x, ones), 1e-20);

  std::mt19937_64 rng(7);
  LinearModel m = zero;
  m.w = test::random_vec(rng, 16, -2.0, 2.0);
  double want = 0.0;
  for (int i = 5; i < 15; ++i) {
    std::vector<double> z(4);
    for (int c = 0; c < 4; ++c) {
      z[c] = m.w[c * 4 + 3];
      for (int j = 0; j < 3; ++j) z[c] += m.w[c * 4 + j] * d.x(i, j);
    }
    double lse = 0.0;
    for (double v : z) lse += std::exp(v);
    want += std::log(lse) - z[t[i].index];
  }
  EXPECT_NEAR(empirical_risk(m, d.x, t, 5, 15), want / 10.0, 1e-10);
  EXPECT_THROW(empirical_risk(m, d.x, t, 5, 5), ConfigError);
}

struct Candidates {
  std::vector<Process> procs;
  std::vector<Matrix> enc;
  PropertySet props;
};

Candidates three_way(std::uint64_t seed) {
  Candidates c;
  c.procs = {Process::R, Process::P, Process::S};
  auto good = blobs(seed, 120, 1.5);
  auto mid = blobs(seed, 120, 0.4);
  auto noise = blobs(seed + 9, 120, 0.0, false);
  c.enc = {noise.x, good.x, mid.x};
  c.props.label_dim = 2;
  for (std::size_t i = 0; i < 120; ++i) {
    PropertyQuery q;
    q.time = static_cast<double>(i);
    q.label = good.y[i];
    c.props.queries.push_back(q);
  }
  return c;
}

TEST(SelectTest, PicksLowestRiskAndSumsIndependentSplits) {
  auto c = three_way(10);
  const auto plan = make_split_plan(c.props);
  const auto rep = select_from_encodings(c.procs, c.enc, c.props, plan);
  EXPECT_EQ(rep.chosen, Process::P);
  std::vector<Target> t;
  for (const auto& q : c.props.queries) t.push_back(q.target());
  for (std::size_t k = 0; k < 3; ++k) {
    double sum = 0.0;
    for (std::size_t s = 0; s < plan.pairs.size(); ++s) {
      const auto m = fit_linear(c.enc[k], t, 2, {}, plan.pairs[s].n_train);
      const double r = empirical_risk(m, c.enc[k], t, plan.pairs[s].n_train);
      EXPECT_EQ(rep.risks[k][s], r);
      sum += r;
    }
    EXPECT_EQ(rep.summed[k], sum);
  }
  // Scaling every summed risk by one positive constant keeps the argmin.
  std::size_t arg = 0;
  for (std::size_t k = 1; k < 3; ++k) {
    if (3.7 * rep.summed[k] < 3.7 * rep.summed[arg]) arg = k;
  }
  EXPECT_EQ(c.procs[arg], rep.chosen);
}

TEST(SelectTest, TiesPreferSThenPThenR) {
  auto c = three_way(11);
  const auto plan = make_split_plan(c.props);
  std::vector<Matrix> same = {c.enc[1], c.enc[1], c.enc[1]};
  EXPECT_EQ(select_from_encodings(c.procs, same, c.props, plan).chosen, Process::S);
  std::vector<Process> rp = {Process::R, Process::P};
  std::vector<Matrix> two = {c.enc[1], c.enc[1]};
  EXPECT_EQ(select_from_encodings(rp, two, c.props, plan).chosen, Process::P);
}

TEST(SelectTest, NonFiniteRisks) {
  auto c = three_way(12);
  const auto plan = make_split_plan(c.props);
  Matrix bad = c.enc[0];
  bad(0, 0) = std::nan("");
  std::vector<Matrix> all_bad = {bad, bad, bad};
  EXPECT_THROW(select_from_encodings(c.procs, all_bad, c.props, plan), SelectionError);
  std::vector<Matrix> one_bad = {c.enc[0], bad, c.enc[2]};
  EXPECT_NE(select_from_encodings(c.procs, one_bad, c.props, plan).chosen, Process::P);
  EXPECT_THROW(select_from_encodings(c.procs, c.enc, c.props, SplitPlan{}), SelectionError);
}

TEST(SelectTest, ReportJson) {
  auto c = three_way(13);
  const auto rep = select_from_encodings(c.procs, c.enc, c.props, make_split_plan(c.props));
  const auto j = nlohmann::json::parse(selection_report_json(rep));
  EXPECT_EQ(j.at("chosen"), "P");
  EXPECT_EQ(j.at("candidates").size(), 3u);
}

// Encodings computed on a truncated stream equal those on the full stream.
TEST(SelectTest, EncodingsHaveNoLookahead) {
  const Dataset ds = fixture::community_dataset(3, 3, 20, 600);
  StreamConfig sc;
  sc.k = 5;
  sc.aug.d_v = 8;
  sc.processes = {Process::S, Process::R};
  std::vector<NodeId> ids;
  for (NodeId v = 0; v < 30; ++v) ids.push_back(v);
  FeatureTable r = init_random_features(ids, sc.aug);
  std::unordered_set<NodeId> seen(ids.begin(), ids.end());
  const std::vector<Process> cand = {Process::R, Process::S};
  StreamState full(sc, seen, {r});
  StreamCursor cf(full, ds.edges);
  const auto all = collect_encodings(cf, ds.props.queries, cand);
  for (std::size_t qi : {0u, 77u, 301u, 599u}) {
    const auto& q = ds.props.queries[qi];
    StreamState cut(sc, seen, {r});
    for (std::size_t i = 0; i < q.stream_pos; ++i) cut.ingest_edge(ds.edges[i]);
    for (std::size_t c = 0; c < 2; ++c) {
      const auto e = encode_node(cut, q.node, q.time, cand[c]);
      EXPECT_TRUE(std::equal(e.begin(), e.end(), all[c].row(qi))) << "query " << qi;
    }
  }
}

TEST(SelectTest, RejectsNonBaseCandidates) {
  StreamState s = r_state(2);
  std::vector<Process> c = {Process::Joint};
  EXPECT_THROW(select_process(s, {}, numbered(10), c), ConfigError);
}

TEST(SelectTest, ConstructedSignals) {
  const auto cfg = fixture::selection_config();
  EXPECT_EQ(run_seed(cfg, fixture::community_dataset(0), 0).process, Process::P);
  EXPECT_EQ(run_seed(cfg, fixture::degree_dataset(0), 0).process, Process::S);
}

}  // namespace
}  // namespace splash
