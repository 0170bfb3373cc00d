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
#include <numeric>
#include <sstream>

#include "splash/ctdg.hpp"
#include "splash/features.hpp"
#include "test_util.hpp"

namespace splash {
namespace {

using test::expect_near_vec;
using test::make_edge;

TEST(RandomFeaturesTest, DeterministicPerSeed) {
  AugConfig cfg;
  cfg.rng_seed = 9;
  std::vector<NodeId> ids = {1, 2, 3};
  FeatureTable a = init_random_features(ids, cfg);
  FeatureTable b = init_random_features(ids, cfg);
  for (NodeId v : ids) {
    auto x = a.value(v);
    auto y = b.value(v);
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin()));
  }
  auto r1 = a.value(1);
  auto r2 = a.value(2);
  EXPECT_FALSE(std::equal(r1.begin(), r1.end(), r2.begin()));
  cfg.rng_seed = 10;
  FeatureTable c = init_random_features(ids, cfg);
  auto z = c.value(1);
  EXPECT_FALSE(std::equal(r1.begin(), r1.end(), z.begin()));
}

TEST(RandomFeaturesTest, StandardNormalMoments) {
  AugConfig cfg;
  cfg.rng_seed = 4;
  std::vector<NodeId> ids(1000);
  std::iota(ids.begin(), ids.end(), 0);
  FeatureTable t = init_random_features(ids, cfg);
  // A per-dimension mean over 1000 draws has sd ~0.032, so the 0.1 bound is
  // ~3.2 sd and one dimension in 100 may cross it; require 95 of 100.
  double ps = 0.0, ps2 = 0.0;
  int mean_ok = 0, var_ok = 0;
  for (std::size_t d = 0; d < cfg.d_v; ++d) {
    double s = 0.0, s2 = 0.0;
    for (NodeId v : ids) {
      const double x = t.value(v)[d];
      s += x;
      s2 += x * x;
    }
    ps += s;
    ps2 += s2;
    const double mean = s / 1000.0;
    const double var = s2 / 1000.0 - mean * mean;
    mean_ok += std::abs(mean) <= 0.1;
    var_ok += std::abs(var - 1.0) <= 0.15;
  }
  EXPECT_GE(mean_ok, 95);
  EXPECT_GE(var_ok, 95);
  const double n = 1000.0 * static_cast<double>(cfg.d_v);
  const double mean = ps / n;
  EXPECT_NEAR(mean, 0.0, 0.1);
  EXPECT_NEAR(ps2 / n - mean * mean, 1.0, 0.15);
}

TEST(AugConfigTest, RejectsOddDimension) {
  AugConfig cfg;
  cfg.d_v = 3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.d_v = 4;
  cfg.degree_alpha = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(StructuralEncodeTest, ZeroDegree) {
  AugConfig cfg;
  auto v = structural_encode(0, cfg);
  for (std::size_t n = 0; n < v.size(); ++n) EXPECT_EQ(v[n], n % 2 == 0 ? 1.0 : 0.0);
}

TEST(StructuralEncodeTest, FirstComponent) {
  AugConfig cfg;
  cfg.d_v = 4;
  cfg.degree_alpha = 10.0;
  EXPECT_NEAR(structural_encode(1, cfg)[0], 0.540302, 1e-6);
}

TEST(StructuralEncodeTest, MatchesDirectFormula) {
  AugConfig cfg;
  cfg.d_v = 100;
  cfg.degree_alpha = 10.0;
  auto v = structural_encode(7, cfg);
  const double root = std::sqrt(100.0);
  for (std::size_t n = 0; n < 100; ++n) {
    const double want = n % 2 == 0 ? std::cos(std::pow(10.0, -double(n) / (2 * root)) * 7.0)
                                   : std::sin(std::pow(10.0, -double(n - 1) / (2 * root)) * 7.0);
    EXPECT_NEAR(v[n], want, 1e-12);
    EXPECT_LE(std::abs(v[n]), 1.0);
  }
}

TEST(PropagationTest, WorkedExample) {
  FeatureTable r(Process::R, 2);
  r.set_seen(1, {0.1, -0.2});
  r.set_seen(2, {0.1, 0.3});
  expect_near_vec(r.value(11), std::vector<double>{0.0, 0.0}, 0.0);
  propagate_on_edge(r, 11, r.value(1), 0);
  expect_near_vec(r.value(11), std::vector<double>{0.1, -0.2}, 1e-12);
  std::vector<double> n2(r.value(2).begin(), r.value(2).end());
  propagate_on_edge(r, 11, n2, 1);
  expect_near_vec(r.value(11), std::vector<double>{0.1, 0.05}, 1e-12);

  FeatureTable p(Process::P, 2);
  p.set_seen(1, {0.9, 0.7});
  p.set_seen(2, {0.7, 0.8});
  std::vector<double> p1(p.value(1).begin(), p.value(1).end());
  std::vector<double> p2(p.value(2).begin(), p.value(2).end());
  propagate_on_edge(p, 11, p1, 0);
  expect_near_vec(p.value(11), std::vector<double>{0.9, 0.7}, 1e-12);
  propagate_on_edge(p, 11, p2, 1);
  expect_near_vec(p.value(11), std::vector<double>{0.8, 0.75}, 1e-12);
}

TEST(PropagationTest, SeenNodeAndStructuralRejected) {
  FeatureTable r(Process::R, 2);
  r.set_seen(1, {0.1, -0.2});
  std::vector<double> x = {1.0, 1.0};
  EXPECT_THROW(propagate_on_edge(r, 1, x, 0), ContractError);
  FeatureTable s(Process::S, 2);
  EXPECT_THROW(propagate_on_edge(s, 5, x, 0), ContractError);
}

TEST(PropagationTest, RunningMeanOfSnapshots) {
  std::mt19937_64 rng(21);
  FeatureTable t(Process::R, 6);
  std::vector<std::vector<double>> used;
  for (int m = 0; m < 25; ++m) {
    used.push_back(test::random_vec(rng, 6));
    propagate_on_edge(t, 100, used.back(), static_cast<std::uint64_t>(m));
  }
  std::vector<double> mean(6, 0.0);
  for (const auto& u : used) {
    for (int i = 0; i < 6; ++i) mean[i] += u[i] / 25.0;
  }
  expect_near_vec(t.value(100), mean, 1e-12);
}

TEST(StreamPropagationTest, WorkedExampleThroughIngest) {
  StreamConfig cfg;
  cfg.k = 4;
  cfg.aug.d_v = 2;
  cfg.processes = {Process::R, Process::P};
  FeatureTable r(Process::R, 2);
  r.set_seen(1, {0.1, -0.2});
  r.set_seen(2, {0.1, 0.3});
  FeatureTable p(Process::P, 2);
  p.set_seen(1, {0.9, 0.7});
  p.set_seen(2, {0.7, 0.8});
  StreamState s(cfg, {1, 2}, {r, p});
  expect_near_vec(feature_at(s, Process::R, 11), std::vector<double>{0.0, 0.0}, 0.0);
  s.ingest_edge(make_edge(11, 1, 1.0));
  expect_near_vec(feature_at(s, Process::R, 11), std::vector<double>{0.1, -0.2}, 1e-12);
  expect_near_vec(feature_at(s, Process::P, 11), std::vector<double>{0.9, 0.7}, 1e-12);
  s.ingest_edge(make_edge(11, 2, 2.0));
  expect_near_vec(feature_at(s, Process::R, 11), std::vector<double>{0.1, 0.05}, 1e-12);
  expect_near_vec(feature_at(s, Process::P, 11), std::vector<double>{0.8, 0.75}, 1e-12);
  // Seen values never move.
  expect_near_vec(feature_at(s, Process::R, 1), std::vector<double>{0.1, -0.2}, 0.0);
}

TEST(StreamPropagationTest, UnseenPairUsesPreEdgeValues) {
  StreamConfig cfg;
  cfg.k = 4;
  cfg.aug.d_v = 2;
  cfg.processes = {Process::R};
  FeatureTable r(Process::R, 2);
  r.set_seen(1, {1.0, 0.0});
  r.set_seen(2, {0.0, 1.0});
  StreamState s(cfg, {1, 2}, {r});
  s.ingest_edge(make_edge(10, 1, 1.0));  // r10 = [1, 0]
  s.ingest_edge(make_edge(20, 2, 2.0));  // r20 = [0, 1]
  s.ingest_edge(make_edge(10, 20, 3.0));
  // Both read the other's pre-edge value: r10 = ([1,0] + [0,1]) / 2, same for r20.
  expect_near_vec(feature_at(s, Process::R, 10), std::vector<double>{0.5, 0.5}, 1e-15);
  expect_near_vec(feature_at(s, Process::R, 20), std::vector<double>{0.5, 0.5}, 1e-15);
}

TEST(FeatureAtTest, Dispatch) {
  StreamConfig cfg;
  cfg.k = 4;
  cfg.aug.d_v = 4;
  cfg.processes = {Process::Joint};
  std::vector<NodeId> seen = {1, 2};
  FeatureTable r = init_random_features(seen, cfg.aug);
  FeatureTable p(Process::P, 4);
  p.set_seen(1, {1, 2, 3, 4});
  p.set_seen(2, {5, 6, 7, 8});
  StreamState s(cfg, {1, 2}, {r, p});
  for (int i = 0; i < 5; ++i) s.ingest_edge(make_edge(1, 2, i));
  expect_near_vec(feature_at(s, Process::S, 1), structural_encode(5, cfg.aug), 0.0);
  expect_near_vec(feature_at(s, Process::P, 9), std::vector<double>(4, 0.0), 0.0);
  auto joint = feature_at(s, Process::Joint, 1);
  ASSERT_EQ(joint.size(), 12u);
  auto rv = r.value(1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(joint[i], rv[i]);
    EXPECT_EQ(joint[4 + i], i + 1.0);
  }
  StreamConfig only_s = cfg;
  only_s.processes = {Process::S};
  StreamState s2(only_s);
  EXPECT_THROW(feature_at(s2, Process::R, 1), ConfigError);
}

TEST(FeatureCsvTest, RoundTrip) {
  AugConfig cfg;
  cfg.d_v = 4;
  std::vector<NodeId> ids = {3, 1, 2};
  FeatureTable r = init_random_features(ids, cfg);
  std::stringstream ss;
  const FeatureTable* tables[] = {&r};
  write_feature_csv(ss, tables);
  auto back = read_feature_csv(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].process(), Process::R);
  for (NodeId v : ids) {
    auto a = r.value(v);
    auto b = back[0].value(v);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
  std::stringstream bad("node_id,process,v_0\nx,R,1\n");
  EXPECT_THROW(read_feature_csv(bad), ParseError);
}

}  // namespace
}  // namespace splash
