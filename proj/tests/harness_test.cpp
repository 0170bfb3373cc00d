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
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "splash/harness.hpp"
#include "test_util.hpp"

namespace splash {
namespace {

using nlohmann::json;

TEST(LoadTest, NativeRowsAndQueries) {
  std::stringstream in(
      "src,dst,ts,weight,label,f_0\n"
      "1,2,0.5,1,-1,0.25\n"
      "2,3,1,2,1,0.5\n"
      "1,3,1,1,0,-1\n");
  const Dataset ds = parse_edge_csv(in, LoadOptions{});
  ASSERT_EQ(ds.edges.size(), 3u);
  EXPECT_EQ(ds.d_e, 1u);
  EXPECT_EQ(ds.edges[1].weight, 2.0);
  EXPECT_EQ(ds.edges[2].edge_feature, std::vector<double>{-1.0});
  ASSERT_EQ(ds.props.queries.size(), 2u);
  EXPECT_EQ(ds.props.label_dim, 2u);
  EXPECT_EQ(ds.props.queries[0].node, 2);
  EXPECT_EQ(ds.props.queries[0].label, 1);
  EXPECT_EQ(ds.props.queries[0].stream_pos, 2u);
  EXPECT_EQ(ds.props.queries[1].stream_pos, 3u);
}

TEST(LoadTest, JodieOffsetsItems) {
  std::stringstream in(
      "user_id,item_id,timestamp,state_label,c0\n"
      "0,0,1,0,0.1\n"
      "2,1,2,1,0.2\n"
      "1,0,3,0,0.3\n");
  LoadOptions opt;
  opt.task = TaskKind::Anomaly;
  opt.format = CsvFormat::Jodie;
  const Dataset ds = parse_edge_csv(in, opt);
  ASSERT_EQ(ds.edges.size(), 3u);
  EXPECT_EQ(ds.edges[0].dst, 3);
  EXPECT_EQ(ds.edges[1].dst, 4);
  EXPECT_EQ(ds.edges[2].dst, 3);
  ASSERT_EQ(ds.props.queries.size(), 3u);
  EXPECT_EQ(ds.props.label_dim, 2u);
  EXPECT_EQ(ds.props.queries[1].node, 2);
  EXPECT_EQ(ds.props.queries[1].label, 1);
}

TEST(LoadTest, JodieWithOtherTaskWarns) {
  std::stringstream in("u,i,t,s\n0,0,1,0\n1,0,2,1\n");
  LoadOptions opt;
  opt.format = CsvFormat::Jodie;
  set_warnings_quiet(true);
  const std::size_t before = warning_count();
  parse_edge_csv(in, opt);
  EXPECT_EQ(warning_count(), before + 1);
  set_warnings_quiet(false);
}

TEST(LoadTest, Errors) {
  std::stringstream order("src,dst,ts,weight,label\n1,2,5,1,0\n1,2,4,1,0\n");
  try {
    parse_edge_csv(order, LoadOptions{});
    FAIL() << "no throw";
  } catch (const StreamOrderError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::stringstream header("a,b,c,d,e\n");
  try {
    parse_edge_csv(header, LoadOptions{});
    FAIL() << "no throw";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  std::stringstream fields("src,dst,ts,weight,label\n1,2,5,1\n");
  EXPECT_THROW(parse_edge_csv(fields, LoadOptions{}), ParseError);
  std::stringstream number("src,dst,ts,weight,label\n1,x,5,1,0\n");
  EXPECT_THROW(parse_edge_csv(number, LoadOptions{}), ParseError);
  std::stringstream aff("src,dst,ts,weight,label\n1,2,5,1,0\n");
  LoadOptions opt;
  opt.task = TaskKind::Affinity;
  EXPECT_THROW(parse_edge_csv(aff, opt), ConfigError);
  EXPECT_THROW(load_edge_csv("/nonexistent/edges.csv", LoadOptions{}), ConfigError);
}

TEST(LoadTest, AffinityLabelsFromFutureWindow) {
  std::stringstream in(
      "src,dst,ts,weight,label\n"
      "1,10,1,1,1\n"
      "1,11,2,3,-1\n"
      "1,10,3,1,-1\n"
      "2,12,3.5,1,-1\n"
      "1,12,9,5,-1\n");
  LoadOptions opt;
  opt.task = TaskKind::Affinity;
  opt.affinity_window = 2.0;
  const Dataset ds = parse_edge_csv(in, opt);
  EXPECT_EQ(ds.affinity_items, (std::vector<NodeId>{10, 11, 12}));
  ASSERT_EQ(ds.props.queries.size(), 1u);
  EXPECT_EQ(ds.props.label_dim, 3u);
  // Window (1, 3]: weight 3 to item 11 and 1 to item 10.
  test::expect_near_vec(ds.props.queries[0].affinity, std::vector<double>{0.25, 0.75, 0.0},
                        1e-15);
}

TEST(LoadTest, ShiftDatasetRoundTrip) {
  ShiftGenConfig g;
  g.n_edges = 500;
  g.rng_seed = 3;
  const Dataset a = dataset_from_shift(gen_synthetic_shift(g));
  EXPECT_EQ(a.name, "synthetic-90");
  std::stringstream ss;
  write_edge_csv(ss, a);
  LoadOptions opt;
  opt.label_dim = a.props.label_dim;
  const Dataset b = parse_edge_csv(ss, opt);
  ASSERT_EQ(b.edges.size(), a.edges.size());
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    EXPECT_EQ(b.edges[i].src, a.edges[i].src);
    EXPECT_EQ(b.edges[i].dst, a.edges[i].dst);
    EXPECT_EQ(b.edges[i].timestamp, a.edges[i].timestamp);
    EXPECT_EQ(b.edges[i].weight, a.edges[i].weight);
  }
  ASSERT_EQ(b.props.queries.size(), a.props.queries.size());
  EXPECT_EQ(b.props.label_dim, a.props.label_dim);
  for (std::size_t i = 0; i < a.props.queries.size(); ++i) {
    EXPECT_EQ(b.props.queries[i].node, a.props.queries[i].node);
    EXPECT_EQ(b.props.queries[i].label, a.props.queries[i].label);
    EXPECT_EQ(b.props.queries[i].stream_pos, a.props.queries[i].stream_pos);
  }
}

TEST(SplitTest, ChronologicalParts) {
  const Dataset ds = fixture::community_dataset(1, 4, 50, 1000);
  const ChronoSplit s = chrono_split(ds.props, {0.1, 0.1, 0.8});
  EXPECT_EQ(s.train.size(), 100u);
  EXPECT_EQ(s.val.size(), 100u);
  EXPECT_EQ(s.test.size(), 800u);
  EXPECT_EQ(s.t_seen, ds.props.queries[99].time);
  EXPECT_EQ(s.t_test, ds.props.queries[199].time);
  EXPECT_LE(s.train.queries.back().time, s.val.queries.front().time);
  EXPECT_LE(s.val.queries.back().time, s.test.queries.front().time);
  EXPECT_EQ(s.test.queries.back().stream_pos, ds.props.queries.back().stream_pos);

  const ChronoSplit w = chrono_split(ds.props, {0.05, 0.05, 0.9});
  EXPECT_EQ(w.train.size() + w.val.size(), 100u);
  EXPECT_EQ(w.test.size(), 900u);

  EXPECT_THROW(chrono_split(ds.props, {0.0, 0.2, 0.8}), ConfigError);
  EXPECT_THROW(chrono_split(ds.props, {0.2, 0.2, 0.8}), ConfigError);
  PropertySet tiny = ds.props;
  tiny.queries.resize(3);
  EXPECT_THROW(chrono_split(tiny, {0.1, 0.1, 0.8}), ConfigError);
}

TEST(SplitTest, NodesUntilIsInclusive) {
  std::vector<TemporalEdge> edges = {test::make_edge(1, 2, 1.0), test::make_edge(3, 4, 2.0),
                                     test::make_edge(5, 6, 3.0)};
  const auto seen = nodes_until(edges, 2.0);
  EXPECT_EQ(seen, (std::unordered_set<NodeId>{1, 2, 3, 4}));
  EXPECT_EQ(snapshot_until(edges, 2.0).num_edges(), 2u);
}

TEST(ConfigTest, RejectsUnknownKeys) {
  json good = {{"data", {{"synthetic", {{"p", 70}}}}}};
  EXPECT_NO_THROW(config_from_json(good));
  json top = good;
  top["lerning_rate"] = 0.1;
  EXPECT_THROW(config_from_json(top), ConfigError);
  json nested = good;
  nested["train"] = {{"epochs", 3}};
  EXPECT_THROW(config_from_json(nested), ConfigError);
  json deep = good;
  deep["model"] = {{"time", {{"d_t", 4}, {"gamma", 1.0}}}};
  EXPECT_THROW(config_from_json(deep), ConfigError);
  EXPECT_THROW(config_from_json(json::object()), ConfigError);
  json bad_process = good;
  bad_process["process"] = "fixed:Q";
  EXPECT_THROW(config_from_json(bad_process), ConfigError);
  json joint_candidate = good;
  joint_candidate["candidates"] = {"R", "Joint"};
  EXPECT_THROW(config_from_json(joint_candidate), ConfigError);
}

TEST(ConfigTest, JsonRoundTrip) {
  json j = {{"task", "classification"},
            {"data", {{"synthetic", {{"p", 70}, {"seed", 5}}}}},
            {"process", "fixed:S"},
            {"k", 12},
            {"aug", {{"d_v", 16}}},
            {"train", {{"max_epochs", 7}, {"learning_rate", 1e-3}}},
            {"skip_weights", {0.0}},
            {"seeds", {1, 2}}};
  const ExperimentConfig a = config_from_json(j);
  EXPECT_EQ(a.k, 12u);
  EXPECT_EQ(a.aug.d_v, 16u);
  EXPECT_EQ(a.train.max_epochs, 7u);
  EXPECT_FALSE(a.data.synthetic_seed_from_run);
  EXPECT_EQ(a.data.synthetic->rng_seed, 5u);
  EXPECT_EQ(a.fixed_process(), Process::S);
  const auto dumped = config_to_json(a);
  const ExperimentConfig b = config_from_json(json::parse(dumped.dump()));
  EXPECT_EQ(config_to_json(b).dump(), dumped.dump());
}

TEST(ConfigTest, LoadFile) {
  test::TempDir dir("config");
  {
    std::ofstream f(dir.file("c.json"));
    f << "{\"data\": {\"synthetic\": {\"p\": 50}}, \"seeds\": [4]}";
  }
  EXPECT_EQ(load_config(dir.file("c.json")).seeds, std::vector<std::uint64_t>{4});
  {
    std::ofstream f(dir.file("bad.json"));
    f << "{\"data\": ";
  }
  EXPECT_THROW(load_config(dir.file("bad.json")), ConfigError);
  EXPECT_THROW(load_config(dir.file("missing.json")), ConfigError);
}

TEST(EventsTest, CsvRoundTrip) {
  std::vector<StreamEvent> evs(3);
  evs[0].edge = test::make_edge(1, 2, 1.0, 0.5);
  evs[0].edge.edge_feature = {0.125, -2.0};
  evs[1].is_query = true;
  evs[1].edge.src = 2;
  evs[1].edge.timestamp = 1.0;
  evs[1].label = 3;
  evs[2].edge = test::make_edge(2, 3, 2.5);
  evs[2].edge.edge_feature = {1.0, 1.0 / 3.0};
  std::stringstream ss;
  write_events_csv(ss, evs, 2);
  const auto back = parse_events_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].is_query, evs[i].is_query);
    EXPECT_EQ(back[i].edge.src, evs[i].edge.src);
    EXPECT_EQ(back[i].edge.timestamp, evs[i].edge.timestamp);
    EXPECT_EQ(back[i].label, evs[i].label);
    if (!evs[i].is_query) {
      EXPECT_EQ(back[i].edge.dst, evs[i].edge.dst);
      EXPECT_EQ(back[i].edge.weight, evs[i].edge.weight);
      EXPECT_EQ(back[i].edge.edge_feature, evs[i].edge.edge_feature);
    }
  }
  std::stringstream bad_kind("kind,src,dst,ts,weight,label\nX,1,2,1,1,-1\n");
  EXPECT_THROW(parse_events_csv(bad_kind), ParseError);
  std::stringstream order("kind,src,dst,ts,weight,label\nE,1,2,2,1,-1\nQ,1,,1,,-1\n");
  EXPECT_THROW(parse_events_csv(order), StreamOrderError);
}

TEST(EventsTest, QueriesFollowTheirEdge) {
  const Dataset ds = fixture::community_dataset(2, 2, 10, 20);
  std::vector<PropertyQuery> qs(ds.props.queries.begin() + 5, ds.props.queries.begin() + 8);
  const auto evs = events_for(ds, qs);
  ASSERT_EQ(evs.size(), 23u);
  std::size_t edges = 0;
  for (const auto& ev : evs) {
    if (ev.is_query) {
      EXPECT_EQ(ev.edge.src, ds.edges[edges - 1].src);
      EXPECT_EQ(ev.edge.timestamp, ds.edges[edges - 1].timestamp);
    } else {
      ++edges;
    }
  }
  std::vector<PropertyQuery> unordered = {ds.props.queries[7], ds.props.queries[5]};
  EXPECT_THROW(events_for(ds, unordered), ContractError);
}

// A small trained run shared by the pipeline tests.
class PipelineTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ds_ = new Dataset(fixture::community_dataset(5, 3, 20, 1500));
    cfg_ = new ExperimentConfig(small_config());
    res_ = new SeedResult(run_seed(*cfg_, *ds_, 0));
  }
  static void TearDownTestSuite() {
    delete res_;
    delete cfg_;
    delete ds_;
  }

  static ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.data.synthetic = ShiftGenConfig{};
    cfg.process = "fixed:S";
    cfg.aug.d_v = 8;
    cfg.k = 8;
    cfg.slim.d_h = 8;
    cfg.slim.time.d_t = 8;
    cfg.train.max_epochs = 3;
    cfg.train.batch_size = 100;
    cfg.skip_weights = {1.0, 0.0};
    cfg.predict_batch = 64;
    return cfg;
  }

  static std::vector<StreamEvent> test_events() {
    const ChronoSplit s = chrono_split(ds_->props, cfg_->fractions);
    return events_for(*ds_, s.test.queries);
  }

  static Dataset* ds_;
  static ExperimentConfig* cfg_;
  static SeedResult* res_;
};

Dataset* PipelineTest::ds_ = nullptr;
ExperimentConfig* PipelineTest::cfg_ = nullptr;
SeedResult* PipelineTest::res_ = nullptr;

TEST_F(PipelineTest, RunProducesTestReport) {
  EXPECT_EQ(res_->process, Process::S);
  EXPECT_FALSE(res_->selection.has_value());
  ASSERT_EQ(res_->histories.size(), 2u);
  EXPECT_EQ(res_->test.metric, "micro_f1");
  EXPECT_EQ(res_->test.query_count, 1200u);
  EXPECT_EQ(res_->predictions.size(), 1200u);
  EXPECT_GE(res_->test.value, 0.0);
  EXPECT_LE(res_->test.value, 1.0);
  for (const auto& p : res_->predictions) {
    double sum = 0.0;
    for (double x : p.probs) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  EXPECT_EQ(res_->checkpoint.history.size(),
            res_->histories[0].second.epochs.size() + res_->histories[1].second.epochs.size());
}

TEST_F(PipelineTest, StreamPredictMatchesTestPhase) {
  const auto evs = test_events();
  for (std::size_t batch : {std::size_t{1}, std::size_t{7}, std::size_t{600}}) {
    const auto preds = stream_predict(res_->checkpoint, evs, batch);
    ASSERT_EQ(preds.size(), res_->predictions.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      EXPECT_EQ(preds[i].index, i);
      EXPECT_EQ(preds[i].node, res_->predictions[i].node);
      ASSERT_EQ(preds[i].probs, res_->predictions[i].probs) << "batch " << batch << " query " << i;
    }
  }
}

TEST_F(PipelineTest, CheckpointRoundTrip) {
  test::TempDir dir("ckpt");
  const std::string path = dir.file("model.bin");
  save_checkpoint(res_->checkpoint, path);
  EXPECT_TRUE(std::filesystem::exists(dir.file("model.json")));
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.task, res_->checkpoint.task);
  EXPECT_EQ(back.seen, res_->checkpoint.seen);
  EXPECT_EQ(back.t_seen, res_->checkpoint.t_seen);
  EXPECT_EQ(back.t_test, res_->checkpoint.t_test);
  EXPECT_EQ(back.history, res_->checkpoint.history);
  const auto evs = test_events();
  const auto a = stream_predict(res_->checkpoint, evs, 50);
  const auto b = stream_predict(back, evs, 50);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].probs, b[i].probs);
  EXPECT_THROW(load_checkpoint(dir.file("absent.bin")), Error);
}

TEST_F(PipelineTest, UnseenNodeQuery) {
  std::vector<StreamEvent> evs(1);
  evs[0].is_query = true;
  evs[0].edge.src = 999999;
  evs[0].edge.timestamp = 1.0;
  const auto preds = stream_predict(res_->checkpoint, evs);
  ASSERT_EQ(preds.size(), 1u);
  ASSERT_EQ(preds[0].probs.size(), 3u);
  for (double x : preds[0].probs) EXPECT_TRUE(std::isfinite(x));
}

TEST_F(PipelineTest, MetricsJsonIsStable) {
  ExperimentResult r;
  r.seeds.push_back(*res_);
  r.metric = "f1";
  const auto j = metrics_json(r, *cfg_);
  EXPECT_EQ(j.at("seeds").size(), 1u);
  EXPECT_EQ(j.at("seeds")[0].at("process"), "S");
  EXPECT_FALSE(j.dump().find("seconds") != std::string::npos);
  const SeedResult again = run_seed(*cfg_, *ds_, 0);
  ExperimentResult r2;
  r2.seeds.push_back(again);
  r2.metric = "f1";
  EXPECT_EQ(metrics_json(r2, *cfg_).dump(), j.dump());
}

TEST(RunTest, StageErrorNestsCause) {
  ExperimentConfig cfg;
  cfg.process = "fixed:S";
  cfg.fractions = {0.5, 0.5, 0.5};
  const Dataset ds = fixture::community_dataset(1, 2, 10, 100);
  try {
    run_seed(cfg, ds, 0);
    FAIL() << "no throw";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "split");
    try {
      std::rethrow_if_nested(e);
      FAIL() << "not nested";
    } catch (const ConfigError&) {
    }
  }
}

// Training loss over the first epochs on Synthetic-90: epoch records 1..6
// give five transitions, at least four of them non-increasing.
TEST(TrainingCurveTest, Synthetic90LossMostlyDecreases) {
  for (std::uint64_t seed : {0, 1, 2}) {
    ExperimentConfig cfg;
    cfg.data.synthetic = ShiftGenConfig{};
    cfg.process = "fixed:S";
    cfg.skip_weights = {1.0};
    cfg.train.max_epochs = 6;
    cfg.train.patience = 6;
    const SeedResult r = run_seed(cfg, load_dataset(cfg, seed), seed);
    const auto& epochs = r.histories.at(0).second.epochs;
    ASSERT_EQ(epochs.size(), 6u);
    int down = 0;
    for (std::size_t e = 1; e < epochs.size(); ++e) {
      down += epochs[e].train_loss <= epochs[e - 1].train_loss;
    }
    EXPECT_GE(down, 4) << "seed " << seed;
  }
}

TEST(ScalabilityTest, CountersPerEdge) {
  ScalabilityConfig sc;
  sc.k = 10;
  const auto r = run_scalability(2000, sc);
  EXPECT_EQ(r.edges, 2000u);
  EXPECT_EQ(r.ingest.values_written, 2000u * 2 * sc.d_v);
  EXPECT_EQ(r.inference.queries, 2000u);
  EXPECT_GT(r.seconds, 0.0);
}

}  // namespace
}  // namespace splash
