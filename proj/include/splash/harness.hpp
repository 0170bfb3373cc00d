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

// Experiment plumbing: edge-file loaders, the chronological split, the
// augment -> select -> train -> stream-evaluate pipeline, checkpoints, and
// online prediction over interleaved edge/query events.

#ifndef SPLASH_HARNESS_HPP_
#define SPLASH_HARNESS_HPP_

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "splash/ctdg.hpp"
#include "splash/datagen.hpp"
#include "splash/features.hpp"
#include "splash/metrics.hpp"
#include "splash/node2vec.hpp"
#include "splash/select.hpp"
#include "splash/slim.hpp"
#include "splash/task.hpp"

namespace splash {

// Failure inside a pipeline stage; the original error is nested.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error(stage + ": " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// ---------------------------------------------------------------------------
// Datasets

enum class CsvFormat { Native, Jodie };

struct LoadOptions {
  TaskKind task = TaskKind::Classification;
  CsvFormat format = CsvFormat::Native;
  double affinity_window = 0.0;  // T_w, required for the affinity task
  std::size_t label_dim = 0;     // 0 infers from the labels
};

struct Dataset {
  std::string name;
  std::vector<TemporalEdge> edges;
  PropertySet props;
  std::size_t d_e = 0;
  double affinity_window = 0.0;
  std::vector<NodeId> affinity_items;  // affinity coordinate -> destination id
};

// Native: `src,dst,ts,weight,label,f_0,...`; label -1 means no query on that
// row, otherwise the row's source is queried right after the edge. JODIE:
// `user_id,item_id,timestamp,state_label,feat...` with items moved past the
// largest user id and every row an anomaly query on its user.
Dataset parse_edge_csv(std::istream& in, const LoadOptions& opt);
Dataset load_edge_csv(const std::string& path, const LoadOptions& opt);

// Native format; a row carries the label of a query attached to it (the
// first class label, or 1 for affinity queries).
void write_edge_csv(std::ostream& out, const Dataset& ds);

Dataset dataset_from_shift(const ShiftDataset& ds);

struct ChronoSplit {
  PropertySet train, val, test;
  double t_seen = 0.0;
  double t_test = 0.0;
};

ChronoSplit chrono_split(const PropertySet& props, const std::array<double, 3>& fractions);

// Nodes incident to an edge with timestamp <= t.
std::unordered_set<NodeId> nodes_until(std::span<const TemporalEdge> edges, double t);
StaticGraph snapshot_until(std::span<const TemporalEdge> edges, double t);

// ---------------------------------------------------------------------------
// Configuration

struct DataSpec {
  std::string path;
  LoadOptions load;
  std::optional<ShiftGenConfig> synthetic;
  // Without an explicit generator seed each run seed generates its own data.
  bool synthetic_seed_from_run = true;
};

struct ExperimentConfig {
  int version = 1;
  TaskKind task = TaskKind::Classification;
  DataSpec data;
  std::array<double, 3> fractions = {0.1, 0.1, 0.8};
  std::vector<double> split_fractions = kDefaultSplitFractions;
  std::vector<Process> candidates = {Process::R, Process::P, Process::S};
  std::string process = "auto";  // auto | fixed:<R|P|S|Joint|ZF|RF>
  AugConfig aug;
  std::size_t k = 100;
  WalkConfig walk;
  SkipGramConfig skipgram;
  SlimConfig slim;  // process, d_v, d_e and label_dim are filled in per run
  std::vector<double> skip_weights = {1.0, 0.0};
  TrainConfig train;
  LinearFitConfig linear;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir;
  std::size_t predict_batch = 600;
  bool select_only = false;

  void validate() const;
  // The process to train: the fixed one, or nullopt for automatic selection.
  std::optional<Process> fixed_process() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

Dataset load_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Checkpoints

struct Checkpoint {
  TaskKind task = TaskKind::Classification;
  SlimConfig slim;
  StreamConfig stream;
  std::unordered_set<NodeId> seen;
  std::vector<FeatureTable> tables;  // R and/or P seen values
  std::vector<Tensor> params;
  double t_seen = 0.0;
  double t_test = 0.0;
  std::vector<NodeId> affinity_items;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();

  SlimModel model() const;
  StreamState fresh_state() const;
};

// Writes <path> (tensor container) and <path without extension>.json.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Online prediction

struct Prediction {
  std::size_t index = 0;  // query ordinal within the event stream
  NodeId node = 0;
  double time = 0.0;
  int label = -1;
  std::vector<double> probs;
};

// Interleaved edge and query events. A query is answered from the state at
// the moment it arrives; pending queries are batched and the batch size
// never changes an answer.
class StreamPredictor {
 public:
  using Sink = std::function<void(Prediction&&)>;

  // Answers go to `sink` when given, otherwise they are kept in order.
  StreamPredictor(const SlimModel& model, StreamState& state, std::size_t batch = 600,
                  Sink sink = nullptr);

  void on_edge(const TemporalEdge& edge);
  void on_query(NodeId node, double time, int label = -1);
  void flush();
  std::vector<Prediction>& predictions() { return out_; }

 private:
  const SlimModel& model_;
  StreamState& state_;
  std::size_t batch_;
  Sink sink_;
  std::size_t next_index_ = 0;
  double last_time_ = 0.0;
  std::vector<QueryContext> pending_;
  std::vector<Prediction> pending_meta_;
  std::vector<Prediction> out_;
};

struct StreamEvent {
  bool is_query = false;
  TemporalEdge edge;  // for queries: src = node, timestamp = time
  int label = -1;
};

// `kind,src,dst,ts,weight,label,f_0,...` with kind E (edge) or Q (query).
std::vector<StreamEvent> parse_events_csv(std::istream& in);
void write_events_csv(std::ostream& out, std::span<const StreamEvent> events, std::size_t d_e);

// Events for a dataset: every edge, and after each edge the queries of
// `queries` attached to it.
std::vector<StreamEvent> events_for(const Dataset& ds, std::span<const PropertyQuery> queries);

std::vector<Prediction> stream_predict(const Checkpoint& ck, std::span<const StreamEvent> events,
                                       std::size_t batch = 600);

void write_predictions_csv(std::ostream& out, std::span<const Prediction> preds);

// ---------------------------------------------------------------------------
// Pipeline

struct SeedResult {
  std::uint64_t seed = 0;
  Process process = Process::S;
  std::optional<SelectionReport> selection;
  double skip_weight = 1.0;
  std::vector<std::pair<double, TrainHistory>> histories;  // per lambda
  double val_metric = 0.0;
  EvalReport test;
  std::vector<Prediction> predictions;
  Checkpoint checkpoint;
  std::map<std::string, double> timings;  // seconds per stage
};

struct ExperimentResult {
  std::vector<SeedResult> seeds;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
};

// One seed of the pipeline on an already loaded dataset.
SeedResult run_seed(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed);

// All configured seeds; writes artifacts when cfg.output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Metric report without timings (stable across identical runs).
nlohmann::ordered_json metrics_json(const ExperimentResult& r, const ExperimentConfig& cfg);

void write_seed_artifacts(const SeedResult& r, const ExperimentConfig& cfg,
                          const std::string& dir);

// ---------------------------------------------------------------------------
// Throughput

struct ScalabilityResult {
  std::size_t edges = 0;
  double seconds = 0.0;
  OpCounters ingest;
  InferenceCounters inference;
};

struct ScalabilityConfig {
  std::size_t n_nodes = 100;
  std::size_t k = 100;
  std::size_t d_v = 8;
  std::size_t d_h = 8;
  std::size_t d_t = 8;
  std::size_t label_dim = 2;
  std::size_t batch = 600;
  std::uint64_t seed = 0;
};

// Streams n_edges generated edges through an untrained structural-feature
// model with one query per edge, timing ingestion plus inference.
ScalabilityResult run_scalability(std::size_t n_edges, const ScalabilityConfig& cfg);

}  // namespace splash

#endif  // SPLASH_HARNESS_HPP_
