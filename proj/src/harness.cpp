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

#include "splash/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace splash {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// CSV helpers

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, std::size_t line, const char* what) {
  s = trim(s);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(std::string("bad ") + what + " '" + std::string(s) + "'", line);
  }
  return v;
}

long long to_int(std::string_view s, std::size_t line, const char* what) {
  s = trim(s);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    // Accept integral values written as reals, e.g. "3.0".
    const double d = to_double(s, line, what);
    if (d != std::floor(d)) throw ParseError(std::string("non-integer ") + what, line);
    return static_cast<long long>(d);
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void materialise_labels(Dataset& ds, const LoadOptions& opt, const std::vector<long long>& raw,
                        const std::vector<std::size_t>& rows) {
  ds.props.task = opt.task;
  switch (opt.task) {
    case TaskKind::Classification:
    case TaskKind::Anomaly: {
      long long mx = -1;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (raw[i] < 0) throw FormatError("negative class label");
        mx = std::max(mx, raw[i]);
        PropertyQuery q;
        q.node = ds.edges[rows[i]].src;
        q.time = ds.edges[rows[i]].timestamp;
        q.label = static_cast<int>(raw[i]);
        q.stream_pos = rows[i] + 1;
        ds.props.queries.push_back(std::move(q));
      }
      if (opt.task == TaskKind::Anomaly) {
        if (mx > 1) throw FormatError("anomaly labels must be 0 or 1");
        ds.props.label_dim = 2;
      } else {
        ds.props.label_dim = opt.label_dim ? opt.label_dim : static_cast<std::size_t>(mx + 1);
      }
      break;
    }
    case TaskKind::Affinity: {
      if (!(opt.affinity_window > 0.0)) {
        throw ConfigError("affinity task needs a positive window length T_w");
      }
      ds.affinity_window = opt.affinity_window;
      std::set<NodeId> items;
      for (const auto& e : ds.edges) items.insert(e.dst);
      ds.affinity_items.assign(items.begin(), items.end());
      const std::size_t D = ds.affinity_items.size();
      std::unordered_map<NodeId, std::vector<std::size_t>> by_src;
      for (std::size_t i = 0; i < ds.edges.size(); ++i) by_src[ds.edges[i].src].push_back(i);
      for (std::size_t r : rows) {
        const TemporalEdge& qe = ds.edges[r];
        PropertyQuery q;
        q.node = qe.src;
        q.time = qe.timestamp;
        q.stream_pos = r + 1;
        q.affinity.assign(D, 0.0);
        const auto& list = by_src[qe.src];
        auto it = std::upper_bound(list.begin(), list.end(), q.time, [&](double t, std::size_t i) {
          return t < ds.edges[i].timestamp;
        });
        double total = 0.0;
        for (; it != list.end() && ds.edges[*it].timestamp <= q.time + opt.affinity_window; ++it) {
          const TemporalEdge& e = ds.edges[*it];
          const auto pos = std::lower_bound(ds.affinity_items.begin(), ds.affinity_items.end(),
                                            e.dst) - ds.affinity_items.begin();
          q.affinity[static_cast<std::size_t>(pos)] += e.weight;
          total += e.weight;
        }
        if (total > 0.0) {
          for (double& a : q.affinity) a /= total;
        }
        ds.props.queries.push_back(std::move(q));
      }
      ds.props.label_dim = D;
      break;
    }
  }
  ds.props.validate();
}

}  // namespace

// ---------------------------------------------------------------------------
// Loading

Dataset parse_edge_csv(std::istream& in, const LoadOptions& opt) {
  Dataset ds;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = split_fields(line);
  const bool jodie = opt.format == CsvFormat::Jodie;
  const std::size_t fixed = jodie ? 4 : 5;
  if (header.size() < fixed) throw ParseError("header has too few columns", 1);
  if (!jodie) {
    static const char* names[] = {"src", "dst", "ts", "weight", "label"};
    for (std::size_t c = 0; c < 5; ++c) {
      if (trim(header[c]) != names[c]) {
        throw ParseError("header column " + std::to_string(c) + " should be '" + names[c] + "'",
                         1);
      }
    }
  }
  ds.d_e = header.size() - fixed;
  if (jodie && opt.task != TaskKind::Anomaly) {
    warn("JODIE state labels are anomaly labels; task " + std::string(task_name(opt.task)) +
         " reads them as class labels");
  }

  std::vector<long long> labels;
  std::vector<std::size_t> query_rows;
  std::size_t ln = 1;
  double last_t = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != fixed + ds.d_e) {
      throw ParseError("expected " + std::to_string(fixed + ds.d_e) + " fields, found " +
                           std::to_string(f.size()),
                       ln);
    }
    TemporalEdge e;
    e.src = to_int(f[0], ln, "source id");
    e.dst = to_int(f[1], ln, "destination id");
    if (e.src < 0 || e.dst < 0) throw ParseError("negative node id", ln);
    e.timestamp = to_double(f[2], ln, "timestamp");
    if (e.timestamp < 0.0) throw ParseError("negative timestamp", ln);
    long long label;
    if (jodie) {
      label = to_int(f[3], ln, "state label");
    } else {
      e.weight = to_double(f[3], ln, "weight");
      label = to_int(f[4], ln, "label");
    }
    if (e.timestamp < last_t) {
      throw StreamOrderError("timestamp decreases at line " + std::to_string(ln));
    }
    last_t = e.timestamp;
    e.edge_feature.reserve(ds.d_e);
    for (std::size_t c = fixed; c < f.size(); ++c) {
      e.edge_feature.push_back(to_double(f[c], ln, "edge feature"));
    }
    if (label != -1 || jodie) {
      labels.push_back(label);
      query_rows.push_back(ds.edges.size());
    }
    ds.edges.push_back(std::move(e));
  }
  if (jodie) {
    NodeId max_user = -1;
    for (const auto& e : ds.edges) max_user = std::max(max_user, e.src);
    for (auto& e : ds.edges) e.dst += max_user + 1;
  }
  materialise_labels(ds, opt, labels, query_rows);
  return ds;
}

Dataset load_edge_csv(const std::string& path, const LoadOptions& opt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  Dataset ds = parse_edge_csv(in, opt);
  ds.name = fs::path(path).stem().string();
  return ds;
}

void write_edge_csv(std::ostream& out, const Dataset& ds) {
  out << "src,dst,ts,weight,label";
  for (std::size_t c = 0; c < ds.d_e; ++c) out << ",f_" << c;
  out << '\n';
  std::vector<long long> label(ds.edges.size(), -1);
  for (const auto& q : ds.props.queries) {
    if (q.stream_pos == 0 || q.stream_pos > ds.edges.size()) {
      throw FormatError("query not attached to an edge cannot be written");
    }
    long long& slot = label[q.stream_pos - 1];
    if (slot != -1) continue;
    slot = ds.props.task == TaskKind::Affinity ? 1 : q.label;
  }
  for (std::size_t i = 0; i < ds.edges.size(); ++i) {
    const auto& e = ds.edges[i];
    out << e.src << ',' << e.dst << ',' << fmt(e.timestamp) << ',' << fmt(e.weight) << ','
        << label[i];
    for (double x : e.edge_feature) out << ',' << fmt(x);
    out << '\n';
  }
}

Dataset dataset_from_shift(const ShiftDataset& sd) {
  Dataset ds;
  ds.name = "synthetic-" + std::to_string(sd.config.p);
  ds.edges = sd.edges;
  ds.props = sd.props;
  return ds;
}

ChronoSplit chrono_split(const PropertySet& props, const std::array<double, 3>& f) {
  for (double x : f) {
    if (!(x > 0.0)) throw ConfigError("split fractions must be positive");
  }
  if (std::abs(f[0] + f[1] + f[2] - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  const std::size_t n = props.size();
  const auto a = static_cast<std::size_t>(std::llround(f[0] * static_cast<double>(n)));
  const auto b = static_cast<std::size_t>(std::llround((f[0] + f[1]) * static_cast<double>(n)));
  if (a == 0 || b <= a || b >= n) throw ConfigError("chronological split leaves a part empty");
  ChronoSplit s;
  for (PropertySet* p : {&s.train, &s.val, &s.test}) {
    p->task = props.task;
    p->label_dim = props.label_dim;
  }
  s.train.queries.assign(props.queries.begin(), props.queries.begin() + static_cast<long>(a));
  s.val.queries.assign(props.queries.begin() + static_cast<long>(a),
                       props.queries.begin() + static_cast<long>(b));
  s.test.queries.assign(props.queries.begin() + static_cast<long>(b), props.queries.end());
  s.t_seen = s.train.queries.back().time;
  s.t_test = s.val.queries.back().time;
  return s;
}

std::unordered_set<NodeId> nodes_until(std::span<const TemporalEdge> edges, double t) {
  std::unordered_set<NodeId> out;
  for (const auto& e : edges) {
    if (e.timestamp > t) break;
    out.insert(e.src);
    out.insert(e.dst);
  }
  return out;
}

StaticGraph snapshot_until(std::span<const TemporalEdge> edges, double t) {
  StaticGraph g;
  for (const auto& e : edges) {
    if (e.timestamp > t) break;
    g.add(e.src, e.dst, e.weight);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
  if (version != 1) throw ConfigError("unsupported config version " + std::to_string(version));
  if (data.path.empty() && !data.synthetic) throw ConfigError("config names no dataset");
  if (data.load.task != task) throw ConfigError("data loader task differs from the experiment task");
  fixed_process();
  for (Process p : candidates) {
    if (p != Process::R && p != Process::P && p != Process::S) {
      throw ConfigError("selection candidates must be among R, P, S");
    }
  }
  if (candidates.empty()) throw ConfigError("no selection candidates");
  if (skip_weights.empty()) throw ConfigError("no skip weights to try");
  if (seeds.empty()) throw ConfigError("no seeds");
  if (k == 0) throw ConfigError("k must be positive");
  aug.validate();
  walk.validate();
  train.validate();
  slim.time.validate();
  if (data.synthetic) data.synthetic->validate();
}

std::optional<Process> ExperimentConfig::fixed_process() const {
  if (process == "auto") return std::nullopt;
  if (process.rfind("fixed:", 0) == 0) return parse_process(process.substr(6));
  throw ConfigError("process must be 'auto' or 'fixed:<name>', got '" + process + "'");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    check_keys(j,
               {"version", "task", "data", "fractions", "split_fractions", "candidates",
                "process", "aug", "k", "walk", "skipgram", "model", "skip_weights", "train",
                "linear", "seeds", "output_dir", "predict_batch"},
               "config");
    read(j, "version", c.version);
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    c.data.load.task = c.task;
    if (j.contains("data")) {
      const json& d = j.at("data");
      check_keys(d, {"path", "format", "affinity_window", "label_dim", "synthetic"}, "data");
      read(d, "path", c.data.path);
      if (d.contains("format")) {
        const auto f = d.at("format").get<std::string>();
        if (f == "native") {
          c.data.load.format = CsvFormat::Native;
        } else if (f == "jodie") {
          c.data.load.format = CsvFormat::Jodie;
        } else {
          throw ConfigError("unknown data format '" + f + "'");
        }
      }
      read(d, "affinity_window", c.data.load.affinity_window);
      read(d, "label_dim", c.data.load.label_dim);
      if (d.contains("synthetic")) {
        const json& s = d.at("synthetic");
        check_keys(s, {"p", "seed", "n_edges", "t_end", "same_class_prob"}, "data.synthetic");
        ShiftGenConfig g;
        read(s, "p", g.p);
        read(s, "n_edges", g.n_edges);
        read(s, "t_end", g.t_end);
        read(s, "same_class_prob", g.same_class_prob);
        if (s.contains("seed")) {
          g.rng_seed = s.at("seed").get<std::uint64_t>();
          c.data.synthetic_seed_from_run = false;
        }
        c.data.synthetic = g;
      }
    }
    if (j.contains("fractions")) {
      const auto v = j.at("fractions").get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("fractions needs three entries");
      c.fractions = {v[0], v[1], v[2]};
    }
    read(j, "split_fractions", c.split_fractions);
    if (j.contains("candidates")) {
      c.candidates.clear();
      for (const auto& s : j.at("candidates")) c.candidates.push_back(parse_process(s.get<std::string>()));
    }
    read(j, "process", c.process);
    if (j.contains("aug")) {
      const json& a = j.at("aug");
      check_keys(a, {"d_v", "degree_alpha"}, "aug");
      read(a, "d_v", c.aug.d_v);
      read(a, "degree_alpha", c.aug.degree_alpha);
    }
    read(j, "k", c.k);
    if (j.contains("walk")) {
      const json& w = j.at("walk");
      check_keys(w, {"walk_length", "walks_per_node", "p", "q"}, "walk");
      read(w, "walk_length", c.walk.walk_length);
      read(w, "walks_per_node", c.walk.walks_per_node);
      read(w, "p", c.walk.return_p);
      read(w, "q", c.walk.inout_q);
    }
    if (j.contains("skipgram")) {
      const json& s = j.at("skipgram");
      check_keys(s, {"window", "negatives", "epochs", "learning_rate"}, "skipgram");
      read(s, "window", c.skipgram.window);
      read(s, "negatives", c.skipgram.negatives_per_positive);
      read(s, "epochs", c.skipgram.epochs);
      read(s, "learning_rate", c.skipgram.learning_rate);
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      check_keys(m, {"d_h", "message_layers", "aggregate_layers", "decoder_layers", "dropout",
                     "time"},
                 "model");
      read(m, "d_h", c.slim.d_h);
      read(m, "message_layers", c.slim.message_layers);
      read(m, "aggregate_layers", c.slim.aggregate_layers);
      read(m, "decoder_layers", c.slim.decoder_layers);
      read(m, "dropout", c.slim.dropout);
      if (m.contains("time")) {
        const json& t = m.at("time");
        check_keys(t, {"d_t", "alpha", "beta"}, "model.time");
        read(t, "d_t", c.slim.time.d_t);
        read(t, "alpha", c.slim.time.alpha);
        read(t, "beta", c.slim.time.beta);
      }
    }
    read(j, "skip_weights", c.skip_weights);
    if (j.contains("train")) {
      const json& t = j.at("train");
      check_keys(t, {"batch_size", "max_epochs", "patience", "learning_rate", "weight_decay"},
                 "train");
      read(t, "batch_size", c.train.batch_size);
      read(t, "max_epochs", c.train.max_epochs);
      read(t, "patience", c.train.patience);
      read(t, "learning_rate", c.train.adam.learning_rate);
      read(t, "weight_decay", c.train.adam.weight_decay);
    }
    if (j.contains("linear")) {
      const json& l = j.at("linear");
      check_keys(l, {"learning_rate", "iterations", "weight_decay"}, "linear");
      read(l, "learning_rate", c.linear.learning_rate);
      read(l, "iterations", c.linear.iterations);
      read(l, "weight_decay", c.linear.weight_decay);
    }
    read(j, "seeds", c.seeds);
    read(j, "output_dir", c.output_dir);
    read(j, "predict_batch", c.predict_batch);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ojson config_to_json(const ExperimentConfig& c) {
  ojson j;
  j["version"] = c.version;
  j["task"] = std::string(task_name(c.task));
  ojson d;
  if (!c.data.path.empty()) {
    d["path"] = c.data.path;
    d["format"] = c.data.load.format == CsvFormat::Jodie ? "jodie" : "native";
    if (c.data.load.affinity_window > 0.0) d["affinity_window"] = c.data.load.affinity_window;
    if (c.data.load.label_dim) d["label_dim"] = c.data.load.label_dim;
  }
  if (c.data.synthetic) {
    ojson s;
    s["p"] = c.data.synthetic->p;
    if (!c.data.synthetic_seed_from_run) s["seed"] = c.data.synthetic->rng_seed;
    s["n_edges"] = c.data.synthetic->n_edges;
    s["t_end"] = c.data.synthetic->t_end;
    s["same_class_prob"] = c.data.synthetic->same_class_prob;
    d["synthetic"] = s;
  }
  j["data"] = d;
  j["fractions"] = c.fractions;
  j["split_fractions"] = c.split_fractions;
  std::vector<std::string> cands;
  for (Process p : c.candidates) cands.emplace_back(process_name(p));
  j["candidates"] = cands;
  j["process"] = c.process;
  j["aug"] = {{"d_v", c.aug.d_v}, {"degree_alpha", c.aug.degree_alpha}};
  j["k"] = c.k;
  j["walk"] = {{"walk_length", c.walk.walk_length},
               {"walks_per_node", c.walk.walks_per_node},
               {"p", c.walk.return_p},
               {"q", c.walk.inout_q}};
  j["skipgram"] = {{"window", c.skipgram.window},
                   {"negatives", c.skipgram.negatives_per_positive},
                   {"epochs", c.skipgram.epochs},
                   {"learning_rate", c.skipgram.learning_rate}};
  j["model"] = {{"d_h", c.slim.d_h},
                {"message_layers", c.slim.message_layers},
                {"aggregate_layers", c.slim.aggregate_layers},
                {"decoder_layers", c.slim.decoder_layers},
                {"dropout", c.slim.dropout},
                {"time", {{"d_t", c.slim.time.d_t}, {"alpha", c.slim.time.alpha},
                          {"beta", c.slim.time.beta}}}};
  j["skip_weights"] = c.skip_weights;
  j["train"] = {{"batch_size", c.train.batch_size},
                {"max_epochs", c.train.max_epochs},
                {"patience", c.train.patience},
                {"learning_rate", c.train.adam.learning_rate},
                {"weight_decay", c.train.adam.weight_decay}};
  j["linear"] = {{"learning_rate", c.linear.learning_rate},
                 {"iterations", c.linear.iterations},
                 {"weight_decay", c.linear.weight_decay}};
  j["seeds"] = c.seeds;
  if (!c.output_dir.empty()) j["output_dir"] = c.output_dir;
  j["predict_batch"] = c.predict_batch;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

Dataset load_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.data.synthetic) {
    ShiftGenConfig g = *cfg.data.synthetic;
    if (cfg.data.synthetic_seed_from_run) g.rng_seed = seed;
    return dataset_from_shift(gen_synthetic_shift(g));
  }
  return load_edge_csv(cfg.data.path, cfg.data.load);
}

// ---------------------------------------------------------------------------
// Checkpoints

SlimModel Checkpoint::model() const {
  SlimModel m(slim);
  m.load_tensors(params);
  return m;
}

StreamState Checkpoint::fresh_state() const { return StreamState(stream, seen, tables); }

namespace {

std::string sidecar_path(const std::string& path) {
  fs::path p(path);
  p.replace_extension(".json");
  return p.string();
}

ojson slim_to_json(const SlimConfig& s) {
  return {{"process", std::string(process_name(s.process))},
          {"d_v", s.d_v},
          {"d_e", s.d_e},
          {"d_h", s.d_h},
          {"label_dim", s.label_dim},
          {"message_layers", s.message_layers},
          {"aggregate_layers", s.aggregate_layers},
          {"decoder_layers", s.decoder_layers},
          {"skip_weight", s.skip_weight},
          {"dropout", s.dropout},
          {"time", {{"d_t", s.time.d_t}, {"alpha", s.time.alpha}, {"beta", s.time.beta}}},
          {"rng_seed", s.rng_seed}};
}

SlimConfig slim_from_json(const ojson& j) {
  SlimConfig s;
  s.process = parse_process(j.at("process").get<std::string>());
  s.d_v = j.at("d_v");
  s.d_e = j.at("d_e");
  s.d_h = j.at("d_h");
  s.label_dim = j.at("label_dim");
  s.message_layers = j.at("message_layers");
  s.aggregate_layers = j.at("aggregate_layers");
  s.decoder_layers = j.at("decoder_layers");
  s.skip_weight = j.at("skip_weight");
  s.dropout = j.at("dropout");
  s.time.d_t = j.at("time").at("d_t");
  s.time.alpha = j.at("time").at("alpha");
  s.time.beta = j.at("time").at("beta");
  s.rng_seed = j.at("rng_seed");
  return s;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::vector<Tensor> tensors;
  for (const auto& t : ck.params) {
    Tensor c = t;
    c.name = "model/" + t.name;
    tensors.push_back(std::move(c));
  }
  std::vector<NodeId> seen(ck.seen.begin(), ck.seen.end());
  std::sort(seen.begin(), seen.end());
  Tensor s{"seen", seen.size(), 1, {}};
  for (NodeId v : seen) s.data.push_back(static_cast<double>(v));
  tensors.push_back(std::move(s));
  for (const auto& table : ck.tables) {
    const std::string base = "table/" + std::string(process_name(table.process()));
    std::vector<NodeId> ids;
    for (const auto& [v, _] : table.seen_values()) ids.push_back(v);
    std::sort(ids.begin(), ids.end());
    Tensor id_t{base + "/ids", ids.size(), 1, {}};
    Tensor val_t{base + "/values", ids.size(), table.dim(), {}};
    for (NodeId v : ids) {
      id_t.data.push_back(static_cast<double>(v));
      const auto& x = table.seen_values().at(v);
      val_t.data.insert(val_t.data.end(), x.begin(), x.end());
    }
    tensors.push_back(std::move(id_t));
    tensors.push_back(std::move(val_t));
  }
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path);
    write_tensors(out, tensors);
  }
  ojson j;
  j["format_version"] = 1;
  j["task"] = std::string(task_name(ck.task));
  j["model"] = slim_to_json(ck.slim);
  std::vector<std::string> procs;
  for (Process p : ck.stream.processes) procs.emplace_back(process_name(p));
  j["stream"] = {{"d_e", ck.stream.d_e},
                 {"k", ck.stream.k},
                 {"t_seen", ck.stream.t_seen},
                 {"processes", procs},
                 {"aug",
                  {{"d_v", ck.stream.aug.d_v},
                   {"degree_alpha", ck.stream.aug.degree_alpha},
                   {"rng_seed", ck.stream.aug.rng_seed}}}};
  j["t_seen"] = ck.t_seen;
  j["t_test"] = ck.t_test;
  j["affinity_items"] = ck.affinity_items;
  j["history"] = ck.history;
  std::ofstream side(sidecar_path(path));
  if (!side) throw Error("cannot write checkpoint sidecar for " + path);
  side << j.dump(2) << '\n';
}

Checkpoint load_checkpoint(const std::string& path) {
  Checkpoint ck;
  std::ifstream side(sidecar_path(path));
  if (!side) throw ConfigError("missing checkpoint sidecar " + sidecar_path(path));
  ojson j;  // ordered, so the history keeps its key order
  try {
    side >> j;
    if (j.at("format_version").get<int>() != 1) throw FormatError("unsupported checkpoint version");
    ck.task = parse_task(j.at("task").get<std::string>());
    ck.slim = slim_from_json(j.at("model"));
    const ojson& s = j.at("stream");
    ck.stream.d_e = s.at("d_e");
    ck.stream.k = s.at("k");
    ck.stream.t_seen = s.at("t_seen");
    for (const auto& p : s.at("processes")) ck.stream.processes.push_back(parse_process(p.get<std::string>()));
    ck.stream.aug.d_v = s.at("aug").at("d_v");
    ck.stream.aug.degree_alpha = s.at("aug").at("degree_alpha");
    ck.stream.aug.rng_seed = s.at("aug").at("rng_seed");
    ck.stream.track_snapshot = false;
    ck.t_seen = j.at("t_seen");
    ck.t_test = j.at("t_test");
    ck.affinity_items = j.at("affinity_items").get<std::vector<NodeId>>();
    ck.history = j.at("history");
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint sidecar: " + std::string(e.what()));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint " + path);
  auto tensors = read_tensors(in);
  std::map<std::string, const Tensor*> by_name;
  for (const auto& t : tensors) {
    if (t.name.rfind("model/", 0) == 0) {
      Tensor c = t;
      c.name = t.name.substr(6);
      ck.params.push_back(std::move(c));
    } else {
      by_name[t.name] = &t;
    }
  }
  if (by_name.count("seen")) {
    for (double v : by_name["seen"]->data) ck.seen.insert(static_cast<NodeId>(v));
  }
  for (Process p : {Process::R, Process::P}) {
    const std::string base = "table/" + std::string(process_name(p));
    if (!by_name.count(base + "/ids")) continue;
    const Tensor& ids = *by_name.at(base + "/ids");
    const Tensor& vals = *by_name.at(base + "/values");
    FeatureTable table(p, vals.cols);
    for (std::size_t i = 0; i < ids.rows; ++i) {
      table.set_seen(static_cast<NodeId>(ids.data[i]),
                     std::vector<double>(vals.data.begin() + static_cast<long>(i * vals.cols),
                                         vals.data.begin() + static_cast<long>((i + 1) * vals.cols)));
    }
    ck.tables.push_back(std::move(table));
  }
  ck.model();  // validates parameter names and shapes
  return ck;
}

// ---------------------------------------------------------------------------
// Online prediction

StreamPredictor::StreamPredictor(const SlimModel& model, StreamState& state, std::size_t batch,
                                 Sink sink)
    : model_(model), state_(state), batch_(std::max<std::size_t>(1, batch)),
      sink_(std::move(sink)), last_time_(state.current_time()) {}

void StreamPredictor::on_edge(const TemporalEdge& edge) {
  if (edge.timestamp < last_time_) {
    throw StreamOrderError("edge at t=" + std::to_string(edge.timestamp) + " after an event at t=" +
                           std::to_string(last_time_));
  }
  state_.ingest_edge(edge);
  last_time_ = edge.timestamp;
}

void StreamPredictor::on_query(NodeId node, double time, int label) {
  if (time < last_time_) {
    throw StreamOrderError("query at t=" + std::to_string(time) + " after an event at t=" +
                           std::to_string(last_time_));
  }
  last_time_ = time;
  pending_.push_back(model_.make_context(state_, node, time));
  Prediction p;
  p.index = next_index_++;
  p.node = node;
  p.time = time;
  p.label = label;
  pending_meta_.push_back(std::move(p));
  if (pending_.size() >= batch_) flush();
}

void StreamPredictor::flush() {
  if (pending_.empty()) return;
  std::vector<const QueryContext*> ptrs;
  for (const auto& c : pending_) ptrs.push_back(&c);
  const Matrix probs = model_.predict(ptrs);
  for (std::size_t i = 0; i < pending_meta_.size(); ++i) {
    Prediction& p = pending_meta_[i];
    p.probs.assign(probs.row(i), probs.row(i) + probs.cols());
    if (sink_) {
      sink_(std::move(p));
    } else {
      out_.push_back(std::move(p));
    }
  }
  pending_.clear();
  pending_meta_.clear();
}

std::vector<StreamEvent> parse_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto header = split_fields(line);
  static const char* names[] = {"kind", "src", "dst", "ts", "weight", "label"};
  if (header.size() < 6) throw ParseError("header has too few columns", 1);
  for (std::size_t c = 0; c < 6; ++c) {
    if (trim(header[c]) != names[c]) {
      throw ParseError("header column " + std::to_string(c) + " should be '" + names[c] + "'", 1);
    }
  }
  const std::size_t d_e = header.size() - 6;
  std::vector<StreamEvent> out;
  std::size_t ln = 1;
  double last = -std::numeric_limits<double>::infinity();
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    const auto f = split_fields(line);
    if (f.size() != 6 + d_e) throw ParseError("wrong field count", ln);
    StreamEvent ev;
    const auto kind = trim(f[0]);
    if (kind == "E") {
      ev.is_query = false;
    } else if (kind == "Q") {
      ev.is_query = true;
    } else {
      throw ParseError("event kind must be E or Q", ln);
    }
    ev.edge.src = to_int(f[1], ln, "source id");
    ev.edge.timestamp = to_double(f[3], ln, "timestamp");
    if (ev.edge.timestamp < last) {
      throw StreamOrderError("timestamp decreases at line " + std::to_string(ln));
    }
    last = ev.edge.timestamp;
    ev.label = static_cast<int>(to_int(f[5], ln, "label"));
    if (!ev.is_query) {
      ev.edge.dst = to_int(f[2], ln, "destination id");
      ev.edge.weight = to_double(f[4], ln, "weight");
      for (std::size_t c = 6; c < f.size(); ++c) {
        ev.edge.edge_feature.push_back(to_double(f[c], ln, "edge feature"));
      }
    }
    out.push_back(std::move(ev));
  }
  return out;
}

void write_events_csv(std::ostream& out, std::span<const StreamEvent> events, std::size_t d_e) {
  out << "kind,src,dst,ts,weight,label";
  for (std::size_t c = 0; c < d_e; ++c) out << ",f_" << c;
  out << '\n';
  for (const auto& ev : events) {
    if (ev.is_query) {
      out << "Q," << ev.edge.src << ",-1," << fmt(ev.edge.timestamp) << ",0," << ev.label;
      for (std::size_t c = 0; c < d_e; ++c) out << ",0";
    } else {
      out << "E," << ev.edge.src << ',' << ev.edge.dst << ',' << fmt(ev.edge.timestamp) << ','
          << fmt(ev.edge.weight) << ",-1";
      for (double x : ev.edge.edge_feature) out << ',' << fmt(x);
    }
    out << '\n';
  }
}

std::vector<StreamEvent> events_for(const Dataset& ds, std::span<const PropertyQuery> queries) {
  std::vector<StreamEvent> out;
  out.reserve(ds.edges.size() + queries.size());
  std::size_t qi = 0;
  auto emit_queries = [&](std::size_t pos) {
    for (; qi < queries.size() && queries[qi].stream_pos == pos; ++qi) {
      StreamEvent ev;
      ev.is_query = true;
      ev.edge.src = queries[qi].node;
      ev.edge.dst = -1;
      ev.edge.timestamp = queries[qi].time;
      ev.label = queries[qi].label;
      out.push_back(std::move(ev));
    }
  };
  emit_queries(0);
  for (std::size_t i = 0; i < ds.edges.size(); ++i) {
    StreamEvent ev;
    ev.edge = ds.edges[i];
    out.push_back(std::move(ev));
    emit_queries(i + 1);
  }
  if (qi != queries.size()) throw ContractError("queries not ordered by stream position");
  return out;
}

std::vector<Prediction> stream_predict(const Checkpoint& ck, std::span<const StreamEvent> events,
                                       std::size_t batch) {
  const SlimModel model = ck.model();
  StreamState state = ck.fresh_state();
  StreamPredictor pred(model, state, batch);
  for (const auto& ev : events) {
    if (ev.is_query) {
      pred.on_query(ev.edge.src, ev.edge.timestamp, ev.label);
    } else {
      pred.on_edge(ev.edge);
    }
  }
  pred.flush();
  return std::move(pred.predictions());
}

void write_predictions_csv(std::ostream& out, std::span<const Prediction> preds) {
  const std::size_t C = preds.empty() ? 0 : preds.front().probs.size();
  out << "index,node,ts,label,predicted";
  for (std::size_t c = 0; c < C; ++c) out << ",p_" << c;
  out << '\n';
  for (const auto& p : preds) {
    out << p.index << ',' << p.node << ',' << fmt(p.time) << ',' << p.label << ','
        << argmax(p.probs);
    for (double x : p.probs) out << ',' << fmt(x);
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Pipeline

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    std::throw_with_nested(StageError(stage, e.what()));
  }
}

std::vector<FeatureTable> tables_for(const std::vector<FeatureTable>& all,
                                     std::span<const Process> processes) {
  std::vector<FeatureTable> out;
  for (const auto& t : all) {
    for (Process p : processes) {
      const auto bases = base_processes(p);
      if (std::find(bases.begin(), bases.end(), t.process()) != bases.end()) {
        out.push_back(t);
        break;
      }
    }
  }
  return out;
}

}  // namespace

SeedResult run_seed(const ExperimentConfig& cfg, const Dataset& ds, std::uint64_t seed) {
  SeedResult res;
  res.seed = seed;
  const auto fixed = cfg.fixed_process();

  const ChronoSplit split = staged("split", [&] { return chrono_split(ds.props, cfg.fractions); });
  const auto seen = nodes_until(ds.edges, split.t_seen);

  AugConfig aug = cfg.aug;
  aug.rng_seed = derive_seed(seed, {1});
  std::vector<Process> needed;
  if (fixed) {
    needed = base_processes(*fixed);
  } else {
    needed = cfg.candidates;
  }
  auto needs = [&](Process p) { return std::find(needed.begin(), needed.end(), p) != needed.end(); };

  auto t0 = Clock::now();
  std::vector<FeatureTable> tables = staged("augmentation", [&] {
    std::vector<FeatureTable> out;
    std::vector<NodeId> ids(seen.begin(), seen.end());
    std::sort(ids.begin(), ids.end());
    if (needs(Process::R)) out.push_back(init_random_features(ids, aug));
    if (needs(Process::P)) {
      WalkConfig w = cfg.walk;
      w.rng_seed = derive_seed(seed, {2});
      SkipGramConfig sg = cfg.skipgram;
      sg.embed_dim = aug.d_v;
      sg.rng_seed = derive_seed(seed, {3});
      out.push_back(fit_positional(snapshot_until(ds.edges, split.t_seen), w, sg));
    }
    return out;
  });
  res.timings["augmentation"] = seconds_since(t0);

  StreamConfig sc;
  sc.d_e = ds.d_e;
  sc.k = cfg.k;
  sc.t_seen = split.t_seen;
  sc.aug = aug;
  sc.track_snapshot = false;

  if (fixed) {
    res.process = *fixed;
  } else {
    t0 = Clock::now();
    res.selection = staged("selection", [&] {
      StreamConfig s = sc;
      s.processes = cfg.candidates;
      StreamState state(s, seen, tables_for(tables, cfg.candidates));
      // Only properties before the test period are read here.
      PropertySet avail;
      avail.task = ds.props.task;
      avail.label_dim = ds.props.label_dim;
      avail.queries = split.train.queries;
      avail.queries.insert(avail.queries.end(), split.val.queries.begin(), split.val.queries.end());
      return select_process(state, ds.edges, avail, cfg.candidates, cfg.split_fractions,
                            cfg.linear);
    });
    res.process = res.selection->chosen;
    res.timings["selection"] = seconds_since(t0);
  }
  if (cfg.select_only) return res;

  const std::vector<Process> active = {res.process};
  sc.processes = active;
  SlimConfig slim = cfg.slim;
  slim.process = res.process;
  slim.d_v = aug.d_v;
  slim.d_e = ds.d_e;
  slim.label_dim = ds.props.label_dim;
  slim.rng_seed = derive_seed(seed, {4});
  TrainConfig tc = cfg.train;
  tc.rng_seed = derive_seed(seed, {5});

  t0 = Clock::now();
  std::optional<SlimModel> best;
  staged("training", [&] {
    StreamState state(sc, seen, tables_for(tables, active));
    StreamCursor cursor(state, ds.edges);
    const SlimModel probe(slim);
    const auto train_ctx = collect_contexts(probe, cursor, split.train.queries);
    const auto val_ctx = collect_contexts(probe, cursor, split.val.queries);
    std::vector<Target> targets;
    for (const auto& q : split.train.queries) targets.push_back(q.target());
    const auto metric = task_validation_metric(ds.props.task, split.val.queries);
    double best_metric = -std::numeric_limits<double>::infinity();
    for (double lambda : cfg.skip_weights) {
      SlimConfig sl = slim;
      sl.skip_weight = lambda;
      SlimModel model(sl);
      TrainHistory h = train_slim(model, train_ctx, targets, val_ctx, metric, tc);
      if (h.best_metric > best_metric) {
        best_metric = h.best_metric;
        best.emplace(model);
        res.skip_weight = lambda;
      }
      res.histories.emplace_back(lambda, std::move(h));
    }
    res.val_metric = best_metric;
    return 0;
  });
  res.timings["training"] = seconds_since(t0);

  t0 = Clock::now();
  staged("test", [&] {
    StreamState state(sc, seen, tables_for(tables, active));
    StreamPredictor pred(*best, state, cfg.predict_batch);
    const auto events = events_for(ds, split.test.queries);
    for (const auto& ev : events) {
      if (ev.is_query) {
        pred.on_query(ev.edge.src, ev.edge.timestamp, ev.label);
      } else {
        pred.on_edge(ev.edge);
      }
    }
    pred.flush();
    res.predictions = std::move(pred.predictions());
    Matrix probs(res.predictions.size(), slim.label_dim);
    for (std::size_t i = 0; i < res.predictions.size(); ++i) {
      std::copy(res.predictions[i].probs.begin(), res.predictions[i].probs.end(), probs.row(i));
    }
    res.test = evaluate(ds.props.task, probs, split.test.queries);
    return 0;
  });
  res.timings["test"] = seconds_since(t0);

  Checkpoint& ck = res.checkpoint;
  ck.task = ds.props.task;
  ck.slim = best->config();
  ck.stream = sc;
  ck.seen = seen;
  ck.tables = tables_for(tables, active);
  ck.params = best->to_tensors();
  ck.t_seen = split.t_seen;
  ck.t_test = split.t_test;
  ck.affinity_items = ds.affinity_items;
  for (const auto& [lambda, h] : res.histories) {
    for (const auto& e : h.epochs) {
      ck.history.push_back({{"skip_weight", lambda},
                            {"epoch", e.epoch},
                            {"train_loss", e.train_loss},
                            {"val_metric", e.val_metric}});
    }
  }
  return res;
}

namespace {

ojson seed_json(const SeedResult& r) {
  ojson j;
  j["seed"] = r.seed;
  j["process"] = std::string(process_name(r.process));
  j["skip_weight"] = r.skip_weight;
  j["val_metric"] = r.val_metric;
  j["test_metric"] = r.test.value;
  j["test_queries"] = r.test.query_count;
  j["skipped_queries"] = r.test.skipped;
  ojson b = ojson::object();
  for (const auto& [k, v] : r.test.breakdown) b[k] = v;
  j["breakdown"] = b;
  return j;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

}  // namespace

ojson metrics_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  ojson j;
  j["task"] = std::string(task_name(cfg.task));
  j["metric"] = r.metric;
  j["f1_averaging"] = "micro (macro in breakdown)";
  j["ndcg_relevance"] = "raw truth affinity";
  j["mean"] = r.mean;
  j["std"] = r.stddev;
  ojson seeds = ojson::array();
  for (const auto& s : r.seeds) seeds.push_back(seed_json(s));
  j["seeds"] = seeds;
  return j;
}

void write_seed_artifacts(const SeedResult& r, const ExperimentConfig& cfg,
                          const std::string& dir) {
  fs::create_directories(dir);
  const fs::path d(dir);
  if (r.selection) {
    write_text(d / "selection.json", selection_report_json(*r.selection) + "\n");
  } else {
    ojson j;
    j["chosen"] = std::string(process_name(r.process));
    j["fixed"] = true;
    write_text(d / "selection.json", j.dump(2) + "\n");
  }
  ojson timing(r.timings);
  write_text(d / "timing.json", timing.dump(2) + "\n");
  if (cfg.select_only) return;
  {
    std::ofstream out(d / "predictions.csv");
    write_predictions_csv(out, r.predictions);
  }
  {
    std::ofstream out(d / "history.csv");
    out << "skip_weight,epoch,train_loss,val_metric\n";
    for (const auto& [lambda, h] : r.histories) {
      for (const auto& e : h.epochs) {
        out << fmt(lambda) << ',' << e.epoch << ',' << fmt(e.train_loss) << ','
            << fmt(e.val_metric) << '\n';
      }
    }
  }
  save_checkpoint(r.checkpoint, (d / "checkpoint.bin").string());
}

ExperimentResult run_experiment(const ExperimentConfig& cfg_in) {
  ExperimentConfig cfg = cfg_in;
  if (const auto s = seed_override()) cfg.seeds = {*s};
  cfg.validate();
  ExperimentResult out;
  out.metric = metric_name(cfg.task);
  std::optional<Dataset> shared;
  const bool per_seed_data = cfg.data.synthetic && cfg.data.synthetic_seed_from_run;
  for (std::uint64_t seed : cfg.seeds) {
    if (per_seed_data || !shared) shared = staged("load", [&] { return load_dataset(cfg, seed); });
    SeedResult r = run_seed(cfg, *shared, seed);
    if (!cfg.output_dir.empty()) {
      const std::string dir = cfg.seeds.size() == 1
                                  ? cfg.output_dir
                                  : (fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed))).string();
      write_seed_artifacts(r, cfg, dir);
      if (cfg.seeds.size() > 1 && !cfg.select_only) {
        ExperimentResult one;
        one.metric = out.metric;
        one.mean = r.test.value;
        one.seeds.push_back(r);
        write_text(fs::path(dir) / "metrics.json", metrics_json(one, cfg).dump(2) + "\n");
      }
    }
    out.seeds.push_back(std::move(r));
  }
  if (!cfg.select_only) {
    double sum = 0.0;
    for (const auto& s : out.seeds) sum += s.test.value;
    out.mean = sum / static_cast<double>(out.seeds.size());
    double var = 0.0;
    for (const auto& s : out.seeds) var += (s.test.value - out.mean) * (s.test.value - out.mean);
    out.stddev = out.seeds.size() > 1 ? std::sqrt(var / static_cast<double>(out.seeds.size() - 1))
                                      : 0.0;
    if (!cfg.output_dir.empty()) {
      fs::create_directories(cfg.output_dir);
      write_text(fs::path(cfg.output_dir) / "metrics.json", metrics_json(out, cfg).dump(2) + "\n");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Throughput

ScalabilityResult run_scalability(std::size_t n_edges, const ScalabilityConfig& cfg) {
  SlimConfig sl;
  sl.process = Process::S;
  sl.d_v = cfg.d_v;
  sl.d_h = cfg.d_h;
  sl.time.d_t = cfg.d_t;
  sl.label_dim = cfg.label_dim;
  sl.rng_seed = cfg.seed;
  const SlimModel model(sl);
  StreamConfig sc;
  sc.k = cfg.k;
  sc.processes = {Process::S};
  sc.aug.d_v = cfg.d_v;
  sc.track_snapshot = false;
  StreamState state(sc);
  double checksum = 0.0;
  StreamPredictor pred(model, state, cfg.batch,
                       [&](Prediction&& p) { checksum += p.probs[0]; });
  auto stream = gen_scalability(cfg.n_nodes, n_edges, cfg.seed);
  TemporalEdge e;
  const auto t0 = Clock::now();
  while (stream.next(e)) {
    pred.on_edge(e);
    pred.on_query(e.src, e.timestamp);
  }
  pred.flush();
  ScalabilityResult r;
  r.seconds = seconds_since(t0);
  r.edges = n_edges;
  r.ingest = state.counters();
  r.inference = model.counters();
  if (!std::isfinite(checksum)) throw DivergenceError("non-finite scalability predictions");
  return r;
}

}  // namespace splash
