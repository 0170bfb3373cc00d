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

// splash: command-line front end for the experiment pipeline.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "splash/harness.hpp"

namespace {

using namespace splash;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << (depth == 0 ? "error: " : "  caused by: ") << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  } catch (...) {
  }
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const FormatError*>(&e)) return 3;
  if (dynamic_cast<const StreamOrderError*>(&e)) return 4;
  return 1;
}

int innermost_code(const std::exception& e) {
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return innermost_code(inner);
  } catch (...) {
  }
  return exit_code(e);
}

int cmd_gen(int p, std::uint64_t seed, const std::string& out) {
  ShiftGenConfig g;
  g.p = p;
  g.rng_seed = seed;
  const ShiftDataset sd = gen_synthetic_shift(g);
  fs::create_directories(out);
  {
    std::ofstream f(fs::path(out) / "edges.csv");
    write_edge_csv(f, dataset_from_shift(sd));
  }
  std::ofstream m(fs::path(out) / "manifest.json");
  m << sd.manifest_json() << '\n';
  std::cout << "wrote " << sd.edges.size() << " edges to " << out << '\n';
  return 0;
}

void summarise(const ExperimentResult& r) {
  for (const auto& s : r.seeds) {
    std::cout << "seed " << s.seed << ": process " << process_name(s.process);
    if (!s.histories.empty()) {
      std::cout << ", skip weight " << s.skip_weight << ", val " << s.val_metric << ", test "
                << r.metric << ' ' << s.test.value;
    }
    std::cout << '\n';
  }
  if (!r.seeds.empty() && !r.seeds.front().histories.empty()) {
    std::cout << r.metric << " mean " << r.mean << " std " << r.stddev << '\n';
  }
}

int cmd_select(ExperimentConfig cfg) {
  cfg.process = "auto";
  cfg.select_only = true;
  const ExperimentResult r = run_experiment(cfg);
  for (const auto& s : r.seeds) {
    if (s.selection) std::cout << selection_report_json(*s.selection) << '\n';
  }
  summarise(r);
  return 0;
}

int cmd_train(ExperimentConfig cfg) {
  const ExperimentResult r = run_experiment(cfg);
  summarise(r);
  if (cfg.output_dir.empty()) std::cout << metrics_json(r, cfg).dump(2) << '\n';
  return 0;
}

int cmd_eval(const std::string& ck_path, const std::string& data, const std::string& format,
             double window, std::size_t batch) {
  const Checkpoint ck = load_checkpoint(ck_path);
  LoadOptions opt;
  opt.task = ck.task;
  opt.format = format == "jodie" ? CsvFormat::Jodie : CsvFormat::Native;
  opt.affinity_window = window;
  opt.label_dim = ck.task == TaskKind::Affinity ? 0 : ck.slim.label_dim;
  const Dataset ds = load_edge_csv(data, opt);
  if (ds.d_e != ck.slim.d_e) throw ConfigError("edge feature width differs from the checkpoint");
  if (ds.props.label_dim != ck.slim.label_dim) {
    throw ConfigError("label dimension differs from the checkpoint");
  }
  std::vector<PropertyQuery> queries;
  for (const auto& q : ds.props.queries) {
    if (q.time > ck.t_test) queries.push_back(q);
  }
  if (queries.empty()) throw ConfigError("no queries after the validation period");
  const auto preds = stream_predict(ck, events_for(ds, queries), batch);
  Matrix probs(preds.size(), ck.slim.label_dim);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    std::copy(preds[i].probs.begin(), preds[i].probs.end(), probs.row(i));
  }
  const EvalReport rep = evaluate(ck.task, probs, queries);
  ojson j;
  j["metric"] = rep.metric;
  j["value"] = rep.value;
  j["queries"] = rep.query_count;
  j["skipped"] = rep.skipped;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_predict(const std::string& ck_path, const std::string& events, const std::string& out,
                std::size_t batch) {
  const Checkpoint ck = load_checkpoint(ck_path);
  std::ifstream in(events);
  if (!in) throw ConfigError("cannot open " + events);
  const auto evs = parse_events_csv(in);
  const auto preds = stream_predict(ck, evs, batch);
  if (out.empty() || out == "-") {
    write_predictions_csv(std::cout, preds);
  } else {
    std::ofstream f(out);
    if (!f) throw Error("cannot write " + out);
    write_predictions_csv(f, preds);
  }
  return 0;
}

int cmd_bench(std::size_t edges, std::size_t nodes, std::size_t k) {
  ScalabilityConfig sc;
  sc.n_nodes = nodes;
  sc.k = k;
  if (const auto s = seed_override()) sc.seed = *s;
  const ScalabilityResult r = run_scalability(edges, sc);
  ojson j;
  j["edges"] = r.edges;
  j["nodes"] = nodes;
  j["k"] = k;
  j["seconds"] = r.seconds;
  j["edges_per_second"] = static_cast<double>(r.edges) / r.seconds;
  j["values_written_per_edge"] =
      static_cast<double>(r.ingest.values_written) / static_cast<double>(r.edges);
  j["message_rows_per_query"] =
      static_cast<double>(r.inference.message_rows) / static_cast<double>(r.inference.queries);
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Node property prediction on edge streams with feature augmentation"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (overrides SPLASH_THREADS)");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Suppress warnings");

  auto* gen = app.add_subcommand("gen-synthetic", "Generate a class-shift dataset");
  int p = 90;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--p", p, "Shift intensity in [50, 100]")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->required();
  gen->add_option("--out", gen_out, "Output directory")->required();

  std::string config;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seeds", seeds, "Seeds (override the config)");
  };
  auto* sel = app.add_subcommand("select", "Rank augmentation processes with linear models");
  add_common(sel);
  auto* train = app.add_subcommand("train", "Run the full pipeline and evaluate on the test part");
  add_common(train);
  std::string process;
  train->add_option("--process", process, "auto or fixed:<R|P|S|Joint|ZF|RF>");

  std::string checkpoint, data, format = "native";
  double window = 0.0;
  std::size_t batch = 600;
  auto* ev = app.add_subcommand("eval", "Score a checkpoint on the test part of a dataset");
  ev->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data)->required()->check(CLI::ExistingFile);
  ev->add_option("--format", format)->check(CLI::IsMember({"native", "jodie"}));
  ev->add_option("--affinity-window", window, "T_w for affinity labels");
  ev->add_option("--batch", batch);

  std::string events, pred_out;
  auto* pr = app.add_subcommand("predict", "Answer queries in an interleaved event file");
  pr->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  pr->add_option("--events", events)->required()->check(CLI::ExistingFile);
  pr->add_option("--out", pred_out, "Predictions CSV (default stdout)");
  pr->add_option("--batch", batch);

  std::size_t bench_edges = 0, bench_nodes = 100, bench_k = 100;
  auto* bench = app.add_subcommand("bench", "Streaming inference throughput");
  bench->add_option("--edges", bench_edges)->required();
  bench->add_option("--nodes", bench_nodes)->required();
  bench->add_option("--k", bench_k);

  CLI11_PARSE(app, argc, argv);

  try {
    if (threads > 0) set_worker_count(threads);
    set_warnings_quiet(quiet);
    auto load = [&] {
      ExperimentConfig cfg = load_config(config);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (!seeds.empty()) cfg.seeds = seeds;
      if (!process.empty()) cfg.process = process;
      cfg.validate();
      return cfg;
    };
    if (*gen) return cmd_gen(p, gen_seed, gen_out);
    if (*sel) return cmd_select(load());
    if (*train) return cmd_train(load());
    if (*ev) return cmd_eval(checkpoint, data, format, window, batch);
    if (*pr) return cmd_predict(checkpoint, events, pred_out, batch);
    if (*bench) return cmd_bench(bench_edges, bench_nodes, bench_k);
  } catch (const std::exception& e) {
    print_nested(e);
    return innermost_code(e);
  }
  return 0;
}
