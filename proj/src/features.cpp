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

#include "splash/features.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "splash/ctdg.hpp"

namespace splash {

void AugConfig::validate() const {
  if (d_v < 2 || d_v % 2 != 0) {
    throw ConfigError("feature dimension d_v must be even and >= 2, got " + std::to_string(d_v));
  }
  if (!(degree_alpha > 1.0)) throw ConfigError("degree_alpha must exceed 1");
}

FeatureTable::FeatureTable(Process process, std::size_t dim)
    : process_(process), dim_(dim), zeros_(dim, 0.0) {}

void FeatureTable::set_seen(NodeId node, std::vector<double> value) {
  if (value.size() != dim_) {
    throw ContractError("seen feature has length " + std::to_string(value.size()) +
                        ", table dimension is " + std::to_string(dim_));
  }
  if (!seen_.emplace(node, std::move(value)).second) {
    throw ContractError("seen feature of node " + std::to_string(node) + " is already set");
  }
}

std::span<const double> FeatureTable::value(NodeId node) const {
  if (auto it = seen_.find(node); it != seen_.end()) return it->second;
  if (auto it = unseen_.find(node); it != unseen_.end()) return it->second;
  return zeros_;
}

std::vector<double> random_feature(NodeId node, const AugConfig& cfg) {
  std::mt19937_64 rng(derive_seed(cfg.rng_seed, {0x52u, static_cast<std::uint64_t>(node)}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(cfg.d_v);
  for (auto& x : v) x = normal(rng);
  return v;
}

FeatureTable init_random_features(std::span<const NodeId> seen, const AugConfig& cfg) {
  cfg.validate();
  FeatureTable table(Process::R, cfg.d_v);
  for (NodeId v : seen) {
    if (!table.is_seen(v)) table.set_seen(v, random_feature(v, cfg));
  }
  return table;
}

void structural_encode_into(std::uint64_t degree, const AugConfig& cfg, std::span<double> out) {
  const double scale = 2.0 * std::sqrt(static_cast<double>(cfg.d_v));
  const double deg = static_cast<double>(degree);
  for (std::size_t n = 0; n < out.size(); n += 2) {
    const double freq = std::pow(cfg.degree_alpha, -static_cast<double>(n) / scale);
    out[n] = std::cos(freq * deg);
    if (n + 1 < out.size()) out[n + 1] = std::sin(freq * deg);
  }
}

std::vector<double> structural_encode(std::uint64_t degree, const AugConfig& cfg) {
  std::vector<double> out(cfg.d_v);
  structural_encode_into(degree, cfg, out);
  return out;
}

void propagate_on_edge(FeatureTable& table, NodeId node,
                       std::span<const double> neighbor_feature,
                       std::uint64_t pre_edge_degree) {
  if (table.process_ != Process::R && table.process_ != Process::P) {
    throw ContractError("propagation applies only to R and P tables, got " +
                        std::string(process_name(table.process_)));
  }
  if (table.is_seen(node)) {
    throw ContractError("propagation called on seen node " + std::to_string(node));
  }
  if (neighbor_feature.size() != table.dim_) {
    throw ShapeError("neighbor feature length mismatch in propagation");
  }
  auto [it, inserted] = table.unseen_.try_emplace(node, table.dim_, 0.0);
  std::vector<double>& v = it->second;
  const double d = static_cast<double>(pre_edge_degree);
  const double inv = 1.0 / (d + 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = (d * v[i] + neighbor_feature[i]) * inv;
  }
}

std::vector<double> feature_at(const StreamState& state, Process process, NodeId node) {
  if (!state.is_active(process)) {
    throw ConfigError("process " + std::string(process_name(process)) +
                      " is not active in this stream");
  }
  std::vector<double> out(feature_dim(process, state.config().aug.d_v));
  state.feature_into(process, node, out);
  return out;
}

void write_feature_csv(std::ostream& out, std::span<const FeatureTable* const> tables) {
  std::size_t dim = 0;
  for (const auto* t : tables) dim = std::max(dim, t->dim());
  out << "node_id,process";
  for (std::size_t i = 0; i < dim; ++i) out << ",v_" << i;
  out << '\n';
  out << std::setprecision(17);
  for (const auto* t : tables) {
    std::map<NodeId, const std::vector<double>*> sorted;
    for (const auto& [node, v] : t->seen_values()) sorted.emplace(node, &v);
    for (const auto& [node, v] : sorted) {
      out << node << ',' << process_name(t->process());
      for (double x : *v) out << ',' << x;
      out << '\n';
    }
  }
}

std::vector<FeatureTable> read_feature_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError("empty feature file", 1);
  ++lineno;
  if (line.rfind("node_id,process", 0) != 0) throw ParseError("bad feature header", lineno);
  std::vector<FeatureTable> tables;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) throw ParseError("missing node id", lineno);
    NodeId node = 0;
    try {
      node = std::stoll(cell);
    } catch (const std::exception&) {
      throw ParseError("bad node id '" + cell + "'", lineno);
    }
    if (!std::getline(ss, cell, ',')) throw ParseError("missing process", lineno);
    Process p;
    try {
      p = parse_process(cell);
    } catch (const ConfigError&) {
      throw ParseError("bad process '" + cell + "'", lineno);
    }
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("bad feature value '" + cell + "'", lineno);
      }
    }
    auto it = std::find_if(tables.begin(), tables.end(),
                           [p](const FeatureTable& t) { return t.process() == p; });
    if (it == tables.end()) {
      tables.emplace_back(p, values.size());
      it = tables.end() - 1;
    }
    if (values.size() != it->dim()) throw ParseError("inconsistent feature length", lineno);
    it->set_seen(node, std::move(values));
  }
  return tables;
}

}  // namespace splash
