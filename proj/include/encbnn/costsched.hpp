// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* costsched.hpp
 * Analytic runtime estimates from gate statistics.
 *
 * Within one output unit, gates at the same level run in parallel on
 * `intra_workers` CPUs; each level costs ceil(gates / workers) gate times.
 * Across output units of a layer:
 *   out_seq     every unit one after the other
 *   out_16p     units spread over `machines` machines
 *   out_full_p  one machine per unit
 * Shared window sums are charged once per layer ahead of the units. Layers
 * are sequential.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "encbnn/compiler.hpp"
#include "encbnn/error.hpp"
#include "encbnn/hegate.hpp"

namespace encbnn::costsched {

using hegate::GateStats;

enum class Strategy { OutSeq, Out16P, OutFullP };

inline std::string_view strategy_name(Strategy s) {
  switch (s) {
    case Strategy::OutSeq: return "out_seq";
    case Strategy::Out16P: return "out_16p";
    case Strategy::OutFullP: return "out_full_p";
  }
  return "?";
}

struct CostModel {
  double t_gate = 0.1;  // seconds per bootstrapped gate
  std::size_t intra_workers = 16;
  std::size_t machines = 16;
  Strategy strategy = Strategy::OutSeq;

  void validate() const {
    if (!(t_gate > 0.0)) throw Error("t_gate must be positive");
    if (intra_workers < 1) throw Error("intra_workers must be >= 1");
    if (machines < 1) throw Error("machines must be >= 1");
  }
};

/// Sequential gate-time slots of one scope: sum over levels of
/// ceil(gates_at_level / workers).
inline std::uint64_t per_output_slots(const GateStats& stats, std::size_t workers) {
  if (workers < 1) throw Error("per_output_time: workers must be >= 1");
  std::uint64_t slots = 0;
  for (const auto& [level, gates] : stats.level_histogram) {
    slots += (gates + workers - 1) / workers;
  }
  return slots;
}

inline double per_output_time(const GateStats& stats, std::size_t workers, double t_gate = 0.1) {
  return static_cast<double>(per_output_slots(stats, workers)) * t_gate;
}

struct LayerEstimate {
  std::string label;
  std::size_t outputs = 0;
  double shared = 0.0;
  double max_output = 0.0;
  double sum_outputs = 0.0;
  double out_seq = 0.0;
  double out_16p = 0.0;
  double out_full_p = 0.0;
};

struct Estimate {
  double out_seq = 0.0;
  double out_16p = 0.0;
  double out_full_p = 0.0;
  std::vector<LayerEstimate> layers;

  double selected(Strategy s) const {
    switch (s) {
      case Strategy::OutSeq: return out_seq;
      case Strategy::Out16P: return out_16p;
      case Strategy::OutFullP: return out_full_p;
    }
    return out_seq;
  }
};

/// Estimates all three strategies. The 16-machine figure is
/// ceil(p / machines) rounds of the slowest unit, capped by running every
/// unit in sequence.
inline Estimate estimate(const compiler::StatsTree& tree, const CostModel& cm) {
  cm.validate();
  Estimate e;
  std::uint64_t seq = 0, p16 = 0, full = 0;
  for (const auto& layer : tree.layers) {
    const auto shared = per_output_slots(layer.shared, cm.intra_workers);
    std::uint64_t sum = 0, max = 0;
    for (const auto& o : layer.outputs) {
      const auto t = per_output_slots(o, cm.intra_workers);
      sum += t;
      max = std::max(max, t);
    }
    const std::uint64_t rounds = (layer.outputs.size() + cm.machines - 1) / cm.machines;
    const std::uint64_t l_seq = shared + sum;
    const std::uint64_t l_16p = shared + std::min(rounds * max, sum);
    const std::uint64_t l_full = shared + max;
    seq += l_seq;
    p16 += l_16p;
    full += l_full;

    LayerEstimate le;
    le.label = layer.label;
    le.outputs = layer.outputs.size();
    le.shared = static_cast<double>(shared) * cm.t_gate;
    le.max_output = static_cast<double>(max) * cm.t_gate;
    le.sum_outputs = static_cast<double>(sum) * cm.t_gate;
    le.out_seq = static_cast<double>(l_seq) * cm.t_gate;
    le.out_16p = static_cast<double>(l_16p) * cm.t_gate;
    le.out_full_p = static_cast<double>(l_full) * cm.t_gate;
    e.layers.push_back(std::move(le));
  }
  e.out_seq = static_cast<double>(seq) * cm.t_gate;
  e.out_16p = static_cast<double>(p16) * cm.t_gate;
  e.out_full_p = static_cast<double>(full) * cm.t_gate;
  return e;
}

using Json = nlohmann::ordered_json;

inline Json by_kind_json(const GateStats& s) {
  Json j;
  for (auto k : hegate::kAllGateKinds) {
    if (!hegate::is_costed(k)) continue;
    j[std::string(hegate::gate_name(k))] = s.count(k);
  }
  return j;
}

inline Json by_level_json(const GateStats& s) {
  Json j = Json::object();
  for (const auto& [level, n] : s.level_histogram) j[std::to_string(level)] = n;
  return j;
}

/// Report document: gate counts by kind, layer, output and level, circuit
/// depth, the three estimates and an echo of the options used.
inline Json report(const compiler::StatsTree& tree, const Estimate& est, const CostModel& cm,
                   const Json& options_echo = Json::object()) {
  const auto total = tree.total();
  Json gates;
  gates["total"] = total.total();
  gates["by_kind"] = by_kind_json(total);
  Json layers = Json::array();
  for (const auto& l : tree.layers) {
    Json jl;
    const auto lt = l.total();
    jl["label"] = l.label;
    jl["kind"] = l.kind;
    jl["outputs"] = l.outputs.size();
    jl["total"] = lt.total();
    jl["shared"] = l.shared.total();
    jl["by_kind"] = by_kind_json(lt);
    std::uint64_t max_out = 0;
    Json per_output = Json::array();
    for (const auto& o : l.outputs) {
      per_output.push_back(o.total());
      max_out = std::max(max_out, o.total());
    }
    jl["max_output"] = max_out;
    jl["per_output"] = std::move(per_output);
    jl["summed_bits"] = l.summed_bits;
    jl["depth"] = lt.max_level;
    layers.push_back(std::move(jl));
  }
  gates["by_layer"] = std::move(layers);
  gates["by_level"] = by_level_json(total);

  Json estimates;
  estimates["out_seq"] = est.out_seq;
  estimates["out_16p"] = est.out_16p;
  estimates["out_full_p"] = est.out_full_p;
  estimates["selected"] = strategy_name(cm.strategy);
  estimates["t_gate"] = cm.t_gate;
  estimates["intra_workers"] = cm.intra_workers;
  estimates["machines"] = cm.machines;
  Json per_layer = Json::array();
  for (const auto& le : est.layers) {
    Json j;
    j["label"] = le.label;
    j["out_seq"] = le.out_seq;
    j["out_16p"] = le.out_16p;
    j["out_full_p"] = le.out_full_p;
    per_layer.push_back(std::move(j));
  }
  estimates["by_layer"] = std::move(per_layer);

  Json doc;
  doc["gates"] = std::move(gates);
  doc["depth"] = total.max_level;
  doc["estimates"] = std::move(estimates);
  doc["options_echo"] = options_echo;
  return doc;
}

}  // namespace encbnn::costsched
