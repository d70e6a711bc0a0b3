// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "flp/instance.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flp/rng.hpp"

namespace flp {

using nlohmann::json;

namespace {

std::string padded_id(const char* prefix, int index, int count) {
  int width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index);
  while (digits.size() < static_cast<std::size_t>(width)) digits.insert(digits.begin(), '0');
  return std::string(prefix) + digits;
}

// Truncated normal: redraw until nonnegative. cov 0 collapses to the mean.
double truncated_normal(SplitMix64& rng, double mean, double cov) {
  if (cov <= 0.0 || mean <= 0.0) return mean;
  const double sigma = cov * mean;
  for (;;) {
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    if (u1 <= 0.0) continue;
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    const double value = mean + sigma * z;
    if (value >= 0.0) return value;
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& ex) {
    throw std::runtime_error(path + ": " + ex.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

double require_number(const json& j, const std::string& key, const std::string& where,
                      bool nonnegative = true) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw std::runtime_error(where + ": missing or non-numeric field '" + key + "'");
  }
  const double v = j[key].get<double>();
  if (nonnegative && v < 0.0) {
    throw std::runtime_error(where + ": field '" + key + "' must be >= 0");
  }
  return v;
}

std::string require_string(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw std::runtime_error(where + ": missing or non-string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

json config_to_json(const SolveConfig& config) {
  // threads is an execution detail, not part of the result; leaving it out
  // keeps solution files byte-identical across --threads settings.
  json j;
  j["k"] = config.k;
  j["epsilon"] = config.epsilon;
  j["mu"] = config.mu;
  j["sinkhorn_tol"] = config.sinkhorn_tol;
  j["sinkhorn_max_iters"] = config.sinkhorn_max_iters;
  j["seed"] = config.seed;
  j["flow_quantum"] = config.flow_quantum;
  j["feasibility_tol"] = config.feasibility_tol;
  return j;
}

SolveConfig config_from_json(const json& j) {
  SolveConfig c;
  c.k = j.value("k", c.k);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.mu = j.value("mu", c.mu);
  c.sinkhorn_tol = j.value("sinkhorn_tol", c.sinkhorn_tol);
  c.sinkhorn_max_iters = j.value("sinkhorn_max_iters", c.sinkhorn_max_iters);
  c.seed = j.value("seed", c.seed);
  c.flow_quantum = j.value("flow_quantum", c.flow_quantum);
  c.feasibility_tol = j.value("feasibility_tol", c.feasibility_tol);
  return c;
}

}  // namespace

SupplyNetwork generate(const GeneratorSpec& spec) {
  if (spec.m < 1 || spec.n < 1 || spec.channels < 1) {
    throw std::invalid_argument("generator needs m, n, channels >= 1");
  }
  if (spec.edge_density <= 0.0 || spec.edge_density > 1.0) {
    throw std::invalid_argument("edge_density must be in (0, 1]");
  }
  if (spec.capacity_to_demand_ratio < 0.5 || spec.capacity_to_demand_ratio > 1.5) {
    throw std::invalid_argument("capacity_to_demand_ratio must be in [0.5, 1.5]");
  }
  if (spec.cost_min < 0.0 || spec.cost_max < spec.cost_min) {
    throw std::invalid_argument("need 0 <= cost_min <= cost_max");
  }

  SplitMix64 rng(spec.seed);
  SupplyNetwork net;

  for (int e = 0; e < spec.channels; ++e) net.channels.push_back(padded_id("ch", e, spec.channels));

  for (int j = 0; j < spec.n; ++j) {
    net.clients.push_back(
        {padded_id("c", j, spec.n), truncated_normal(rng, spec.mean_demand, spec.cov_demand)});
  }
  double total_demand = 0.0;
  for (const Client& c : net.clients) total_demand += c.demand;

  // fcaps are drawn around 1 and rescaled so the totals land exactly on the
  // requested capacity-to-demand ratio; rescaling preserves the spread.
  std::vector<double> fcap_raw(spec.m);
  double fcap_sum = 0.0;
  for (int i = 0; i < spec.m; ++i) {
    fcap_raw[i] = truncated_normal(rng, 1.0, spec.cov_fcap);
    fcap_sum += fcap_raw[i];
  }
  const double fcap_scale =
      fcap_sum > 0.0 ? spec.capacity_to_demand_ratio * total_demand / fcap_sum : 0.0;
  const double mean_fcap = spec.capacity_to_demand_ratio * total_demand / spec.m;
  const double mean_ccap = spec.channel_cap_factor * mean_fcap / spec.channels;

  for (int i = 0; i < spec.m; ++i) {
    Facility f;
    f.id = padded_id("f", i, spec.m);
    f.fixed_cost = truncated_normal(rng, spec.mean_fixed_cost, spec.cov_fixed_cost);
    f.fcap = fcap_raw[i] * fcap_scale;
    for (const std::string& channel : net.channels) {
      const double ccap = truncated_normal(rng, mean_ccap, spec.cov_ccap);
      f.channel_caps[channel] = std::min(ccap, f.fcap);
    }
    net.facilities.push_back(std::move(f));
  }

  double max_cost = 0.0;
  auto draw_cost = [&rng, &spec, &max_cost]() {
    const double c = spec.cost_min + rng.next_double() * (spec.cost_max - spec.cost_min);
    max_cost = std::max(max_cost, c);
    return c;
  };

  std::vector<char> client_covered(spec.n, 0);
  for (int i = 0; i < spec.m; ++i) {
    for (int j = 0; j < spec.n; ++j) {
      for (int e = 0; e < spec.channels; ++e) {
        if (rng.next_double() >= spec.edge_density) continue;
        net.edges.push_back(
            {net.facilities[i].id, net.clients[j].id, net.channels[e], draw_cost()});
        client_covered[j] = 1;
      }
    }
  }
  for (int j = 0; j < spec.n; ++j) {
    if (client_covered[j]) continue;
    net.edges.push_back({net.facilities[j % spec.m].id, net.clients[j].id,
                         net.channels[j % spec.channels], draw_cost()});
  }

  net.penalty_C = spec.penalty_multiplier * (max_cost > 0.0 ? max_cost : spec.cost_max);
  net.canonicalize();
  return net;
}

SupplyNetwork load_network(const std::string& path, LoadReport* report) {
  const json j = read_json_file(path);
  SupplyNetwork net;

  if (!j.contains("facilities") || !j["facilities"].is_array()) {
    throw std::runtime_error(path + ": missing 'facilities' array");
  }
  if (!j.contains("clients") || !j["clients"].is_array()) {
    throw std::runtime_error(path + ": missing 'clients' array");
  }
  if (!j.contains("edges") || !j["edges"].is_array()) {
    throw std::runtime_error(path + ": missing 'edges' array");
  }

  std::vector<std::string> channels;
  for (const json& jf : j["facilities"]) {
    Facility f;
    f.id = require_string(jf, "id", path + ": facility");
    f.fixed_cost = require_number(jf, "fixed_cost", path + ": facility " + f.id);
    f.fcap = require_number(jf, "fcap", path + ": facility " + f.id);
    if (!jf.contains("channels") || !jf["channels"].is_array()) {
      throw std::runtime_error(path + ": facility " + f.id + ": missing 'channels' array");
    }
    for (const json& jc : jf["channels"]) {
      const std::string channel = require_string(jc, "channel", path + ": facility " + f.id);
      f.channel_caps[channel] =
          require_number(jc, "ccap", path + ": facility " + f.id + " channel " + channel);
      channels.push_back(channel);
    }
    net.facilities.push_back(std::move(f));
  }
  for (const json& jc : j["clients"]) {
    Client c;
    c.id = require_string(jc, "id", path + ": client");
    c.demand = require_number(jc, "demand", path + ": client " + c.id);
    net.clients.push_back(std::move(c));
  }
  for (const json& je : j["edges"]) {
    Edge e;
    e.facility = require_string(je, "facility", path + ": edge");
    e.client = require_string(je, "client", path + ": edge");
    e.channel = require_string(je, "channel", path + ": edge");
    e.unit_cost = require_number(
        je, "cost", path + ": edge (" + e.facility + ", " + e.client + ", " + e.channel + ")");
    channels.push_back(e.channel);
    net.edges.push_back(std::move(e));
  }
  net.channels = std::move(channels);

  if (j.contains("penalty_C")) {
    if (!j["penalty_C"].is_number()) throw std::runtime_error(path + ": penalty_C must be numeric");
    net.penalty_C = j["penalty_C"].get<double>();
    if (report != nullptr) report->penalty_defaulted = false;
  } else {
    net.penalty_C = 5.0 * net.max_edge_cost();
    if (report != nullptr) report->penalty_defaulted = true;
  }
  net.canonicalize();
  return net;
}

void save_network(const std::string& path, const SupplyNetwork& net) {
  json j;
  j["facilities"] = json::array();
  for (const Facility& f : net.facilities) {
    json jf;
    jf["id"] = f.id;
    jf["fixed_cost"] = f.fixed_cost;
    jf["fcap"] = f.fcap;
    jf["channels"] = json::array();
    for (const auto& [channel, ccap] : f.channel_caps) {
      jf["channels"].push_back({{"channel", channel}, {"ccap", ccap}});
    }
    j["facilities"].push_back(std::move(jf));
  }
  j["clients"] = json::array();
  for (const Client& c : net.clients) {
    j["clients"].push_back({{"id", c.id}, {"demand", c.demand}});
  }
  j["edges"] = json::array();
  for (const Edge& e : net.edges) {
    j["edges"].push_back({{"facility", e.facility},
                          {"client", e.client},
                          {"channel", e.channel},
                          {"cost", e.unit_cost}});
  }
  j["penalty_C"] = net.penalty_C;
  write_text_file(path, j.dump(2) + "\n");
}

std::string solution_to_json(const Solution& solution) {
  json j;
  j["selected"] = solution.selected;
  j["allocations"] = json::array();
  for (const AllocationEntry& a : solution.plan.entries) {
    if (a.fraction <= 1e-12) continue;
    j["allocations"].push_back({{"facility", a.facility},
                                {"client", a.client},
                                {"channel", a.channel},
                                {"x", a.fraction}});
  }
  const ObjectiveBreakdown& b = solution.plan.objective;
  j["objective"] = {{"fixed_cost_total", b.fixed_cost_total},
                    {"shipping_cost_total", b.shipping_cost_total},
                    {"penalty_total", b.penalty_total},
                    {"profit", b.profit},
                    {"J", b.total}};
  j["diagnostics"] = {{"oracle", solution.oracle_name},
                      {"counters",
                       {{"stage1_calls", solution.counters.stage1_calls},
                        {"stage2_calls", solution.counters.stage2_calls},
                        {"oracle_invocations", solution.counters.oracle_invocations}}},
                      {"seed", solution.config.seed},
                      {"config", config_to_json(solution.config)}};
  return j.dump(2) + "\n";
}

void save_solution(const std::string& path, const Solution& solution) {
  write_text_file(path, solution_to_json(solution));
}

Solution load_solution(const std::string& path) {
  const json j = read_json_file(path);
  Solution s;
  for (const json& id : j.at("selected")) s.selected.push_back(id.get<std::string>());
  for (const json& ja : j.at("allocations")) {
    s.plan.entries.push_back({ja.at("facility").get<std::string>(),
                              ja.at("client").get<std::string>(),
                              ja.at("channel").get<std::string>(), ja.at("x").get<double>()});
  }
  const json& jb = j.at("objective");
  s.plan.objective.fixed_cost_total = jb.at("fixed_cost_total").get<double>();
  s.plan.objective.shipping_cost_total = jb.at("shipping_cost_total").get<double>();
  s.plan.objective.penalty_total = jb.at("penalty_total").get<double>();
  s.plan.objective.profit = jb.at("profit").get<double>();
  s.plan.objective.total = jb.at("J").get<double>();
  const json& jd = j.at("diagnostics");
  s.oracle_name = jd.at("oracle").get<std::string>();
  s.counters.stage1_calls = jd.at("counters").at("stage1_calls").get<long>();
  s.counters.stage2_calls = jd.at("counters").at("stage2_calls").get<long>();
  s.counters.oracle_invocations = jd.at("counters").at("oracle_invocations").get<long>();
  s.config = config_from_json(jd.at("config"));
  return s;
}

void save_generator_spec(const std::string& path, const GeneratorSpec& spec) {
  json j;
  j["m"] = spec.m;
  j["n"] = spec.n;
  j["channels"] = spec.channels;
  j["cov_fixed_cost"] = spec.cov_fixed_cost;
  j["cov_fcap"] = spec.cov_fcap;
  j["cov_ccap"] = spec.cov_ccap;
  j["cov_demand"] = spec.cov_demand;
  j["edge_density"] = spec.edge_density;
  j["cost_min"] = spec.cost_min;
  j["cost_max"] = spec.cost_max;
  j["penalty_multiplier"] = spec.penalty_multiplier;
  j["mean_fixed_cost"] = spec.mean_fixed_cost;
  j["mean_demand"] = spec.mean_demand;
  j["capacity_to_demand_ratio"] = spec.capacity_to_demand_ratio;
  j["channel_cap_factor"] = spec.channel_cap_factor;
  j["seed"] = spec.seed;
  write_text_file(path, j.dump(2) + "\n");
}

GeneratorSpec load_generator_spec(const std::string& path) {
  const json j = read_json_file(path);
  GeneratorSpec s;
  s.m = j.value("m", s.m);
  s.n = j.value("n", s.n);
  s.channels = j.value("channels", s.channels);
  s.cov_fixed_cost = j.value("cov_fixed_cost", s.cov_fixed_cost);
  s.cov_fcap = j.value("cov_fcap", s.cov_fcap);
  s.cov_ccap = j.value("cov_ccap", s.cov_ccap);
  s.cov_demand = j.value("cov_demand", s.cov_demand);
  s.edge_density = j.value("edge_density", s.edge_density);
  s.cost_min = j.value("cost_min", s.cost_min);
  s.cost_max = j.value("cost_max", s.cost_max);
  s.penalty_multiplier = j.value("penalty_multiplier", s.penalty_multiplier);
  s.mean_fixed_cost = j.value("mean_fixed_cost", s.mean_fixed_cost);
  s.mean_demand = j.value("mean_demand", s.mean_demand);
  s.capacity_to_demand_ratio = j.value("capacity_to_demand_ratio", s.capacity_to_demand_ratio);
  s.channel_cap_factor = j.value("channel_cap_factor", s.channel_cap_factor);
  s.seed = j.value("seed", s.seed);
  return s;
}

void save_decouple_report(const std::string& path, const DecoupleReport& report) {
  json j;
  j["reductions"] = json::array();
  for (const CapReduction& r : report.reductions) {
    j["reductions"].push_back({{"facility", r.facility},
                               {"channel", r.channel},
                               {"old_ccap", r.old_ccap},
                               {"new_ccap", r.new_ccap}});
  }
  j["fully_decoupled"] = report.fully_decoupled;
  j["back_mapping"] = json::object();
  for (const auto& [pseudo, origin] : report.back_mapping) {
    j["back_mapping"][pseudo] = {{"facility", origin.first}, {"channel", origin.second}};
  }
  write_text_file(path, j.dump(2) + "\n");
}

void save_greedy_trace(const std::string& path, const GreedyTrace& trace) {
  json j;
  j["rng"] = trace.rng_algorithm;
  j["seed"] = trace.seed;
  j["r"] = trace.sample_count;
  j["k"] = trace.k;
  j["selected"] = trace.selected;
  j["counters"] = {{"stage1_calls", trace.counters.stage1_calls},
                   {"stage2_calls", trace.counters.stage2_calls},
                   {"oracle_invocations", trace.counters.oracle_invocations}};
  j["iterations"] = json::array();
  for (const GreedyIteration& it : trace.iterations) {
    json ji;
    ji["round"] = it.round;
    ji["sampled"] = it.sampled;
    ji["chosen"] = it.chosen;
    ji["accepted"] = it.accepted;
    ji["incremental_gain"] = it.incremental_gain;
    ji["g_after"] = it.g_after;
    ji["selected_after"] = it.selected_after;
    ji["candidates"] = json::array();
    for (const CandidateEval& ev : it.evals) {
      json je = {{"facility", ev.facility},
                 {"g_with", ev.g_with},
                 {"gain_g", ev.gain_g},
                 {"fixed_cost", ev.fixed_cost},
                 {"distorted_gain", ev.distorted_gain}};
      if (ev.failed) {
        je["failed"] = true;
        je["note"] = ev.note;
      }
      ji["candidates"].push_back(std::move(je));
    }
    j["iterations"].push_back(std::move(ji));
  }
  write_text_file(path, j.dump(2) + "\n");
}

}  // namespace flp
