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

//
// flp: generate instances, run the solvers, compare value oracles, and dump
// channel decoupling reports. Exit codes: 0 ok, 1 usage error, 2 runtime
// failure. Set FLP_LOG={error,info,debug} to control stderr chatter.
//

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flp/decouple.hpp"
#include "flp/exhaustive.hpp"
#include "flp/greedy.hpp"
#include "flp/instance.hpp"
#include "flp/model.hpp"
#include "flp/oracles.hpp"

namespace {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("FLP_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string value(env);
  if (value == "error") return LogLevel::kError;
  if (value == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log_info(const std::string& message) {
  if (log_level() >= LogLevel::kInfo) std::cerr << message << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct SolveOutcome {
  std::vector<std::string> selected;
  flp::Solution solution;
  flp::GreedyTrace trace;
  bool has_trace = false;
  double wall_seconds = 0.0;
  double g_own = 0.0;  // the selecting oracle's own value of its final set
};

// Runs the requested solver. The reported allocation and J always come from
// the exact oracle on the final set, so objective values are comparable
// across oracles; the selecting oracle's own value is kept alongside.
SolveOutcome run_solver(const flp::SupplyNetwork& net, const std::string& oracle_name,
                        const flp::SolveConfig& config) {
  SolveOutcome out;
  const auto start = std::chrono::steady_clock::now();

  if (oracle_name == "exhaustive") {
    const flp::ReferenceSolution ref = flp::solve_exhaustive(net, config.k, config);
    out.selected = ref.best_set;
    out.solution.oracle_name = oracle_name;
  } else {
    flp::OracleKind kind;
    if (oracle_name == "exact") {
      kind = flp::OracleKind::kExact;
    } else if (oracle_name == "sinkhorn2") {
      kind = flp::OracleKind::kSinkhornMultistage;
    } else if (oracle_name == "sinkhorn1") {
      kind = flp::OracleKind::kSinkhornSinglestage;
    } else {
      throw CLI::ValidationError("--oracle", "unknown oracle '" + oracle_name + "'");
    }
    const auto oracle = flp::make_oracle(kind, net, config);
    auto [selected, trace] = flp::select_facilities(net, config, *oracle);
    out.selected = std::move(selected);
    out.trace = std::move(trace);
    out.has_trace = true;
    out.solution.oracle_name = oracle_name;
    out.solution.counters = out.trace.counters;
    out.g_own = out.trace.iterations.empty() ? 0.0 : out.trace.iterations.back().g_after;
  }
  out.wall_seconds = seconds_since(start);

  const flp::ExactOracle scorer(net, config);
  flp::OracleResult final_eval = scorer.evaluate(out.selected);
  out.solution.selected = out.selected;
  out.solution.plan = std::move(*final_eval.plan);
  out.solution.config = config;
  if (oracle_name == "exact" || oracle_name == "exhaustive") out.g_own = final_eval.g_value;
  return out;
}

flp::SupplyNetwork load_and_check(const std::string& path) {
  flp::LoadReport report;
  flp::SupplyNetwork net = flp::load_network(path, &report);
  if (report.penalty_defaulted) {
    log_info("note: penalty_C missing in " + path + ", defaulted to 5 x max edge cost = " +
             std::to_string(net.penalty_C));
  }
  const auto violations = flp::validate(net);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << path << " failed validation (" << violations.size() << " violations), first: "
        << violations.front().entity << ": " << violations.front().rule;
    throw std::runtime_error(msg.str());
  }
  return net;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-channel capacitated facility location solver"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic instance");
  flp::GeneratorSpec spec;
  std::string gen_spec_path, gen_out;
  gen->add_option("--spec", gen_spec_path, "GeneratorSpec JSON file (flags override)");
  gen->add_option("--m", spec.m, "facility count");
  gen->add_option("--n", spec.n, "client count");
  gen->add_option("--channels", spec.channels, "channel count");
  gen->add_option("--density", spec.edge_density, "edge density in (0, 1]");
  gen->add_option("--seed", spec.seed, "generator seed");
  gen->add_option("--cost-min", spec.cost_min, "minimum unit shipping cost");
  gen->add_option("--cost-max", spec.cost_max, "maximum unit shipping cost");
  gen->add_option("--capacity-ratio", spec.capacity_to_demand_ratio,
                  "total fcap as a multiple of total demand");
  gen->add_option("--out", gen_out, "output instance path")->required();

  // solve
  auto* solve = app.add_subcommand("solve", "Select facilities and allocate demand");
  std::string solve_instance, solve_oracle = "exact", solve_out, trace_out;
  flp::SolveConfig config;
  solve->add_option("--instance", solve_instance, "instance JSON")->required();
  solve->add_option("--k", config.k, "maximum facilities to open")->required();
  solve->add_option("--oracle", solve_oracle, "exact | sinkhorn2 | sinkhorn1 | exhaustive");
  solve->add_option("--epsilon", config.epsilon, "greedy sampling accuracy in (0, 1)");
  solve->add_option("--mu", config.mu, "entropic regularization weight (0 = scale-aware)");
  solve->add_option("--seed", config.seed, "greedy sampling seed");
  solve->add_option("--tol", config.sinkhorn_tol, "scaling convergence tolerance");
  solve->add_option("--max-iters", config.sinkhorn_max_iters, "scaling iteration cap");
  solve->add_option("--quantum", config.flow_quantum, "exact oracle flow quantum (0 = auto)");
  solve->add_option("--feas-tol", config.feasibility_tol, "plan feasibility tolerance");
  solve->add_option("--threads", config.threads, "candidate evaluation threads (0 = all)");
  solve->add_option("--out", solve_out, "solution JSON path");
  solve->add_option("--trace-out", trace_out, "greedy trace JSON path");

  // compare
  auto* compare = app.add_subcommand("compare", "Run several oracles and emit a CSV report");
  std::string cmp_instance, cmp_out;
  std::vector<int> cmp_k_list;
  std::vector<std::string> cmp_oracles;
  int cmp_runs = 1;
  flp::SolveConfig cmp_config;
  compare->add_option("--instance", cmp_instance, "instance JSON")->required();
  compare->add_option("--k-list", cmp_k_list, "k values to sweep")->required();
  compare->add_option("--oracles", cmp_oracles, "oracles; first one is the baseline")->required();
  compare->add_option("--runs", cmp_runs, "seeded repetitions per (k, oracle)");
  compare->add_option("--epsilon", cmp_config.epsilon, "greedy sampling accuracy");
  compare->add_option("--mu", cmp_config.mu, "entropic regularization weight");
  compare->add_option("--seed", cmp_config.seed, "base seed; run r uses seed + r");
  compare->add_option("--threads", cmp_config.threads, "candidate evaluation threads");
  compare->add_option("--out", cmp_out, "CSV path")->required();

  // decouple
  auto* decouple = app.add_subcommand("decouple", "Apply channel decoupling and dump the report");
  std::string dec_instance, dec_out, dec_net_out;
  decouple->add_option("--instance", dec_instance, "instance JSON")->required();
  decouple->add_option("--out", dec_out, "report JSON path")->required();
  decouple->add_option("--network-out", dec_net_out,
                       "transformed instance path (default: <out>.network.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message/help
    return e.get_exit_code() == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      if (!gen_spec_path.empty()) {
        flp::GeneratorSpec file_spec = flp::load_generator_spec(gen_spec_path);
        // Flags given on the command line override the file.
        if (gen->count("--m") == 0) spec.m = file_spec.m;
        if (gen->count("--n") == 0) spec.n = file_spec.n;
        if (gen->count("--channels") == 0) spec.channels = file_spec.channels;
        if (gen->count("--density") == 0) spec.edge_density = file_spec.edge_density;
        if (gen->count("--seed") == 0) spec.seed = file_spec.seed;
        if (gen->count("--cost-min") == 0) spec.cost_min = file_spec.cost_min;
        if (gen->count("--cost-max") == 0) spec.cost_max = file_spec.cost_max;
        if (gen->count("--capacity-ratio") == 0) {
          spec.capacity_to_demand_ratio = file_spec.capacity_to_demand_ratio;
        }
        spec.cov_fixed_cost = file_spec.cov_fixed_cost;
        spec.cov_fcap = file_spec.cov_fcap;
        spec.cov_ccap = file_spec.cov_ccap;
        spec.cov_demand = file_spec.cov_demand;
        spec.penalty_multiplier = file_spec.penalty_multiplier;
        spec.mean_fixed_cost = file_spec.mean_fixed_cost;
        spec.mean_demand = file_spec.mean_demand;
        spec.channel_cap_factor = file_spec.channel_cap_factor;
      }
      const flp::SupplyNetwork net = flp::generate(spec);
      flp::save_network(gen_out, net);
      log_info("wrote " + gen_out + " (m=" + std::to_string(net.facilities.size()) +
               ", n=" + std::to_string(net.clients.size()) +
               ", edges=" + std::to_string(net.edges.size()) + ")");
      return 0;
    }

    if (solve->parsed()) {
      const flp::SupplyNetwork net = load_and_check(solve_instance);
      if (config.k < 0) throw CLI::ValidationError("--k", "k must be >= 0");
      SolveOutcome outcome;
      if (config.k == 0) {
        outcome.solution.oracle_name = solve_oracle;
        outcome.solution.plan = *flp::ExactOracle(net, config).evaluate({}).plan;
        outcome.solution.config = config;
      } else {
        outcome = run_solver(net, solve_oracle, config);
      }
      std::cout << "oracle=" << solve_oracle << " |S|=" << outcome.selected.size()
                << " J=" << outcome.solution.plan.objective.total << " g=" << outcome.g_own
                << " wall_s=" << outcome.wall_seconds
                << " stage1=" << outcome.solution.counters.stage1_calls
                << " stage2=" << outcome.solution.counters.stage2_calls
                << " oracle_calls=" << outcome.solution.counters.oracle_invocations << "\n";
      if (!solve_out.empty()) flp::save_solution(solve_out, outcome.solution);
      if (!trace_out.empty() && outcome.has_trace) flp::save_greedy_trace(trace_out, outcome.trace);
      return 0;
    }

    if (compare->parsed()) {
      const flp::SupplyNetwork net = load_and_check(cmp_instance);
      if (cmp_runs < 1) throw CLI::ValidationError("--runs", "runs must be >= 1");
      for (const std::string& name : cmp_oracles) {
        if (name != "exact" && name != "sinkhorn2" && name != "sinkhorn1" &&
            name != "exhaustive") {
          throw CLI::ValidationError("--oracles", "unknown oracle '" + name + "'");
        }
      }
      std::ostringstream csv;
      csv << "k,run,oracle,J,delta_J_pct,overlap_pct,delta_g_fixed_S_pct,wall_time_s,"
             "stage1_calls,stage2_calls,oracle_invocations\r\n";
      for (int k : cmp_k_list) {
        for (int run = 0; run < cmp_runs; ++run) {
          flp::SolveConfig run_config = cmp_config;
          run_config.k = k;
          run_config.seed = cmp_config.seed + static_cast<std::uint64_t>(run);
          double baseline_j = 0.0;
          std::vector<std::string> baseline_set;
          for (std::size_t o = 0; o < cmp_oracles.size(); ++o) {
            const std::string& name = cmp_oracles[o];
            const SolveOutcome outcome = run_solver(net, name, run_config);
            const double j_value = outcome.solution.plan.objective.total;
            if (o == 0) {
              baseline_j = j_value;
              baseline_set = outcome.selected;
            }
            const double delta_j =
                baseline_j != 0.0 ? (j_value - baseline_j) / baseline_j * 100.0 : 0.0;
            double overlap = 100.0;
            if (!baseline_set.empty()) {
              std::set<std::string> base(baseline_set.begin(), baseline_set.end());
              int common = 0;
              for (const std::string& id : outcome.selected) common += base.count(id);
              overlap = 100.0 * common / static_cast<double>(baseline_set.size());
            } else if (!outcome.selected.empty()) {
              overlap = 0.0;
            }
            // Oracle's own g vs the exact g on the same final set.
            double delta_g = 0.0;
            if (name == "sinkhorn1" || name == "sinkhorn2") {
              const double g_exact =
                  flp::ExactOracle(net, run_config).evaluate(outcome.selected).g_value;
              if (g_exact != 0.0) delta_g = (outcome.g_own - g_exact) / g_exact * 100.0;
            }
            csv << k << "," << run << "," << csv_escape(name) << "," << j_value << ","
                << delta_j << "," << overlap << "," << delta_g << "," << outcome.wall_seconds
                << "," << outcome.solution.counters.stage1_calls << ","
                << outcome.solution.counters.stage2_calls << ","
                << outcome.solution.counters.oracle_invocations << "\r\n";
          }
        }
      }
      std::ofstream out(cmp_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + cmp_out);
      out << csv.str();
      log_info("wrote " + cmp_out);
      return 0;
    }

    if (decouple->parsed()) {
      const flp::SupplyNetwork net = load_and_check(dec_instance);
      const flp::DecoupleReport report = flp::decouple_network(net);
      flp::save_decouple_report(dec_out, report);
      const std::string net_out =
          dec_net_out.empty() ? dec_out + ".network.json" : dec_net_out;
      flp::save_network(net_out, report.network);
      std::cout << "reductions=" << report.reductions.size()
                << " decoupled=" << report.fully_decoupled.size()
                << " facilities=" << report.network.facilities.size() << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
