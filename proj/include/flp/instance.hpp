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
// Instance file I/O (JSON, see docs/formats.md) and a seeded synthetic
// generator producing networks with configurable size, edge density, and
// spread (coefficient of variation) of costs and capacities.
//

#ifndef FLP_INSTANCE_HPP_
#define FLP_INSTANCE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flp/greedy.hpp"
#include "flp/model.hpp"
#include "flp/decouple.hpp"
#include "flp/oracles.hpp"

namespace flp {

struct GeneratorSpec {
  int m = 10;
  int n = 50;
  int channels = 3;
  double cov_fixed_cost = 0.30;
  double cov_fcap = 0.28;
  double cov_ccap = 0.24;
  double cov_demand = 0.30;
  double edge_density = 0.5;
  double cost_min = 1.0;
  double cost_max = 10.0;
  double penalty_multiplier = 5.0;
  double mean_fixed_cost = 100.0;
  double mean_demand = 10.0;
  double capacity_to_demand_ratio = 1.0;  // total fcap as a multiple of total demand
  double channel_cap_factor = 1.4;        // sum of ccaps as a multiple of fcap
  std::uint64_t seed = 1;
};

// Deterministic in the spec (seed included). The result always passes
// validate(): every client keeps at least one edge, ccaps are clamped under
// fcap, and penalty_C is penalty_multiplier times the largest edge cost.
SupplyNetwork generate(const GeneratorSpec& spec);

struct LoadReport {
  bool penalty_defaulted = false;  // file had no penalty_C; 5 x max cost used
};

SupplyNetwork load_network(const std::string& path, LoadReport* report = nullptr);
void save_network(const std::string& path, const SupplyNetwork& net);

// What the solve CLI writes. Wall-clock timings stay out of this file so a
// rerun with the same seed and flags produces identical bytes.
struct Solution {
  std::vector<std::string> selected;
  AllocationPlan plan;
  std::string oracle_name;
  CallCounterSnapshot counters;
  SolveConfig config;
};

Solution load_solution(const std::string& path);
void save_solution(const std::string& path, const Solution& solution);
std::string solution_to_json(const Solution& solution);

void save_generator_spec(const std::string& path, const GeneratorSpec& spec);
GeneratorSpec load_generator_spec(const std::string& path);

void save_decouple_report(const std::string& path, const DecoupleReport& report);
void save_greedy_trace(const std::string& path, const GreedyTrace& trace);

}  // namespace flp

#endif  // FLP_INSTANCE_HPP_
