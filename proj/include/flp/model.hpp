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
// Core domain model for the multi-channel capacitated facility location
// problem: facilities ship to clients over typed fulfilment channels, each
// edge with its own per-unit cost. A facility caps its total outflow (fcap)
// and its per-channel outflow (ccap). Unserved demand is charged penalty_C
// per unit. All types are treated as immutable after canonicalize(); every
// operation below is a pure function of its inputs.
//

#ifndef FLP_MODEL_HPP_
#define FLP_MODEL_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace flp {

struct Facility {
  std::string id;
  double fixed_cost = 0.0;
  double fcap = 0.0;
  std::map<std::string, double> channel_caps;  // channel id -> ccap

  double total_channel_cap() const;
};

struct Client {
  std::string id;
  double demand = 0.0;
};

struct Edge {
  std::string facility;
  std::string client;
  std::string channel;
  double unit_cost = 0.0;
};

struct SupplyNetwork {
  std::vector<Facility> facilities;    // sorted by id after canonicalize()
  std::vector<Client> clients;         // sorted by id
  std::vector<std::string> channels;   // sorted, unique
  std::vector<Edge> edges;             // sorted by (facility, client, channel)
  double penalty_C = 0.0;

  // Sorts everything by id. Iteration order downstream (sums, argmax) relies
  // on this so results do not depend on input file ordering or thread count.
  void canonicalize();

  const Facility* facility(const std::string& id) const;
  const Client* client(const std::string& id) const;
  const Edge* find_edge(const std::string& facility_id, const std::string& client_id,
                        const std::string& channel_id) const;

  double total_demand() const;
  double max_edge_cost() const;
  double max_demand() const;
};

// A named invariant breach; violations are data, not failures.
struct Violation {
  std::string entity;
  std::string rule;
};

std::vector<Violation> validate(const SupplyNetwork& net);

// Per-unit profit C - c for an existing edge, 0 for a missing one.
double profit_of(const SupplyNetwork& net, const std::string& facility_id,
                 const std::string& client_id, const std::string& channel_id);

struct AllocationEntry {
  std::string facility;
  std::string client;
  std::string channel;
  double fraction = 0.0;  // share of the client's demand on this edge
};

struct ObjectiveBreakdown {
  double fixed_cost_total = 0.0;
  double shipping_cost_total = 0.0;
  double penalty_total = 0.0;
  double profit = 0.0;  // sum of (C - c) * x * d over edges
  double total = 0.0;   // fixed + shipping + penalty
};

struct AllocationPlan {
  std::vector<AllocationEntry> entries;          // sorted (facility, client, channel)
  std::map<std::string, double> fulfilled_units;    // per client
  std::map<std::string, double> unfulfilled_units;  // per client
  ObjectiveBreakdown objective;
};

// Sorts entries, fills fulfilled/unfulfilled per client. Throws on duplicate
// (facility, client, channel) triples or references to unknown ids.
AllocationPlan finalize_plan(const SupplyNetwork& net, std::vector<AllocationEntry> entries);

enum class OracleKind { kExact, kSinkhornMultistage, kSinkhornSinglestage };

struct SolveConfig {
  int k = 1;                     // cardinality bound
  double epsilon = 0.01;         // sampling accuracy of the stochastic greedy
  double mu = 0.0;               // entropic weight; 0 = scale-aware default
  double sinkhorn_tol = 1e-8;    // L1 marginal violation, normalized
  int sinkhorn_max_iters = 10000;
  std::uint64_t seed = 0;
  OracleKind oracle = OracleKind::kExact;
  double flow_quantum = 0.0;     // 0 = max demand / 1e6
  double feasibility_tol = 1e-7;  // relative to max demand
  int threads = 1;               // 0 = all hardware threads

  double resolved_flow_quantum(const SupplyNetwork& net) const;
  double feasibility_units(const SupplyNetwork& net) const;  // absolute slack
};

// Checks the plan constraint families against the network for the open set S:
// fractions nonnegative and only on existing edges of open facilities, per-
// client totals at most the demand, per-facility and per-channel unit totals
// within capacity. Slack is feasibility_units in shipped units.
std::vector<Violation> check_plan(const SupplyNetwork& net, const std::vector<std::string>& open,
                                  const AllocationPlan& plan, double feasibility_units);

// Full cost of (S, plan): fixed costs, shipping, and the unfulfilled-demand
// penalty, plus the profit view of the same allocation. Throws
// std::invalid_argument naming the violated constraint if the plan is
// infeasible beyond feasibility_units.
ObjectiveBreakdown evaluate_objective(const SupplyNetwork& net, const std::vector<std::string>& open,
                                      const AllocationPlan& plan, double feasibility_units);

}  // namespace flp

#endif  // FLP_MODEL_HPP_
