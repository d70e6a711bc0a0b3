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

#include "flp/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "flp/min_cost_flow.hpp"

namespace flp {

namespace {

std::vector<std::string> sorted_unique(const std::vector<std::string>& ids) {
  std::vector<std::string> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::int64_t quantize(double value, double quantum) {
  return static_cast<std::int64_t>(std::floor(value / quantum + 1e-9));
}

// The allocation problem caps flow by supply AND demand as inequalities.
// Balancing alone only adds slack on the deficit side, which is not enough
// once masks strand part of a row's capacity: the equality marginals become
// infeasible and the scaling cannot converge. An explicit zero-profit slack
// demand sized to the whole supply gives every row an outlet; balance() then
// adds the matching pseudo supply, recovering the two-sided relaxation.
void append_slack_demand(TransportProblem& prob) {
  const std::size_t m = prob.supply.size(), n = prob.demand.size();
  double total_supply = 0.0;
  for (double v : prob.supply) total_supply += v;
  Grid<double> profit(m, n + 1, 0.0);
  Grid<std::uint8_t> allowed(m, n + 1, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      profit(i, j) = prob.profit(i, j);
      allowed(i, j) = prob.allowed(i, j);
    }
    allowed(i, n) = 1;
  }
  prob.demand.push_back(total_supply);
  prob.profit = std::move(profit);
  prob.allowed = std::move(allowed);
}

// Realized profit of a plan under the original per-channel profits, summed in
// canonical entry order.
double plan_profit(const SupplyNetwork& net, const AllocationPlan& plan) {
  double total = 0.0;
  for (const AllocationEntry& a : plan.entries) {
    const Edge* e = net.find_edge(a.facility, a.client, a.channel);
    if (e == nullptr) continue;
    total += (net.penalty_C - e->unit_cost) * a.fraction * net.client(a.client)->demand;
  }
  return total;
}

}  // namespace

ExactOracle::ExactOracle(const SupplyNetwork& net, const SolveConfig& config)
    : net_(net), quantum_(config.resolved_flow_quantum(net)),
      feasibility_units_(config.feasibility_units(net)) {}

OracleResult ExactOracle::evaluate(const std::vector<std::string>& open_set) const {
  counters_.add_invocation();
  const auto start = std::chrono::steady_clock::now();
  OracleResult result;
  const std::vector<std::string> open = sorted_unique(open_set);
  if (open.empty()) {
    result.plan = finalize_plan(net_, {});
    result.plan->objective = evaluate_objective(net_, open, *result.plan, feasibility_units_);
    return result;
  }

  // Layered graph: source -> facility (fcap) -> facility,channel (ccap)
  // -> client (demand) -> sink (demand), profit carried on channel->client
  // arcs as negative cost.
  struct ChannelNode {
    std::string facility, channel;
    int node = 0;
  };
  struct ClientNode {
    std::string id;
    double demand = 0.0;
    int node = 0;
  };
  struct EdgeArc {
    const Edge* edge = nullptr;
    int arc = -1;
  };

  int next_node = 1;  // 0 = source
  std::map<std::string, int> facility_node;
  std::vector<ChannelNode> channel_nodes;
  std::map<std::pair<std::string, std::string>, int> channel_pos;
  std::map<std::string, int> client_pos;
  std::vector<ClientNode> client_nodes;

  for (const std::string& fid : open) {
    const Facility* f = net_.facility(fid);
    if (f == nullptr) throw std::invalid_argument("open set references unknown facility " + fid);
    if (f->fcap <= 0.0) continue;
    facility_node[fid] = next_node++;
    for (const auto& [channel, ccap] : f->channel_caps) {
      if (ccap <= 0.0) continue;
      channel_pos[{fid, channel}] = static_cast<int>(channel_nodes.size());
      channel_nodes.push_back({fid, channel, next_node++});
    }
  }
  std::vector<EdgeArc> used_edges;
  for (const Edge& e : net_.edges) {
    if (facility_node.count(e.facility) == 0) continue;
    if (channel_pos.count({e.facility, e.channel}) == 0) continue;
    const Client* c = net_.client(e.client);
    if (c == nullptr || c->demand <= 0.0) continue;
    if (client_pos.count(e.client) == 0) {
      client_pos[e.client] = static_cast<int>(client_nodes.size());
      client_nodes.push_back({e.client, c->demand, 0});
    }
    used_edges.push_back({&e, -1});
  }
  for (ClientNode& cn : client_nodes) cn.node = next_node++;
  const int sink = next_node++;

  MinCostFlow flow(next_node);
  for (const std::string& fid : open) {
    auto it = facility_node.find(fid);
    if (it == facility_node.end()) continue;
    flow.add_arc(0, it->second, quantize(net_.facility(fid)->fcap, quantum_), 0.0);
  }
  for (const ChannelNode& cn : channel_nodes) {
    const double ccap = net_.facility(cn.facility)->channel_caps.at(cn.channel);
    flow.add_arc(facility_node.at(cn.facility), cn.node, quantize(ccap, quantum_), 0.0);
  }
  for (EdgeArc& ea : used_edges) {
    const Edge& e = *ea.edge;
    const ClientNode& cn = client_nodes[client_pos.at(e.client)];
    const double profit = net_.penalty_C - e.unit_cost;
    ea.arc = flow.add_arc(channel_nodes[channel_pos.at({e.facility, e.channel})].node, cn.node,
                          quantize(cn.demand, quantum_), -profit);
  }
  for (const ClientNode& cn : client_nodes) {
    flow.add_arc(cn.node, sink, quantize(cn.demand, quantum_), 0.0);
  }

  flow.solve_profitable(0, sink);

  std::vector<AllocationEntry> entries;
  for (const EdgeArc& ea : used_edges) {
    const std::int64_t units_q = flow.flow_on(ea.arc);
    if (units_q <= 0) continue;
    const Edge& e = *ea.edge;
    const double units = static_cast<double>(units_q) * quantum_;
    entries.push_back({e.facility, e.client, e.channel, units / net_.client(e.client)->demand});
  }
  result.plan = finalize_plan(net_, std::move(entries));
  result.plan->objective = evaluate_objective(net_, open, *result.plan, feasibility_units_);
  result.g_value = plan_profit(net_, *result.plan);
  result.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SinkhornPipeline::SinkhornPipeline(const SupplyNetwork& net, const SolveConfig& config)
    : net_(net),
      config_(config),
      decoupled_(decouple_network(net)),
      reduced_(reduce_to_single_channel(decoupled_.network)) {
  for (const Client& c : net_.clients) {
    total_demand_ += c.demand;
    if (c.demand <= 0.0) continue;  // zero-demand clients are skipped
    col_ids_.push_back(c.id);
    col_demand_.push_back(c.demand);
  }
  std::map<std::string, int> col_pos;
  for (std::size_t j = 0; j < col_ids_.size(); ++j) col_pos[col_ids_[j]] = static_cast<int>(j);

  std::map<std::string, int> facility_pos, channel_pos;
  for (std::size_t i = 0; i < net_.facilities.size(); ++i) {
    facility_pos[net_.facilities[i].id] = static_cast<int>(i);
  }
  for (std::size_t e = 0; e < net_.channels.size(); ++e) {
    channel_pos[net_.channels[e]] = static_cast<int>(e);
  }
  fcap_by_facility_.assign(net_.facilities.size(), 0.0);
  ccap_by_facility_channel_.assign(net_.facilities.size() * net_.channels.size(), 0.0);
  for (std::size_t i = 0; i < net_.facilities.size(); ++i) {
    fcap_by_facility_[i] = net_.facilities[i].fcap;
    for (const auto& [channel, ccap] : net_.facilities[i].channel_caps) {
      ccap_by_facility_channel_[i * net_.channels.size() + channel_pos.at(channel)] = ccap;
    }
  }

  for (const Facility& rf : reduced_.network.facilities) {
    Row row;
    row.reduced_id = rf.id;
    row.cap = rf.fcap;
    auto back = decoupled_.back_mapping.find(rf.id);
    if (back != decoupled_.back_mapping.end()) {
      row.original_id = back->second.first;
      row.split = true;
      row.sole_channel = back->second.second;
      row.sole_channel_idx = channel_pos.at(row.sole_channel);
    } else {
      row.original_id = rf.id;
    }
    row.original_idx = facility_pos.at(row.original_id);
    rows_.push_back(std::move(row));
  }

  stage1_profit_ = Grid<double>(rows_.size(), col_ids_.size(), 0.0);
  stage1_allowed_ = Grid<std::uint8_t>(rows_.size(), col_ids_.size(), 0);
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    rows_of_original_[rows_[r].original_id].push_back(static_cast<int>(r));
  }
  for (const auto& [key, profit] : reduced_.profits) {
    auto row_it = std::lower_bound(rows_.begin(), rows_.end(), key.first,
                                   [](const Row& r, const std::string& id) {
                                     return r.reduced_id < id;
                                   });
    if (row_it == rows_.end() || row_it->reduced_id != key.first) continue;
    auto cp = col_pos.find(key.second);
    if (cp == col_pos.end()) continue;
    const std::size_t r = static_cast<std::size_t>(row_it - rows_.begin());
    stage1_profit_(r, cp->second) = profit;
    stage1_allowed_(r, cp->second) = 1;
  }

  // Stage-2 caches for coupled facilities: real channels x served clients.
  for (Row& row : rows_) {
    if (row.split) continue;
    const Facility* f = decoupled_.network.facility(row.reduced_id);
    Stage2Cache cache;
    std::set<int> served;
    for (const Edge& e : decoupled_.network.edges) {
      if (e.facility != row.reduced_id) continue;
      auto cap = f->channel_caps.find(e.channel);
      if (cap == f->channel_caps.end() || cap->second <= 0.0) continue;
      auto cp = col_pos.find(e.client);
      if (cp != col_pos.end()) served.insert(cp->second);
    }
    cache.cols.assign(served.begin(), served.end());
    for (const auto& [channel, ccap] : f->channel_caps) {
      if (ccap <= 0.0) continue;
      cache.channels.push_back(channel);
      cache.channel_idx.push_back(channel_pos.at(channel));
      cache.ccaps.push_back(ccap);
    }
    cache.profit = Grid<double>(cache.channels.size(), cache.cols.size(), 0.0);
    cache.allowed = Grid<std::uint8_t>(cache.channels.size(), cache.cols.size(), 0);
    for (std::size_t e = 0; e < cache.channels.size(); ++e) {
      for (std::size_t j = 0; j < cache.cols.size(); ++j) {
        const Edge* edge =
            decoupled_.network.find_edge(row.reduced_id, col_ids_[cache.cols[j]], cache.channels[e]);
        if (edge == nullptr) continue;
        cache.profit(e, j) = net_.penalty_C - edge->unit_cost;
        cache.allowed(e, j) = 1;
      }
    }
    row.stage2 = static_cast<int>(stage2_.size());
    stage2_.push_back(std::move(cache));
  }
}

SinkhornOptions SinkhornPipeline::options_for(const TransportProblem& problem) const {
  SinkhornOptions opt;
  opt.mu = config_.mu > 0.0 ? config_.mu : default_mu(problem);
  opt.tol = config_.sinkhorn_tol;
  opt.max_iters = config_.sinkhorn_max_iters;
  return opt;
}

SinkhornPipeline::Stage1Solve SinkhornPipeline::solve_stage1(
    const std::vector<std::string>& open_set, const CallCounter& counters) const {
  Stage1Solve out;
  for (const std::string& fid : sorted_unique(open_set)) {
    if (net_.facility(fid) == nullptr) {
      throw std::invalid_argument("open set references unknown facility " + fid);
    }
    auto it = rows_of_original_.find(fid);
    if (it == rows_of_original_.end()) continue;  // facility cannot ship
    for (int r : it->second) {
      if (rows_[r].cap > 0.0) out.rows.push_back(r);
    }
  }
  std::sort(out.rows.begin(), out.rows.end());

  std::vector<char> col_hit(col_ids_.size(), 0);
  for (int r : out.rows) {
    for (std::size_t j = 0; j < col_ids_.size(); ++j) {
      if (stage1_allowed_(r, j)) col_hit[j] = 1;
    }
  }
  for (std::size_t j = 0; j < col_ids_.size(); ++j) {
    if (col_hit[j]) out.cols.push_back(static_cast<int>(j));
  }
  if (out.rows.empty() || out.cols.empty()) {
    out.rows.clear();
    out.cols.clear();
    return out;
  }

  out.problem.supply.reserve(out.rows.size());
  for (int r : out.rows) out.problem.supply.push_back(rows_[r].cap);
  out.problem.demand.reserve(out.cols.size());
  for (int j : out.cols) out.problem.demand.push_back(col_demand_[j]);
  out.problem.profit = Grid<double>(out.rows.size(), out.cols.size(), 0.0);
  out.problem.allowed = Grid<std::uint8_t>(out.rows.size(), out.cols.size(), 0);
  for (std::size_t a = 0; a < out.rows.size(); ++a) {
    for (std::size_t b = 0; b < out.cols.size(); ++b) {
      out.problem.profit(a, b) = stage1_profit_(out.rows[a], out.cols[b]);
      out.problem.allowed(a, b) = stage1_allowed_(out.rows[a], out.cols[b]);
    }
  }

  append_slack_demand(out.problem);
  counters.add_stage1();
  out.plan = sinkhorn_solve(balance(out.problem), options_for(out.problem));
  out.iterations = out.plan.iterations;
  out.converged = out.plan.converged;
  return out;
}

double SinkhornPipeline::stage1_objective(const Stage1Solve& stage1) const {
  if (stage1.rows.empty()) return 0.0;
  return plan_objective(stage1.problem, stage1.plan);
}

OracleResult SinkhornPipeline::recover_plan(const std::vector<std::string>& open_set,
                                            const Stage1Solve& stage1,
                                            const CallCounter& counters) const {
  OracleResult result;
  result.diagnostics.converged = stage1.converged;
  result.diagnostics.sinkhorn_iterations = stage1.iterations;
  result.diagnostics.sinkhorn_calls = stage1.rows.empty() ? 0 : 1;
  const std::vector<std::string> open = sorted_unique(open_set);
  if (stage1.rows.empty()) {
    result.plan = finalize_plan(net_, {});
    result.plan->objective =
        evaluate_objective(net_, open, *result.plan, config_.feasibility_units(net_));
    return result;
  }

  // Recovered shipments as dense indices into the sorted facility, client,
  // and channel lists; strings are built once at emission.
  struct Shipment {
    int facility, client, channel;
    double fraction, unit_profit;
  };
  std::vector<Shipment> shipments;
  for (std::size_t a = 0; a < stage1.rows.size(); ++a) {
    const Row& row = rows_[stage1.rows[a]];
    if (row.split) {
      // Single real channel: the stage-1 coupling is already the allocation.
      for (std::size_t b = 0; b < stage1.cols.size(); ++b) {
        const double units = stage1.plan.coupling(a, b);
        if (units <= 0.0) continue;
        shipments.push_back({row.original_idx, stage1.cols[b], row.sole_channel_idx,
                             units / col_demand_[stage1.cols[b]],
                             stage1_profit_(stage1.rows[a], stage1.cols[b])});
      }
      continue;
    }

    // Coupled facility: spread the stage-1 row over the real channels with a
    // second transport solve (channel caps as supply, the row of the stage-1
    // coupling as demand).
    const Stage2Cache& cache = stage2_[row.stage2];
    std::map<int, std::size_t> col_sub;  // global column -> stage-1 position
    for (std::size_t b = 0; b < stage1.cols.size(); ++b) col_sub[stage1.cols[b]] = b;

    TransportProblem sub;
    std::vector<int> sub_cols;
    for (std::size_t j = 0; j < cache.cols.size(); ++j) {
      auto it = col_sub.find(cache.cols[j]);
      if (it == col_sub.end()) continue;
      const double units = stage1.plan.coupling(a, it->second);
      if (units <= 0.0) continue;
      sub_cols.push_back(static_cast<int>(j));
      sub.demand.push_back(units);
    }
    if (sub_cols.empty()) continue;
    sub.supply = cache.ccaps;
    sub.profit = Grid<double>(sub.supply.size(), sub.demand.size(), 0.0);
    sub.allowed = Grid<std::uint8_t>(sub.supply.size(), sub.demand.size(), 0);
    for (std::size_t e = 0; e < sub.supply.size(); ++e) {
      for (std::size_t j = 0; j < sub_cols.size(); ++j) {
        sub.profit(e, j) = cache.profit(e, sub_cols[j]);
        sub.allowed(e, j) = cache.allowed(e, sub_cols[j]);
      }
    }

    append_slack_demand(sub);
    counters.add_stage2();
    const TransportPlan sub_plan = sinkhorn_solve(balance(sub), options_for(sub));
    result.diagnostics.sinkhorn_calls += 1;
    result.diagnostics.sinkhorn_iterations += sub_plan.iterations;
    result.diagnostics.converged = result.diagnostics.converged && sub_plan.converged;

    for (std::size_t e = 0; e < sub.supply.size(); ++e) {
      for (std::size_t j = 0; j < sub_cols.size(); ++j) {
        const double units = sub_plan.coupling(e, j);
        if (units <= 0.0) continue;
        const int global_col = cache.cols[sub_cols[j]];
        shipments.push_back({row.original_idx, global_col, cache.channel_idx[e],
                             units / col_demand_[global_col], cache.profit(e, sub_cols[j])});
      }
    }
  }

  // Clamp into the feasible polytope: channel caps first, then facility caps,
  // then per-client demand. Down-scaling one family never disturbs another.
  const std::size_t channel_count = net_.channels.size();
  std::vector<double> channel_units(ccap_by_facility_channel_.size(), 0.0);
  std::vector<double> facility_units(fcap_by_facility_.size(), 0.0);
  std::vector<double> client_fraction(col_demand_.size(), 0.0);
  for (const Shipment& sh : shipments) {
    channel_units[sh.facility * channel_count + sh.channel] +=
        sh.fraction * col_demand_[sh.client];
  }
  for (Shipment& sh : shipments) {
    const std::size_t slot = sh.facility * channel_count + sh.channel;
    if (channel_units[slot] > ccap_by_facility_channel_[slot]) {
      sh.fraction *= ccap_by_facility_channel_[slot] / channel_units[slot];
    }
  }
  for (const Shipment& sh : shipments) {
    facility_units[sh.facility] += sh.fraction * col_demand_[sh.client];
  }
  for (Shipment& sh : shipments) {
    if (facility_units[sh.facility] > fcap_by_facility_[sh.facility]) {
      sh.fraction *= fcap_by_facility_[sh.facility] / facility_units[sh.facility];
    }
  }
  for (const Shipment& sh : shipments) client_fraction[sh.client] += sh.fraction;
  for (Shipment& sh : shipments) {
    if (client_fraction[sh.client] > 1.0) sh.fraction /= client_fraction[sh.client];
  }

  // Index order coincides with id order (all three lists are sorted), so
  // sorting by the packed key yields the canonical plan order directly.
  std::sort(shipments.begin(), shipments.end(), [&](const Shipment& x, const Shipment& y) {
    return std::tuple(x.facility, x.client, x.channel) <
           std::tuple(y.facility, y.client, y.channel);
  });

  ObjectiveBreakdown breakdown;
  for (const std::string& fid : open) breakdown.fixed_cost_total += net_.facility(fid)->fixed_cost;

  AllocationPlan plan;
  plan.entries.reserve(shipments.size());
  std::vector<double> fulfilled_by_col(col_demand_.size(), 0.0);
  for (const Shipment& sh : shipments) {
    if (sh.fraction <= 0.0) continue;
    const double units = sh.fraction * col_demand_[sh.client];
    breakdown.profit += sh.unit_profit * units;
    breakdown.shipping_cost_total += (net_.penalty_C - sh.unit_profit) * units;
    fulfilled_by_col[sh.client] += units;
    plan.entries.push_back({net_.facilities[sh.facility].id, col_ids_[sh.client],
                            net_.channels[sh.channel], sh.fraction});
  }
  double fulfilled = 0.0;
  for (const Client& c : net_.clients) {
    plan.fulfilled_units[c.id] = 0.0;
    plan.unfulfilled_units[c.id] = c.demand;
  }
  for (std::size_t j = 0; j < col_demand_.size(); ++j) {
    plan.fulfilled_units[col_ids_[j]] = fulfilled_by_col[j];
    plan.unfulfilled_units[col_ids_[j]] = col_demand_[j] - fulfilled_by_col[j];
    fulfilled += fulfilled_by_col[j];
  }
  breakdown.penalty_total = net_.penalty_C * (total_demand_ - fulfilled);
  breakdown.total =
      breakdown.fixed_cost_total + breakdown.shipping_cost_total + breakdown.penalty_total;

  plan.objective = breakdown;
  result.plan = std::move(plan);
  result.g_value = breakdown.profit;
  return result;
}

OracleResult MultistageSinkhornOracle::evaluate(const std::vector<std::string>& open_set) const {
  counters_.add_invocation();
  const auto start = std::chrono::steady_clock::now();
  const auto stage1 = pipeline_.solve_stage1(open_set, counters_);
  OracleResult result = pipeline_.recover_plan(open_set, stage1, counters_);
  result.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

OracleResult SinglestageSinkhornOracle::evaluate(const std::vector<std::string>& open_set) const {
  counters_.add_invocation();
  const auto start = std::chrono::steady_clock::now();
  const auto stage1 = pipeline_.solve_stage1(open_set, counters_);
  OracleResult result;
  result.g_value = pipeline_.stage1_objective(stage1);
  result.diagnostics.sinkhorn_calls = stage1.rows.empty() ? 0 : 1;
  result.diagnostics.sinkhorn_iterations = stage1.iterations;
  result.diagnostics.converged = stage1.converged;
  result.diagnostics.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::unique_ptr<ValueOracle> make_oracle(OracleKind kind, const SupplyNetwork& net,
                                         const SolveConfig& config) {
  switch (kind) {
    case OracleKind::kExact:
      return std::make_unique<ExactOracle>(net, config);
    case OracleKind::kSinkhornMultistage:
      return std::make_unique<MultistageSinkhornOracle>(net, config);
    case OracleKind::kSinkhornSinglestage:
      return std::make_unique<SinglestageSinkhornOracle>(net, config);
  }
  throw std::invalid_argument("unknown oracle kind");
}

}  // namespace flp
