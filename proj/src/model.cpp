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

#include "flp/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace flp {

namespace {

bool edge_less(const Edge& a, const Edge& b) {
  return std::tie(a.facility, a.client, a.channel) < std::tie(b.facility, b.client, b.channel);
}

std::string triple(const std::string& f, const std::string& c, const std::string& e) {
  return "(" + f + ", " + c + ", " + e + ")";
}

}  // namespace

double Facility::total_channel_cap() const {
  double sum = 0.0;
  for (const auto& [channel, ccap] : channel_caps) sum += ccap;
  return sum;
}

void SupplyNetwork::canonicalize() {
  std::sort(facilities.begin(), facilities.end(),
            [](const Facility& a, const Facility& b) { return a.id < b.id; });
  std::sort(clients.begin(), clients.end(),
            [](const Client& a, const Client& b) { return a.id < b.id; });
  std::sort(channels.begin(), channels.end());
  channels.erase(std::unique(channels.begin(), channels.end()), channels.end());
  std::sort(edges.begin(), edges.end(), edge_less);
}

const Facility* SupplyNetwork::facility(const std::string& id) const {
  auto it = std::lower_bound(facilities.begin(), facilities.end(), id,
                             [](const Facility& f, const std::string& key) { return f.id < key; });
  if (it == facilities.end() || it->id != id) return nullptr;
  return &*it;
}

const Client* SupplyNetwork::client(const std::string& id) const {
  auto it = std::lower_bound(clients.begin(), clients.end(), id,
                             [](const Client& c, const std::string& key) { return c.id < key; });
  if (it == clients.end() || it->id != id) return nullptr;
  return &*it;
}

const Edge* SupplyNetwork::find_edge(const std::string& facility_id, const std::string& client_id,
                                     const std::string& channel_id) const {
  Edge probe{facility_id, client_id, channel_id, 0.0};
  auto it = std::lower_bound(edges.begin(), edges.end(), probe, edge_less);
  if (it == edges.end() || it->facility != facility_id || it->client != client_id ||
      it->channel != channel_id) {
    return nullptr;
  }
  return &*it;
}

double SupplyNetwork::total_demand() const {
  double sum = 0.0;
  for (const Client& c : clients) sum += c.demand;
  return sum;
}

double SupplyNetwork::max_edge_cost() const {
  double best = 0.0;
  for (const Edge& e : edges) best = std::max(best, e.unit_cost);
  return best;
}

double SupplyNetwork::max_demand() const {
  double best = 0.0;
  for (const Client& c : clients) best = std::max(best, c.demand);
  return best;
}

std::vector<Violation> validate(const SupplyNetwork& net) {
  std::vector<Violation> out;
  auto flag = [&out](const std::string& entity, const std::string& rule) {
    out.push_back({entity, rule});
  };

  std::set<std::string> facility_ids, client_ids;
  std::set<std::string> channel_set(net.channels.begin(), net.channels.end());

  for (const Facility& f : net.facilities) {
    if (!facility_ids.insert(f.id).second) flag("facility " + f.id, "duplicate facility id");
    if (f.fixed_cost < 0.0) flag("facility " + f.id, "fixed_cost must be >= 0");
    if (f.fcap < 0.0) flag("facility " + f.id, "fcap must be >= 0");
    for (const auto& [channel, ccap] : f.channel_caps) {
      if (channel_set.count(channel) == 0)
        flag("facility " + f.id, "declares unknown channel " + channel);
      if (ccap < 0.0)
        flag("facility " + f.id, "ccap for channel " + channel + " must be >= 0");
      else if (ccap > f.fcap)
        flag("facility " + f.id, "ccap for channel " + channel + " exceeds fcap");
    }
  }
  for (const Client& c : net.clients) {
    if (!client_ids.insert(c.id).second) flag("client " + c.id, "duplicate client id");
    if (c.demand < 0.0) flag("client " + c.id, "demand must be >= 0");
  }

  const Edge* prev = nullptr;
  for (const Edge& e : net.edges) {
    const std::string name = "edge " + triple(e.facility, e.client, e.channel);
    if (prev != nullptr && prev->facility == e.facility && prev->client == e.client &&
        prev->channel == e.channel) {
      flag(name, "duplicate edge");
    }
    prev = &e;
    if (e.unit_cost < 0.0) flag(name, "unit_cost must be >= 0");
    if (net.penalty_C <= e.unit_cost) flag(name, "unit_cost must be below penalty_C");
    if (client_ids.count(e.client) == 0) flag(name, "references unknown client " + e.client);
    if (channel_set.count(e.channel) == 0) flag(name, "references unknown channel " + e.channel);
    const Facility* f = net.facility(e.facility);
    if (f == nullptr) {
      flag(name, "references unknown facility " + e.facility);
    } else if (f->channel_caps.count(e.channel) == 0) {
      flag(name, "references channel " + e.channel + " not declared by facility " + e.facility);
    }
  }
  if (net.penalty_C < 0.0) flag("network", "penalty_C must be >= 0");
  return out;
}

double profit_of(const SupplyNetwork& net, const std::string& facility_id,
                 const std::string& client_id, const std::string& channel_id) {
  const Edge* e = net.find_edge(facility_id, client_id, channel_id);
  if (e == nullptr) return 0.0;
  return net.penalty_C - e->unit_cost;
}

AllocationPlan finalize_plan(const SupplyNetwork& net, std::vector<AllocationEntry> entries) {
  std::sort(entries.begin(), entries.end(), [](const AllocationEntry& a, const AllocationEntry& b) {
    return std::tie(a.facility, a.client, a.channel) < std::tie(b.facility, b.client, b.channel);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const AllocationEntry& a = entries[i - 1];
    const AllocationEntry& b = entries[i];
    if (a.facility == b.facility && a.client == b.client && a.channel == b.channel) {
      throw std::invalid_argument("duplicate allocation entry " +
                                  triple(a.facility, a.client, a.channel));
    }
  }
  AllocationPlan plan;
  plan.entries = std::move(entries);
  for (const Client& c : net.clients) plan.fulfilled_units[c.id] = 0.0;
  for (const AllocationEntry& e : plan.entries) {
    const Client* c = net.client(e.client);
    if (c == nullptr) throw std::invalid_argument("allocation references unknown client " + e.client);
    plan.fulfilled_units[e.client] += e.fraction * c->demand;
  }
  for (const Client& c : net.clients) {
    plan.unfulfilled_units[c.id] = c.demand - plan.fulfilled_units[c.id];
  }
  return plan;
}

double SolveConfig::resolved_flow_quantum(const SupplyNetwork& net) const {
  if (flow_quantum > 0.0) return flow_quantum;
  const double md = net.max_demand();
  return md > 0.0 ? md / 1e6 : 1e-6;
}

double SolveConfig::feasibility_units(const SupplyNetwork& net) const {
  return feasibility_tol * std::max(net.max_demand(), 1.0);
}

std::vector<Violation> check_plan(const SupplyNetwork& net, const std::vector<std::string>& open,
                                  const AllocationPlan& plan, double feasibility_units) {
  std::vector<Violation> out;
  std::set<std::string> open_set(open.begin(), open.end());

  std::map<std::string, double> facility_units;
  std::map<std::pair<std::string, std::string>, double> channel_units;
  std::map<std::string, double> client_units;

  for (const AllocationEntry& a : plan.entries) {
    const std::string name = "allocation " + triple(a.facility, a.client, a.channel);
    if (a.fraction < -1e-12) {
      out.push_back({name, "fraction must be >= 0"});
      continue;
    }
    if (a.fraction <= 0.0) continue;
    if (open_set.count(a.facility) == 0) {
      out.push_back({name, "ships from a facility not in the open set"});
      continue;
    }
    const Edge* e = net.find_edge(a.facility, a.client, a.channel);
    if (e == nullptr) {
      out.push_back({name, "ships on an edge that does not exist"});
      continue;
    }
    const Client* c = net.client(a.client);
    const double units = a.fraction * c->demand;
    facility_units[a.facility] += units;
    channel_units[{a.facility, a.channel}] += units;
    client_units[a.client] += units;
  }

  for (const auto& [cid, units] : client_units) {
    const Client* c = net.client(cid);
    if (units > c->demand + feasibility_units) {
      out.push_back({"client " + cid, "allocated demand exceeds the client's demand"});
    }
  }
  for (const auto& [fid, units] : facility_units) {
    const Facility* f = net.facility(fid);
    if (units > f->fcap + feasibility_units) {
      out.push_back({"facility " + fid, "total outflow exceeds fcap"});
    }
  }
  for (const auto& [key, units] : channel_units) {
    const Facility* f = net.facility(key.first);
    auto it = f->channel_caps.find(key.second);
    const double cap = it == f->channel_caps.end() ? 0.0 : it->second;
    if (units > cap + feasibility_units) {
      out.push_back({"facility " + key.first, "outflow on channel " + key.second + " exceeds ccap"});
    }
  }
  return out;
}

ObjectiveBreakdown evaluate_objective(const SupplyNetwork& net, const std::vector<std::string>& open,
                                      const AllocationPlan& plan, double feasibility_units) {
  const std::vector<Violation> bad = check_plan(net, open, plan, feasibility_units);
  if (!bad.empty()) {
    std::ostringstream msg;
    msg << "infeasible plan: " << bad.front().entity << ": " << bad.front().rule;
    throw std::invalid_argument(msg.str());
  }

  ObjectiveBreakdown b;
  std::vector<std::string> sorted_open(open.begin(), open.end());
  std::sort(sorted_open.begin(), sorted_open.end());
  for (const std::string& fid : sorted_open) {
    const Facility* f = net.facility(fid);
    if (f == nullptr) throw std::invalid_argument("open set references unknown facility " + fid);
    b.fixed_cost_total += f->fixed_cost;
  }

  double fulfilled = 0.0;
  for (const AllocationEntry& a : plan.entries) {  // entries are sorted
    if (a.fraction <= 0.0) continue;
    const Edge* e = net.find_edge(a.facility, a.client, a.channel);
    const Client* c = net.client(a.client);
    const double units = a.fraction * c->demand;
    b.shipping_cost_total += e->unit_cost * units;
    b.profit += (net.penalty_C - e->unit_cost) * units;
    fulfilled += units;
  }
  b.penalty_total = net.penalty_C * (net.total_demand() - fulfilled);
  b.total = b.fixed_cost_total + b.shipping_cost_total + b.penalty_total;
  return b;
}

}  // namespace flp
