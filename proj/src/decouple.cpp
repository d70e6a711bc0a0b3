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

#include "flp/decouple.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace flp {

namespace {

// Clients with at least one edge from the facility, and the facility's edges.
struct FacilityEdges {
  std::set<std::string> clients;
  // channel -> client -> profit
  std::map<std::string, std::map<std::string, double>> profit;
};

FacilityEdges collect_edges(const SupplyNetwork& net, const std::string& facility_id) {
  FacilityEdges fe;
  for (const Edge& e : net.edges) {
    if (e.facility != facility_id) continue;
    fe.clients.insert(e.client);
    fe.profit[e.channel][e.client] = net.penalty_C - e.unit_cost;
  }
  return fe;
}

double profit_or_zero(const FacilityEdges& fe, const std::string& channel,
                      const std::string& client) {
  auto ch = fe.profit.find(channel);
  if (ch == fe.profit.end()) return 0.0;
  auto it = ch->second.find(client);
  return it == ch->second.end() ? 0.0 : it->second;
}

void erase_channel(SupplyNetwork& net, Facility& facility, const std::string& channel) {
  facility.channel_caps.erase(channel);
  net.edges.erase(std::remove_if(net.edges.begin(), net.edges.end(),
                                 [&](const Edge& e) {
                                   return e.facility == facility.id && e.channel == channel;
                                 }),
                  net.edges.end());
}

Facility* mutable_facility(SupplyNetwork& net, const std::string& id) {
  for (Facility& f : net.facilities) {
    if (f.id == id) return &f;
  }
  return nullptr;
}

}  // namespace

bool fcap_redundant(const Facility& facility) {
  return facility.total_channel_cap() <= facility.fcap;
}

std::vector<CapReduction> trim_dominated_channel_caps(SupplyNetwork& net,
                                                      const std::string& facility_id) {
  Facility* facility = mutable_facility(net, facility_id);
  if (facility == nullptr) throw std::invalid_argument("unknown facility " + facility_id);

  std::vector<CapReduction> reductions;
  while (!fcap_redundant(*facility)) {
    const FacilityEdges fe = collect_edges(net, facility_id);

    // A candidate channel must be pointwise no more profitable than every
    // other channel for every client of this facility; a client missing from
    // a channel counts as profit 0 on whichever side it is missing.
    std::string dominated;
    for (const auto& [candidate, ccap] : facility->channel_caps) {
      if (ccap <= 0.0) continue;
      bool ok = true;
      for (const std::string& client : fe.clients) {
        const double pc = profit_or_zero(fe, candidate, client);
        for (const auto& [other, other_cap] : facility->channel_caps) {
          if (other == candidate) continue;
          if (pc > profit_or_zero(fe, other, client)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (ok) {
        dominated = candidate;  // smallest channel id wins; map order is sorted
        break;
      }
    }
    if (dominated.empty()) break;  // no-op fragment

    double others = 0.0;
    for (const auto& [channel, ccap] : facility->channel_caps) {
      if (channel != dominated) others += ccap;
    }
    const double old_cap = facility->channel_caps[dominated];
    const double new_cap = std::max(0.0, facility->fcap - others);
    reductions.push_back({facility_id, dominated, old_cap, new_cap});
    if (new_cap == 0.0) {
      erase_channel(net, *facility, dominated);
    } else {
      facility->channel_caps[dominated] = new_cap;
    }
  }
  return reductions;
}

DecoupleReport decouple_network(const SupplyNetwork& net) {
  DecoupleReport report;
  SupplyNetwork work = net;

  for (const Facility& f : net.facilities) {
    if (!fcap_redundant(f)) {
      auto reductions = trim_dominated_channel_caps(work, f.id);
      report.reductions.insert(report.reductions.end(), reductions.begin(), reductions.end());
    }
  }

  SupplyNetwork out;
  out.channels = work.channels;
  out.clients = work.clients;
  out.penalty_C = work.penalty_C;

  std::set<std::string> split_ids;
  for (const Facility& f : work.facilities) {
    if (!fcap_redundant(f)) continue;  // stays coupled
    report.fully_decoupled.push_back(f.id);
    bool first = true;
    for (const auto& [channel, ccap] : f.channel_caps) {
      const std::string pseudo_id = f.id + "-" + channel;
      if (work.facility(pseudo_id) != nullptr || !split_ids.insert(pseudo_id).second) {
        throw std::runtime_error("pseudo facility id collision: " + pseudo_id);
      }
      Facility part;
      part.id = pseudo_id;
      part.fixed_cost = first ? f.fixed_cost : 0.0;
      part.fcap = ccap;
      part.channel_caps[channel] = ccap;
      out.facilities.push_back(std::move(part));
      report.back_mapping[pseudo_id] = {f.id, channel};
      first = false;
    }
  }
  for (const Facility& f : work.facilities) {
    if (fcap_redundant(f)) continue;
    out.facilities.push_back(f);
  }

  std::set<std::string> decoupled_set(report.fully_decoupled.begin(),
                                      report.fully_decoupled.end());
  for (const Edge& e : work.edges) {
    Edge copy = e;
    if (decoupled_set.count(e.facility) > 0) copy.facility = e.facility + "-" + e.channel;
    out.edges.push_back(std::move(copy));
  }

  out.canonicalize();
  report.network = std::move(out);
  return report;
}

ReducedNetwork reduce_to_single_channel(const SupplyNetwork& net) {
  ReducedNetwork red;
  red.network.clients = net.clients;
  red.network.channels = {kAbstractChannel};
  red.network.penalty_C = net.penalty_C;

  for (const Facility& f : net.facilities) {
    const double total_cap = f.total_channel_cap();
    if (total_cap <= 0.0) continue;  // cannot ship anything

    auto& w = red.weights[f.id];
    for (const auto& [channel, ccap] : f.channel_caps) w[channel] = ccap / total_cap;

    Facility merged;
    merged.id = f.id;
    merged.fixed_cost = f.fixed_cost;
    merged.fcap = f.fcap;
    merged.channel_caps[kAbstractChannel] = f.fcap;
    red.network.facilities.push_back(std::move(merged));

    const FacilityEdges fe = collect_edges(net, f.id);
    for (const std::string& client : fe.clients) {
      // Only channels with capacity can actually reach the client.
      bool reachable = false;
      for (const auto& [channel, weight] : w) {
        if (weight > 0.0 && fe.profit.count(channel) > 0 &&
            fe.profit.at(channel).count(client) > 0) {
          reachable = true;
          break;
        }
      }
      if (!reachable) continue;
      double p_alpha = 0.0;
      for (const auto& [channel, weight] : w) {
        p_alpha += weight * profit_or_zero(fe, channel, client);
      }
      red.profits[{f.id, client}] = p_alpha;
      red.network.edges.push_back({f.id, client, kAbstractChannel, net.penalty_C - p_alpha});
    }
  }
  red.network.canonicalize();
  return red;
}

}  // namespace flp
