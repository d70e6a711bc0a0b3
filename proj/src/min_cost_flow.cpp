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

#include "flp/min_cost_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace flp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxAugmentations = 2'000'000;
}  // namespace

MinCostFlow::MinCostFlow(int node_count)
    : node_count_(node_count), out_(node_count), potential_(node_count, 0.0) {}

int MinCostFlow::add_arc(int from, int to, std::int64_t capacity, double cost) {
  if (from < 0 || from >= node_count_ || to < 0 || to >= node_count_) {
    throw std::invalid_argument("arc endpoint out of range");
  }
  if (capacity < 0) throw std::invalid_argument("negative arc capacity");
  const int id = static_cast<int>(arcs_.size());
  arcs_.push_back({to, capacity, cost});
  arcs_.push_back({from, 0, -cost});
  out_[from].push_back(id);
  out_[to].push_back(id + 1);
  cost_scale_ = std::max(cost_scale_, std::abs(cost));
  return id;
}

// Dijkstra on reduced costs; falls back to Bellman-Ford when some reduced
// cost is negative (first call, before potentials are primed).
bool MinCostFlow::shortest_path(int source, int sink, std::vector<double>& dist,
                                std::vector<int>& parent_arc) {
  dist.assign(node_count_, kInf);
  parent_arc.assign(node_count_, -1);
  dist[source] = 0.0;

  bool reduced_ok = true;
  for (std::size_t a = 0; a < arcs_.size() && reduced_ok; ++a) {
    const Arc& arc = arcs_[a];
    if (arc.cap <= 0) continue;
    const int from = arcs_[a ^ 1].to;
    if (arc.cost + potential_[from] - potential_[arc.to] < -1e-9 * cost_scale_) reduced_ok = false;
  }

  if (!reduced_ok) {
    // Bellman-Ford; arc costs here form no negative cycle by construction
    // (forward arcs only go source -> ... -> sink in the oracle graphs).
    for (int round = 0; round < node_count_; ++round) {
      bool relaxed = false;
      for (std::size_t a = 0; a < arcs_.size(); ++a) {
        const Arc& arc = arcs_[a];
        if (arc.cap <= 0) continue;
        const int from = arcs_[a ^ 1].to;
        if (dist[from] == kInf) continue;
        const double cand = dist[from] + arc.cost;
        if (cand < dist[arc.to] - 1e-15 * cost_scale_) {
          dist[arc.to] = cand;
          parent_arc[arc.to] = static_cast<int>(a);
          relaxed = true;
        }
      }
      if (!relaxed) break;
      if (round == node_count_ - 1) throw std::runtime_error("negative cycle in flow network");
    }
  } else {
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    std::vector<char> done(node_count_, 0);
    heap.push({0.0, source});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (done[u]) continue;
      done[u] = 1;
      for (int a : out_[u]) {
        const Arc& arc = arcs_[a];
        if (arc.cap <= 0 || done[arc.to]) continue;
        const double cand = d + arc.cost + potential_[u] - potential_[arc.to];
        if (cand < dist[arc.to]) {
          dist[arc.to] = cand;
          parent_arc[arc.to] = a;
          heap.push({cand, arc.to});
        }
      }
    }
    // Convert reduced distances back to true path costs.
    for (int v = 0; v < node_count_; ++v) {
      if (dist[v] < kInf) dist[v] += potential_[v] - potential_[source];
    }
  }
  return dist[sink] < kInf;
}

MinCostFlow::Result MinCostFlow::solve_profitable(int source, int sink) {
  Result res;
  const double gain_floor = -1e-9 * cost_scale_;
  std::vector<double> dist;
  std::vector<int> parent_arc;

  while (shortest_path(source, sink, dist, parent_arc)) {
    if (dist[sink] >= gain_floor) break;  // no strictly profitable path left

    for (int v = 0; v < node_count_; ++v) {
      if (dist[v] < kInf) potential_[v] = dist[v];
    }

    std::int64_t bottleneck = std::numeric_limits<std::int64_t>::max();
    for (int v = sink; v != source;) {
      const int a = parent_arc[v];
      bottleneck = std::min(bottleneck, arcs_[a].cap);
      v = arcs_[a ^ 1].to;
    }
    for (int v = sink; v != source;) {
      const int a = parent_arc[v];
      arcs_[a].cap -= bottleneck;
      arcs_[a ^ 1].cap += bottleneck;
      v = arcs_[a ^ 1].to;
    }
    res.cost += dist[sink] * static_cast<double>(bottleneck);
    res.flow += bottleneck;
    if (++res.augmentations > kMaxAugmentations) {
      throw std::runtime_error("min cost flow failed to terminate");
    }
  }
  return res;
}

std::int64_t MinCostFlow::flow_on(int arc) const { return arcs_[arc ^ 1].cap; }

}  // namespace flp
