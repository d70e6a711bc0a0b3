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

#ifndef FLP_MIN_COST_FLOW_HPP_
#define FLP_MIN_COST_FLOW_HPP_

#include <cstdint>
#include <vector>

namespace flp {

// Successive shortest augmenting paths with node potentials. Capacities are
// integral (callers quantize), costs are doubles. solve_profitable() augments
// along the cheapest source->sink path while that path has strictly negative
// cost, which for profit-valued arcs (cost = -profit) yields the maximum
// profit flow without forcing unprofitable units.
class MinCostFlow {
 public:
  explicit MinCostFlow(int node_count);

  // Adds a directed arc and its residual twin; returns the arc handle.
  int add_arc(int from, int to, std::int64_t capacity, double cost);

  struct Result {
    double cost = 0.0;
    std::int64_t flow = 0;
    int augmentations = 0;
  };

  Result solve_profitable(int source, int sink);

  std::int64_t flow_on(int arc) const;

 private:
  struct Arc {
    int to = 0;
    std::int64_t cap = 0;
    double cost = 0.0;
  };

  bool shortest_path(int source, int sink, std::vector<double>& dist, std::vector<int>& parent_arc);

  int node_count_;
  std::vector<Arc> arcs_;                 // arc 2k and its reverse 2k+1
  std::vector<std::vector<int>> out_;     // node -> arc ids
  std::vector<double> potential_;
  double cost_scale_ = 1.0;               // magnitude reference for tolerances
};

}  // namespace flp

#endif  // FLP_MIN_COST_FLOW_HPP_
