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

#include "flp/exhaustive.hpp"

#include <algorithm>
#include <stdexcept>

#include "flp/oracles.hpp"

namespace flp {

ReferenceSolution solve_exhaustive(const SupplyNetwork& net, int k, const SolveConfig& config,
                                   int max_facilities, bool keep_table) {
  const int m = static_cast<int>(net.facilities.size());
  if (m > max_facilities) {
    throw std::invalid_argument("exhaustive enumeration refused: " + std::to_string(m) +
                                " facilities exceed the cap of " + std::to_string(max_facilities));
  }
  if (k < 0) throw std::invalid_argument("k must be >= 0");

  const ExactOracle oracle(net, config);
  const double penalty_mass = net.penalty_C * net.total_demand();

  ReferenceSolution out;
  out.best_set = {};
  out.best_objective = penalty_mass;  // empty set: nothing shipped
  if (keep_table) out.table.push_back({{}, out.best_objective});

  std::vector<int> pick;
  auto evaluate = [&](const std::vector<int>& subset) {
    std::vector<std::string> open;
    double fixed = 0.0;
    for (int i : subset) {
      open.push_back(net.facilities[i].id);
      fixed += net.facilities[i].fixed_cost;
    }
    if (!keep_table && fixed > out.best_objective) return;  // J >= h(S)
    const double objective = fixed + penalty_mass - oracle.evaluate(open).g_value;
    if (keep_table) out.table.push_back({open, objective});
    if (objective < out.best_objective ||
        (objective == out.best_objective && open < out.best_set)) {
      out.best_objective = objective;
      out.best_set = open;
    }
  };

  // Combinations of each size in lexicographic order.
  for (int size = 1; size <= std::min(k, m); ++size) {
    pick.assign(size, 0);
    for (int i = 0; i < size; ++i) pick[i] = i;
    for (;;) {
      evaluate(pick);
      int i = size - 1;
      while (i >= 0 && pick[i] == m - size + i) --i;
      if (i < 0) break;
      ++pick[i];
      for (int j = i + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
    }
  }
  return out;
}

}  // namespace flp
