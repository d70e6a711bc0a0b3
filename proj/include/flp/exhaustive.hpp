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

#ifndef FLP_EXHAUSTIVE_HPP_
#define FLP_EXHAUSTIVE_HPP_

#include <string>
#include <vector>

#include "flp/model.hpp"

namespace flp {

struct SubsetObjective {
  std::vector<std::string> open;
  double objective = 0.0;
};

struct ReferenceSolution {
  std::vector<std::string> best_set;
  double best_objective = 0.0;
  std::vector<SubsetObjective> table;  // filled only when requested
};

// Reference optimum by enumerating every facility subset of size at most k
// and pricing it with the exact oracle:
//   J(S) = sum of fixed costs + penalty_C * total demand - g(S).
// Subsets are visited by size then lexicographically; a subset whose fixed
// costs alone already exceed the incumbent is skipped (g >= 0). Refuses
// networks with more than max_facilities facilities.
ReferenceSolution solve_exhaustive(const SupplyNetwork& net, int k, const SolveConfig& config,
                                   int max_facilities = 16, bool keep_table = false);

}  // namespace flp

#endif  // FLP_EXHAUSTIVE_HPP_
