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
// Stochastic distorted greedy facility selection. Each of the k rounds draws
// a uniform sample of the remaining facilities, scores every candidate u by
//
//   (1 - 1/k)^(k - round) * (g(S + u) - g(S)) - F_u
//
// and keeps the best candidate only when that distorted gain is positive.
// The distortion discounts early profit gains so the fixed-cost term cannot
// be swamped while the budget is still mostly unspent.
//

#ifndef FLP_GREEDY_HPP_
#define FLP_GREEDY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "flp/model.hpp"
#include "flp/oracles.hpp"

namespace flp {

struct CandidateEval {
  std::string facility;
  double g_with = 0.0;          // g(S + u)
  double gain_g = 0.0;          // g(S + u) - g(S)
  double fixed_cost = 0.0;      // h_S(u)
  double distorted_gain = 0.0;
  bool failed = false;
  std::string note;             // oracle failure message when failed
};

struct GreedyIteration {
  int round = 0;                        // 1-based
  std::vector<std::string> sampled;     // the drawn candidate set
  std::vector<CandidateEval> evals;     // in sorted candidate order
  std::string chosen;                   // empty when every candidate failed
  double incremental_gain = 0.0;
  bool accepted = false;
  double g_after = 0.0;                 // g(S) after this round
  std::vector<std::string> selected_after;  // running S, sorted
};

struct GreedyTrace {
  std::string rng_algorithm;
  std::uint64_t seed = 0;
  int sample_count = 0;                 // r
  int k = 0;
  std::vector<GreedyIteration> iterations;
  std::vector<std::string> selected;
  CallCounterSnapshot counters;
};

// r = ceil((m / k) * ln(1 / epsilon)), clamped to [1, m]. Natural log.
int sample_size(int m, int k, double epsilon);

double distorted_gain(double gain_g, double fixed_cost, int round, int k);

// Runs the k rounds against the given oracle. Candidate evaluations within a
// round run on config.threads workers; results are reduced in candidate id
// order, so the outcome does not depend on the thread count. A candidate
// whose oracle call throws is skipped and annotated in the trace.
std::pair<std::vector<std::string>, GreedyTrace> select_facilities(const SupplyNetwork& net,
                                                                   const SolveConfig& config,
                                                                   const ValueOracle& oracle);

}  // namespace flp

#endif  // FLP_GREEDY_HPP_
