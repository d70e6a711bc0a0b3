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
// Entropic-regularized profit-maximizing optimal transport via alternating
// diagonal scaling. The raw problem has inequality marginals (ship at most
// the supply, serve at most the demand); balance() turns it into an equality
// problem by appending a zero-profit pseudo supply or demand node absorbing
// the surplus, after which the scaling iteration applies.
//

#ifndef FLP_SINKHORN_HPP_
#define FLP_SINKHORN_HPP_

#include <cstdint>
#include <vector>

#include "flp/grid.hpp"

namespace flp {

struct TransportProblem {
  std::vector<double> supply;    // length m
  std::vector<double> demand;    // length n
  Grid<double> profit;           // m x n, per unit shipped
  Grid<std::uint8_t> allowed;    // m x n, 0 = pair carries no flow

  static TransportProblem dense(std::vector<double> supply, std::vector<double> demand,
                                Grid<double> profit);
};

struct BalancedProblem {
  TransportProblem problem;   // augmented; pseudo row/col has profit 0 everywhere
  double kappa = 0.0;         // common mass after augmentation; 0 = empty problem
  int pseudo_row = -1;
  int pseudo_col = -1;
  std::size_t original_rows = 0;
  std::size_t original_cols = 0;
};

// Appends the pseudo node needed to equalize total supply and demand and
// records kappa. Throws std::invalid_argument on negative marginals.
BalancedProblem balance(const TransportProblem& problem);

enum class ScalingDomain {
  kAuto,      // standard scaling, log-domain when exp(P/mu) would overflow
  kStandard,
  kLog,
};

struct SinkhornOptions {
  double mu = 1.0;
  double tol = 1e-8;      // L1 marginal violation of the normalized plan
  int max_iters = 10000;
  ScalingDomain domain = ScalingDomain::kAuto;
};

struct TransportPlan {
  Grid<double> coupling;          // same shape as the balanced problem, units
  int pseudo_row = -1;
  int pseudo_col = -1;
  double kappa = 0.0;
  int iterations = 0;
  double marginal_violation = 0.0;  // final L1 violation, normalized scale
  bool converged = false;
  bool log_domain = false;
};

// Alternating scaling on the balanced problem until the plan implied by the
// current scalings meets both marginals within tol, or max_iters is reached
// (the plan is still returned, flagged unconverged). Disallowed pairs carry
// exactly zero flow; rows/columns with zero marginal are skipped and restored
// as zero flow.
TransportPlan sinkhorn_solve(const BalancedProblem& balanced, const SinkhornOptions& options);

// <P, coupling> over the original (non-pseudo) block.
double plan_objective(const TransportProblem& original, const TransportPlan& plan);

// Scale-aware default regularization: 0.05 * (max profit - min positive
// profit) over allowed pairs, with fallbacks for degenerate spreads.
double default_mu(const TransportProblem& problem);

}  // namespace flp

#endif  // FLP_SINKHORN_HPP_
