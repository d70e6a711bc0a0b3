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

#include "flp/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace flp {

namespace {

constexpr double kLogDomainExponentLimit = 500.0;  // exp() overflow with headroom
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Compacted view of the balanced problem: only rows/columns that carry
// positive mass and at least one allowed partner take part in the scaling.
struct ActiveSet {
  std::vector<int> rows, cols;
  std::vector<double> p, q;        // normalized marginals of the active block
  double dropped_mass = 0.0;       // normalized marginal mass that cannot move
};

ActiveSet compact(const BalancedProblem& bp) {
  const TransportProblem& prob = bp.problem;
  const std::size_t m = prob.supply.size(), n = prob.demand.size();
  std::vector<char> row_on(m, 1), col_on(n, 1);
  for (std::size_t i = 0; i < m; ++i) row_on[i] = prob.supply[i] > 0.0;
  for (std::size_t j = 0; j < n; ++j) col_on[j] = prob.demand[j] > 0.0;

  // A row needs an allowed active column and vice versa; iterate to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (!row_on[i]) continue;
      bool any = false;
      for (std::size_t j = 0; j < n && !any; ++j) any = col_on[j] && prob.allowed(i, j);
      if (!any) {
        row_on[i] = 0;
        changed = true;
      }
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!col_on[j]) continue;
      bool any = false;
      for (std::size_t i = 0; i < m && !any; ++i) any = row_on[i] && prob.allowed(i, j);
      if (!any) {
        col_on[j] = 0;
        changed = true;
      }
    }
  }

  ActiveSet act;
  for (std::size_t i = 0; i < m; ++i) {
    if (row_on[i]) {
      act.rows.push_back(static_cast<int>(i));
      act.p.push_back(prob.supply[i] / bp.kappa);
    } else {
      act.dropped_mass += prob.supply[i] / bp.kappa;
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (col_on[j]) {
      act.cols.push_back(static_cast<int>(j));
      act.q.push_back(prob.demand[j] / bp.kappa);
    } else {
      act.dropped_mass += prob.demand[j] / bp.kappa;
    }
  }
  return act;
}

struct ScalingResult {
  std::vector<double> row_scale, col_scale;  // multiplicative, linear domain
  int iterations = 0;
  double violation = 0.0;
  bool converged = false;
  bool overflowed = false;  // standard domain hit a non-finite value
};

// gamma_hat(i,j) = a_i * K(i,j) * b_j with K = exp(P/mu) on allowed pairs.
ScalingResult run_standard(const Grid<double>& kernel, const std::vector<double>& p,
                           const std::vector<double>& q, double tol, int max_iters) {
  const std::size_t m = p.size(), n = q.size();
  ScalingResult res;
  std::vector<double> a = p, b = q;
  std::vector<double> kb(m), ka(n);

  auto mat_vec = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += kernel(i, j) * x[j];
      out[i] = s;
    }
  };
  auto mat_t_vec = [&](const std::vector<double>& x, std::vector<double>& out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double xi = x[i];
      for (std::size_t j = 0; j < n; ++j) out[j] += kernel(i, j) * xi;
    }
  };

  mat_vec(b, kb);
  for (int iter = 1; iter <= max_iters; ++iter) {
    for (std::size_t i = 0; i < m; ++i) a[i] = p[i] / kb[i];
    mat_t_vec(a, ka);
    for (std::size_t j = 0; j < n; ++j) b[j] = q[j] / ka[j];
    mat_vec(b, kb);

    res.iterations = iter;
    double viol = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < m; ++i) {
      const double row = a[i] * kb[i];
      if (!std::isfinite(row)) finite = false;
      viol += std::abs(row - p[i]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double col = b[j] * ka[j];
      if (!std::isfinite(col)) finite = false;
      viol += std::abs(col - q[j]);
    }
    if (!finite) {
      res.overflowed = true;
      return res;
    }
    res.violation = viol;
    if (viol <= tol) {
      res.converged = true;
      break;
    }
  }
  res.row_scale = std::move(a);
  res.col_scale = std::move(b);
  return res;
}

// Same fixed point computed through log-sum-exp; exponents is P/mu on allowed
// pairs and -inf otherwise.
ScalingResult run_log(const Grid<double>& exponents, const std::vector<double>& p,
                      const std::vector<double>& q, double tol, int max_iters) {
  const std::size_t m = p.size(), n = q.size();
  ScalingResult res;
  std::vector<double> f(m), g(n), log_p(m), log_q(n);
  for (std::size_t i = 0; i < m; ++i) log_p[i] = std::log(p[i]);
  for (std::size_t j = 0; j < n; ++j) log_q[j] = std::log(q[j]);
  f = log_p;
  g = log_q;

  auto lse_rows = [&](std::vector<double>& out) {  // out_i = lse_j(K_ij + g_j)
    for (std::size_t i = 0; i < m; ++i) {
      double hi = kNegInf;
      for (std::size_t j = 0; j < n; ++j) hi = std::max(hi, exponents(i, j) + g[j]);
      if (hi == kNegInf) {
        out[i] = kNegInf;
        continue;
      }
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = exponents(i, j) + g[j];
        if (e != kNegInf) s += std::exp(e - hi);
      }
      out[i] = hi + std::log(s);
    }
  };
  auto lse_cols = [&](std::vector<double>& out) {  // out_j = lse_i(K_ij + f_i)
    for (std::size_t j = 0; j < n; ++j) {
      double hi = kNegInf;
      for (std::size_t i = 0; i < m; ++i) hi = std::max(hi, exponents(i, j) + f[i]);
      if (hi == kNegInf) {
        out[j] = kNegInf;
        continue;
      }
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double e = exponents(i, j) + f[i];
        if (e != kNegInf) s += std::exp(e - hi);
      }
      out[j] = hi + std::log(s);
    }
  };

  std::vector<double> row_lse(m), col_lse(n);
  for (int iter = 1; iter <= max_iters; ++iter) {
    lse_rows(row_lse);
    for (std::size_t i = 0; i < m; ++i) f[i] = log_p[i] - row_lse[i];
    lse_cols(col_lse);
    for (std::size_t j = 0; j < n; ++j) g[j] = log_q[j] - col_lse[j];

    res.iterations = iter;
    lse_rows(row_lse);
    double viol = 0.0;
    for (std::size_t i = 0; i < m; ++i) viol += std::abs(std::exp(f[i] + row_lse[i]) - p[i]);
    for (std::size_t j = 0; j < n; ++j) viol += std::abs(std::exp(g[j] + col_lse[j]) - q[j]);
    res.violation = viol;
    if (viol <= tol) {
      res.converged = true;
      break;
    }
  }
  res.row_scale.resize(m);
  res.col_scale.resize(n);
  for (std::size_t i = 0; i < m; ++i) res.row_scale[i] = f[i];
  for (std::size_t j = 0; j < n; ++j) res.col_scale[j] = g[j];
  return res;
}

}  // namespace

TransportProblem TransportProblem::dense(std::vector<double> supply, std::vector<double> demand,
                                         Grid<double> profit) {
  TransportProblem p;
  p.allowed = Grid<std::uint8_t>(supply.size(), demand.size(), 1);
  p.supply = std::move(supply);
  p.demand = std::move(demand);
  p.profit = std::move(profit);
  return p;
}

BalancedProblem balance(const TransportProblem& problem) {
  const std::size_t m = problem.supply.size(), n = problem.demand.size();
  if (problem.profit.rows() != m || problem.profit.cols() != n ||
      problem.allowed.rows() != m || problem.allowed.cols() != n) {
    throw std::invalid_argument("transport problem dimensions disagree");
  }
  double sp = 0.0, sq = 0.0;
  for (double v : problem.supply) {
    if (v < 0.0) throw std::invalid_argument("negative supply");
    sp += v;
  }
  for (double v : problem.demand) {
    if (v < 0.0) throw std::invalid_argument("negative demand");
    sq += v;
  }

  BalancedProblem out;
  out.original_rows = m;
  out.original_cols = n;
  if (sp == 0.0 && sq == 0.0) {
    out.problem = problem;
    out.kappa = 0.0;  // empty-plan short circuit
    return out;
  }

  const std::size_t rows = m + (sp < sq ? 1 : 0);
  const std::size_t cols = n + (sq < sp ? 1 : 0);
  out.problem.supply = problem.supply;
  out.problem.demand = problem.demand;
  out.problem.profit = Grid<double>(rows, cols, 0.0);
  out.problem.allowed = Grid<std::uint8_t>(rows, cols, 1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.problem.profit(i, j) = problem.profit(i, j);
      out.problem.allowed(i, j) = problem.allowed(i, j);
    }
  }
  if (sp < sq) {
    out.pseudo_row = static_cast<int>(m);
    out.problem.supply.push_back(sq - sp);
  } else if (sq < sp) {
    out.pseudo_col = static_cast<int>(n);
    out.problem.demand.push_back(sp - sq);
  }
  out.kappa = std::max(sp, sq);
  return out;
}

TransportPlan sinkhorn_solve(const BalancedProblem& balanced, const SinkhornOptions& options) {
  if (options.mu <= 0.0) throw std::invalid_argument("mu must be positive");
  const TransportProblem& prob = balanced.problem;
  const std::size_t m = prob.supply.size(), n = prob.demand.size();

  TransportPlan plan;
  plan.coupling = Grid<double>(m, n, 0.0);
  plan.pseudo_row = balanced.pseudo_row;
  plan.pseudo_col = balanced.pseudo_col;
  plan.kappa = balanced.kappa;
  if (balanced.kappa == 0.0) {
    plan.converged = true;
    return plan;
  }

  const ActiveSet act = compact(balanced);
  const std::size_t am = act.rows.size(), an = act.cols.size();
  plan.marginal_violation = act.dropped_mass;
  if (am == 0 || an == 0) {
    plan.converged = act.dropped_mass <= options.tol;
    return plan;
  }

  // A single active row (or column) is pinned by the opposite marginal; write
  // the answer directly instead of iterating toward it.
  if (am == 1) {
    double moved = 0.0;
    for (std::size_t j = 0; j < an; ++j) {
      plan.coupling(act.rows[0], act.cols[j]) = prob.demand[act.cols[j]];
      moved += act.q[j];
    }
    plan.marginal_violation = act.dropped_mass + std::abs(act.p[0] - moved);
    plan.converged = plan.marginal_violation <= options.tol;
    return plan;
  }
  if (an == 1) {
    double moved = 0.0;
    for (std::size_t i = 0; i < am; ++i) {
      plan.coupling(act.rows[i], act.cols[0]) = prob.supply[act.rows[i]];
      moved += act.p[i];
    }
    plan.marginal_violation = act.dropped_mass + std::abs(act.q[0] - moved);
    plan.converged = plan.marginal_violation <= options.tol;
    return plan;
  }

  // Exponents of the active block.
  Grid<double> exponents(am, an, kNegInf);
  double max_abs_exponent = 0.0;
  for (std::size_t i = 0; i < am; ++i) {
    for (std::size_t j = 0; j < an; ++j) {
      if (!prob.allowed(act.rows[i], act.cols[j])) continue;
      const double e = prob.profit(act.rows[i], act.cols[j]) / options.mu;
      exponents(i, j) = e;
      max_abs_exponent = std::max(max_abs_exponent, std::abs(e));
    }
  }

  bool use_log = options.domain == ScalingDomain::kLog ||
                 (options.domain == ScalingDomain::kAuto &&
                  max_abs_exponent > kLogDomainExponentLimit);

  ScalingResult res;
  if (!use_log) {
    Grid<double> kernel(am, an, 0.0);
    for (std::size_t i = 0; i < am; ++i)
      for (std::size_t j = 0; j < an; ++j)
        kernel(i, j) = exponents(i, j) == kNegInf ? 0.0 : std::exp(exponents(i, j));
    res = run_standard(kernel, act.p, act.q, options.tol, options.max_iters);
    if (res.overflowed && options.domain == ScalingDomain::kAuto) use_log = true;
  }
  if (use_log) {
    const int spent = res.iterations;
    res = run_log(exponents, act.p, act.q, options.tol, std::max(1, options.max_iters - spent));
    res.iterations += spent;
    plan.log_domain = true;
  } else if (res.overflowed) {
    throw std::runtime_error("sinkhorn scaling overflowed in standard domain");
  }

  plan.iterations = res.iterations;
  plan.marginal_violation = act.dropped_mass + res.violation;
  plan.converged = plan.marginal_violation <= options.tol;

  for (std::size_t i = 0; i < am; ++i) {
    for (std::size_t j = 0; j < an; ++j) {
      if (exponents(i, j) == kNegInf) continue;
      double value;
      if (plan.log_domain) {
        value = std::exp(res.row_scale[i] + exponents(i, j) + res.col_scale[j]);
      } else {
        value = res.row_scale[i] * std::exp(exponents(i, j)) * res.col_scale[j];
      }
      plan.coupling(act.rows[i], act.cols[j]) = balanced.kappa * value;
    }
  }
  return plan;
}

double plan_objective(const TransportProblem& original, const TransportPlan& plan) {
  const std::size_t m = original.supply.size(), n = original.demand.size();
  double total = 0.0;
  for (std::size_t i = 0; i < m && i < plan.coupling.rows(); ++i) {
    for (std::size_t j = 0; j < n && j < plan.coupling.cols(); ++j) {
      total += original.profit(i, j) * plan.coupling(i, j);
    }
  }
  return total;
}

double default_mu(const TransportProblem& problem) {
  double hi = 0.0;
  double lo_pos = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < problem.profit.rows(); ++i) {
    for (std::size_t j = 0; j < problem.profit.cols(); ++j) {
      if (!problem.allowed(i, j)) continue;
      const double p = problem.profit(i, j);
      hi = std::max(hi, p);
      if (p > 0.0) lo_pos = std::min(lo_pos, p);
    }
  }
  if (!std::isfinite(lo_pos)) return 1.0;        // no positive profit anywhere
  const double spread = hi - lo_pos;
  if (spread > 0.0) return 0.05 * spread;
  return std::max(0.05 * hi, 1e-3);              // flat profits
}

}  // namespace flp
