// Copyright 2026 The almlab Authors
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

#pragma once

// Approximate minimization of x ↦ L_c(x, λ, μ).
//
// The default path is proximal gradient with Armijo backtracking. Every
// candidate carries a subgradient certificate y ∈ ∂ₓL_c taken from the prox
// optimality condition, and the relative error test is evaluated at each
// candidate, including the warm start. Exact mode runs a damped generalized
// Newton iteration on ∇Φ = 0 (Φ = smooth part of L_c) for quadratic
// objectives without a nonsmooth term and reports y = 0.

#include <almlab/auglag.hpp>

#include <limits>
#include <optional>
#include <vector>

namespace almlab {

struct InnerOptions {
  int max_inner = 10000;
  double armijo_shrink = 0.5;
  double armijo_decrease = 1e-4;
  int max_backtracks = 80;
  bool exact = false;
  double exact_tol = 1e-12;
  int max_newton = 200;
  bool record_values = false;
};

struct SubproblemResult {
  Vector x;
  Vector y;
  int inner_iters = 0;
  int backtracks = 0;
  CriterionReport criterion;
  MultiplierUpdate update;  ///< step-2 multipliers evaluated at the accepted x
  std::vector<double> values;  ///< L_c along the iterations (record_values only)
};

struct ProxStep {
  Vector x_next;
  Vector y_cert;
};

/// x⁺ = prox_{t·r}(x − t∇Φ(x)),  y = ∇Φ(x⁺) + (x − t∇Φ(x) − x⁺)/t ∈ ∂ₓL_c(x⁺).
inline ProxStep prox_grad_step(const ConvexProgram& prog, const DualPoint& p_prev, double c,
                               const Vector& x, double t) {
  require(t > 0.0 && std::isfinite(t), ErrorCode::InvalidArgument, "step size t must be positive");
  const Vector grad = auglag_eval(prog, x, p_prev, c).smooth_grad;
  const Vector v = x - t * grad;
  ProxStep step;
  if (!prog.nonsmooth()) {
    step.x_next = v;
    step.y_cert = auglag_eval(prog, step.x_next, p_prev, c).smooth_grad;
    return step;
  }
  step.x_next = prog.nonsmooth()->prox(v, t);
  step.y_cert = auglag_eval(prog, step.x_next, p_prev, c).smooth_grad + (v - step.x_next) / t;
  return step;
}

/// Global Lipschitz bound for ∇Φ when the smooth objective is quadratic and
/// all inequalities are affine; nullopt otherwise.
inline std::optional<double> auglag_curvature_bound(const ConvexProgram& prog, double c) {
  const QuadraticForm* quad = prog.smooth().quadratic();
  if (quad == nullptr || !prog.has_affine_inequalities_only()) return std::nullopt;
  const auto n = prog.n();
  Matrix H = quad->has_hessian() ? quad->hessian : Matrix::Zero(n, n);
  const Matrix& A = prog.eq_matrix();
  const Matrix G = prog.ineq_matrix();
  H += c * (A.transpose() * A + G.transpose() * G);
  const double lmax = Eigen::SelfAdjointEigenSolver<Matrix>(H, Eigen::EigenvaluesOnly)
                          .eigenvalues()
                          .maxCoeff();
  if (!(lmax > 0.0) || !std::isfinite(lmax)) return std::nullopt;
  return lmax;
}

namespace detail {

struct Candidate {
  CriterionReport criterion;
  MultiplierUpdate update;
};

inline Candidate check_candidate(const ConvexProgram& prog, const DualPoint& p_prev, double c,
                                 double sigma, const Vector& w_prev, const Vector& x,
                                 const Vector& y, const ConstraintValues& cv) {
  Candidate cand;
  cand.update = multiplier_update(p_prev, c, cv.h, cv.g);
  cand.criterion =
      criterion_eval(c, sigma, w_prev, x, y, cv.h, cv.g, p_prev.mu, cand.update.delta_p);
  return cand;
}

/// ∂²Φ element at x (generalized Hessian on the active set of Π(μ + c g)).
inline Matrix auglag_generalized_hessian(const ConvexProgram& prog, const AugLagEval& ev, double c,
                                         const Vector& x) {
  const auto n = prog.n();
  const QuadraticForm* quad = prog.smooth().quadratic();
  Matrix H = quad->has_hessian() ? quad->hessian : Matrix::Zero(n, n);
  H += c * prog.eq_matrix().transpose() * prog.eq_matrix();
  for (Eigen::Index i = 0; i < prog.m2(); ++i) {
    if (ev.shifted_mu[i] <= 0.0) continue;
    const auto& gi = prog.inequalities()[i];
    const Vector grad = gi.gradient(x);
    H += c * grad * grad.transpose();
    if (gi.form.has_hessian()) H += ev.shifted_mu[i] * gi.form.hessian;
  }
  return H;
}

inline SubproblemResult solve_exact(const ConvexProgram& prog, const DualPoint& p_prev, double c,
                                    double sigma, const Vector& w_prev, const Vector& x_init,
                                    const InnerOptions& opts) {
  require(prog.smooth().quadratic() != nullptr && prog.is_smooth(), ErrorCode::Unsupported,
          "exact inner mode needs a quadratic objective without a nonsmooth term");
  SubproblemResult res;
  Vector x = x_init;
  AugLagEval ev = auglag_eval(prog, x, p_prev, c);
  if (opts.record_values) res.values.push_back(ev.value);
  // Stop at the tolerance, or once three consecutive steps fail to halve the
  // gradient norm: that is the roundoff floor of the active-set linear solve.
  int stalls = 0;
  while (ev.smooth_grad.norm() > opts.exact_tol && res.inner_iters < opts.max_newton) {
    const Matrix H = auglag_generalized_hessian(prog, ev, c, x);
    Eigen::LDLT<Matrix> ldlt(H);
    Vector d;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      d = -ldlt.solve(ev.smooth_grad);
    } else {
      d = -Eigen::CompleteOrthogonalDecomposition<Matrix>(H).solve(ev.smooth_grad);
    }
    require(d.allFinite(), ErrorCode::NonFiniteEncountered, "Newton direction is not finite");
    const double slope = ev.smooth_grad.dot(d);
    double t = 1.0;
    AugLagEval trial = auglag_eval(prog, x + d, p_prev, c);
    const double grad_norm = ev.smooth_grad.norm();
    // A full step that halves the gradient is taken even when the value change
    // is below rounding level.
    const bool full_ok = trial.smooth_grad.norm() <= 0.5 * grad_norm;
    int bt = 0;
    while (!full_ok && !(trial.value <= ev.value + opts.armijo_decrease * t * slope) &&
           bt < opts.max_backtracks) {
      t *= opts.armijo_shrink;
      trial = auglag_eval(prog, x + t * d, p_prev, c);
      ++bt;
    }
    res.backtracks += bt;
    ++res.inner_iters;
    require(std::isfinite(trial.value), ErrorCode::NonFiniteEncountered,
            "non-finite augmented Lagrangian in Newton line search");
    if (bt == opts.max_backtracks) break;
    x += t * d;
    ev = std::move(trial);
    if (opts.record_values) res.values.push_back(ev.value);
    stalls = ev.smooth_grad.norm() > 0.5 * grad_norm ? stalls + 1 : 0;
    if (stalls >= 3) break;
  }
  res.x = std::move(x);
  res.y = Vector::Zero(prog.n());
  auto cand = check_candidate(prog, p_prev, c, sigma, w_prev, res.x, res.y, ev.constraints);
  res.criterion = cand.criterion;
  res.update = std::move(cand.update);
  return res;
}

}  // namespace detail

/// Finds (x, y) with y ∈ ∂ₓL_c(x, p_prev) satisfying the relative error test.
inline SubproblemResult solve_subproblem(const ConvexProgram& prog, const DualPoint& p_prev,
                                         double c, double sigma, const Vector& w_prev,
                                         const Vector& x_init, const InnerOptions& opts = {}) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "penalty c must be positive");
  require_sigma(sigma);
  require_dual_dims(prog, p_prev);
  require((p_prev.mu.array() >= 0.0).all(), ErrorCode::InvalidArgument, "mu_prev must be >= 0");
  require_size(x_init.size(), prog.n(), "x_init");
  require_size(w_prev.size(), prog.n(), "w_prev");

  if (opts.exact) return detail::solve_exact(prog, p_prev, c, sigma, w_prev, x_init, opts);

  SubproblemResult res;
  Vector x = x_init;
  AugLagEval ev = auglag_eval(prog, x, p_prev, c);
  if (opts.record_values) res.values.push_back(ev.value);

  // Verification pass at the warm start.
  if (!prog.nonsmooth() || prog.nonsmooth()->in_domain(x)) {
    Vector y = prog.nonsmooth() ? prog.nonsmooth()->min_norm_subgradient(x, ev.smooth_grad)
                                : ev.smooth_grad;
    auto cand = detail::check_candidate(prog, p_prev, c, sigma, w_prev, x, y, ev.constraints);
    if (cand.criterion.satisfied) {
      res.x = std::move(x);
      res.y = std::move(y);
      res.criterion = cand.criterion;
      res.update = std::move(cand.update);
      return res;
    }
  }

  const auto lip = auglag_curvature_bound(prog, c);
  double t = lip ? 1.0 / *lip : 1.0;
  const NonsmoothTerm* r = prog.nonsmooth() ? &*prog.nonsmooth() : nullptr;

  while (res.inner_iters < opts.max_inner) {
    Vector v, x_next;
    AugLagEval next;
    int bt = 0;
    for (;;) {
      v = x - t * ev.smooth_grad;
      x_next = r ? r->prox(v, t) : v;
      next = auglag_eval(prog, x_next, p_prev, c);
      if (!std::isfinite(next.value) || !next.smooth_grad.allFinite()) {
        if (bt >= opts.max_backtracks)
          throw Error(ErrorCode::NonFiniteEncountered, "non-finite value in line search");
      } else if (lip) {
        // t = 1/L̂ with L̂ a global curvature bound already decreases the objective.
        break;
      } else {
        // Near a minimizer the decrease falls below rounding level; allow that much slack.
        const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(ev.value));
        if (next.value <= ev.value - opts.armijo_decrease / t * (x_next - x).squaredNorm() + slack)
          break;
      }
      require(bt < opts.max_backtracks, ErrorCode::NonFiniteEncountered,
              "line search failed to find sufficient decrease");
      t *= opts.armijo_shrink;
      ++bt;
    }
    res.backtracks += bt;
    ++res.inner_iters;
    Vector y = r ? Vector(next.smooth_grad + (v - x_next) / t) : next.smooth_grad;
    x = std::move(x_next);
    ev = std::move(next);
    if (opts.record_values) res.values.push_back(ev.value);
    auto cand = detail::check_candidate(prog, p_prev, c, sigma, w_prev, x, y, ev.constraints);
    if (cand.criterion.satisfied) {
      res.x = std::move(x);
      res.y = std::move(y);
      res.criterion = cand.criterion;
      res.update = std::move(cand.update);
      return res;
    }
  }
  throw Error(ErrorCode::MaxInnerIterations,
              "relative error criterion unmet after " + std::to_string(opts.max_inner) +
                  " inner iterations");
}

}  // namespace almlab
