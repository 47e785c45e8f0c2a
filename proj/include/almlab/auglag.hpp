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

#include <almlab/problem.hpp>

namespace almlab {

/// Π onto the nonnegative orthant.
inline Vector project_cone(const Vector& v) { return v.cwiseMax(0.0); }

struct AugLagEval {
  double value = 0.0;         ///< L_c(x, λ, μ) including r(x)
  double smooth_value = 0.0;  ///< same, without r(x)
  Vector smooth_grad;
  Vector shifted_mu;  ///< Π(μ + c·g(x))
  ConstraintValues constraints;
};

/// L_c(x,λ,μ) = f(x) + ⟨λ,h⟩ + c/2‖h‖² + (‖Π(μ + c g)‖² − ‖μ‖²)/(2c).
inline AugLagEval auglag_eval(const ConvexProgram& prog, const Vector& x, const DualPoint& p,
                              double c) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "penalty c must be positive");
  require_dual_dims(prog, p);
  AugLagEval out;
  out.constraints = eval_constraints(prog, x);
  const Vector& h = out.constraints.h;
  const Vector& g = out.constraints.g;
  out.shifted_mu = project_cone(p.mu + c * g);
  out.smooth_value = prog.smooth().value(x) + p.lambda.dot(h) + 0.5 * c * h.squaredNorm() +
                     (out.shifted_mu.squaredNorm() - p.mu.squaredNorm()) / (2.0 * c);
  out.value = out.smooth_value;
  if (prog.nonsmooth()) out.value += prog.nonsmooth()->value(x);
  out.smooth_grad = prog.smooth().gradient(x) +
                    constraint_gradient_product(prog, x, p.lambda + c * h, out.shifted_mu);
  return out;
}

struct MultiplierUpdate {
  DualPoint p_new;
  Vector delta_p;  ///< p_prev − p_new, stacked (λ then μ)
};

/// λ ← λ + c h,  μ ← max{0, μ + c g}.
inline MultiplierUpdate multiplier_update(const DualPoint& p_prev, double c, const Vector& h_val,
                                          const Vector& g_val) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "penalty c must be positive");
  require_size(h_val.size(), p_prev.lambda.size(), "h");
  require_size(g_val.size(), p_prev.mu.size(), "g");
  // δ = (−c h, min{μ, −c g}) equals p_prev − p_new; it is formed directly so it
  // carries no cancellation error.
  MultiplierUpdate out;
  const Vector ch = c * h_val;
  const Vector cg = c * g_val;
  out.delta_p = concat(-ch, p_prev.mu.cwiseMin(-cg));
  out.p_new.lambda = p_prev.lambda + ch;
  out.p_new.mu = (p_prev.mu + cg).cwiseMax(0.0);
  return out;
}

/// w ← w − c y.
inline Vector aux_update(const Vector& w_prev, double c, const Vector& y) {
  require_size(y.size(), w_prev.size(), "y");
  return w_prev - c * y;
}

struct CriterionReport {
  double lhs = 0.0;            ///< (2/c)|⟨w_prev − x, y⟩| + ‖y‖²
  double rhs_raw = 0.0;        ///< σ(‖h‖² + ‖min{μ_prev/c, −g}‖²)
  double rhs_rewritten = 0.0;  ///< (σ/c²)‖p_prev − p_new‖²
  bool satisfied = false;
};

inline void require_sigma(double sigma) {
  require(sigma >= 0.0 && sigma < 1.0, ErrorCode::InvalidArgument,
          "sigma must lie in [0, 1), got " + std::to_string(sigma));
}

/// Relative error test for a candidate (x, y). Both forms of the right-hand
/// side are reported; acceptance uses the raw one.
inline CriterionReport criterion_eval(double c, double sigma, const Vector& w_prev, const Vector& x,
                                      const Vector& y, const Vector& h_val, const Vector& g_val,
                                      const Vector& mu_prev, const Vector& delta_p) {
  require(c > 0.0 && std::isfinite(c), ErrorCode::InvalidArgument, "penalty c must be positive");
  require_sigma(sigma);
  require_size(x.size(), w_prev.size(), "x");
  require_size(y.size(), w_prev.size(), "y");
  require_size(g_val.size(), mu_prev.size(), "g");
  require_size(delta_p.size(), h_val.size() + g_val.size(), "delta_p");
  CriterionReport r;
  r.lhs = (2.0 / c) * std::abs((w_prev - x).dot(y)) + y.squaredNorm();
  const Vector slack = (mu_prev / c).cwiseMin(-g_val);
  r.rhs_raw = sigma * (h_val.squaredNorm() + slack.squaredNorm());
  r.rhs_rewritten = sigma / (c * c) * delta_p.squaredNorm();
  r.satisfied = r.lhs <= r.rhs_raw;
  return r;
}

}  // namespace almlab
