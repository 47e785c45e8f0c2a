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

// Named invariant checks over a problem corpus. Each invariant is a short
// kebab-case name; `verify` runs all of them (or a filtered subset) and
// returns every failing (invariant, problem) pair.

#include <almlab/io.hpp>
#include <almlab/parallel.hpp>

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <tuple>

namespace almlab {

struct CheckFailure {
  std::string invariant;
  std::string problem;
  std::string detail;
};

struct VerifyReport {
  std::vector<std::string> invariants_run;
  std::vector<CheckFailure> failures;
  long checks = 0;

  bool ok() const { return failures.empty(); }

  Json to_json() const {
    Json f = Json::array();
    for (const auto& x : failures)
      f.push_back({{"invariant", x.invariant}, {"problem", x.problem}, {"detail", x.detail}});
    return {{"passed", ok()}, {"checks", checks}, {"invariants", invariants_run}, {"failures", f}};
  }
};

struct VerifyOptions {
  std::vector<std::string> only;  ///< empty runs everything
  unsigned workers = 1;
  double tol_inexact = 1e-6;
  double tol_exact = 1e-9;
  double sigma = 0.5;
  double penalty = 100.0;
};

/// Quadratic objective, no nonsmooth term, affine inequalities only.
inline bool oracle_backed(const ConvexProgram& prog) {
  return prog.smooth().quadratic() != nullptr && prog.is_smooth() &&
         prog.has_affine_inequalities_only() && prog.m2() <= kMaxEnumeratedInequalities;
}

namespace detail {

struct RunBundle {
  std::optional<RunHistory> inexact;
  std::optional<RunHistory> exact;
  std::optional<SolutionSetOracle> oracle;
  std::string error;  ///< set when a run or the oracle threw
};

struct VerifyContext {
  const std::vector<ConvexProgram>& corpus;
  const VerifyOptions& opts;
  std::vector<RunBundle> bundles;
  VerifyReport* report = nullptr;
  std::mutex mu;

  void check(const std::string& inv, const ConvexProgram& prog, bool ok, const std::string& detail) {
    std::lock_guard<std::mutex> lock(mu);
    ++report->checks;
    if (!ok) report->failures.push_back({inv, prog.name().empty() ? "<unnamed>" : prog.name(), detail});
  }
};

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline std::string fmt(double v) { return format_double(v); }

inline RunConfig corpus_config(const VerifyOptions& o, bool exact) {
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::fixed(o.penalty);
  cfg.sigma = exact ? 0.0 : o.sigma;
  cfg.tol = exact ? o.tol_exact : o.tol_inexact;
  cfg.max_outer = 200;
  cfg.inner.exact = exact;
  return cfg;
}

inline bool exact_capable(const ConvexProgram& prog) {
  return prog.smooth().quadratic() != nullptr && prog.is_smooth();
}

/// Every accepted record paired with the dual point it started from.
template <class Fn>
void for_each_record(const RunHistory& h, Fn&& fn) {
  for (std::size_t i = 0; i < h.records.size(); ++i) fn(h.records[i], h.previous_dual(i), i);
}

inline Vector previous_w(const RunHistory& h, std::size_t i) {
  return i == 0 ? h.w0 : h.records[i - 1].w;
}

// --- problem-model ---------------------------------------------------------

inline void inv_gradient_consistency(VerifyContext& ctx, const ConvexProgram& prog, std::size_t idx) {
  Rng rng(0x9e3779b97f4a7c15ULL ^ idx);
  const double step = 1e-5;
  const auto n = prog.n();
  auto fd = [&](auto&& f, const Vector& x) {
    Vector g(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += step;
      xm[i] -= step;
      g[i] = (f(xp) - f(xm)) / (2.0 * step);
    }
    return g;
  };
  double worst = 0.0;
  std::string where;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.normal_vector(n);
    const Vector an = prog.smooth().gradient(x);
    const double e = (fd([&](const Vector& z) { return prog.smooth().value(z); }, x) - an).norm() /
                     std::max(1.0, an.norm());
    if (e > worst) { worst = e; where = "objective"; }
    for (std::size_t i = 0; i < prog.inequalities().size(); ++i) {
      const auto& g = prog.inequalities()[i];
      const Vector gi = g.gradient(x);
      const double ei = (fd([&](const Vector& z) { return g.value(z); }, x) - gi).norm() /
                        std::max(1.0, gi.norm());
      if (ei > worst) { worst = ei; where = "g[" + std::to_string(i) + "]"; }
    }
  }
  ctx.check("gradient-consistency", prog, worst <= 1e-6,
            "max relative error " + fmt(worst) + " in " + where);
}

inline void inv_convexity_probe(VerifyContext& ctx, const ConvexProgram& prog, std::size_t idx) {
  Rng rng(0x5851f42d4c957f2dULL ^ idx);
  double worst = -kInf;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.normal_vector(prog.n()), xp = rng.normal_vector(prog.n());
    const double a = rng.uniform();
    const Vector mid = a * x + (1.0 - a) * xp;
    auto gap = [&](auto&& f) { return f(mid) - (a * f(x) + (1.0 - a) * f(xp)); };
    worst = std::max(worst, gap([&](const Vector& z) { return prog.smooth().value(z); }));
    for (const auto& g : prog.inequalities())
      worst = std::max(worst, gap([&](const Vector& z) { return g.value(z); }));
  }
  ctx.check("convexity-probe", prog, worst <= 1e-10, "max convexity gap " + fmt(worst));
}

inline void inv_affinity(VerifyContext& ctx, const ConvexProgram& prog, std::size_t idx) {
  if (prog.m1() == 0) return;
  Rng rng(0xda942042e4dd58b5ULL ^ idx);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.normal_vector(prog.n()), xp = rng.normal_vector(prog.n());
    const double a = rng.uniform();
    const Vector lhs = eval_constraints(prog, a * x + (1.0 - a) * xp).h;
    const Vector rhs = a * eval_constraints(prog, x).h + (1.0 - a) * eval_constraints(prog, xp).h;
    worst = std::max(worst, rel_err(lhs, rhs));
  }
  ctx.check("affinity", prog, worst <= 1e-12, "max relative deviation " + fmt(worst));
}

inline void inv_kkt_at_oracle(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b) {
  if (!b.oracle) return;
  const auto& o = *b.oracle;
  const Vector y = lagrangian_smooth_gradient(prog, o.x_star, o.p_star);
  const auto r = kkt_residual(prog, o.x_star, o.p_star, y);
  ctx.check("kkt-at-oracle", prog, r.max() <= 1e-10, "max KKT residual " + fmt(r.max()));
}

// --- auglag-core / inner-solver / driver -----------------------------------

inline void inv_criterion_identity(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  double worst = 0.0;
  for_each_record(h, [&](const IterationRecord& r, const DualPoint& prev, std::size_t) {
    const auto cv = eval_constraints(prog, r.x);
    const double lhs = r.c * r.c *
                       (cv.h.squaredNorm() + (prev.mu / r.c).cwiseMin(-cv.g).squaredNorm());
    const double rhs = (r.c * r.u).squaredNorm();  // ‖p^k − p^{k−1}‖²
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
  });
  ctx.check("criterion-identity", prog, worst <= 1e-10, "max relative gap " + fmt(worst));
}

inline void inv_certificate_bound(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  double worst = -kInf;
  const double s = std::sqrt(h.config.sigma);
  for_each_record(h, [&](const IterationRecord& r, const DualPoint&, std::size_t) {
    worst = std::max(worst, r.y.norm() - (s / r.c) * (r.c * r.u).norm());
  });
  ctx.check("certificate-bound", prog, worst <= 1e-12, "max excess " + fmt(worst));
}

inline void inv_subgradient_transfer(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  if (!prog.is_smooth()) return;
  double worst = 0.0;
  for_each_record(h, [&](const IterationRecord& r, const DualPoint&, std::size_t) {
    worst = std::max(worst, (r.y - lagrangian_smooth_gradient(prog, r.x, r.p)).norm());
  });
  ctx.check("subgradient-transfer", prog, worst <= 1e-9, "max deviation " + fmt(worst));
}

inline void inv_step2_exactness(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  double worst = 0.0;
  for_each_record(h, [&](const IterationRecord& r, const DualPoint& prev, std::size_t i) {
    const auto cv = eval_constraints(prog, r.x);
    const Vector lam = prev.lambda + r.c * cv.h;
    const Vector mu = (prev.mu + r.c * cv.g).cwiseMax(0.0);
    const Vector w = previous_w(h, i) - r.c * r.y;
    worst = std::max({worst, rel_err(r.p.lambda, lam), rel_err(r.p.mu, mu), rel_err(r.w, w),
                      rel_err(concat(prev.lambda, prev.mu), r.p.stacked() + r.c * r.u)});
  });
  ctx.check("step2-exactness", prog, worst <= 1e-14, "max relative deviation " + fmt(worst));
}

inline void inv_certificate_validity(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  double worst = 0.0;
  bool members = true;
  for_each_record(h, [&](const IterationRecord& r, const DualPoint& prev, std::size_t) {
    const Vector grad = auglag_eval(prog, r.x, prev, r.c).smooth_grad;
    if (prog.is_smooth()) {
      worst = std::max(worst, (r.y - grad).norm());
    } else {
      members = members && prog.nonsmooth()->contains(r.x, r.y - grad, 1e-10);
    }
  });
  ctx.check("certificate-validity", prog, worst <= 1e-10 && members,
            prog.is_smooth() ? "max deviation " + fmt(worst)
                             : std::string("residual outside the subdifferential"));
}

inline void inv_descent(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  // Re-solve the first two subproblems with value recording.
  InnerOptions in = h.config.inner;
  in.record_values = true;
  double worst = -kInf;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, h.records.size()); ++i) {
    const Vector x_init = i == 0 ? h.x0 : h.records[i - 1].x;
    const auto res = solve_subproblem(prog, h.previous_dual(i), h.records[i].c, h.config.sigma,
                                      previous_w(h, i), x_init, in);
    for (std::size_t t = 1; t < res.values.size(); ++t) {
      const double slack = 1e-12 * (1.0 + std::abs(res.values[t - 1]));
      worst = std::max(worst, res.values[t] - res.values[t - 1] - slack);
    }
  }
  ctx.check("descent", prog, worst <= 0.0, "max increase beyond rounding " + fmt(worst));
}

inline void inv_vanishing_residuals(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  const bool conv = h.status == RunStatus::Converged && !h.records.empty();
  const auto& last = conv ? h.records.back() : IterationRecord{};
  ctx.check("vanishing-residuals", prog,
            conv && last.u.norm() <= h.config.tol && last.y.norm() <= h.config.tol,
            conv ? "final |u| " + fmt(last.u.norm()) + ", |y| " + fmt(last.y.norm())
                 : "run ended with " + std::string(to_string(h.status)) + " " + h.failure);
}

inline void inv_dual_convergence(VerifyContext& ctx, const ConvexProgram& prog, const RunHistory& h) {
  if (h.status != RunStatus::Converged || h.records.size() < 2) return;
  const Vector pN = h.records.back().p.stacked();
  const std::size_t start = tail_start(h.records.size(), 0.25);
  bool ok = true;
  double prev = kInf;
  for (std::size_t i = start; i < h.records.size(); ++i) {
    const double d = (h.records[i].p.stacked() - pN).norm();
    ok = ok && d <= prev;
    prev = d;
  }
  ctx.check("dual-convergence", prog, ok, "distance to the final dual iterate increased in the tail");
}

/// Dual proximal-point step for min ½xᵀQx + qᵀx s.t. Ax = b:
/// (I + c A Q⁻¹ Aᵀ) λ = λ_prev − c (A Q⁻¹ q + b).
inline Vector dual_ppa_step(const Matrix& Q, const Vector& q, const Matrix& A, const Vector& b,
                            const Vector& lam_prev, double c) {
  const Eigen::LDLT<Matrix> qf(Q);
  const Matrix M = Matrix::Identity(A.rows(), A.rows()) + c * A * qf.solve(A.transpose());
  return M.ldlt().solve(Vector(lam_prev - c * (A * qf.solve(q) + b)));
}

inline void inv_ppa_equivalence(VerifyContext& ctx, const ConvexProgram& prog) {
  // Equality-constrained QPs only; generated programs with inequalities are
  // checked on their equality-only restriction.
  const QuadraticForm* quad = prog.smooth().quadratic();
  if (quad == nullptr || !prog.is_smooth() || prog.m1() == 0 || !quad->has_hessian()) return;
  if (Eigen::SelfAdjointEigenSolver<Matrix>(quad->hessian, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() <= 1e-12)
    return;
  ConvexProgram eq(prog.smooth_ptr(), std::nullopt, prog.eq_matrix(), prog.eq_rhs());
  RunConfig cfg = corpus_config(ctx.opts, true);
  cfg.schedule = PenaltySchedule::fixed(2.0);
  cfg.max_outer = 15;
  const auto h = run(eq, cfg);
  double worst = 0.0;
  for_each_record(h, [&](const IterationRecord& r, const DualPoint& prev, std::size_t) {
    const Vector ref = dual_ppa_step(quad->hessian, quad->linear, prog.eq_matrix(), prog.eq_rhs(),
                                     prev.lambda, r.c);
    worst = std::max(worst, (r.p.lambda - ref).norm());
  });
  ctx.check("ppa-equivalence", prog, worst <= 1e-9, "max dual deviation " + fmt(worst));
}

// --- oracle ----------------------------------------------------------------

inline void inv_oracle_kkt(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b,
                           std::size_t idx) {
  if (!b.oracle) return;
  const auto& o = *b.oracle;
  // Projections of random dual points are members of P*; each must be a KKT
  // multiplier for x*.
  Rng rng(0x2545f4914f6cdd1dULL ^ idx);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Vector z = o.p_star.stacked() + rng.normal_vector(o.m1 + o.m2);
    const DualPoint p = DualPoint::from_stacked(project_dual(o, z).point, o.m1);
    const auto r = kkt_residual(prog, o.x_star, p, lagrangian_smooth_gradient(prog, o.x_star, p));
    worst = std::max(worst, r.max());
  }
  ctx.check("oracle-kkt", prog, worst <= 1e-10, "max KKT residual over P* samples " + fmt(worst));
}

inline void inv_oracle_agreement(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b) {
  if (!b.oracle || !b.exact) return;
  const auto& h = *b.exact;
  if (h.status != RunStatus::Converged) {
    ctx.check("oracle-agreement", prog, false, "exact run ended with " + std::string(to_string(h.status)));
    return;
  }
  const double dx = project_primal(*b.oracle, h.records.back().x).distance;
  const double dp = project_dual(*b.oracle, h.records.back().p.stacked()).distance;
  ctx.check("oracle-agreement", prog, dx <= 1e-7 && dp <= 1e-7,
            "dist_x " + fmt(dx) + ", dist_p " + fmt(dp));
}

inline void inv_sc_qp_unique(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b) {
  if (prog.family() != "sc_qp" || !b.oracle) return;
  const auto dim = b.oracle->dual.affine_dimension();
  ctx.check("sc-qp-unique", prog, b.oracle->primal.is_singleton() && dim == 0,
            "primal basis " + std::to_string(b.oracle->primal.basis.cols()) + ", dual dimension " +
                std::to_string(dim));
}

inline void inv_degenerate_nonsingleton(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b) {
  if (prog.family() != "degenerate_dual_qp" || !b.oracle) return;
  const auto dim = b.oracle->dual.affine_dimension();
  ctx.check("degenerate-nonsingleton", prog, dim >= 1, "dual affine dimension " + std::to_string(dim));
}

inline void inv_slater(VerifyContext& ctx, const ConvexProgram& prog) {
  if (!prog.stored_feasible_point()) return;
  const auto cv = eval_constraints(prog, *prog.stored_feasible_point());
  const double gmax = cv.g.size() ? cv.g.maxCoeff() : -kInf;
  ctx.check("slater", prog, cv.h.norm() <= 1e-12 && gmax <= -1e-3,
            "|h| " + fmt(cv.h.norm()) + ", max g " + fmt(gmax));
}

inline void inv_empirical_error_bound(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b,
                                      std::size_t idx) {
  if (!b.oracle || prog.family() != "sc_qp" || !b.inexact || b.inexact->status != RunStatus::Converged)
    return;
  const auto est = estimate_kappa(*b.inexact, *b.oracle);
  // Held-out run from a different start.
  Rng rng(0x7f4a7c159e3779b9ULL ^ idx);
  RunStart start;
  start.x0 = rng.normal_vector(prog.n());
  DualPoint p0 = DualPoint::zeros(prog.m1(), prog.m2());
  p0.lambda = rng.normal_vector(prog.m1());
  for (Eigen::Index i = 0; i < prog.m2(); ++i) p0.mu[i] = rng.uniform();
  start.p0 = p0;
  const auto h2 = run(prog, b.inexact->config, start);
  if (h2.status != RunStatus::Converged) {
    ctx.check("empirical-error-bound", prog, false, "held-out run ended with " +
                                                        std::string(to_string(h2.status)));
    return;
  }
  double worst = 0.0;
  for (std::size_t i = tail_start(h2.records.size(), 0.25); i < h2.records.size(); ++i) {
    const auto& r = h2.records[i];
    const double res = r.yu_norm();
    if (res < kRatioFloor) continue;
    const double d = std::hypot(project_primal(*b.oracle, r.x).distance,
                                project_dual(*b.oracle, r.p.stacked()).distance);
    worst = std::max(worst, d / res);
  }
  ctx.check("empirical-error-bound", prog, worst <= 2.0 * est.kappa_hat,
            "held-out ratio " + fmt(worst) + " vs 2 kappa_hat " + fmt(2.0 * est.kappa_hat));
}

// --- diagnostics -----------------------------------------------------------

inline void inv_formula_sanity(VerifyContext& ctx, const ConvexProgram& prog) {
  Rng rng(17);
  bool ok = true;
  for (int t = 0; t < 100; ++t) {
    const double kappa = rng.uniform(0.1, 20.0);
    const double sigma = rng.uniform(0.0, 0.99);
    const double c = penalty_threshold(kappa, sigma) * rng.uniform(1.01, 10.0) + 1e-3;
    const auto r1 = theoretical_rho(kappa, sigma, c);
    const auto r2 = theoretical_rho(kappa, sigma, 1.5 * c);
    ok = ok && r1 && r2 && *r2 < *r1 && *r1 > 0.0 && *r1 < 1.0;
  }
  ctx.check("formula-sanity", prog, ok, "rate formula not strictly decreasing in c");
}

inline void rate_invariants(VerifyContext& ctx, const ConvexProgram& prog, const RunBundle& b,
                            const std::set<std::string>& want) {
  if (!b.oracle || prog.family() == "degenerate_dual_qp") return;
  for (const auto* hp : {b.inexact ? &*b.inexact : nullptr, b.exact ? &*b.exact : nullptr}) {
    if (hp == nullptr || hp->status != RunStatus::Converged) continue;
    ErrorBoundEstimate est;
    try {
      est = estimate_kappa(*hp, *b.oracle);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoValidSamples) continue;
      throw;
    }
    const auto rep = rate_report(*hp, *b.oracle, est, hp->config.sigma);
    const std::string tag = hp->config.inner.exact ? " (exact)" : " (inexact)";
    if (want.count("primal-rate-bound"))
      ctx.check("primal-rate-bound", prog, rep.summary.primal_violations == 0,
                std::to_string(rep.summary.primal_violations) + " tail violations" + tag);
    if (want.count("dual-rate-bound"))
      ctx.check("dual-rate-bound", prog, rep.summary.rho_violations == 0,
                std::to_string(rep.summary.rho_violations) + " tail violations" + tag);
    const bool threshold = !rep.rows.empty() && rep.rows.back().threshold_ok;
    if (want.count("tail-ratio-below-one") && threshold && !std::isnan(rep.summary.sup_rho_tail))
      ctx.check("tail-ratio-below-one", prog, rep.summary.sup_rho_tail < 1.0,
                "sup tail ratio " + fmt(rep.summary.sup_rho_tail) + tag);
  }
}

}  // namespace detail

inline const std::vector<std::string>& invariant_names() {
  static const std::vector<std::string> names = {
      "gradient-consistency", "convexity-probe",     "affinity",
      "kkt-at-oracle",        "criterion-identity",  "certificate-bound",
      "subgradient-transfer", "step2-exactness",     "certificate-validity",
      "descent",              "vanishing-residuals", "dual-convergence",
      "ppa-equivalence",      "oracle-kkt",          "oracle-agreement",
      "sc-qp-unique",         "degenerate-nonsingleton", "slater",
      "empirical-error-bound", "formula-sanity",     "primal-rate-bound",
      "dual-rate-bound",      "tail-ratio-below-one"};
  return names;
}

inline VerifyReport verify(const std::vector<ConvexProgram>& corpus, const VerifyOptions& opts = {}) {
  std::set<std::string> want;
  for (const auto& name : opts.only) {
    require(std::find(invariant_names().begin(), invariant_names().end(), name) !=
                invariant_names().end(),
            ErrorCode::InvalidArgument, "unknown invariant '" + name + "'");
    want.insert(name);
  }
  if (want.empty()) want.insert(invariant_names().begin(), invariant_names().end());

  VerifyReport report;
  for (const auto& n : invariant_names())
    if (want.count(n)) report.invariants_run.push_back(n);
  detail::VerifyContext ctx{corpus, opts, std::vector<detail::RunBundle>(corpus.size()), &report, {}};

  static const std::set<std::string> needs_inexact = {
      "criterion-identity", "certificate-bound", "subgradient-transfer", "step2-exactness", "certificate-validity",
      "descent", "vanishing-residuals", "dual-convergence", "empirical-error-bound",
      "primal-rate-bound", "dual-rate-bound", "tail-ratio-below-one"};
  static const std::set<std::string> needs_oracle = {
      "kkt-at-oracle", "oracle-kkt", "oracle-agreement", "sc-qp-unique", "degenerate-nonsingleton",
      "empirical-error-bound", "primal-rate-bound", "dual-rate-bound", "tail-ratio-below-one"};
  auto any = [&](const std::set<std::string>& s) {
    return std::any_of(s.begin(), s.end(), [&](const std::string& x) { return want.count(x) > 0; });
  };
  const bool do_runs = any(needs_inexact) || want.count("oracle-agreement");
  const bool do_oracle = any(needs_oracle);

  parallel_for(corpus.size(), opts.workers, [&](std::size_t i) {
    const auto& prog = corpus[i];
    auto& b = ctx.bundles[i];
    auto guarded = [&](const char* inv, auto&& fn) {
      try {
        fn();
      } catch (const std::exception& e) {
        ctx.check(inv, prog, false, std::string("threw: ") + e.what());
      }
    };
    if (do_oracle && oracle_backed(prog)) {
      try {
        b.oracle = solve_qp_exact(prog);
      } catch (const std::exception& e) {
        b.error = e.what();
      }
    }
    if (do_runs) {
      try {
        b.inexact = run(prog, detail::corpus_config(opts, false));
        if (detail::exact_capable(prog)) b.exact = run(prog, detail::corpus_config(opts, true));
      } catch (const std::exception& e) {
        b.error = e.what();
      }
    }

    auto histories = [&] {
      std::vector<const RunHistory*> out;
      if (b.inexact) out.push_back(&*b.inexact);
      if (b.exact) out.push_back(&*b.exact);
      return out;
    };
    if (want.count("gradient-consistency"))
      guarded("gradient-consistency", [&] { detail::inv_gradient_consistency(ctx, prog, i); });
    if (want.count("convexity-probe"))
      guarded("convexity-probe", [&] { detail::inv_convexity_probe(ctx, prog, i); });
    if (want.count("affinity")) guarded("affinity", [&] { detail::inv_affinity(ctx, prog, i); });
    if (want.count("slater")) guarded("slater", [&] { detail::inv_slater(ctx, prog); });
    if (want.count("formula-sanity") && i == 0)
      guarded("formula-sanity", [&] { detail::inv_formula_sanity(ctx, prog); });
    if (want.count("ppa-equivalence"))
      guarded("ppa-equivalence", [&] { detail::inv_ppa_equivalence(ctx, prog); });

    if (!b.error.empty() && (do_runs || do_oracle) && !b.inexact && !b.oracle) {
      ctx.check("vanishing-residuals", prog, false, "setup threw: " + b.error);
    }

    using Fn = void (*)(detail::VerifyContext&, const ConvexProgram&, const RunHistory&);
    const std::pair<const char*, Fn> per_run[] = {
        {"criterion-identity", detail::inv_criterion_identity},
        {"certificate-bound", detail::inv_certificate_bound},
        {"subgradient-transfer", detail::inv_subgradient_transfer},
        {"step2-exactness", detail::inv_step2_exactness},
        {"certificate-validity", detail::inv_certificate_validity},
        {"descent", detail::inv_descent},
        {"vanishing-residuals", detail::inv_vanishing_residuals},
        {"dual-convergence", detail::inv_dual_convergence}};
    for (const auto& [name, fn] : per_run) {
      if (!want.count(name)) continue;
      for (const auto* h : histories()) guarded(name, [&] { fn(ctx, prog, *h); });
    }

    if (want.count("kkt-at-oracle")) guarded("kkt-at-oracle", [&] { detail::inv_kkt_at_oracle(ctx, prog, b); });
    if (want.count("oracle-kkt")) guarded("oracle-kkt", [&] { detail::inv_oracle_kkt(ctx, prog, b, i); });
    if (want.count("oracle-agreement"))
      guarded("oracle-agreement", [&] { detail::inv_oracle_agreement(ctx, prog, b); });
    if (want.count("sc-qp-unique")) guarded("sc-qp-unique", [&] { detail::inv_sc_qp_unique(ctx, prog, b); });
    if (want.count("degenerate-nonsingleton"))
      guarded("degenerate-nonsingleton", [&] { detail::inv_degenerate_nonsingleton(ctx, prog, b); });
    if (want.count("empirical-error-bound"))
      guarded("empirical-error-bound", [&] { detail::inv_empirical_error_bound(ctx, prog, b, i); });
    if (want.count("primal-rate-bound") || want.count("dual-rate-bound") || want.count("tail-ratio-below-one"))
      guarded("primal-rate-bound", [&] { detail::rate_invariants(ctx, prog, b, want); });
  });

  // Deterministic report order regardless of worker scheduling.
  std::stable_sort(report.failures.begin(), report.failures.end(),
                   [](const CheckFailure& a, const CheckFailure& b) {
                     return std::tie(a.problem, a.invariant, a.detail) <
                            std::tie(b.problem, b.invariant, b.detail);
                   });
  return report;
}

}  // namespace almlab
