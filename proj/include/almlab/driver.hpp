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

// Outer loop of the inexact augmented Lagrangian method:
//
//   for k = 1, 2, ...
//     (x^k, y^k) ≈ argmin L_{c_k}(·, p^{k−1}) under the relative error test
//     λ^k = λ^{k−1} + c_k h(x^k),  μ^k = max{0, μ^{k−1} + c_k g(x^k)}
//     w^k = w^{k−1} − c_k y^k
//
// The run stops when max(‖(y^k, u^k)‖, ‖h‖, ‖g₊‖) ≤ tol, with
// u^k = (p^{k−1} − p^k)/c_k; (y^k, u^k) lies in ∂L(x^k, p^k).

#include <almlab/inner_solver.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace almlab {

enum class ScheduleKind { Fixed, Geometric, Adaptive };

inline std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Fixed: return "fixed";
    case ScheduleKind::Geometric: return "geometric";
    case ScheduleKind::Adaptive: return "adaptive";
  }
  return "fixed";
}

inline ScheduleKind parse_schedule_kind(std::string_view s) {
  if (s == "fixed") return ScheduleKind::Fixed;
  if (s == "geometric") return ScheduleKind::Geometric;
  if (s == "adaptive") return ScheduleKind::Adaptive;
  throw Error(ErrorCode::InvalidArgument, "unknown schedule '" + std::string(s) + "'");
}

struct PenaltySchedule {
  ScheduleKind kind = ScheduleKind::Fixed;
  double c0 = 10.0;
  double growth = 2.0;
  double c_max = 1e8;
  double adapt_ratio = 0.25;  ///< adaptive: required feasibility decay per iteration

  void validate() const {
    require(c0 > 0.0 && std::isfinite(c0), ErrorCode::InvalidArgument, "c0 must be positive");
    require(growth >= 1.0, ErrorCode::InvalidArgument, "growth must be >= 1");
    require(c_max > 0.0, ErrorCode::InvalidArgument, "c_max must be positive");
    if (kind == ScheduleKind::Adaptive) {
      require(adapt_ratio > 0.0 && adapt_ratio < 1.0, ErrorCode::InvalidArgument,
              "adapt_ratio must lie in (0, 1)");
    }
  }

  static PenaltySchedule fixed(double c) { return {ScheduleKind::Fixed, c, 1.0, c, 0.25}; }
  static PenaltySchedule geometric(double c0, double growth, double c_max) {
    return {ScheduleKind::Geometric, c0, growth, c_max, 0.25};
  }
};

struct RunConfig {
  PenaltySchedule schedule;
  double sigma = 0.5;
  double tol = 1e-8;
  int max_outer = 500;
  InnerOptions inner;
};

struct IterationRecord {
  int k = 0;
  double c = 0.0;
  Vector x;
  Vector y;
  DualPoint p;
  Vector w;
  Vector u;  ///< (p^{k−1} − p^k)/c_k, stacked
  CriterionReport criterion;
  KktResidual kkt;
  int inner_iters = 0;
  double f_val = 0.0;
  double auglag_val = 0.0;  ///< L_{c_k}(x^k, p^{k−1})

  double primal_infeasibility() const { return std::hypot(kkt.eq_feas, kkt.ineq_feas); }
  double yu_norm() const { return std::sqrt(y.squaredNorm() + u.squaredNorm()); }
};

enum class RunStatus { Converged, MaxOuterIterations, InnerFailure };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Converged: return "Converged";
    case RunStatus::MaxOuterIterations: return "MaxOuterIterations";
    case RunStatus::InnerFailure: return "InnerFailure";
  }
  return "InnerFailure";
}

struct RunHistory {
  std::vector<IterationRecord> records;
  RunStatus status = RunStatus::MaxOuterIterations;
  RunConfig config;
  DualPoint p0;
  Vector x0;
  Vector w0;
  std::uint64_t problem_id = 0;
  std::string failure;

  /// p^{k−1} for a 0-based record index.
  const DualPoint& previous_dual(std::size_t i) const { return i == 0 ? p0 : records[i - 1].p; }
  int total_inner_iters() const {
    int total = 0;
    for (const auto& r : records) total += r.inner_iters;
    return total;
  }
};

/// c_k for iteration k ≥ 1 given the records of iterations 1..k−1.
inline double next_penalty(const PenaltySchedule& schedule, int k, const RunHistory& history) {
  require(k >= 1, ErrorCode::InvalidArgument, "iteration index starts at 1");
  switch (schedule.kind) {
    case ScheduleKind::Fixed:
      return schedule.c0;
    case ScheduleKind::Geometric:
      return std::min(schedule.c_max, schedule.c0 * std::pow(schedule.growth, k - 1));
    case ScheduleKind::Adaptive: {
      const auto& recs = history.records;
      if (recs.empty()) return std::min(schedule.c0, schedule.c_max);
      const double c_prev = recs.back().c;
      if (recs.size() < 2) return c_prev;
      const double feas_now = recs.back().primal_infeasibility();
      const double feas_before = recs[recs.size() - 2].primal_infeasibility();
      if (feas_now > schedule.adapt_ratio * feas_before)
        return std::min(schedule.c_max, c_prev * schedule.growth);
      return c_prev;
    }
  }
  return schedule.c0;
}

inline bool check_stop(const IterationRecord& record, double tol) {
  return std::max({record.yu_norm(), record.kkt.eq_feas, record.kkt.ineq_feas}) <= tol;
}

struct RunStart {
  std::optional<DualPoint> p0;  ///< defaults to (0, 0)
  std::optional<Vector> w0;     ///< defaults to x0
  std::optional<Vector> x0;     ///< defaults to 0
};

inline RunHistory run(const ConvexProgram& prog, const RunConfig& config, const RunStart& start = {}) {
  config.schedule.validate();
  require_sigma(config.sigma);
  require(config.tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
  require(config.max_outer >= 1, ErrorCode::InvalidArgument, "max_outer must be >= 1");

  RunHistory hist;
  hist.config = config;
  hist.problem_id = problem_fingerprint(prog);
  hist.p0 = start.p0.value_or(DualPoint::zeros(prog.m1(), prog.m2()));
  require_dual_dims(prog, hist.p0);
  require((hist.p0.mu.array() >= 0.0).all(), ErrorCode::InvalidArgument, "mu0 must be >= 0");
  hist.x0 = start.x0.value_or(Vector::Zero(prog.n()));
  require_size(hist.x0.size(), prog.n(), "x0");
  hist.w0 = start.w0.value_or(hist.x0);
  require_size(hist.w0.size(), prog.n(), "w0");

  DualPoint p = hist.p0;
  Vector x = hist.x0;
  Vector w = hist.w0;
  for (int k = 1; k <= config.max_outer; ++k) {
    const double c = next_penalty(config.schedule, k, hist);
    SubproblemResult sub;
    try {
      sub = solve_subproblem(prog, p, c, config.sigma, w, x, config.inner);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MaxInnerIterations && e.code() != ErrorCode::NonFiniteEncountered)
        throw;
      hist.status = RunStatus::InnerFailure;
      hist.failure = e.what();
      return hist;
    }
    IterationRecord rec;
    rec.k = k;
    rec.c = c;
    rec.auglag_val = auglag_eval(prog, sub.x, p, c).value;
    rec.u = sub.update.delta_p / c;
    rec.p = std::move(sub.update.p_new);
    rec.w = aux_update(w, c, sub.y);
    rec.kkt = kkt_residual(prog, sub.x, rec.p, sub.y);
    rec.f_val = prog.objective(sub.x);
    rec.criterion = sub.criterion;
    rec.inner_iters = sub.inner_iters;
    rec.x = std::move(sub.x);
    rec.y = std::move(sub.y);

    p = rec.p;
    x = rec.x;
    w = rec.w;
    const bool done = check_stop(rec, config.tol);
    hist.records.push_back(std::move(rec));
    if (done) {
      hist.status = RunStatus::Converged;
      return hist;
    }
  }
  hist.status = RunStatus::MaxOuterIterations;
  return hist;
}

}  // namespace almlab
