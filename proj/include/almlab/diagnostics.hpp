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

// Empirical contraction ratios of a run against the local rate bounds
//
//   dist(x^k, X*) ≤ κ(1+√σ)/c_k · ‖p^{k−1} − p^k‖
//   dist(p^k, P*) ≤ ρ_k dist(p^{k−1}, P*),
//   ρ_k = κ√(1+σ) / √(c_k² − 2κ(σ+√σ)c_k + κ²(1+σ)),  valid for c_k > 2κ(σ+√σ).
//
// "Large k" is the final quartile of the recorded iterations.

#include <almlab/oracle.hpp>

#include <optional>
#include <string>
#include <vector>

namespace almlab {

inline constexpr double kRatioFloor = 1e-13;
inline constexpr double kBoundSlack = 1e-9;

inline double penalty_threshold(double kappa, double sigma) {
  return 2.0 * kappa * (sigma + std::sqrt(sigma));
}

/// ρ_k, or nullopt when c does not exceed the penalty threshold.
inline std::optional<double> theoretical_rho(double kappa, double sigma, double c) {
  if (!(c > penalty_threshold(kappa, sigma))) return std::nullopt;
  const double num = kappa * std::sqrt(1.0 + sigma);
  const double den2 = c * c - 2.0 * kappa * (sigma + std::sqrt(sigma)) * c +
                      kappa * kappa * (1.0 + sigma);
  return num / std::sqrt(den2);
}

inline double primal_rate_bound(double kappa, double sigma, double c, double dual_step) {
  return kappa * (1.0 + std::sqrt(sigma)) / c * dual_step;
}

struct RateRow {
  int k = 0;
  double c = 0.0;
  double dist_p = 0.0;
  double dist_x = 0.0;
  double rho_hat = kNaN;     ///< NaN when dist_p(k−1) ≤ 1e-13
  double rho_theory = kNaN;  ///< NaN when the threshold fails
  double primal_bound = 0.0;
  bool threshold_ok = false;
  // The same bounds evaluated with the safety modulus 2κ̂.
  double rho_theory_2k = kNaN;
  double primal_bound_2k = 0.0;
  bool threshold_ok_2k = false;
  bool in_tail = false;
};

struct RateSummary {
  double kappa_hat = 0.0;
  double sup_rho_tail = kNaN;
  int bound_violations = 0;
  int bound_violations_2k = 0;
  int rho_violations = 0;
  int primal_violations = 0;
  int rho_violations_2k = 0;
  int primal_violations_2k = 0;
  std::size_t tail_start = 0;
};

struct RateReport {
  std::vector<RateRow> rows;
  RateSummary summary;
};

inline RateReport rate_report(const RunHistory& history, const SolutionSetOracle& oracle,
                              const ErrorBoundEstimate& kappa, double sigma) {
  require_matching(oracle, history);
  require_sigma(sigma);
  RateReport rep;
  const auto& recs = history.records;
  const double k1 = kappa.kappa_hat;
  const double k2 = 2.0 * kappa.kappa_hat;
  rep.summary.kappa_hat = k1;
  rep.summary.tail_start = tail_start(recs.size(), 0.25);

  double prev_dist = project_dual(oracle, history.p0.stacked()).distance;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& rec = recs[i];
    RateRow row;
    row.k = rec.k;
    row.c = rec.c;
    row.dist_p = project_dual(oracle, rec.p.stacked()).distance;
    row.dist_x = project_primal(oracle, rec.x).distance;
    if (prev_dist > kRatioFloor) row.rho_hat = row.dist_p / prev_dist;
    const double step = rec.c * rec.u.norm();  // ‖p^{k−1} − p^k‖
    row.threshold_ok = rec.c > penalty_threshold(k1, sigma);
    row.rho_theory = theoretical_rho(k1, sigma, rec.c).value_or(kNaN);
    row.primal_bound = primal_rate_bound(k1, sigma, rec.c, step);
    row.threshold_ok_2k = rec.c > penalty_threshold(k2, sigma);
    row.rho_theory_2k = theoretical_rho(k2, sigma, rec.c).value_or(kNaN);
    row.primal_bound_2k = primal_rate_bound(k2, sigma, rec.c, step);
    row.in_tail = i >= rep.summary.tail_start;

    if (row.in_tail) {
      const bool valid = !std::isnan(row.rho_hat);
      if (valid) {
        rep.summary.sup_rho_tail = std::isnan(rep.summary.sup_rho_tail)
                                       ? row.rho_hat
                                       : std::max(rep.summary.sup_rho_tail, row.rho_hat);
      }
      const bool rho_bad = valid && row.threshold_ok && row.rho_hat > row.rho_theory + kBoundSlack;
      const bool x_bad = row.dist_x > row.primal_bound + kBoundSlack;
      const bool rho_bad_2k =
          valid && row.threshold_ok_2k && row.rho_hat > row.rho_theory_2k + kBoundSlack;
      const bool x_bad_2k = row.dist_x > row.primal_bound_2k + kBoundSlack;
      rep.summary.rho_violations += rho_bad;
      rep.summary.primal_violations += x_bad;
      rep.summary.bound_violations += (rho_bad || x_bad);
      rep.summary.rho_violations_2k += rho_bad_2k;
      rep.summary.primal_violations_2k += x_bad_2k;
      rep.summary.bound_violations_2k += (rho_bad_2k || x_bad_2k);
    }
    prev_dist = row.dist_p;
    rep.rows.push_back(row);
  }
  return rep;
}

struct SuperlinearityResult {
  bool superlinear = false;
  std::string reason;
  std::vector<double> ratios;
};

/// Checks that the observed contraction ratio keeps shrinking under a growing
/// penalty: strictly decreasing valid ratios with last/first ≤ 0.5.
inline SuperlinearityResult superlinearity_probe(const RunHistory& history,
                                                 const SolutionSetOracle& oracle) {
  require_matching(oracle, history);
  SuperlinearityResult out;
  const auto& sched = history.config.schedule;
  if (sched.kind != ScheduleKind::Geometric || sched.growth <= 1.0) {
    out.reason = "not applicable: schedule is " + std::string(to_string(sched.kind)) +
                 (sched.kind == ScheduleKind::Geometric ? " with growth 1" : "");
    return out;
  }
  double prev_dist = project_dual(oracle, history.p0.stacked()).distance;
  for (const auto& rec : history.records) {
    const double dist = project_dual(oracle, rec.p.stacked()).distance;
    if (prev_dist > kRatioFloor) out.ratios.push_back(dist / prev_dist);
    prev_dist = dist;
  }
  require(out.ratios.size() >= 4, ErrorCode::InsufficientIterations,
          "superlinearity probe needs at least 4 valid ratios, got " +
              std::to_string(out.ratios.size()));
  for (std::size_t i = 1; i < out.ratios.size(); ++i) {
    if (!(out.ratios[i] < out.ratios[i - 1])) {
      out.reason = "ratio sequence not strictly decreasing at index " + std::to_string(i);
      return out;
    }
  }
  if (!(out.ratios.back() <= 0.5 * out.ratios.front())) {
    out.reason = "final/first ratio above 0.5";
    return out;
  }
  out.superlinear = true;
  out.reason = "ok";
  return out;
}

}  // namespace almlab
