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

// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <almlab/verify.hpp>

#include <chrono>
#include <cstdio>
#include <functional>

namespace almlab {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kPenalty = 100.0;
constexpr double kTolInexact = 1e-6;
constexpr double kTolExact = 1e-9;

RunConfig fixed_config(double sigma, double c = kPenalty) {
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::fixed(c);
  cfg.sigma = sigma;
  cfg.max_outer = 200;
  // σ = 0 accepts only y = 0, so those runs solve subproblems exactly.
  cfg.inner.exact = sigma == 0.0;
  cfg.tol = cfg.inner.exact ? kTolExact : kTolInexact;
  return cfg;
}

std::vector<ConvexProgram> sc_qp_corpus(std::uint64_t count) {
  std::vector<ConvexProgram> out;
  for (std::uint64_t s = 1; s <= count; ++s) out.push_back(generate(GeneratorSpec::defaults(Family::ScQp, s)));
  return out;
}

struct CorpusRun {
  const ConvexProgram* prog;
  RunHistory hist;
};

// Every standard-corpus problem at σ = 0.5 plus an exact σ = 0 run for problems that allow it.
const std::vector<CorpusRun>& corpus_runs() {
  static const std::vector<ConvexProgram> corpus = standard_corpus();
  static const std::vector<CorpusRun> runs = [] {
    std::vector<CorpusRun> out;
    for (const auto& p : corpus) {
      out.push_back({&p, {}});
      if (detail::exact_capable(p)) out.push_back({&p, {}});
    }
    parallel_for(out.size(), worker_count(), [&](std::size_t i) {
      const bool exact = i > 0 && out[i].prog == out[i - 1].prog;
      out[i].hist = run(*out[i].prog, fixed_config(exact ? 0.0 : 0.5));
    });
    return out;
  }();
  return runs;
}

Outcome ac1_reference_recursion() {
  const auto t0 = Clock::now();
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::fixed(2.0);
  cfg.sigma = 0.0;
  cfg.inner.exact = true;
  cfg.tol = 1e-300;
  cfg.max_outer = 20;
  const auto hist = run(reference_problem(), cfg);
  double worst = 0.0;
  for (const auto& rec : hist.records)
    worst = std::max(worst, std::abs(rec.p.lambda[0] + (1.0 - std::pow(3.0, -rec.k))));
  const double secs = seconds_since(t0);
  return {hist.records.size() == 20 && worst <= 1e-10 && secs < 1.0,
          "max |λ^k + 1 − 3^-k| = " + format_double(worst) + " over " + std::to_string(hist.records.size()) +
              " iterations, " + format_double(secs) + " s"};
}

Outcome ac2_criterion_identity() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& cr : corpus_runs()) {
    const auto& h = cr.hist;
    for (std::size_t i = 0; i < h.records.size(); ++i) {
      const auto& rec = h.records[i];
      const auto& prev = h.previous_dual(i);
      const auto cv = eval_constraints(*cr.prog, rec.x);
      const Vector slack = (prev.mu / rec.c).cwiseMin(-cv.g);
      const double lhs = rec.c * rec.c * (cv.h.squaredNorm() + slack.squaredNorm());
      const double rhs = (rec.c * rec.u).squaredNorm();
      const double rel = std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-300});
      worst = std::max(worst, rel);
      bad += rel > 1e-10;
      ++checked;
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " iterations, max relative gap " +
                                       format_double(worst) + ", " + std::to_string(bad) + " violations"};
}

Outcome ac3_certificate_bound() {
  int checked = 0, bad = 0;
  for (const auto& cr : corpus_runs()) {
    const double sigma = cr.hist.config.sigma;
    for (const auto& rec : cr.hist.records) {
      const double bound = std::sqrt(sigma) / rec.c * (rec.c * rec.u).norm() + 1e-12;
      bad += rec.y.norm() > bound;
      ++checked;
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " iterations, " + std::to_string(bad) + " violations"};
}

Outcome ac4_subgradient_transfer() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  for (const auto& cr : corpus_runs()) {
    if (!cr.prog->is_smooth()) continue;
    for (const auto& rec : cr.hist.records) {
      const double gap = (rec.y - lagrangian_smooth_gradient(*cr.prog, rec.x, rec.p)).norm();
      worst = std::max(worst, gap);
      bad += gap > 1e-9;
      ++checked;
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " iterations, max gap " + format_double(worst)};
}

struct RateRun {
  std::uint64_t seed;
  double sigma;
  RunHistory hist;
  std::optional<RateReport> rep;
  std::string error;
};

struct RateStudy {
  std::vector<RateRun> runs;
  double seconds = 0.0;
};

const RateStudy& rate_study() {
  static const RateStudy study = [] {
    const auto t0 = Clock::now();
    const auto corpus = sc_qp_corpus(20);
    RateStudy s;
    for (std::uint64_t i = 0; i < corpus.size(); ++i)
      for (double sigma : {0.0, 0.5, 0.9}) s.runs.push_back({i + 1, sigma, {}, std::nullopt, {}});
    parallel_for(s.runs.size(), worker_count(), [&](std::size_t i) {
      auto& r = s.runs[i];
      const auto& prog = corpus[r.seed - 1];
      r.hist = run(prog, fixed_config(r.sigma));
      try {
        const auto oracle = solve_qp_exact(prog);
        r.rep = rate_report(r.hist, oracle, estimate_kappa(r.hist, oracle), r.sigma);
      } catch (const Error& e) {
        r.error = e.what();
      }
    });
    s.seconds = seconds_since(t0);
    return s;
  }();
  return study;
}

std::string run_label(const RateRun& r) {
  return "sc_qp-" + std::to_string(r.seed) + " sigma " + format_double(r.sigma);
}

Outcome ac5_primal_bound() {
  const auto& s = rate_study();
  int violations = 0;
  std::string first;
  for (const auto& r : s.runs) {
    if (r.hist.status != RunStatus::Converged || !r.rep) {
      ++violations;
      if (first.empty()) first = run_label(r) + ": " + std::string(to_string(r.hist.status)) + " " + r.error;
      continue;
    }
    violations += r.rep->summary.primal_violations_2k;
    if (r.rep->summary.primal_violations_2k > 0 && first.empty()) first = run_label(r);
  }
  std::string detail = std::to_string(s.runs.size()) + " runs, " + std::to_string(violations) +
                       " violations, " + format_double(s.seconds) + " s";
  if (!first.empty()) detail += "; first: " + first;
  return {violations == 0 && s.seconds < 30.0, detail};
}

Outcome ac6_dual_contraction() {
  const auto& s = rate_study();
  int violations = 0;
  double sup = 0.0;
  for (const auto& r : s.runs) {
    if (!r.rep) {
      ++violations;
      continue;
    }
    violations += r.rep->summary.rho_violations_2k;
    const double tail = r.rep->summary.sup_rho_tail;
    if (!std::isnan(tail)) sup = std::max(sup, tail);
  }
  return {violations == 0 && sup < 1.0,
          std::to_string(violations) + " violations, max tail ratio " + format_double(sup)};
}

Outcome ac7_superlinearity() {
  const auto t0 = Clock::now();
  const auto corpus = sc_qp_corpus(10);
  std::vector<SuperlinearityResult> res(corpus.size());
  std::vector<std::string> errors(corpus.size());
  parallel_for(corpus.size(), worker_count(), [&](std::size_t i) {
    RunConfig cfg;
    cfg.schedule = PenaltySchedule::geometric(10.0, 2.0, 1e8);
    cfg.sigma = 0.0;
    cfg.inner.exact = true;
    cfg.tol = kTolExact;
    try {
      res[i] = superlinearity_probe(run(corpus[i], cfg), solve_qp_exact(corpus[i]));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  int ok = 0;
  std::string first;
  for (std::size_t i = 0; i < res.size(); ++i) {
    ok += res[i].superlinear;
    if (!res[i].superlinear && first.empty())
      first = "sc_qp-" + std::to_string(i + 1) + ": " + (errors[i].empty() ? res[i].reason : errors[i]);
  }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(ok) + "/10 superlinear, " + format_double(secs) + " s";
  if (!first.empty()) detail += "; first failure " + first;
  return {ok == 10 && secs < 30.0, detail};
}

Outcome ac8_primal_convergence() {
  int checked = 0, bad = 0;
  double worst = 0.0;
  auto check = [&](const ConvexProgram& prog, const RunHistory& h) {
    if (h.status != RunStatus::Converged || !oracle_backed(prog)) return;
    const double d = project_primal(solve_qp_exact(prog), h.records.back().x).distance;
    worst = std::max(worst, d);
    bad += d > 1e-6;
    ++checked;
  };
  for (const auto& cr : corpus_runs()) check(*cr.prog, cr.hist);
  const auto corpus = sc_qp_corpus(20);
  for (const auto& r : rate_study().runs) check(corpus[r.seed - 1], r.hist);
  return {bad == 0 && checked > 0, std::to_string(checked) + " converged oracle-backed runs, max dist " +
                                       format_double(worst)};
}

Outcome ac9_oracle_cross_validation() {
  const auto corpus = sc_qp_corpus(50);
  std::vector<double> gap(corpus.size(), kInf), kkt(corpus.size(), kInf);
  parallel_for(corpus.size(), worker_count(), [&](std::size_t i) {
    const auto& prog = corpus[i];
    const auto oracle = solve_qp_exact(prog);
    const auto r = kkt_residual(prog, oracle.x_star, oracle.p_star,
                                lagrangian_smooth_gradient(prog, oracle.x_star, oracle.p_star));
    kkt[i] = r.max();
    RunConfig cfg = fixed_config(0.0);
    cfg.tol = 1e-10;
    const auto h = run(prog, cfg);
    if (h.status != RunStatus::Converged) return;
    const auto& last = h.records.back();
    gap[i] = std::max((last.x - oracle.x_star).norm(), (last.p.stacked() - oracle.p_star.stacked()).norm());
  });
  const double max_gap = *std::max_element(gap.begin(), gap.end());
  const double max_kkt = *std::max_element(kkt.begin(), kkt.end());
  return {max_gap <= 1e-7 && max_kkt <= 1e-10,
          "50 QPs, max (x, p) gap " + format_double(max_gap) + ", max oracle KKT residual " + format_double(max_kkt)};
}

Outcome ac10_degenerate() {
  int ok = 0;
  std::string first;
  double worst = 0.0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const auto prog = generate(GeneratorSpec::defaults(Family::DegenerateDualQp, s));
    try {
      const auto oracle = solve_qp_exact(prog);
      const auto h = run(prog, fixed_config(0.0));
      const double dp = project_dual(oracle, h.records.back().p.stacked()).distance;
      const auto rep = rate_report(h, oracle, estimate_kappa(h, oracle), 0.0);
      worst = std::max(worst, dp);
      const bool good = h.status == RunStatus::Converged && dp <= 1e-6 && !rep.rows.empty() &&
                        oracle.dual.affine_dimension() >= 1;
      ok += good;
      if (!good && first.empty()) first = prog.name();
    } catch (const Error& e) {
      if (first.empty()) first = prog.name() + ": " + e.what();
    }
  }
  std::string detail = std::to_string(ok) + "/5 converged with report, max dist_p " + format_double(worst);
  if (!first.empty()) detail += "; first failure " + first;
  return {ok == 5, detail};
}

Outcome ac11_inexactness_payoff() {
  const auto corpus = sc_qp_corpus(20);
  std::vector<int> loose(corpus.size()), tight(corpus.size());
  parallel_for(corpus.size() * 2, worker_count(), [&](std::size_t j) {
    const std::size_t i = j / 2;
    RunConfig cfg = fixed_config(j % 2 == 0 ? 0.9 : 0.01);
    cfg.tol = 1e-5;
    const auto h = run(corpus[i], cfg);
    const int total = h.status == RunStatus::Converged ? h.total_inner_iters() : -1;
    (j % 2 == 0 ? loose : tight)[i] = total;
  });
  int wins = 0, failed = 0;
  long long sum_loose = 0, sum_tight = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (loose[i] < 0 || tight[i] < 0) {
      ++failed;
      continue;
    }
    wins += loose[i] < tight[i];
    sum_loose += loose[i];
    sum_tight += tight[i];
  }
  return {wins >= 16 && failed == 0, std::to_string(wins) + "/20 instances cheaper at sigma 0.9 (" +
                                         std::to_string(sum_loose) + " vs " + std::to_string(sum_tight) +
                                         " inner iterations), " + std::to_string(failed) + " unconverged"};
}

}  // namespace
}  // namespace almlab

int main() {
  using almlab::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 reference recursion", almlab::ac1_reference_recursion},
      {"AC2 criterion identity", almlab::ac2_criterion_identity},
      {"AC3 certificate bound", almlab::ac3_certificate_bound},
      {"AC4 subgradient transfer", almlab::ac4_subgradient_transfer},
      {"AC5 primal rate bound", almlab::ac5_primal_bound},
      {"AC6 dual Q-linear contraction", almlab::ac6_dual_contraction},
      {"AC7 superlinearity trend", almlab::ac7_superlinearity},
      {"AC8 primal convergence", almlab::ac8_primal_convergence},
      {"AC9 oracle cross-validation", almlab::ac9_oracle_cross_validation},
      {"AC10 degenerate dual set", almlab::ac10_degenerate},
      {"AC11 inexactness payoff", almlab::ac11_inexactness_payoff},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
