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

// Command-line front end.
//
//   almlab solve  (--problem FILE | --generator NAME) [run flags]
//   almlab rates  --trace FILE (--oracle FILE | --with-oracle)
//   almlab verify [--only NAME]...
//
// Exit codes
//   solve   0 converged, 1 input error, 2 max outer iterations, 3 inner failure
//   rates   0 no bound violations, 1 input error, 4 oracle mismatch, 5 violations
//   verify  0 all invariants hold, 1 input error, 6 invariant failures

#include <almlab/verify.hpp>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

namespace almlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitMaxOuter = 2;
inline constexpr int kExitInnerFailure = 3;
inline constexpr int kExitOracleMismatch = 4;
inline constexpr int kExitViolations = 5;
inline constexpr int kExitInvariants = 6;

/// One (problem, sigma list, schedule list) experiment grid.
struct ExperimentConfig {
  std::optional<std::string> problem_file;
  std::optional<GeneratorSpec> generator;
  std::vector<double> sigmas{0.5};
  std::vector<PenaltySchedule> schedules{PenaltySchedule{}};
  double tol = 1e-6;
  int max_outer = 500;
  InnerOptions inner;
  std::string out_dir;
  bool with_oracle = false;

  void validate() const {
    require(problem_file.has_value() != generator.has_value(), ErrorCode::InvalidArgument,
            "exactly one of --problem or --generator is required");
    require(!sigmas.empty() && !schedules.empty(), ErrorCode::InvalidArgument,
            "at least one (sigma, schedule) pair is required");
    require(tol > 0.0, ErrorCode::InvalidArgument, "tol must be positive");
    require(max_outer >= 1, ErrorCode::InvalidArgument, "max-outer must be >= 1");
    for (double s : sigmas) require_sigma(s);
    for (const auto& s : schedules) s.validate();
  }
};

inline ExperimentConfig experiment_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_fail("<config>", "expected an object");
  ExperimentConfig cfg;
  if (j.contains("problem_file")) {
    if (!j["problem_file"].is_string()) detail::parse_fail("problem_file", "expected a string");
    cfg.problem_file = j["problem_file"].get<std::string>();
  }
  if (j.contains("generator")) cfg.generator = generator_from_json(j["generator"]);
  if (j.contains("sigmas")) cfg.sigmas = [&] {
    const Vector v = detail::json_vector(j["sigmas"], "sigmas");
    return std::vector<double>(v.data(), v.data() + v.size());
  }();
  if (j.contains("schedules")) {
    const Json& list = j["schedules"];
    if (!list.is_array()) detail::parse_fail("schedules", "expected an array");
    cfg.schedules.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      // Reuse the run-config parser for the schedule objects.
      const RunConfig rc = config_from_json(Json{{"schedule", list[i]}});
      cfg.schedules.push_back(rc.schedule);
    }
  }
  RunConfig base;
  base.tol = cfg.tol;
  base.max_outer = cfg.max_outer;
  base.inner = cfg.inner;
  Json run_part = Json::object();
  for (const char* key : {"tol", "max_outer", "inner"})
    if (j.contains(key)) run_part[key] = j[key];
  base = config_from_json(run_part, base);
  cfg.tol = base.tol;
  cfg.max_outer = base.max_outer;
  cfg.inner = base.inner;
  if (j.contains("out")) {
    if (!j["out"].is_string()) detail::parse_fail("out", "expected a string");
    cfg.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("with_oracle")) {
    if (!j["with_oracle"].is_boolean()) detail::parse_fail("with_oracle", "expected a boolean");
    cfg.with_oracle = j["with_oracle"].get<bool>();
  }
  return cfg;
}

/// File-name-safe key for one run of a grid.
inline std::string run_key(const std::string& problem, double sigma, const PenaltySchedule& s) {
  std::string key = problem + "_sigma" + format_double(sigma) + "_" + std::string(to_string(s.kind)) +
                    "_c" + format_double(s.c0);
  if (s.kind != ScheduleKind::Fixed) key += "_g" + format_double(s.growth);
  for (char& ch : key)
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.')) ch = '_';
  return key;
}

inline std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p = dir.empty() ? std::filesystem::path(".") : std::filesystem::path(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  require(!ec && std::filesystem::is_directory(p), ErrorCode::InvalidArgument,
          "cannot create output directory '" + p.string() + "'");
  return p;
}

namespace detail {

struct RunOutcome {
  std::string key;
  double sigma = 0.0;
  PenaltySchedule schedule;
  RunHistory history;
  std::optional<RateReport> rates;
  std::optional<ErrorBoundEstimate> kappa;
  std::string rate_note;
};

inline int run_exit_code(const std::vector<RunOutcome>& runs) {
  bool max_outer = false;
  for (const auto& r : runs) {
    if (r.history.status == RunStatus::InnerFailure) return kExitInnerFailure;
    max_outer = max_outer || r.history.status == RunStatus::MaxOuterIterations;
  }
  return max_outer ? kExitMaxOuter : kExitOk;
}

}  // namespace detail

/// Runs the grid and writes <key>.csv, <key>.json (and <key>_rates.* with
/// an oracle) plus summary.json into the output directory.
inline int execute_solve(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  cfg.validate();
  const ConvexProgram prog = cfg.problem_file ? load_problem(*cfg.problem_file) : generate(*cfg.generator);
  const std::string pname = !prog.name().empty()
                                ? prog.name()
                                : std::filesystem::path(cfg.problem_file.value_or("problem")).stem().string();

  std::optional<SolutionSetOracle> oracle;
  std::string oracle_note;
  if (cfg.with_oracle) {
    if (!oracle_backed(prog)) {
      oracle_note = "problem is not an affinely constrained smooth QP; no oracle";
    } else {
      try {
        oracle = solve_qp_exact(prog);
      } catch (const Error& e) {
        oracle_note = e.what();
      }
    }
  }

  std::vector<detail::RunOutcome> runs;
  for (const auto& sched : cfg.schedules) {
    for (double sigma : cfg.sigmas) {
      detail::RunOutcome r;
      r.sigma = sigma;
      r.schedule = sched;
      r.key = run_key(pname, sigma, sched);
      runs.push_back(std::move(r));
    }
  }
  parallel_for(runs.size(), worker_count(), [&](std::size_t i) {
    auto& r = runs[i];
    RunConfig rc;
    rc.schedule = r.schedule;
    rc.sigma = r.sigma;
    rc.tol = cfg.tol;
    rc.max_outer = cfg.max_outer;
    rc.inner = cfg.inner;
    // σ = 0 accepts only y = 0, which the first-order loop cannot produce in floating point.
    if (r.sigma == 0.0 && almlab::detail::exact_capable(prog)) rc.inner.exact = true;
    r.history = run(prog, rc);
    if (oracle) {
      try {
        r.kappa = estimate_kappa(r.history, *oracle);
        r.rates = rate_report(r.history, *oracle, *r.kappa, r.sigma);
      } catch (const Error& e) {
        r.rate_note = e.what();
      }
    }
  });

  const auto dir = ensure_dir(cfg.out_dir);
  Json summary;
  summary["problem"] = pname;
  summary["problem_id"] = almlab::detail::id_string(problem_fingerprint(prog));
  if (oracle) {
    write_text_file((dir / "oracle.json").string(), oracle_to_json(*oracle).dump(2) + "\n");
  } else if (cfg.with_oracle) {
    summary["oracle_note"] = oracle_note;
  }
  Json list = Json::array();
  for (const auto& r : runs) {
    write_text_file((dir / (r.key + ".csv")).string(), history_csv(r.history));
    write_text_file((dir / (r.key + ".json")).string(), history_to_json(r.history, &prog).dump(2) + "\n");
    Json entry = {{"key", r.key},
                  {"sigma", r.sigma},
                  {"schedule", std::string(to_string(r.schedule.kind))},
                  {"status", std::string(to_string(r.history.status))},
                  {"outer_iters", r.history.records.size()},
                  {"inner_iters", r.history.total_inner_iters()}};
    if (!r.history.failure.empty()) entry["failure"] = r.history.failure;
    if (!r.history.records.empty()) {
      const auto& last = r.history.records.back();
      entry["final"] = {{"f_val", last.f_val},
                        {"kkt_max", last.kkt.max()},
                        {"yu_norm", last.yu_norm()},
                        {"x", almlab::detail::to_json(last.x)},
                        {"lambda", almlab::detail::to_json(last.p.lambda)},
                        {"mu", almlab::detail::to_json(last.p.mu)}};
    }
    if (r.rates) {
      write_text_file((dir / (r.key + "_rates.csv")).string(), rate_csv(*r.rates));
      const Json rs = rate_summary_json(*r.rates, *r.kappa);
      write_text_file((dir / (r.key + "_rates.json")).string(), rs.dump(2) + "\n");
      entry["rates"] = rs;
    } else if (!r.rate_note.empty()) {
      entry["rate_note"] = r.rate_note;
    }
    list.push_back(std::move(entry));

    out << r.key << ": " << to_string(r.history.status) << " after " << r.history.records.size()
        << " outer / " << r.history.total_inner_iters() << " inner iterations";
    if (!r.history.records.empty()) out << ", kkt " << format_double(r.history.records.back().kkt.max());
    out << "\n";
    if (!r.history.failure.empty()) err << r.key << ": " << r.history.failure << "\n";
  }
  summary["runs"] = std::move(list);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  return detail::run_exit_code(runs);
}

struct RatesArgs {
  std::string trace;
  std::string oracle_file;
  std::string problem_file;
  bool with_oracle = false;
  std::string out_dir;
};

inline int execute_rates(const RatesArgs& a, std::ostream& out, std::ostream& err) {
  const Json trace = almlab::detail::parse_json_text(almlab::detail::read_file(a.trace), a.trace);
  RunHistory hist = history_from_json(trace);
  SolutionSetOracle oracle;
  if (!a.oracle_file.empty()) {
    oracle = load_oracle(a.oracle_file);
  } else if (a.with_oracle) {
    std::optional<ConvexProgram> prog;
    if (!a.problem_file.empty()) {
      prog = load_problem(a.problem_file);
    } else if (trace.contains("problem")) {
      prog = problem_from_json(trace["problem"]);
    }
    require(prog.has_value(), ErrorCode::InvalidArgument,
            "--with-oracle needs a problem: the trace embeds none and --problem is missing");
    require(oracle_backed(*prog), ErrorCode::Unsupported,
            "no oracle for this problem (needs a smooth QP with affine constraints)");
    oracle = solve_qp_exact(*prog);
  } else {
    throw Error(ErrorCode::InvalidArgument, "rates needs --oracle FILE or --with-oracle");
  }
  require_matching(oracle, hist);
  const auto kappa = estimate_kappa(hist, oracle);
  const auto rep = rate_report(hist, oracle, kappa, hist.config.sigma);
  const Json summary = rate_summary_json(rep, kappa);
  if (a.out_dir.empty()) {
    out << rate_csv(rep);
  } else {
    const auto dir = ensure_dir(a.out_dir);
    write_text_file((dir / "rates.csv").string(), rate_csv(rep));
    write_text_file((dir / "rates.json").string(), summary.dump(2) + "\n");
  }
  err << "kappa_hat " << format_double(rep.summary.kappa_hat) << ", sup tail ratio "
      << format_double(rep.summary.sup_rho_tail) << ", bound violations "
      << rep.summary.bound_violations << " (" << rep.summary.bound_violations_2k
      << " with 2 kappa_hat)\n";
  return rep.summary.bound_violations == 0 ? kExitOk : kExitViolations;
}

inline int execute_verify(const std::vector<std::string>& only, const std::string& json_out,
                          std::ostream& out, std::ostream& err,
                          const std::vector<ConvexProgram>& corpus = standard_corpus()) {
  VerifyOptions opts;
  opts.only = only;
  opts.workers = worker_count();
  const auto rep = verify(corpus, opts);
  const std::string doc = rep.to_json().dump(2) + "\n";
  if (!json_out.empty()) write_text_file(json_out, doc);
  out << doc;
  for (const auto& f : rep.failures)
    err << "FAIL " << f.invariant << " " << f.problem << ": " << f.detail << "\n";
  err << rep.checks << " checks, " << rep.failures.size() << " failures\n";
  return rep.ok() ? kExitOk : kExitInvariants;
}

/// Entry point shared by the binary and the tests.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  CLI::App app{"Inexact augmented Lagrangian solver with rate diagnostics", "almlab"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "Run the ALM on a problem file or generated instance");
  std::string problem_file, generator, config_file;
  std::uint64_t seed = 0;
  long long gen_n = -1, gen_m1 = -1, gen_m2 = -1;
  std::vector<double> sigmas;
  std::vector<std::string> schedule_names;
  double c0 = 10.0, growth = 2.0, cmax = 1e8, tol = 1e-6;
  int max_outer = 500, max_inner = 10000;
  bool exact = false, with_oracle = false;
  std::string out_dir;
  auto* o_problem = solve->add_option("--problem", problem_file, "Problem JSON file");
  auto* o_gen = solve->add_option("--generator", generator,
                                  "Generated family: reference1d, sc_qp, degenerate_dual_qp, "
                                  "quad_ineq, box_composite");
  o_problem->excludes(o_gen);
  auto* o_seed = solve->add_option("--seed", seed, "Generator seed");
  auto* o_n = solve->add_option("--n", gen_n, "Generator dimension n");
  auto* o_m1 = solve->add_option("--m1", gen_m1, "Generator equality count");
  auto* o_m2 = solve->add_option("--m2", gen_m2, "Generator inequality count");
  auto* o_sigma = solve->add_option("--sigma", sigmas, "Relative error parameter in [0, 1); repeatable");
  auto* o_sched = solve->add_option("--schedule", schedule_names, "fixed, geometric or adaptive; repeatable");
  auto* o_c0 = solve->add_option("--c0", c0, "Initial penalty");
  auto* o_growth = solve->add_option("--growth", growth, "Penalty growth factor");
  auto* o_cmax = solve->add_option("--cmax", cmax, "Penalty cap");
  auto* o_tol = solve->add_option("--tol", tol, "Stopping tolerance");
  auto* o_outer = solve->add_option("--max-outer", max_outer, "Outer iteration limit");
  auto* o_inner = solve->add_option("--max-inner", max_inner, "Inner iteration limit per subproblem");
  auto* o_exact = solve->add_flag("--exact", exact, "Solve subproblems exactly (smooth QPs)");
  auto* o_out = solve->add_option("--out", out_dir, "Output directory");
  auto* o_oracle = solve->add_flag("--with-oracle", with_oracle, "Compute the exact oracle and rate reports");
  solve->add_option("--config", config_file, "Experiment config JSON; flags override it");

  // rates
  auto* rates = app.add_subcommand("rates", "Rate report for a saved run trace");
  RatesArgs ra;
  rates->add_option("--trace", ra.trace, "Run trace JSON written by solve")->required();
  auto* o_oracle_file = rates->add_option("--oracle", ra.oracle_file, "Oracle JSON written by solve");
  auto* o_with = rates->add_flag("--with-oracle", ra.with_oracle, "Compute the oracle from the problem");
  o_oracle_file->excludes(o_with);
  rates->add_option("--problem", ra.problem_file, "Problem file (defaults to the one in the trace)");
  rates->add_option("--out", ra.out_dir, "Output directory (CSV goes to stdout otherwise)");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Check all invariants on the standard corpus");
  std::vector<std::string> only;
  std::string json_out;
  verify_cmd->add_option("--only", only, "Run only the named invariant; repeatable");
  verify_cmd->add_option("--json", json_out, "Also write the report to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*solve) {
      ExperimentConfig cfg;
      if (!config_file.empty())
        cfg = experiment_from_json(almlab::detail::parse_json_text(almlab::detail::read_file(config_file), config_file));
      if (*o_problem) {
        cfg.problem_file = problem_file;
        cfg.generator.reset();
      }
      if (*o_gen) {
        GeneratorSpec spec = GeneratorSpec::defaults(parse_family(generator), seed);
        if (*o_n) spec.n = gen_n;
        if (*o_m1) spec.m1 = gen_m1;
        if (*o_m2) spec.m2 = gen_m2;
        cfg.generator = spec;
        cfg.problem_file.reset();
      } else if (cfg.generator && *o_seed) {
        cfg.generator->seed = seed;
      }
      if (*o_sigma) cfg.sigmas = sigmas;
      const bool sched_flags = *o_c0 || *o_growth || *o_cmax;
      if (*o_sched || sched_flags) {
        std::vector<std::string> names = schedule_names;
        if (names.empty()) names.push_back(std::string(to_string(cfg.schedules.front().kind)));
        cfg.schedules.clear();
        for (const auto& nm : names) {
          PenaltySchedule s;
          s.kind = parse_schedule_kind(nm);
          s.c0 = c0;
          s.growth = s.kind == ScheduleKind::Fixed ? 1.0 : growth;
          s.c_max = s.kind == ScheduleKind::Fixed ? std::max(c0, cmax) : cmax;
          cfg.schedules.push_back(s);
        }
      }
      if (*o_tol) cfg.tol = tol;
      if (*o_outer) cfg.max_outer = max_outer;
      if (*o_inner) cfg.inner.max_inner = max_inner;
      if (*o_exact) cfg.inner.exact = exact;
      if (*o_out) cfg.out_dir = out_dir;
      if (*o_oracle) cfg.with_oracle = with_oracle;
      return execute_solve(cfg, out, err);
    }
    if (*rates) return execute_rates(ra, out, err);
    return execute_verify(only, json_out, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::OracleMismatch ? kExitOracleMismatch : kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace almlab::cli
