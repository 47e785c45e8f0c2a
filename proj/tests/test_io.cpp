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

#include <almlab/driver.hpp>
#include <almlab/io.hpp>
#include <almlab/oracle.hpp>

#include <gtest/gtest.h>

namespace almlab {
namespace {

std::string parse_error(const std::string& text) {
  try {
    problem_from_json(Json::parse(text));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << text;
  return {};
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(100.0), "100");
  EXPECT_EQ(format_double(kNaN), "nan");
  EXPECT_EQ(format_double(-kInf), "-inf");
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(ProblemJson, RoundTrip) {
  for (auto fam : {Family::ScQp, Family::QuadIneq, Family::BoxComposite, Family::DegenerateDualQp}) {
    const auto prog = generate(GeneratorSpec::defaults(fam, 5));
    const auto back = problem_from_json(Json::parse(problem_to_json(prog).dump()));
    EXPECT_EQ(problem_fingerprint(back), problem_fingerprint(prog)) << prog.name();
  }
}

TEST(ProblemJson, GeneratorReference) {
  const auto prog = problem_from_json(Json::parse(R"({"generator": {"family": "sc_qp", "seed": 4}})"));
  EXPECT_EQ(problem_fingerprint(prog), problem_fingerprint(generate(GeneratorSpec::defaults(Family::ScQp, 4))));
}

TEST(ProblemJson, ErrorsNameTheField) {
  EXPECT_NE(parse_error(R"({"n": 2, "Q": [[1, 0], [0]], "q": [0, 0]})").find("Q[1]"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n": 2, "Q": [[1, 0], [0, 1]], "q": [0]})").find("'q'"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n": 1, "Q": [[-1]], "q": [0]})").find("'Q'"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n": 1, "Q": [[1]], "q": [0], "ineq": [{"type": "cubic"}]})").find("ineq"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"Q": [[1]], "q": [0]})").find("'n'"), std::string::npos);
}

TEST(ProblemJson, MissingFile) {
  try {
    load_problem("/nonexistent/problem.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
}

TEST(ConfigJson, RoundTrip) {
  RunConfig cfg;
  cfg.sigma = 0.25;
  cfg.tol = 3e-7;
  cfg.schedule = PenaltySchedule{ScheduleKind::Adaptive, 3.0, 1.5, 1e5, 0.5};
  cfg.inner.exact = true;
  cfg.inner.max_inner = 77;
  const auto back = config_from_json(Json::parse(config_to_json(cfg).dump()));
  EXPECT_EQ(back.sigma, cfg.sigma);
  EXPECT_EQ(back.tol, cfg.tol);
  EXPECT_EQ(back.schedule.kind, cfg.schedule.kind);
  EXPECT_EQ(back.schedule.adapt_ratio, 0.5);
  EXPECT_TRUE(back.inner.exact);
  EXPECT_EQ(back.inner.max_inner, 77);
  EXPECT_THROW(config_from_json(Json::parse(R"({"sigma": "big"})")), Error);
}

TEST(HistoryJson, RoundTripAndCsvDeterminism) {
  const auto prog = generate(GeneratorSpec::defaults(Family::ScQp, 2));
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::fixed(100.0);
  cfg.tol = 1e-6;
  const auto hist = run(prog, cfg);
  const auto back = history_from_json(Json::parse(history_to_json(hist, &prog).dump()));
  EXPECT_EQ(history_csv(back), history_csv(hist));
  EXPECT_EQ(back.status, hist.status);
  EXPECT_EQ(back.problem_id, hist.problem_id);
  EXPECT_EQ(history_csv(run(prog, cfg)), history_csv(hist));
  EXPECT_EQ(history_csv(hist).substr(0, std::string(kHistoryCsvHeader).size()), kHistoryCsvHeader);
}

TEST(OracleJson, RoundTrip) {
  const auto o = solve_qp_exact(generate(GeneratorSpec::defaults(Family::DegenerateDualQp, 1)));
  const auto back = oracle_from_json(Json::parse(oracle_to_json(o).dump()));
  EXPECT_EQ(back.problem_id, o.problem_id);
  EXPECT_EQ(back.x_star, o.x_star);
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    const Vector z = rng.normal_vector(o.dual.m());
    EXPECT_EQ(project_dual(back, z).distance, project_dual(o, z).distance);
  }
}

}  // namespace
}  // namespace almlab
