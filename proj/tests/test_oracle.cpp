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
#include <almlab/oracle.hpp>
#include <almlab/problems.hpp>

#include <gtest/gtest.h>

namespace almlab {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TEST(Oracle, Reference) {
  const auto o = solve_qp_exact(reference_problem());
  EXPECT_TRUE(o.primal.is_singleton());
  EXPECT_NEAR(o.x_star[0], 1.0, 1e-14);
  EXPECT_NEAR(o.p_star.lambda[0], -1.0, 1e-14);
  EXPECT_NEAR(project_dual(o, vec({0.0})).distance, 1.0, 1e-14);
  EXPECT_NEAR(project_dual(o, vec({0.0})).point[0], -1.0, 1e-14);
  EXPECT_NEAR(project_primal(o, vec({2.0 / 3.0})).distance, 1.0 / 3.0, 1e-14);
}

TEST(Oracle, ActiveHalfspace) {
  // min ½‖x‖² s.t. x₁ ≤ −1
  ConvexProgram prog(std::make_shared<QuadraticObjective>(Matrix::Identity(2, 2), Vector::Zero(2)), std::nullopt,
                     Matrix(), Vector(), {Inequality::affine(vec({1.0, 0.0}), -1.0)});
  const auto o = solve_qp_exact(prog);
  EXPECT_LE((o.x_star - vec({-1.0, 0.0})).norm(), 1e-12);
  EXPECT_NEAR(o.p_star.mu[0], 1.0, 1e-12);
  EXPECT_NEAR(project_dual(o, vec({1.0})).distance, 0.0, 1e-12);
}

TEST(Oracle, ZeroObjectiveEquality) {
  ConvexProgram prog(std::make_shared<QuadraticObjective>(Matrix::Zero(1, 1), Vector::Zero(1)), std::nullopt,
                     Matrix::Ones(1, 1), Vector::Zero(1));
  const auto o = solve_qp_exact(prog);
  EXPECT_NEAR(o.x_star[0], 0.0, 1e-14);
  EXPECT_NEAR(o.p_star.lambda[0], 0.0, 1e-14);
  EXPECT_NEAR(project_dual(o, vec({0.7})).distance, 0.7, 1e-12);
}

TEST(Oracle, ProjectionIdempotent) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto o = solve_qp_exact(generate(GeneratorSpec::defaults(Family::DegenerateDualQp, seed)));
    const auto pr = project_dual(o, o.p_star.stacked());
    EXPECT_LE(pr.distance, 1e-10);
    EXPECT_LE(project_dual(o, pr.point).distance, 1e-10);
    EXPECT_LE(project_primal(o, o.x_star).distance, 1e-12);
  }
}

TEST(DualSet, HandProjectionOntoRay) {
  // P* = {(λ, μ): λ = 0, μ ≥ 0}
  DualSolutionSet d;
  d.E = Matrix::Zero(1, 2);
  d.E(0, 0) = 1.0;
  d.e = Vector::Zero(1);
  d.sign = {1};
  d.m1 = 1;
  const auto pr = d.project(vec({1.0, -1.0}));
  EXPECT_LE(pr.point.norm(), 1e-15);
  EXPECT_NEAR(pr.distance, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(d.project(vec({1.0, 3.0})).distance, 1.0, 1e-15);
}

TEST(PrimalSet, AffineCoordinateProjection) {
  PrimalSolutionSet s{Vector::Zero(2), vec({0.0, 1.0})};
  const auto pr = s.project(vec({3.0, 5.0}));
  EXPECT_LE((pr.point - vec({0.0, 5.0})).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(pr.distance, 3.0);
}

TEST(DualSet, ProjectionBeatsRandomMembers) {
  // The projection must be at least as close as any sampled member of P*.
  const auto o = solve_qp_exact(generate(GeneratorSpec::defaults(Family::DegenerateDualQp, 4)));
  Rng rng(21);
  const auto null = detail::null_space_basis(o.dual.E, o.dual.m());
  for (int t = 0; t < 100; ++t) {
    const Vector z = o.p_star.stacked() + rng.normal_vector(o.dual.m());
    const auto pr = project_dual(o, z);
    EXPECT_TRUE(o.dual.contains(pr.point, 1e-9));
    for (int s = 0; s < 20; ++s) {
      Vector member = o.p_star.stacked() + null * rng.normal_vector(null.cols());
      if (!o.dual.contains(member, 1e-12)) continue;
      EXPECT_LE(pr.distance, (z - member).norm() + 1e-12);
    }
  }
}

// Independent KKT solve for equality-constrained QPs via the saddle system.
TEST(Oracle, MatchesSaddleSystem) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GeneratorSpec spec = GeneratorSpec::defaults(Family::ScQp, seed);
    spec.m2 = 0;
    const auto prog = generate(spec);
    const auto* quad = prog.smooth().quadratic();
    const auto n = prog.n(), m = prog.m1();
    Matrix K = Matrix::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = quad->hessian;
    K.topRightCorner(n, m) = prog.eq_matrix().transpose();
    K.bottomLeftCorner(m, n) = prog.eq_matrix();
    Vector rhs(n + m);
    rhs << -quad->linear, prog.eq_rhs();
    const Vector sol = K.fullPivLu().solve(rhs);
    const auto o = solve_qp_exact(prog);
    EXPECT_LE((o.x_star - sol.head(n)).norm(), 1e-10);
    EXPECT_LE((o.p_star.lambda - sol.tail(m)).norm(), 1e-10);
  }
}

TEST(Oracle, KktResidualsVanish) {
  for (auto fam : {Family::ScQp, Family::DegenerateDualQp}) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto prog = generate(GeneratorSpec::defaults(fam, seed));
      const auto o = solve_qp_exact(prog);
      const auto r = kkt_residual(prog, o.x_star, o.p_star, lagrangian_smooth_gradient(prog, o.x_star, o.p_star));
      EXPECT_LE(r.max(), 1e-10) << prog.name();
    }
  }
}

TEST(Oracle, Unsupported) {
  try {
    solve_qp_exact(generate(GeneratorSpec::defaults(Family::QuadIneq, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Unsupported);
  }
}

RunConfig exact_cfg(double c, double tol) {
  RunConfig cfg;
  cfg.schedule = PenaltySchedule::fixed(c);
  cfg.sigma = 0.0;
  cfg.tol = tol;
  cfg.inner.exact = true;
  return cfg;
}

TEST(Kappa, ReferenceBelowGoldenRatio) {
  const auto prog = reference_problem();
  const auto hist = run(prog, exact_cfg(2.0, 1e-10));
  const auto est = estimate_kappa(hist, solve_qp_exact(prog));
  EXPECT_GT(est.kappa_hat, 0.0);
  EXPECT_LE(est.kappa_hat, (1.0 + std::sqrt(5.0)) / 2.0 + 1e-9);
  EXPECT_EQ(est.mode, ErrorBoundEstimate::Mode::Empirical);
}

TEST(Kappa, ExactKktIterateHasNoSamples) {
  const auto prog = reference_problem();
  RunHistory hist;
  hist.x0 = Vector::Ones(1);
  hist.p0 = {Vector::Constant(1, -1.0), Vector()};
  IterationRecord rec;
  rec.x = Vector::Ones(1);
  rec.p = hist.p0;
  rec.y = Vector::Zero(1);
  rec.u = Vector::Zero(1);
  hist.records.push_back(rec);
  try {
    estimate_kappa(hist, solve_qp_exact(prog));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoValidSamples);
  }
}

TEST(Kappa, StableAcrossStarts) {
  const auto prog = generate(GeneratorSpec::defaults(Family::ScQp, 8));
  const auto o = solve_qp_exact(prog);
  const auto a = estimate_kappa(run(prog, exact_cfg(100.0, 1e-9)), o);
  RunStart start;
  start.x0 = Vector::Constant(prog.n(), 3.0);
  start.p0 = DualPoint{Vector::Constant(prog.m1(), -2.0), Vector::Constant(prog.m2(), 1.5)};
  const auto b = estimate_kappa(run(prog, exact_cfg(100.0, 1e-9), start), o);
  EXPECT_LE(std::max(a.kappa_hat, b.kappa_hat), 2.0 * std::min(a.kappa_hat, b.kappa_hat));
}

TEST(Kappa, MismatchedOracle) {
  const auto hist = run(generate(GeneratorSpec::defaults(Family::ScQp, 1)), exact_cfg(100.0, 1e-8));
  const auto other = solve_qp_exact(generate(GeneratorSpec::defaults(Family::ScQp, 2)));
  try {
    estimate_kappa(hist, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OracleMismatch);
  }
}

}  // namespace
}  // namespace almlab
