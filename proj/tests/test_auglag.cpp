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

#include <almlab/auglag.hpp>
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

// Independent evaluation of L_c by the sup formula
//   L_c(x, λ, μ) = f + ⟨λ,h⟩ + c/2‖h‖² + Σ (max{0, μ_i + c g_i}² − μ_i²)/(2c)
// written as max over s ≥ 0 of f + ⟨λ,h⟩ + c/2‖h‖² + Σ [μ_i(g_i + s_i) + c/2 (g_i + s_i)²] with
// s_i = max{0, −g_i − μ_i/c}.
double auglag_by_slack(const ConvexProgram& prog, const Vector& x, const DualPoint& p, double c) {
  const auto cv = eval_constraints(prog, x);
  double v = prog.objective(x) + p.lambda.dot(cv.h) + 0.5 * c * cv.h.squaredNorm();
  for (Eigen::Index i = 0; i < cv.g.size(); ++i) {
    const double z = std::max(cv.g[i], -p.mu[i] / c);
    v += p.mu[i] * z + 0.5 * c * z * z;
  }
  return v;
}

TEST(AugLag, ReferenceHandValues) {
  const auto ev = auglag_eval(reference_problem(), Vector::Zero(1), DualPoint::zeros(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(ev.value, 1.0);
  EXPECT_DOUBLE_EQ(ev.smooth_grad[0], -2.0);
}

TEST(AugLag, InequalityMaxBranch) {
  // f ≡ 0 on ℝ¹, g(x) = x − 5 at x = 0 gives g = −5.
  ConvexProgram prog(std::make_shared<QuadraticObjective>(Matrix::Zero(1, 1), Vector::Zero(1)), std::nullopt,
                     Matrix(), Vector(), {Inequality::affine(Vector::Ones(1), 5.0)});
  const auto ev = auglag_eval(prog, Vector::Zero(1), {Vector(), vec({1.0})}, 1.0);
  EXPECT_DOUBLE_EQ(ev.value, -0.5);
  EXPECT_DOUBLE_EQ(ev.shifted_mu[0], 0.0);
}

TEST(AugLag, ZeroMultipliersInteriorGiveObjective) {
  const auto prog = generate(GeneratorSpec::defaults(Family::ScQp, 4));
  const Vector x = *prog.stored_feasible_point();
  const auto ev = auglag_eval(prog, x, DualPoint::zeros(prog.m1(), prog.m2()), 1.0);
  EXPECT_NEAR(ev.value, prog.objective(x), 1e-12 * (1.0 + std::abs(ev.value)));
}

TEST(AugLag, MatchesSlackFormulaAndFiniteDifferences) {
  for (auto fam : {Family::ScQp, Family::QuadIneq, Family::DegenerateDualQp}) {
    const auto prog = generate(GeneratorSpec::defaults(fam, 9));
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
      const Vector x = rng.normal_vector(prog.n());
      DualPoint p{rng.normal_vector(prog.m1()), rng.normal_vector(prog.m2()).cwiseAbs()};
      const double c = rng.uniform(0.5, 20.0);
      const auto ev = auglag_eval(prog, x, p, c);
      EXPECT_NEAR(ev.value, auglag_by_slack(prog, x, p, c), 1e-9 * (1.0 + std::abs(ev.value)));
      for (Eigen::Index i = 0; i < prog.n(); ++i) {
        Vector e = Vector::Zero(prog.n());
        e[i] = 1e-6;
        const double fd = (auglag_eval(prog, x + e, p, c).value - auglag_eval(prog, x - e, p, c).value) / 2e-6;
        EXPECT_NEAR(ev.smooth_grad[i], fd, 1e-4 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST(AugLag, RejectsNonPositivePenalty) {
  EXPECT_THROW(auglag_eval(reference_problem(), Vector::Zero(1), DualPoint::zeros(1, 0), 0.0), Error);
}

TEST(MultiplierUpdate, Examples) {
  auto u1 = multiplier_update({vec({0.0}), Vector()}, 2.0, vec({0.5}), Vector());
  EXPECT_DOUBLE_EQ(u1.p_new.lambda[0], 1.0);
  auto u2 = multiplier_update({Vector(), vec({1.0, 0.0})}, 2.0, Vector(), vec({-1.0, 0.25}));
  EXPECT_DOUBLE_EQ(u2.p_new.mu[0], 0.0);
  EXPECT_DOUBLE_EQ(u2.p_new.mu[1], 0.5);
  auto u3 = multiplier_update({vec({0.3}), vec({0.0, 0.0})}, 4.0, vec({0.0}), vec({-1.0, -0.1}));
  EXPECT_EQ(u3.p_new.lambda, vec({0.3}));
  EXPECT_EQ(u3.p_new.mu, Vector::Zero(2));
  EXPECT_EQ(u3.delta_p, Vector::Zero(3));
}

TEST(MultiplierUpdate, DeltaIsDifferenceAndMuNonnegative) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    DualPoint p{rng.normal_vector(2), rng.normal_vector(3).cwiseAbs()};
    const double c = rng.uniform(0.1, 50.0);
    const auto u = multiplier_update(p, c, rng.normal_vector(2), rng.normal_vector(3));
    EXPECT_TRUE((u.p_new.mu.array() >= 0.0).all());
    EXPECT_LE((u.delta_p - (p.stacked() - u.p_new.stacked())).norm(), 1e-12 * (1.0 + u.delta_p.norm()));
  }
}

TEST(AuxUpdate, Examples) {
  EXPECT_EQ(aux_update(vec({1.0, 1.0}), 2.0, Vector::Zero(2)), vec({1.0, 1.0}));
  EXPECT_EQ(aux_update(vec({0.0}), 2.0, vec({0.5})), vec({-1.0}));
  const Vector w = vec({3.0, -7.0, 0.25});
  EXPECT_EQ(aux_update(w, 4.0, w / 4.0), Vector::Zero(3));
}

TEST(Criterion, ExactSolveAlwaysAccepted) {
  for (double sigma : {0.0, 0.3, 0.99}) {
    const auto r = criterion_eval(2.0, sigma, vec({1.0}), vec({0.0}), vec({0.0}), vec({0.1}), Vector(), Vector(),
                                  vec({-0.2}));
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_TRUE(r.satisfied);
  }
}

TEST(Criterion, DirectSubstitution) {
  // w_prev = x, ‖y‖² = 0.01, ‖h‖² = 0.09, no inequalities.
  const auto r = criterion_eval(1.0, 0.5, vec({2.0, 2.0}), vec({2.0, 2.0}), vec({0.1, 0.0}), vec({0.3}),
                                Vector(), Vector(), vec({-0.3}));
  EXPECT_NEAR(r.lhs, 0.01, 1e-16);
  EXPECT_NEAR(r.rhs_raw, 0.045, 1e-16);
  EXPECT_TRUE(r.satisfied);
}

TEST(Criterion, BothRightHandSidesAgree) {
  const DualPoint p{Vector(), vec({1.0, 0.0})};
  const auto up = multiplier_update(p, 2.0, Vector(), vec({-1.0, 0.25}));
  EXPECT_DOUBLE_EQ(up.delta_p.squaredNorm(), 1.25);
  const auto r = criterion_eval(2.0, 1.0 - 1e-12, vec({0.0}), vec({0.0}), vec({0.0}), Vector(), vec({-1.0, 0.25}),
                                p.mu, up.delta_p);
  EXPECT_NEAR(r.rhs_raw / (1.0 - 1e-12), 0.3125, 1e-15);
  EXPECT_NEAR(r.rhs_rewritten / (1.0 - 1e-12), 0.3125, 1e-15);
}

TEST(Criterion, IdentityProperty) {
  // c²(‖h‖² + ‖min{μ/c, −g}‖²) = ‖Δp‖² for random data.
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const Vector mu = rng.normal_vector(4).cwiseAbs();
    const Vector h = rng.normal_vector(2), g = rng.normal_vector(4);
    const double c = std::exp(rng.uniform(-3.0, 6.0));
    const auto up = multiplier_update({rng.normal_vector(2), mu}, c, h, g);
    const auto r = criterion_eval(c, 0.5, Vector::Zero(1), Vector::Zero(1), Vector::Zero(1), h, g, mu, up.delta_p);
    EXPECT_LE(std::abs(r.rhs_raw - r.rhs_rewritten), 1e-12 * std::max(r.rhs_raw, 1e-300));
  }
}

TEST(Criterion, RejectsSigmaOutOfRange) {
  EXPECT_THROW(criterion_eval(1.0, 1.0, vec({0}), vec({0}), vec({0}), Vector(), Vector(), Vector(), Vector()), Error);
  EXPECT_THROW(criterion_eval(1.0, -0.1, vec({0}), vec({0}), vec({0}), Vector(), Vector(), Vector(), Vector()), Error);
}

TEST(ProjectCone, Examples) {
  EXPECT_EQ(project_cone(vec({-1.0, 2.0})), vec({0.0, 2.0}));
  EXPECT_EQ(project_cone(vec({0.0, 0.0})), vec({0.0, 0.0}));
  const Vector v = vec({0.5, 3.0, 0.0});
  EXPECT_EQ(project_cone(v), v);
}

}  // namespace
}  // namespace almlab
