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

// Seeded test-problem families.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Uniforms are the top 53 bits scaled by 2⁻⁵³ and normals use
// Box-Muller, so the corpus does not depend on the standard library's
// (implementation-defined) distribution classes.

#include <almlab/problem.hpp>

#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>

namespace almlab {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vector normal_vector(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }

  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

 private:
  std::mt19937_64 engine_;
};

enum class Family { Reference1d, ScQp, DegenerateDualQp, QuadIneq, BoxComposite };

inline std::string_view to_string(Family f) {
  switch (f) {
    case Family::Reference1d: return "reference1d";
    case Family::ScQp: return "sc_qp";
    case Family::DegenerateDualQp: return "degenerate_dual_qp";
    case Family::QuadIneq: return "quad_ineq";
    case Family::BoxComposite: return "box_composite";
  }
  return "reference1d";
}

inline Family parse_family(std::string_view s) {
  for (Family f : {Family::Reference1d, Family::ScQp, Family::DegenerateDualQp, Family::QuadIneq,
                   Family::BoxComposite}) {
    if (to_string(f) == s) return f;
  }
  throw Error(ErrorCode::InconsistentSpec, "unknown generator family '" + std::string(s) + "'");
}

struct GeneratorSpec {
  Family family = Family::Reference1d;
  Eigen::Index n = 0, m1 = 0, m2 = 0;  ///< 0 everywhere selects the family defaults
  std::uint64_t seed = 0;
  double cond_lo = 1.0;  ///< eigenvalue range of Q
  double cond_hi = 10.0;

  static GeneratorSpec defaults(Family family, std::uint64_t seed) {
    GeneratorSpec s;
    s.family = family;
    s.seed = seed;
    switch (family) {
      case Family::Reference1d: s.n = 1; s.m1 = 1; s.m2 = 0; break;
      case Family::ScQp: s.n = 6; s.m1 = 2; s.m2 = 3; break;
      case Family::DegenerateDualQp: s.n = 5; s.m1 = 3; s.m2 = 2; break;
      case Family::QuadIneq: s.n = 4; s.m1 = 1; s.m2 = 1; break;
      case Family::BoxComposite: s.n = 5; s.m1 = 1; s.m2 = 2; break;
    }
    return s;
  }

  std::string label() const {
    if (family == Family::Reference1d) return "reference1d";
    return std::string(to_string(family)) + "-" + std::to_string(seed);
  }
};

namespace detail {

inline Matrix random_orthogonal(Rng& rng, Eigen::Index n) {
  const Matrix M = rng.normal_matrix(n, n);
  Eigen::HouseholderQR<Matrix> qr(M);
  Matrix V = qr.householderQ();
  // Sign convention diag(R) > 0 makes V a deterministic function of M.
  const Matrix R = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0.0) V.col(j) = -V.col(j);
  return V;
}

inline Matrix spd_matrix(Rng& rng, Eigen::Index n, double lo, double hi) {
  const Matrix V = random_orthogonal(rng, n);
  Vector D(n);
  for (Eigen::Index i = 0; i < n; ++i)
    D[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  Matrix Q = V.transpose() * D.asDiagonal() * V;
  return 0.5 * (Q + Q.transpose());
}

inline Matrix unit_rows(Rng& rng, Eigen::Index rows, Eigen::Index n) {
  Matrix M = rng.normal_matrix(rows, n);
  for (Eigen::Index i = 0; i < rows; ++i) M.row(i).normalize();
  return M;
}

inline Eigen::Index rank_of(const Matrix& M) {
  if (M.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  qr.setThreshold(1e-10);
  return qr.rank();
}

inline std::vector<Inequality> affine_inequalities(const Matrix& G, const Vector& d) {
  std::vector<Inequality> out;
  for (Eigen::Index i = 0; i < G.rows(); ++i) out.push_back(Inequality::affine(G.row(i), d[i]));
  return out;
}

inline ConvexProgram make_qp(Matrix Q, Vector q, Matrix A, Vector b, const Matrix& G,
                             const Vector& d, std::optional<NonsmoothTerm> r = std::nullopt) {
  return ConvexProgram(std::make_shared<QuadraticObjective>(std::move(Q), std::move(q)),
                       std::move(r), std::move(A), std::move(b), affine_inequalities(G, d));
}

}  // namespace detail

/// min ½x² s.t. x − 1 = 0; X* = {1}, P* = {−1}.
inline ConvexProgram reference_problem() {
  ConvexProgram prog(std::make_shared<QuadraticObjective>(Matrix::Identity(1, 1), Vector::Zero(1)),
                     std::nullopt, Matrix::Ones(1, 1), Vector::Ones(1));
  prog.set_feasible_point(Vector::Ones(1));
  prog.set_name("reference1d");
  prog.set_family("reference1d");
  return prog;
}

inline ConvexProgram generate(const GeneratorSpec& in) {
  GeneratorSpec spec = in;
  if (spec.n == 0 && spec.m1 == 0 && spec.m2 == 0) {
    const auto d = GeneratorSpec::defaults(spec.family, spec.seed);
    spec.n = d.n; spec.m1 = d.m1; spec.m2 = d.m2;
  }
  require(spec.cond_lo > 0.0 && spec.cond_hi >= spec.cond_lo, ErrorCode::InconsistentSpec,
          "conditioning range must satisfy 0 < lo <= hi");
  require(spec.n > 0 && spec.m1 >= 0 && spec.m2 >= 0, ErrorCode::InconsistentSpec,
          "dimensions must be nonnegative with n > 0");
  Rng rng(spec.seed);
  const auto n = spec.n, m1 = spec.m1, m2 = spec.m2;

  ConvexProgram prog = [&]() -> ConvexProgram {
    switch (spec.family) {
      case Family::Reference1d:
        require(n == 1 && m1 == 1 && m2 == 0, ErrorCode::InconsistentSpec,
                "reference1d has n = 1, m1 = 1, m2 = 0");
        return reference_problem();

      case Family::ScQp:
      case Family::DegenerateDualQp:
      case Family::BoxComposite: {
        const bool degenerate = spec.family == Family::DegenerateDualQp;
        const bool boxed = spec.family == Family::BoxComposite;
        const Eigen::Index m_indep = degenerate ? m1 - 1 : m1;
        require(!degenerate || m1 >= 2, ErrorCode::InconsistentSpec,
                "degenerate_dual_qp needs m1 >= 2 (one duplicated row)");
        require(m_indep < n, ErrorCode::InconsistentSpec, "independent equalities must be < n");
        Matrix Q = detail::spd_matrix(rng, n, spec.cond_lo, spec.cond_hi);
        Vector xf(n);
        if (boxed) {
          for (Eigen::Index i = 0; i < n; ++i) xf[i] = rng.uniform(-0.25, 0.25);
        } else {
          xf = rng.normal_vector(n);
        }
        // Orthonormal constraint rows when they fit keep the active constraints well
        // conditioned; otherwise fall back to independent unit rows.
        Matrix rows;
        if (m_indep + m2 <= n) {
          rows = detail::random_orthogonal(rng, n).topRows(m_indep + m2);
        } else {
          rows = detail::unit_rows(rng, m_indep + m2, n);
        }
        Matrix A = rows.topRows(m_indep);
        require(detail::rank_of(A) == m_indep, ErrorCode::InconsistentSpec,
                "generated equality matrix is rank deficient");
        if (degenerate) {
          A.conservativeResize(m1, n);
          A.row(m1 - 1) = A.row(0);
        }
        const Vector b = A * xf;
        const Matrix G = rows.bottomRows(m2);
        Vector d = G * xf;
        for (Eigen::Index i = 0; i < m2; ++i) d[i] += rng.uniform(0.1, 1.0);
        const Vector target = xf + 2.0 * rng.normal_vector(n);
        Vector q = -(Q * target);
        std::optional<NonsmoothTerm> r;
        if (boxed) r = NonsmoothTerm{Vector(), Vector::Constant(n, -0.5), Vector::Constant(n, 0.5)};
        ConvexProgram p = detail::make_qp(std::move(Q), std::move(q), std::move(A), b, G, d, r);
        p.set_feasible_point(xf);
        return p;
      }

      case Family::QuadIneq: {
        require(m2 >= 1 && m1 < n, ErrorCode::InconsistentSpec,
                "quad_ineq needs m2 >= 1 and m1 < n");
        Matrix Q = detail::spd_matrix(rng, n, spec.cond_lo, spec.cond_hi);
        const Vector xf = rng.normal_vector(n);
        Matrix A = detail::unit_rows(rng, m1, n);
        require(detail::rank_of(A) == m1, ErrorCode::InconsistentSpec,
                "generated equality matrix is rank deficient");
        const Vector b = A * xf;
        // g₁(x) = ½(x − x_f)ᵀP(x − x_f) − 1, then extra affine rows with slack.
        const Matrix P = detail::spd_matrix(rng, n, 1.0, 3.0);
        std::vector<Inequality> ineqs;
        ineqs.push_back(Inequality::quadratic(P, -(P * xf), 0.5 * xf.dot(P * xf) - 1.0));
        for (Eigen::Index i = 1; i < m2; ++i) {
          Vector row = rng.normal_vector(n).normalized();
          ineqs.push_back(Inequality::affine(row, row.dot(xf) + rng.uniform(2.0, 3.0)));
        }
        // Objective minimizer on {Ax = b} sits at x_f + 3v with v ∈ null(A):
        // g₁ there is at least 3.5, so the quadratic constraint is active.
        Vector v = rng.normal_vector(n);
        if (m1 > 0) {
          const Matrix pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(A).pseudoInverse();
          v -= pinv * (A * v);
        }
        v /= std::sqrt(v.dot(P * v));
        const Vector target = xf + 3.0 * v;
        Vector q = -(Q * target);
        ConvexProgram p(std::make_shared<QuadraticObjective>(std::move(Q), std::move(q)),
                        std::nullopt, std::move(A), b, std::move(ineqs));
        p.set_feasible_point(xf);
        return p;
      }
    }
    throw Error(ErrorCode::InconsistentSpec, "unknown family");
  }();
  prog.set_name(spec.label());
  prog.set_family(std::string(to_string(spec.family)));
  return prog;
}

/// Interior point stored at generation time.
inline Vector feasible_point(const ConvexProgram& prog) {
  require(prog.stored_feasible_point().has_value(), ErrorCode::NotAvailable,
          "no feasible point recorded for problem '" + prog.name() + "'");
  return *prog.stored_feasible_point();
}

/// 20 sc_qp + reference1d + 5 degenerate_dual_qp + 5 box_composite.
inline std::vector<ConvexProgram> standard_corpus() {
  std::vector<ConvexProgram> out;
  out.push_back(reference_problem());
  for (std::uint64_t s = 1; s <= 20; ++s)
    out.push_back(generate(GeneratorSpec::defaults(Family::ScQp, s)));
  for (std::uint64_t s = 1; s <= 5; ++s)
    out.push_back(generate(GeneratorSpec::defaults(Family::DegenerateDualQp, s)));
  for (std::uint64_t s = 1; s <= 5; ++s)
    out.push_back(generate(GeneratorSpec::defaults(Family::BoxComposite, s)));
  return out;
}

}  // namespace almlab
