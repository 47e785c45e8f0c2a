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

// Ground truth for small QPs
//
//   min ½xᵀQx + qᵀx  s.t.  Ax = b,  Gx ≤ d
//
// by enumerating all 2^m2 active sets. The primal solution set is returned as
// x* + span(V); the dual solution set as the polyhedron
//
//   P* = { p : E p = e,  p_i = 0 (i ∈ Z),  p_j ≥ 0 (j ∈ S) }
//
// with E = [Aᵀ Gᵀ], e = −(Qx* + q), Z the inactive and S the active
// inequalities at x*. Projection onto P* enumerates its faces.

#include <almlab/driver.hpp>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace almlab {

inline constexpr int kMaxEnumeratedInequalities = 20;

struct Projection {
  Vector point;
  double distance = 0.0;
};

struct PrimalSolutionSet {
  Vector point;
  Matrix basis;  ///< n × d, orthonormal columns; d = 0 for a singleton

  bool is_singleton() const { return basis.cols() == 0; }

  Projection project(const Vector& x) const {
    require_size(x.size(), point.size(), "x");
    Vector proj = point;
    if (!is_singleton()) proj += basis * (basis.transpose() * (x - point));
    return {proj, (x - proj).norm()};
  }
};

struct DualSolutionSet {
  Matrix E;
  Vector e;
  std::vector<Eigen::Index> zero;  ///< indices fixed at 0
  std::vector<Eigen::Index> sign;  ///< indices constrained ≥ 0
  Eigen::Index m1 = 0;

  Eigen::Index m() const { return E.cols(); }

  /// Columns that are neither fixed nor sign-constrained are free (λ).
  std::vector<Eigen::Index> free_indices(std::uint64_t zeroed_sign_mask) const {
    std::vector<bool> fixed(static_cast<std::size_t>(m()), false);
    for (auto i : zero) fixed[static_cast<std::size_t>(i)] = true;
    for (std::size_t j = 0; j < sign.size(); ++j)
      if (zeroed_sign_mask & (std::uint64_t{1} << j)) fixed[static_cast<std::size_t>(sign[j])] = true;
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < m(); ++i)
      if (!fixed[static_cast<std::size_t>(i)]) out.push_back(i);
    return out;
  }

  /// Dimension of the affine hull { E p = e, p_Z = 0 }.
  Eigen::Index affine_dimension() const {
    const auto idx = free_indices(0);
    if (idx.empty()) return 0;
    Matrix sub(E.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = E.col(idx[j]);
    Eigen::ColPivHouseholderQR<Matrix> qr(sub);
    qr.setThreshold(1e-10);
    return static_cast<Eigen::Index>(idx.size()) - qr.rank();
  }

  bool contains(const Vector& p, double tol) const {
    if ((E * p - e).norm() > tol * (1.0 + e.norm())) return false;
    for (auto i : zero)
      if (std::abs(p[i]) > tol) return false;
    for (auto j : sign)
      if (p[j] < -tol) return false;
    return true;
  }

  Projection project(const Vector& z) const {
    require_size(z.size(), m(), "p");
    require(sign.size() <= static_cast<std::size_t>(kMaxEnumeratedInequalities),
            ErrorCode::EnumerationLimit, "too many sign-constrained multipliers to enumerate");
    std::optional<Projection> best;
    const std::uint64_t faces = std::uint64_t{1} << sign.size();
    for (std::uint64_t mask = 0; mask < faces; ++mask) {
      const auto idx = free_indices(mask);
      Vector cand = Vector::Zero(m());
      if (!idx.empty()) {
        const auto k = static_cast<Eigen::Index>(idx.size());
        Matrix sub(E.rows(), k);
        Vector zf(k);
        for (Eigen::Index j = 0; j < k; ++j) {
          sub.col(j) = E.col(idx[static_cast<std::size_t>(j)]);
          zf[j] = z[idx[static_cast<std::size_t>(j)]];
        }
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(sub);
        cod.setThreshold(1e-12);
        const Vector pf = zf + cod.solve(Vector(e - sub * zf));
        if ((sub * pf - e).norm() > 1e-9 * (1.0 + e.norm())) continue;
        for (Eigen::Index j = 0; j < k; ++j) cand[idx[static_cast<std::size_t>(j)]] = pf[j];
      } else if (e.norm() > 1e-9) {
        continue;
      }
      bool ok = true;
      for (auto j : sign)
        if (cand[j] < -1e-12) { ok = false; break; }
      if (!ok) continue;
      for (auto j : sign) cand[j] = std::max(cand[j], 0.0);
      const double dist = (z - cand).norm();
      if (!best || dist < best->distance) best = Projection{cand, dist};
    }
    require(best.has_value(), ErrorCode::Infeasible, "dual solution set is empty");
    return *best;
  }
};

struct SolutionSetOracle {
  Eigen::Index n = 0, m1 = 0, m2 = 0;
  std::uint64_t problem_id = 0;
  PrimalSolutionSet primal;
  DualSolutionSet dual;
  Vector x_star;
  DualPoint p_star;
};

inline Projection project_primal(const SolutionSetOracle& oracle, const Vector& x) {
  return oracle.primal.project(x);
}

inline Projection project_dual(const SolutionSetOracle& oracle, const Vector& p) {
  return oracle.dual.project(p);
}

namespace detail {

inline Matrix null_space_basis(const Matrix& M, Eigen::Index n) {
  if (M.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-10 * std::max(1.0, s.size() ? s[0] : 0.0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cutoff) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace detail

/// Exact KKT solution of a convex QP with affine constraints.
inline SolutionSetOracle solve_qp_exact(const ConvexProgram& prog) {
  const QuadraticForm* quad = prog.smooth().quadratic();
  require(quad != nullptr, ErrorCode::Unsupported, "oracle needs a quadratic objective");
  require(prog.is_smooth(), ErrorCode::Unsupported, "oracle does not handle a nonsmooth term");
  require(prog.has_affine_inequalities_only(), ErrorCode::Unsupported,
          "oracle needs affine inequalities");
  require(prog.m2() <= kMaxEnumeratedInequalities, ErrorCode::EnumerationLimit,
          "m2 = " + std::to_string(prog.m2()) + " exceeds the enumeration bound");

  const auto n = prog.n(), m1 = prog.m1(), m2 = prog.m2();
  const Matrix Q = quad->has_hessian() ? quad->hessian : Matrix::Zero(n, n);
  const Vector& q = quad->linear;
  const Matrix& A = prog.eq_matrix();
  const Vector& b = prog.eq_rhs();
  const Matrix G = prog.ineq_matrix();
  const Vector d = prog.ineq_rhs();

  bool primal_consistent_somewhere = false;
  std::optional<std::pair<Vector, DualPoint>> found;
  const std::uint64_t subsets = std::uint64_t{1} << m2;
  for (std::uint64_t mask = 0; mask < subsets && !found; ++mask) {
    std::vector<Eigen::Index> act;
    for (Eigen::Index i = 0; i < m2; ++i)
      if (mask & (std::uint64_t{1} << i)) act.push_back(i);
    const auto na = static_cast<Eigen::Index>(act.size());
    const Eigen::Index dim = n + m1 + na;
    Matrix K = Matrix::Zero(dim, dim);
    Vector rhs(dim);
    K.topLeftCorner(n, n) = Q;
    K.block(0, n, n, m1) = A.transpose();
    K.block(n, 0, m1, n) = A;
    rhs.head(n) = -q;
    rhs.segment(n, m1) = b;
    for (Eigen::Index j = 0; j < na; ++j) {
      K.block(0, n + m1 + j, n, 1) = G.row(act[static_cast<std::size_t>(j)]).transpose();
      K.block(n + m1 + j, 0, 1, n) = G.row(act[static_cast<std::size_t>(j)]);
      rhs[n + m1 + j] = d[act[static_cast<std::size_t>(j)]];
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    cod.setThreshold(1e-12);
    const Vector z = cod.solve(rhs);
    const Vector x = z.head(n);
    const double scale = 1.0 + rhs.norm() + K.norm() * z.norm();
    const Vector res = K * z - rhs;
    const bool primal_ok = res.tail(m1 + na).norm() <= 1e-9 * scale;
    if (!primal_ok) continue;
    if (m2 == 0 || (G * x - d).maxCoeff() <= 1e-10) primal_consistent_somewhere = true;
    if (res.head(n).norm() > 1e-9 * scale) continue;
    if (m2 > 0 && (G * x - d).maxCoeff() > 1e-10) continue;
    DualPoint p{z.segment(n, m1), Vector::Zero(m2)};
    bool dual_ok = true;
    for (Eigen::Index j = 0; j < na; ++j) {
      const double mu = z[n + m1 + j];
      if (mu < -1e-12) { dual_ok = false; break; }
      p.mu[act[static_cast<std::size_t>(j)]] = std::max(mu, 0.0);
    }
    if (dual_ok) found.emplace(x, std::move(p));
  }
  if (!found) {
    if (primal_consistent_somewhere)
      throw Error(ErrorCode::Unbounded, "no KKT point: objective unbounded on the feasible set");
    throw Error(ErrorCode::Infeasible, "no active set yields a feasible point");
  }

  SolutionSetOracle out;
  out.n = n;
  out.m1 = m1;
  out.m2 = m2;
  out.problem_id = problem_fingerprint(prog);
  out.x_star = found->first;
  out.p_star = found->second;

  const Vector slack = m2 > 0 ? Vector(G * out.x_star - d) : Vector();
  std::vector<Eigen::Index> binding;
  for (Eigen::Index i = 0; i < m2; ++i)
    if (slack[i] >= -1e-9) binding.push_back(i);

  Matrix M(n + m1 + static_cast<Eigen::Index>(binding.size()), n);
  M.topRows(n) = Q;
  M.middleRows(n, m1) = A;
  for (std::size_t j = 0; j < binding.size(); ++j)
    M.row(n + m1 + static_cast<Eigen::Index>(j)) = G.row(binding[j]);
  out.primal.point = out.x_star;
  out.primal.basis = detail::null_space_basis(M, n);

  out.dual.m1 = m1;
  out.dual.E.resize(n, m1 + m2);
  out.dual.E.leftCols(m1) = A.transpose();
  if (m2 > 0) out.dual.E.rightCols(m2) = G.transpose();
  out.dual.e = -(Q * out.x_star + q);
  for (Eigen::Index i = 0; i < m2; ++i) {
    if (slack[i] >= -1e-9) out.dual.sign.push_back(m1 + i);
    else out.dual.zero.push_back(m1 + i);
  }
  return out;
}

struct ErrorBoundEstimate {
  enum class Mode { Empirical, Perturbation };
  double kappa_hat = 0.0;
  double epsilon_used = 0.0;
  Mode mode = Mode::Empirical;
  int sample_count = 0;
};

/// Index of the first record in the trailing `fraction` of a run.
inline std::size_t tail_start(std::size_t count, double fraction) {
  const auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(count)));
  return count - std::clamp<std::size_t>(len, std::min<std::size_t>(1, count), count);
}

inline void require_matching(const SolutionSetOracle& oracle, const RunHistory& history) {
  const bool dims_ok = history.x0.size() == oracle.n && history.p0.lambda.size() == oracle.m1 &&
                       history.p0.mu.size() == oracle.m2;
  const bool id_ok =
      history.problem_id == 0 || oracle.problem_id == 0 || history.problem_id == oracle.problem_id;
  require(dims_ok && id_ok, ErrorCode::OracleMismatch,
          "run history and oracle describe different problems");
}

/// κ̂ = max over tail iterations of dist((x,p), X*×P*) / ‖(y,u)‖.
inline ErrorBoundEstimate estimate_kappa(const RunHistory& history, const SolutionSetOracle& oracle,
                                         double tail_fraction = 0.25) {
  require(tail_fraction > 0.0 && tail_fraction <= 1.0, ErrorCode::InvalidArgument,
          "tail_fraction must lie in (0, 1]");
  require_matching(oracle, history);
  ErrorBoundEstimate est;
  const auto& recs = history.records;
  for (std::size_t i = tail_start(recs.size(), tail_fraction); i < recs.size(); ++i) {
    const double res = recs[i].yu_norm();
    if (res < 1e-13) continue;
    const double dx = project_primal(oracle, recs[i].x).distance;
    const double dp = project_dual(oracle, recs[i].p.stacked()).distance;
    est.kappa_hat = std::max(est.kappa_hat, std::hypot(dx, dp) / res);
    est.epsilon_used = std::max(est.epsilon_used, res);
    ++est.sample_count;
  }
  require(est.sample_count > 0, ErrorCode::NoValidSamples,
          "no tail iteration has a residual above 1e-13");
  return est;
}

}  // namespace almlab
