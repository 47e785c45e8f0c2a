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

// Convex program model:
//
//   min  s(x) + r(x)   s.t.  A x - b = 0,  g_i(x) <= 0 (i = 1..m2)
//
// with s smooth convex, r = weighted l1 + box indicator (optional), and each
// g_i affine or convex quadratic.

#include <almlab/types.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace almlab {

/// q(x) = ½ xᵀ H x + lᵀ x + k. An empty Hessian means H = 0.
struct QuadraticForm {
  Matrix hessian;
  Vector linear;
  double constant = 0.0;

  bool has_hessian() const { return hessian.size() != 0; }

  double value(const Vector& x) const {
    double v = linear.dot(x) + constant;
    if (has_hessian()) v += 0.5 * x.dot(hessian * x);
    return v;
  }

  Vector gradient(const Vector& x) const {
    if (has_hessian()) return hessian * x + linear;
    return linear;
  }
};

/// Value/gradient oracle for the smooth part of the objective.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// Non-null when the function is exactly a quadratic form; exact inner
  /// solves and the QP oracle need this structure.
  virtual const QuadraticForm* quadratic() const { return nullptr; }
};

class QuadraticObjective final : public SmoothFunction {
 public:
  QuadraticObjective(Matrix Q, Vector q) : form_{std::move(Q), std::move(q), 0.0} {
    require(form_.hessian.rows() == form_.hessian.cols(), ErrorCode::DimensionMismatch,
            "objective Q must be square");
    require_size(form_.linear.size(), form_.hessian.rows(), "objective q");
  }

  Eigen::Index dim() const override { return form_.linear.size(); }
  double value(const Vector& x) const override { return form_.value(x); }
  Vector gradient(const Vector& x) const override { return form_.gradient(x); }
  const QuadraticForm* quadratic() const override { return &form_; }

 private:
  QuadraticForm form_;
};

/// r(x) = Σ wᵢ|xᵢ| + indicator{lo ≤ x ≤ hi}. Empty vectors disable a part.
struct NonsmoothTerm {
  Vector l1_weight;
  Vector lo;
  Vector hi;

  bool has_l1() const { return l1_weight.size() != 0; }
  bool has_box() const { return lo.size() != 0; }

  double weight(Eigen::Index i) const { return has_l1() ? l1_weight[i] : 0.0; }
  double lower(Eigen::Index i) const { return has_box() ? lo[i] : -kInf; }
  double upper(Eigen::Index i) const { return has_box() ? hi[i] : kInf; }

  bool in_domain(const Vector& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] < lower(i) || x[i] > upper(i)) return false;
    }
    return true;
  }

  double value(const Vector& x) const {
    if (!in_domain(x)) return kInf;
    return has_l1() ? l1_weight.cwiseProduct(x.cwiseAbs()).sum() : 0.0;
  }

  /// prox_{t·r}(v): soft-threshold then clip. Exact because r is separable and
  /// each coordinate is a convex function of one variable on an interval.
  Vector prox(const Vector& v, double t) const {
    Vector out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double thr = t * weight(i);
      double z = v[i];
      if (z > thr) z -= thr;
      else if (z < -thr) z += thr;
      else z = 0.0;
      out[i] = std::clamp(z, lower(i), upper(i));
    }
    return out;
  }

  /// ∂rᵢ(xᵢ) as a closed interval [first, second]; empty (first > second)
  /// outside the box.
  std::pair<double, double> subdifferential(Eigen::Index i, double xi) const {
    const double lo_i = lower(i), hi_i = upper(i), w = weight(i);
    if (xi < lo_i || xi > hi_i) return {kInf, -kInf};
    double a = 0.0, b = 0.0;
    if (xi > 0.0) a = b = w;
    else if (xi < 0.0) a = b = -w;
    else { a = -w; b = w; }
    if (xi == lo_i) a = -kInf;
    if (xi == hi_i) b = kInf;
    return {a, b};
  }

  /// z ∈ ∂r(x) componentwise, with absolute slack tol.
  bool contains(const Vector& x, const Vector& z, double tol) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto [a, b] = subdifferential(i, x[i]);
      if (a > b) return false;
      if (z[i] < a - tol || z[i] > b + tol) return false;
    }
    return true;
  }

  /// Minimum-norm element of grad + ∂r(x). Requires x in the domain.
  Vector min_norm_subgradient(const Vector& x, const Vector& grad) const {
    Vector y(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      auto [a, b] = subdifferential(i, x[i]);
      y[i] = std::clamp(0.0, grad[i] + a, grad[i] + b);
    }
    return y;
  }
};

/// One inequality g_i(x) ≤ 0. Affine constraints store G_i in `form.linear`
/// and −d_i in `form.constant`.
struct Inequality {
  enum class Kind { Affine, Quadratic };
  Kind kind = Kind::Affine;
  QuadraticForm form;

  static Inequality affine(Vector row, double rhs) {
    return {Kind::Affine, {Matrix(), std::move(row), -rhs}};
  }
  static Inequality quadratic(Matrix P, Vector r, double s) {
    return {Kind::Quadratic, {std::move(P), std::move(r), s}};
  }

  double value(const Vector& x) const { return form.value(x); }
  Vector gradient(const Vector& x) const { return form.gradient(x); }
};

/// Dual iterate p = (λ, μ).
struct DualPoint {
  Vector lambda;
  Vector mu;

  static DualPoint zeros(Eigen::Index m1, Eigen::Index m2) {
    return {Vector::Zero(m1), Vector::Zero(m2)};
  }
  static DualPoint from_stacked(const Vector& p, Eigen::Index m1) {
    return {p.head(m1), p.tail(p.size() - m1)};
  }
  Vector stacked() const { return concat(lambda, mu); }
};

class ConvexProgram {
 public:
  ConvexProgram(std::shared_ptr<const SmoothFunction> smooth, std::optional<NonsmoothTerm> nonsmooth,
                Matrix A, Vector b, std::vector<Inequality> ineqs = {})
      : smooth_(std::move(smooth)),
        nonsmooth_(std::move(nonsmooth)),
        A_(std::move(A)),
        b_(std::move(b)),
        ineqs_(std::move(ineqs)) {
    require(smooth_ != nullptr, ErrorCode::InvalidArgument, "smooth objective is required");
    const auto n = smooth_->dim();
    require(n > 0, ErrorCode::InvalidArgument, "dimension n must be positive");
    if (A_.size() == 0) A_.resize(0, n);
    if (b_.size() == 0) b_.resize(0);
    require_size(A_.cols(), n, "equality matrix A (columns)");
    require_size(b_.size(), A_.rows(), "equality rhs b");
    if (nonsmooth_) {
      if (nonsmooth_->has_l1()) {
        require_size(nonsmooth_->l1_weight.size(), n, "l1_weight");
        require((nonsmooth_->l1_weight.array() >= 0).all(), ErrorCode::InvalidArgument,
                "l1_weight must be nonnegative");
      }
      if (nonsmooth_->has_box()) {
        require_size(nonsmooth_->lo.size(), n, "box.lo");
        require_size(nonsmooth_->hi.size(), n, "box.hi");
        require((nonsmooth_->lo.array() <= nonsmooth_->hi.array()).all(),
                ErrorCode::InvalidArgument, "box requires lo <= hi");
      }
      if (!nonsmooth_->has_l1() && !nonsmooth_->has_box()) nonsmooth_.reset();
    }
    for (const auto& g : ineqs_) {
      require_size(g.form.linear.size(), n, "inequality gradient");
      if (g.form.has_hessian()) {
        require(g.form.hessian.rows() == n && g.form.hessian.cols() == n,
                ErrorCode::DimensionMismatch, "inequality P must be n x n");
      }
    }
  }

  Eigen::Index n() const { return smooth_->dim(); }
  Eigen::Index m1() const { return A_.rows(); }
  Eigen::Index m2() const { return static_cast<Eigen::Index>(ineqs_.size()); }
  Eigen::Index m() const { return m1() + m2(); }

  const SmoothFunction& smooth() const { return *smooth_; }
  const std::shared_ptr<const SmoothFunction>& smooth_ptr() const { return smooth_; }
  const std::optional<NonsmoothTerm>& nonsmooth() const { return nonsmooth_; }
  const Matrix& eq_matrix() const { return A_; }
  const Vector& eq_rhs() const { return b_; }
  const std::vector<Inequality>& inequalities() const { return ineqs_; }

  bool is_smooth() const { return !nonsmooth_.has_value(); }

  bool has_affine_inequalities_only() const {
    for (const auto& g : ineqs_)
      if (g.kind != Inequality::Kind::Affine) return false;
    return true;
  }

  /// Rows G_i of the affine inequalities (requires all affine).
  Matrix ineq_matrix() const {
    Matrix G(m2(), n());
    for (Eigen::Index i = 0; i < m2(); ++i) G.row(i) = ineqs_[i].form.linear.transpose();
    return G;
  }
  Vector ineq_rhs() const {
    Vector d(m2());
    for (Eigen::Index i = 0; i < m2(); ++i) d[i] = -ineqs_[i].form.constant;
    return d;
  }

  double objective(const Vector& x) const {
    double v = smooth_->value(x);
    if (nonsmooth_) v += nonsmooth_->value(x);
    return v;
  }

  const std::optional<Vector>& stored_feasible_point() const { return feasible_; }
  void set_feasible_point(Vector x) { feasible_ = std::move(x); }

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  /// Generator family tag ("" for hand-built or file-loaded programs).
  const std::string& family() const { return family_; }
  void set_family(std::string family) { family_ = std::move(family); }

 private:
  std::shared_ptr<const SmoothFunction> smooth_;
  std::optional<NonsmoothTerm> nonsmooth_;
  Matrix A_;
  Vector b_;
  std::vector<Inequality> ineqs_;
  std::optional<Vector> feasible_;
  std::string name_;
  std::string family_;
};

struct ConstraintValues {
  Vector h;
  Vector g;
};

inline ConstraintValues eval_constraints(const ConvexProgram& prog, const Vector& x) {
  require_size(x.size(), prog.n(), "x");
  ConstraintValues out{prog.eq_matrix() * x - prog.eq_rhs(), Vector(prog.m2())};
  for (Eigen::Index i = 0; i < prog.m2(); ++i) out.g[i] = prog.inequalities()[i].value(x);
  return out;
}

inline void require_dual_dims(const ConvexProgram& prog, const DualPoint& p) {
  require_size(p.lambda.size(), prog.m1(), "lambda");
  require_size(p.mu.size(), prog.m2(), "mu");
}

/// ∇h(x)λ + ∇g(x)μ.
inline Vector constraint_gradient_product(const ConvexProgram& prog, const Vector& x,
                                          const Vector& lambda, const Vector& mu) {
  Vector out = prog.eq_matrix().transpose() * lambda;
  for (Eigen::Index i = 0; i < prog.m2(); ++i) {
    if (mu[i] != 0.0) out += mu[i] * prog.inequalities()[i].gradient(x);
  }
  return out;
}

/// ∇s(x) + ∇h(x)λ + ∇g(x)μ: the differentiable part of ∂ₓL.
inline Vector lagrangian_smooth_gradient(const ConvexProgram& prog, const Vector& x,
                                         const DualPoint& p) {
  return prog.smooth().gradient(x) + constraint_gradient_product(prog, x, p.lambda, p.mu);
}

/// L(x; λ, μ); −∞ when μ has a negative component.
inline double lagrangian_value(const ConvexProgram& prog, const Vector& x, const DualPoint& p) {
  require_dual_dims(prog, p);
  if ((p.mu.array() < 0.0).any()) return -kInf;
  const auto cv = eval_constraints(prog, x);
  return prog.objective(x) + p.lambda.dot(cv.h) + p.mu.dot(cv.g);
}

struct KktResidual {
  double stationarity = 0.0;
  double eq_feas = 0.0;
  double ineq_feas = 0.0;
  double comp = 0.0;
  double mu_neg = 0.0;

  double max() const { return std::max({stationarity, eq_feas, ineq_feas, comp, mu_neg}); }
};

/// y is the caller's certificate y ∈ ∂f(x) + ∇h(x)λ + ∇g(x)μ.
inline KktResidual kkt_residual(const ConvexProgram& prog, const Vector& x, const DualPoint& p,
                                const Vector& y) {
  require_size(x.size(), prog.n(), "x");
  require_size(y.size(), prog.n(), "y");
  require_dual_dims(prog, p);
  const auto cv = eval_constraints(prog, x);
  KktResidual r;
  r.stationarity = y.norm();
  r.eq_feas = cv.h.norm();
  r.ineq_feas = cv.g.cwiseMax(0.0).norm();
  r.comp = std::abs(p.mu.dot(cv.g));
  r.mu_neg = p.mu.cwiseMin(0.0).norm();
  return r;
}

/// Minimum-norm element of ∂ₓL(x, p), or nullopt when x is outside dom r.
inline std::optional<Vector> lagrangian_min_norm_subgradient(const ConvexProgram& prog,
                                                             const Vector& x, const DualPoint& p) {
  Vector grad = lagrangian_smooth_gradient(prog, x, p);
  if (!prog.nonsmooth()) return grad;
  if (!prog.nonsmooth()->in_domain(x)) return std::nullopt;
  return prog.nonsmooth()->min_norm_subgradient(x, grad);
}

namespace detail {

inline void fnv1a(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

inline void fnv1a(std::uint64_t& h, const Matrix& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  fnv1a(h, dims, sizeof dims);
  if (m.size() != 0) fnv1a(h, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

}  // namespace detail

/// FNV-1a digest of the problem data. Used to match traces to oracles.
inline std::uint64_t problem_fingerprint(const ConvexProgram& prog) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::int64_t dims[3] = {prog.n(), prog.m1(), prog.m2()};
  detail::fnv1a(h, dims, sizeof dims);
  if (const auto* quad = prog.smooth().quadratic()) {
    detail::fnv1a(h, quad->hessian);
    detail::fnv1a(h, quad->linear);
  }
  if (prog.nonsmooth()) {
    detail::fnv1a(h, prog.nonsmooth()->l1_weight);
    detail::fnv1a(h, prog.nonsmooth()->lo);
    detail::fnv1a(h, prog.nonsmooth()->hi);
  }
  detail::fnv1a(h, prog.eq_matrix());
  detail::fnv1a(h, prog.eq_rhs());
  for (const auto& g : prog.inequalities()) {
    const int kind = static_cast<int>(g.kind);
    detail::fnv1a(h, &kind, sizeof kind);
    detail::fnv1a(h, g.form.hessian);
    detail::fnv1a(h, g.form.linear);
    detail::fnv1a(h, &g.form.constant, sizeof(double));
  }
  return h;
}

}  // namespace almlab
