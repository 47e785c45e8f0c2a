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

// JSON and CSV formats: problem files, run configs, run traces, oracle
// solutions and rate reports.
//
// Problem file:
//   {"n": 2, "Q": [[1,0],[0,1]], "q": [0,0],
//    "l1_weight": [..], "box": {"lo": [..], "hi": [..]},
//    "A": [[1,1]], "b": [1],
//    "ineq": [{"type": "affine", "data": {"G": [1,0], "d": 0.5}},
//             {"type": "quadratic", "data": {"P": [[..]], "r": [..], "s": -1}}]}
// or {"generator": {"family": "sc_qp", "n": 6, "m1": 2, "m2": 3, "seed": 7,
//                   "conditioning": [1, 10]}}.
//
// Floats in CSV use the shortest representation that reads back to the same
// double, so identical runs give byte-identical files.

#include <almlab/diagnostics.hpp>
#include <almlab/problems.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace almlab {

using Json = nlohmann::json;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::Parse, "field '" + field + "': " + what);
}

inline double json_number(const Json& j, const std::string& field) {
  if (j.is_null()) return kNaN;  // NaN is written as null
  if (!j.is_number()) parse_fail(field, "expected a number");
  return j.get<double>();
}

inline Vector json_vector(const Json& j, const std::string& field, Eigen::Index expect = -1) {
  if (!j.is_array()) parse_fail(field, "expected an array of numbers");
  if (expect >= 0 && static_cast<Eigen::Index>(j.size()) != expect)
    parse_fail(field, "expected " + std::to_string(expect) + " entries, got " +
                          std::to_string(j.size()));
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = json_number(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

/// Row-major nested array; `cols` < 0 infers the width from the first row.
inline Matrix json_matrix(const Json& j, const std::string& field, Eigen::Index cols) {
  if (!j.is_array()) parse_fail(field, "expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (rows > 0 && cols < 0) {
    if (!j[0].is_array()) parse_fail(field + "[0]", "expected an array of numbers");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Matrix m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index i = 0; i < rows; ++i)
    m.row(i) = json_vector(j[static_cast<std::size_t>(i)],
                           field + "[" + std::to_string(i) + "]", cols)
                   .transpose();
  return m;
}

inline const Json& json_field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) parse_fail(path.empty() ? "<root>" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) {
      out.push_back(v[i]);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

inline Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vector(m.row(i).transpose())));
  return out;
}

inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline std::string id_string(std::uint64_t id) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(id));
  return buf;
}

inline std::uint64_t parse_id(const Json& j, const std::string& field) {
  if (!j.is_string()) parse_fail(field, "expected a hex string");
  const auto& s = j.get_ref<const std::string&>();
  std::uint64_t id = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), id, 16);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) parse_fail(field, "bad hex id");
  return id;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Parse, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, origin + ": " + e.what());
  }
}

}  // namespace detail

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Problems

inline GeneratorSpec generator_from_json(const Json& j) {
  const std::string path = "generator";
  const Json& fam = detail::json_field(j, "family", path);
  if (!fam.is_string()) detail::parse_fail(path + ".family", "expected a string");
  GeneratorSpec spec;
  try {
    spec.family = parse_family(fam.get<std::string>());
  } catch (const Error& e) {
    detail::parse_fail(path + ".family", e.what());
  }
  spec.seed = 0;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) detail::parse_fail(path + ".seed", "expected an unsigned integer");
    spec.seed = j["seed"].get<std::uint64_t>();
  }
  const auto d = GeneratorSpec::defaults(spec.family, spec.seed);
  spec.n = d.n;
  spec.m1 = d.m1;
  spec.m2 = d.m2;
  for (const char* key : {"n", "m1", "m2"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_number_integer()) detail::parse_fail(path + "." + key, "expected an integer");
    const auto v = j[key].get<Eigen::Index>();
    if (std::string(key) == "n") spec.n = v;
    if (std::string(key) == "m1") spec.m1 = v;
    if (std::string(key) == "m2") spec.m2 = v;
  }
  if (j.contains("conditioning")) {
    const Vector range = detail::json_vector(j["conditioning"], path + ".conditioning", 2);
    spec.cond_lo = range[0];
    spec.cond_hi = range[1];
  }
  return spec;
}

inline Json generator_to_json(const GeneratorSpec& spec) {
  return {{"family", std::string(to_string(spec.family))},
          {"n", spec.n},
          {"m1", spec.m1},
          {"m2", spec.m2},
          {"seed", spec.seed},
          {"conditioning", {spec.cond_lo, spec.cond_hi}}};
}

inline ConvexProgram problem_from_json(const Json& j) {
  if (!j.is_object()) detail::parse_fail("<root>", "expected an object");
  if (j.contains("generator")) return generate(generator_from_json(j["generator"]));

  const Json& jn = detail::json_field(j, "n", "");
  if (!jn.is_number_integer() || jn.get<long long>() <= 0)
    detail::parse_fail("n", "expected a positive integer");
  const auto n = jn.get<Eigen::Index>();

  Matrix Q = j.contains("Q") ? detail::json_matrix(j["Q"], "Q", n) : Matrix();
  if (Q.size() != 0 && Q.rows() != n) detail::parse_fail("Q", "expected " + std::to_string(n) + " rows");
  const Vector q = j.contains("q") ? detail::json_vector(j["q"], "q", n) : Vector::Zero(n);

  std::optional<NonsmoothTerm> r;
  if (j.contains("l1_weight") || j.contains("box")) {
    NonsmoothTerm term;
    if (j.contains("l1_weight")) {
      term.l1_weight = detail::json_vector(j["l1_weight"], "l1_weight", n);
      if ((term.l1_weight.array() < 0.0).any()) detail::parse_fail("l1_weight", "weights must be >= 0");
    }
    if (j.contains("box")) {
      const Json& box = j["box"];
      term.lo = detail::json_vector(detail::json_field(box, "lo", "box"), "box.lo", n);
      term.hi = detail::json_vector(detail::json_field(box, "hi", "box"), "box.hi", n);
      if ((term.lo.array() > term.hi.array()).any()) detail::parse_fail("box", "requires lo <= hi");
    }
    r = std::move(term);
  }

  Matrix A = j.contains("A") ? detail::json_matrix(j["A"], "A", n) : Matrix(0, n);
  const Vector b = j.contains("b") ? detail::json_vector(j["b"], "b", A.rows()) : Vector::Zero(A.rows());

  std::vector<Inequality> ineqs;
  if (j.contains("ineq")) {
    const Json& list = j["ineq"];
    if (!list.is_array()) detail::parse_fail("ineq", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "ineq[" + std::to_string(i) + "]";
      const Json& type = detail::json_field(list[i], "type", path);
      const Json& data = detail::json_field(list[i], "data", path);
      if (!type.is_string()) detail::parse_fail(path + ".type", "expected a string");
      const auto& t = type.get_ref<const std::string&>();
      if (t == "affine") {
        Vector row = detail::json_vector(detail::json_field(data, "G", path + ".data"),
                                         path + ".data.G", n);
        const double d = detail::json_number(detail::json_field(data, "d", path + ".data"),
                                             path + ".data.d");
        ineqs.push_back(Inequality::affine(std::move(row), d));
      } else if (t == "quadratic") {
        Matrix P = detail::json_matrix(detail::json_field(data, "P", path + ".data"),
                                       path + ".data.P", n);
        if (P.rows() != n) detail::parse_fail(path + ".data.P", "expected " + std::to_string(n) + " rows");
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (P + P.transpose()),
                                                        Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff()))
          detail::parse_fail(path + ".data.P", "must be positive semidefinite");
        Vector rr = data.contains("r") ? detail::json_vector(data["r"], path + ".data.r", n)
                                       : Vector::Zero(n);
        const double s = data.contains("s") ? detail::json_number(data["s"], path + ".data.s") : 0.0;
        ineqs.push_back(Inequality::quadratic(std::move(P), std::move(rr), s));
      } else {
        detail::parse_fail(path + ".type", "expected \"affine\" or \"quadratic\", got \"" + t + "\"");
      }
    }
  }

  if (Q.size() != 0) {
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (Q + Q.transpose()), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
      detail::parse_fail("Q", "must be positive semidefinite");
  }
  ConvexProgram prog(std::make_shared<QuadraticObjective>(std::move(Q), q), std::move(r),
                     std::move(A), b, std::move(ineqs));
  if (j.contains("name") && j["name"].is_string()) prog.set_name(j["name"].get<std::string>());
  return prog;
}

inline ConvexProgram load_problem(const std::string& path) {
  return problem_from_json(detail::parse_json_text(detail::read_file(path), path));
}

/// Explicit-matrix form of a quadratic program; Unsupported for other objectives.
inline Json problem_to_json(const ConvexProgram& prog) {
  const QuadraticForm* quad = prog.smooth().quadratic();
  require(quad != nullptr, ErrorCode::Unsupported,
          "only quadratic objectives can be written as problem files");
  Json j;
  j["n"] = prog.n();
  if (!prog.name().empty()) j["name"] = prog.name();
  if (quad->has_hessian()) j["Q"] = detail::to_json(quad->hessian);
  j["q"] = detail::to_json(quad->linear);
  if (prog.nonsmooth()) {
    const auto& r = *prog.nonsmooth();
    if (r.has_l1()) j["l1_weight"] = detail::to_json(r.l1_weight);
    if (r.has_box()) j["box"] = {{"lo", detail::to_json(r.lo)}, {"hi", detail::to_json(r.hi)}};
  }
  j["A"] = detail::to_json(prog.eq_matrix());
  j["b"] = detail::to_json(prog.eq_rhs());
  Json list = Json::array();
  for (const auto& g : prog.inequalities()) {
    if (g.kind == Inequality::Kind::Affine) {
      list.push_back({{"type", "affine"},
                      {"data", {{"G", detail::to_json(g.form.linear)}, {"d", -g.form.constant}}}});
    } else {
      list.push_back({{"type", "quadratic"},
                      {"data",
                       {{"P", detail::to_json(g.form.hessian)},
                        {"r", detail::to_json(g.form.linear)},
                        {"s", g.form.constant}}}});
    }
  }
  j["ineq"] = std::move(list);
  return j;
}

// ---------------------------------------------------------------------------
// Run configuration

inline Json config_to_json(const RunConfig& cfg) {
  const auto& s = cfg.schedule;
  const auto& in = cfg.inner;
  return {{"sigma", cfg.sigma},
          {"tol", cfg.tol},
          {"max_outer", cfg.max_outer},
          {"schedule",
           {{"kind", std::string(to_string(s.kind))},
            {"c0", s.c0},
            {"growth", s.growth},
            {"c_max", s.c_max},
            {"adapt_ratio", s.adapt_ratio}}},
          {"inner",
           {{"max_inner", in.max_inner},
            {"armijo_shrink", in.armijo_shrink},
            {"armijo_decrease", in.armijo_decrease},
            {"max_backtracks", in.max_backtracks},
            {"exact", in.exact},
            {"exact_tol", in.exact_tol},
            {"max_newton", in.max_newton}}}};
}

/// Missing keys keep their defaults.
inline RunConfig config_from_json(const Json& j, RunConfig cfg = {}) {
  if (!j.is_object()) detail::parse_fail("<config>", "expected an object");
  auto num = [](const Json& obj, const char* key, const std::string& path, double& out) {
    if (obj.contains(key)) out = detail::json_number(obj[key], path + key);
  };
  auto integer = [](const Json& obj, const char* key, const std::string& path, int& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number_integer()) detail::parse_fail(path + key, "expected an integer");
    out = obj[key].get<int>();
  };
  num(j, "sigma", "", cfg.sigma);
  num(j, "tol", "", cfg.tol);
  integer(j, "max_outer", "", cfg.max_outer);
  if (j.contains("schedule")) {
    const Json& s = j["schedule"];
    if (!s.is_object()) detail::parse_fail("schedule", "expected an object");
    if (s.contains("kind")) {
      if (!s["kind"].is_string()) detail::parse_fail("schedule.kind", "expected a string");
      try {
        cfg.schedule.kind = parse_schedule_kind(s["kind"].get<std::string>());
      } catch (const Error& e) {
        detail::parse_fail("schedule.kind", e.what());
      }
    }
    num(s, "c0", "schedule.", cfg.schedule.c0);
    num(s, "growth", "schedule.", cfg.schedule.growth);
    num(s, "c_max", "schedule.", cfg.schedule.c_max);
    num(s, "adapt_ratio", "schedule.", cfg.schedule.adapt_ratio);
  }
  if (j.contains("inner")) {
    const Json& in = j["inner"];
    if (!in.is_object()) detail::parse_fail("inner", "expected an object");
    integer(in, "max_inner", "inner.", cfg.inner.max_inner);
    num(in, "armijo_shrink", "inner.", cfg.inner.armijo_shrink);
    num(in, "armijo_decrease", "inner.", cfg.inner.armijo_decrease);
    integer(in, "max_backtracks", "inner.", cfg.inner.max_backtracks);
    if (in.contains("exact")) {
      if (!in["exact"].is_boolean()) detail::parse_fail("inner.exact", "expected a boolean");
      cfg.inner.exact = in["exact"].get<bool>();
    }
    num(in, "exact_tol", "inner.", cfg.inner.exact_tol);
    integer(in, "max_newton", "inner.", cfg.inner.max_newton);
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Run histories

inline const char* kHistoryCsvHeader =
    "k,c,f_val,auglag_val,lhs,rhs,norm_y,norm_u,eq_feas,ineq_feas,comp,inner_iters";

inline std::string history_csv(const RunHistory& hist) {
  std::string out = kHistoryCsvHeader;
  out += '\n';
  for (const auto& r : hist.records) {
    const double vals[] = {r.c,          r.f_val,        r.auglag_val,    r.criterion.lhs,
                           r.criterion.rhs_raw, r.y.norm(), r.u.norm(),     r.kkt.eq_feas,
                           r.kkt.ineq_feas, r.kkt.comp};
    out += std::to_string(r.k);
    for (double v : vals) {
      out += ',';
      out += format_double(v);
    }
    out += ',';
    out += std::to_string(r.inner_iters);
    out += '\n';
  }
  return out;
}

inline RunStatus parse_run_status(std::string_view s) {
  if (s == "Converged") return RunStatus::Converged;
  if (s == "MaxOuterIterations") return RunStatus::MaxOuterIterations;
  if (s == "InnerFailure") return RunStatus::InnerFailure;
  throw Error(ErrorCode::Parse, "field 'status': unknown run status '" + std::string(s) + "'");
}

/// Full trace; `prog` is embedded when it can be written explicitly.
inline Json history_to_json(const RunHistory& hist, const ConvexProgram* prog = nullptr) {
  Json j;
  j["problem_id"] = detail::id_string(hist.problem_id);
  if (prog != nullptr && prog->smooth().quadratic() != nullptr) j["problem"] = problem_to_json(*prog);
  j["config"] = config_to_json(hist.config);
  j["status"] = std::string(to_string(hist.status));
  if (!hist.failure.empty()) j["failure"] = hist.failure;
  j["p0"] = {{"lambda", detail::to_json(hist.p0.lambda)}, {"mu", detail::to_json(hist.p0.mu)}};
  j["x0"] = detail::to_json(hist.x0);
  j["w0"] = detail::to_json(hist.w0);
  Json recs = Json::array();
  for (const auto& r : hist.records) {
    recs.push_back({{"k", r.k},
                    {"c", r.c},
                    {"x", detail::to_json(r.x)},
                    {"y", detail::to_json(r.y)},
                    {"lambda", detail::to_json(r.p.lambda)},
                    {"mu", detail::to_json(r.p.mu)},
                    {"w", detail::to_json(r.w)},
                    {"u", detail::to_json(r.u)},
                    {"criterion",
                     {{"lhs", r.criterion.lhs},
                      {"rhs_raw", r.criterion.rhs_raw},
                      {"rhs_rewritten", r.criterion.rhs_rewritten},
                      {"satisfied", r.criterion.satisfied}}},
                    {"kkt",
                     {{"stationarity", r.kkt.stationarity},
                      {"eq_feas", r.kkt.eq_feas},
                      {"ineq_feas", r.kkt.ineq_feas},
                      {"comp", r.kkt.comp},
                      {"mu_neg", r.kkt.mu_neg}}},
                    {"inner_iters", r.inner_iters},
                    {"f_val", detail::number_or_null(r.f_val)},
                    {"auglag_val", detail::number_or_null(r.auglag_val)}});
  }
  j["records"] = std::move(recs);
  return j;
}

inline RunHistory history_from_json(const Json& j) {
  using detail::json_field;
  using detail::json_number;
  using detail::json_vector;
  RunHistory h;
  h.problem_id = detail::parse_id(json_field(j, "problem_id", ""), "problem_id");
  if (j.contains("config")) h.config = config_from_json(j["config"]);
  const Json& st = json_field(j, "status", "");
  if (!st.is_string()) detail::parse_fail("status", "expected a string");
  h.status = parse_run_status(st.get<std::string>());
  if (j.contains("failure") && j["failure"].is_string()) h.failure = j["failure"].get<std::string>();
  const Json& p0 = json_field(j, "p0", "");
  h.p0.lambda = json_vector(json_field(p0, "lambda", "p0"), "p0.lambda");
  h.p0.mu = json_vector(json_field(p0, "mu", "p0"), "p0.mu");
  h.x0 = json_vector(json_field(j, "x0", ""), "x0");
  h.w0 = json_vector(json_field(j, "w0", ""), "w0", h.x0.size());
  const auto n = h.x0.size();
  const auto m1 = h.p0.lambda.size();
  const auto m2 = h.p0.mu.size();
  const Json& recs = json_field(j, "records", "");
  if (!recs.is_array()) detail::parse_fail("records", "expected an array");
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const std::string path = "records[" + std::to_string(i) + "]";
    const Json& rj = recs[i];
    IterationRecord r;
    const Json& k = json_field(rj, "k", path);
    if (!k.is_number_integer()) detail::parse_fail(path + ".k", "expected an integer");
    r.k = k.get<int>();
    r.c = json_number(json_field(rj, "c", path), path + ".c");
    r.x = json_vector(json_field(rj, "x", path), path + ".x", n);
    r.y = json_vector(json_field(rj, "y", path), path + ".y", n);
    r.p.lambda = json_vector(json_field(rj, "lambda", path), path + ".lambda", m1);
    r.p.mu = json_vector(json_field(rj, "mu", path), path + ".mu", m2);
    r.w = json_vector(json_field(rj, "w", path), path + ".w", n);
    r.u = json_vector(json_field(rj, "u", path), path + ".u", m1 + m2);
    if (rj.contains("criterion")) {
      const Json& cj = rj["criterion"];
      const std::string cp = path + ".criterion";
      r.criterion.lhs = json_number(json_field(cj, "lhs", cp), cp + ".lhs");
      r.criterion.rhs_raw = json_number(json_field(cj, "rhs_raw", cp), cp + ".rhs_raw");
      r.criterion.rhs_rewritten =
          json_number(json_field(cj, "rhs_rewritten", cp), cp + ".rhs_rewritten");
      const Json& sat = json_field(cj, "satisfied", cp);
      if (!sat.is_boolean()) detail::parse_fail(cp + ".satisfied", "expected a boolean");
      r.criterion.satisfied = sat.get<bool>();
    }
    if (rj.contains("kkt")) {
      const Json& kj = rj["kkt"];
      const std::string kp = path + ".kkt";
      r.kkt.stationarity = json_number(json_field(kj, "stationarity", kp), kp + ".stationarity");
      r.kkt.eq_feas = json_number(json_field(kj, "eq_feas", kp), kp + ".eq_feas");
      r.kkt.ineq_feas = json_number(json_field(kj, "ineq_feas", kp), kp + ".ineq_feas");
      r.kkt.comp = json_number(json_field(kj, "comp", kp), kp + ".comp");
      r.kkt.mu_neg = json_number(json_field(kj, "mu_neg", kp), kp + ".mu_neg");
    }
    if (rj.contains("inner_iters") && rj["inner_iters"].is_number_integer())
      r.inner_iters = rj["inner_iters"].get<int>();
    if (rj.contains("f_val")) r.f_val = json_number(rj["f_val"], path + ".f_val");
    if (rj.contains("auglag_val")) r.auglag_val = json_number(rj["auglag_val"], path + ".auglag_val");
    h.records.push_back(std::move(r));
  }
  return h;
}

inline RunHistory load_history(const std::string& path) {
  return history_from_json(detail::parse_json_text(detail::read_file(path), path));
}

// ---------------------------------------------------------------------------
// Oracle solutions

inline Json oracle_to_json(const SolutionSetOracle& o) {
  auto indices = [](const std::vector<Eigen::Index>& v) {
    Json a = Json::array();
    for (auto i : v) a.push_back(i);
    return a;
  };
  return {{"n", o.n},
          {"m1", o.m1},
          {"m2", o.m2},
          {"problem_id", detail::id_string(o.problem_id)},
          {"x_star", detail::to_json(o.x_star)},
          {"lambda_star", detail::to_json(o.p_star.lambda)},
          {"mu_star", detail::to_json(o.p_star.mu)},
          {"primal",
           {{"point", detail::to_json(o.primal.point)},
            {"basis", detail::to_json(Matrix(o.primal.basis.transpose()))}}},
          {"dual",
           {{"E", detail::to_json(o.dual.E)},
            {"e", detail::to_json(o.dual.e)},
            {"zero", indices(o.dual.zero)},
            {"sign", indices(o.dual.sign)}}}};
}

inline SolutionSetOracle oracle_from_json(const Json& j) {
  using detail::json_field;
  SolutionSetOracle o;
  auto dim = [&](const char* key) {
    const Json& v = json_field(j, key, "");
    if (!v.is_number_integer() || v.get<long long>() < 0)
      detail::parse_fail(key, "expected a nonnegative integer");
    return v.get<Eigen::Index>();
  };
  o.n = dim("n");
  o.m1 = dim("m1");
  o.m2 = dim("m2");
  o.problem_id = detail::parse_id(json_field(j, "problem_id", ""), "problem_id");
  o.x_star = detail::json_vector(json_field(j, "x_star", ""), "x_star", o.n);
  o.p_star.lambda = detail::json_vector(json_field(j, "lambda_star", ""), "lambda_star", o.m1);
  o.p_star.mu = detail::json_vector(json_field(j, "mu_star", ""), "mu_star", o.m2);
  const Json& pj = json_field(j, "primal", "");
  o.primal.point = detail::json_vector(json_field(pj, "point", "primal"), "primal.point", o.n);
  const Matrix basis_t = detail::json_matrix(json_field(pj, "basis", "primal"), "primal.basis", o.n);
  o.primal.basis = basis_t.rows() == 0 ? Matrix(o.n, 0) : Matrix(basis_t.transpose());
  const Json& dj = json_field(j, "dual", "");
  o.dual.m1 = o.m1;
  o.dual.E = detail::json_matrix(json_field(dj, "E", "dual"), "dual.E", o.m1 + o.m2);
  o.dual.e = detail::json_vector(json_field(dj, "e", "dual"), "dual.e", o.dual.E.rows());
  for (const char* key : {"zero", "sign"}) {
    const Json& list = json_field(dj, key, "dual");
    if (!list.is_array()) detail::parse_fail(std::string("dual.") + key, "expected an array");
    auto& dst = std::string(key) == "zero" ? o.dual.zero : o.dual.sign;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = std::string("dual.") + key + "[" + std::to_string(i) + "]";
      if (!list[i].is_number_integer()) detail::parse_fail(path, "expected an index");
      const auto idx = list[i].get<Eigen::Index>();
      if (idx < o.m1 || idx >= o.m1 + o.m2) detail::parse_fail(path, "index out of range");
      dst.push_back(idx);
    }
  }
  return o;
}

inline SolutionSetOracle load_oracle(const std::string& path) {
  return oracle_from_json(detail::parse_json_text(detail::read_file(path), path));
}

// ---------------------------------------------------------------------------
// Rate reports

inline const char* kRateCsvHeader =
    "k,c,dist_p,dist_x,rho_hat,rho_theory,primal_bound,threshold_ok";

inline std::string rate_csv(const RateReport& rep) {
  std::string out = kRateCsvHeader;
  out += '\n';
  for (const auto& r : rep.rows) {
    out += std::to_string(r.k);
    for (double v : {r.c, r.dist_p, r.dist_x, r.rho_hat, r.rho_theory, r.primal_bound}) {
      out += ',';
      out += format_double(v);
    }
    out += r.threshold_ok ? ",1\n" : ",0\n";
  }
  return out;
}

inline Json rate_summary_json(const RateReport& rep, const ErrorBoundEstimate& kappa) {
  const auto& s = rep.summary;
  return {{"kappa_hat", s.kappa_hat},
          {"epsilon_used", kappa.epsilon_used},
          {"sample_count", kappa.sample_count},
          {"sup_rho_tail", detail::number_or_null(s.sup_rho_tail)},
          {"tail_start", s.tail_start},
          {"bound_violations", s.bound_violations},
          {"rho_violations", s.rho_violations},
          {"primal_violations", s.primal_violations},
          {"bound_violations_2k", s.bound_violations_2k},
          {"rho_violations_2k", s.rho_violations_2k},
          {"primal_violations_2k", s.primal_violations_2k}};
}

}  // namespace almlab
