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

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace almlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  MaxInnerIterations,
  NonFiniteEncountered,
  Infeasible,
  Unbounded,
  EnumerationLimit,
  NoValidSamples,
  OracleMismatch,
  InsufficientIterations,
  InconsistentSpec,
  NotAvailable,
  Unsupported,
  Parse,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MaxInnerIterations: return "MaxInnerIterations";
    case ErrorCode::NonFiniteEncountered: return "NonFiniteEncountered";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::EnumerationLimit: return "EnumerationLimit";
    case ErrorCode::NoValidSamples: return "NoValidSamples";
    case ErrorCode::OracleMismatch: return "OracleMismatch";
    case ErrorCode::InsufficientIterations: return "InsufficientIterations";
    case ErrorCode::InconsistentSpec: return "InconsistentSpec";
    case ErrorCode::NotAvailable: return "NotAvailable";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so that
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

inline void require_size(Eigen::Index actual, Eigen::Index expected, const char* name) {
  if (actual != expected) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has size " +
                                                  std::to_string(actual) + ", expected " +
                                                  std::to_string(expected));
  }
}

/// Stacks two vectors into one.
inline Vector concat(const Vector& a, const Vector& b) {
  Vector out(a.size() + b.size());
  out << a, b;
  return out;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace almlab
