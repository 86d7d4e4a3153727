// Copyright 2026 The isosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ISOSIM_ERROR_HPP
#define ISOSIM_ERROR_HPP

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace isosim {

enum class ErrorCode {
  UnknownNode,
  DisconnectedGraph,
  NonPositiveValue,
  PortCount,
  DuplicateName,
  InvalidNetlist,
  DomainError,
  LineSingularity,
  SingularMatrix,
  NoConvergence,
  NonConvergentStep,
  StepSizeIncompatibleWithDelay,
  NotSettled,
  SingularCapacitanceMatrix,
  DimensionOverflow,
  MinimumOnBoundary,
  EmptySweep,
  SchemaMismatch,
  ConfigError,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::PortCount: return "PortCount";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::InvalidNetlist: return "InvalidNetlist";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::LineSingularity: return "LineSingularity";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonConvergentStep: return "NonConvergentStep";
    case ErrorCode::StepSizeIncompatibleWithDelay: return "StepSizeIncompatibleWithDelay";
    case ErrorCode::NotSettled: return "NotSettled";
    case ErrorCode::SingularCapacitanceMatrix: return "SingularCapacitanceMatrix";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::MinimumOnBoundary: return "MinimumOnBoundary";
    case ErrorCode::EmptySweep: return "EmptySweep";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library. `subject()` names the offending
/// element, node, key or column when there is one.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string subject, const std::string& detail = {})
      : std::runtime_error(format(code, subject, detail)),
        code_(code),
        subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  static std::string format(ErrorCode code, const std::string& subject,
                            const std::string& detail) {
    std::string msg(to_string(code));
    if (!subject.empty()) msg += "(" + subject + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  ErrorCode code_;
  std::string subject_;
};

/// Short %g rendering for messages; std::to_string flattens small values to 0.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Harmonic-balance failure. Carries the point where continuation stopped so
/// callers can retry with a smaller step or more harmonics.
class NoConvergence : public Error {
 public:
  NoConvergence(double last_residual, double power_reached_dbm, const std::string& detail)
      : Error(ErrorCode::NoConvergence, {},
              detail + " (residual " + num(last_residual) + " at " +
                  num(power_reached_dbm) + " dBm)"),
        last_residual(last_residual),
        power_reached_dbm(power_reached_dbm) {}

  double last_residual;
  double power_reached_dbm;
};

}  // namespace isosim

#endif  // ISOSIM_ERROR_HPP
