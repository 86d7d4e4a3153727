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

// Nodal admittance assembly and small-signal AC analysis. Phasors use the
// peak convention: v(t) = Re(V exp(j w t)).

#ifndef ISOSIM_LINMAP_HPP
#define ISOSIM_LINMAP_HPP

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <string>

#include "isosim/circuit.hpp"
#include "isosim/netlist.hpp"

namespace isosim {

using cplx = std::complex<double>;

inline constexpr double kLineSingularityTol = 1e-9;

struct AdmittanceMatrix {
  double frequency = 0.0;
  Eigen::MatrixXcd matrix;
  std::map<std::string, int> node_index;

  cplx at(const std::string& row, const std::string& col) const {
    return matrix(node_index.at(row), node_index.at(col));
  }
};

namespace detail {

inline void stamp_branch(Eigen::MatrixXcd& y, int a, int b, cplx adm) {
  if (a >= 0) y(a, a) += adm;
  if (b >= 0) y(b, b) += adm;
  if (a >= 0 && b >= 0) {
    y(a, b) -= adm;
    y(b, a) -= adm;
  }
}

/// Short-circuit admittance parameters (y11 = y22, y12 = y21) of a lossless
/// line at angular frequency w.
inline std::pair<cplx, cplx> line_y(const CompiledCircuit::Line& line, double w) {
  const double theta = w * line.delay;
  const double s = std::sin(theta);
  if (std::abs(s) < kLineSingularityTol)
    throw Error(ErrorCode::LineSingularity, line.name,
                "electrical length is a multiple of pi (theta = " + num(theta) + ")");
  const cplx j(0.0, 1.0);
  return {-j * std::cos(theta) / (s * line.z0), j / (line.z0 * s)};
}

}  // namespace detail

/// Linear-network admittance over the compiled node rows. Junctions kept
/// nonlinear in `c` do not contribute.
inline Eigen::MatrixXcd admittance(const CompiledCircuit& c, double f, bool terminate_ports) {
  const int n = c.size();
  Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
  const double w = 2.0 * constants::pi * f;
  const cplx j(0.0, 1.0);
  for (const auto& r : c.resistors) detail::stamp_branch(y, r.a, r.b, 1.0 / r.value);
  for (const auto& cap : c.capacitors) detail::stamp_branch(y, cap.a, cap.b, j * w * cap.value);
  for (const auto& rl : c.series_rl) {
    const cplx z(rl.r, w * rl.l);
    if (std::abs(z) == 0.0) throw Error(ErrorCode::SingularMatrix, rl.name, "ideal inductor at DC");
    detail::stamp_branch(y, rl.a, rl.b, 1.0 / z);
  }
  for (const auto& line : c.lines) {
    const auto [y11, y12] = detail::line_y(line, w);
    const int a = line.a, b = line.b;
    if (a >= 0) y(a, a) += y11;
    if (b >= 0) y(b, b) += y11;
    if (a >= 0 && b >= 0) {
      y(a, b) += y12;
      y(b, a) += y12;
    }
  }
  if (terminate_ports)
    for (const auto& p : c.ports)
      if (p.node >= 0) y(p.node, p.node) += 1.0 / p.z0;
  return y;
}

/// Nodal admittance matrix of the netlist at frequency f over its declared
/// nodes. `treatment` must be LinearizedAtZero or Omitted.
inline AdmittanceMatrix stamp(const Netlist& netlist, double f,
                              JunctionTreatment treatment = JunctionTreatment::LinearizedAtZero,
                              bool terminate_ports = false) {
  if (!(f >= 0.0)) throw Error(ErrorCode::DomainError, "f", "frequency must be >= 0");
  if (treatment == JunctionTreatment::Nonlinear)
    throw Error(ErrorCode::DomainError, "junction_treatment", "stamp needs a linear junction model");
  const auto c = compile(netlist, treatment);
  AdmittanceMatrix out;
  out.frequency = f;
  out.matrix = admittance(c, f, terminate_ports);
  for (const auto& [name, row] : c.node_index)
    if (row >= 0) out.node_index[name] = row;
  return out;
}

struct AcSolution {
  double frequency = 0.0;
  Eigen::VectorXcd node_voltages;
  std::map<std::string, int> node_index;
  int driven_port = 0;
  double residual = 0.0;  ///< ||Y V - J|| / ||J||

  cplx voltage(const std::string& node) const {
    if (node == kGround) return 0.0;
    const int row = node_index.at(node);
    return row < 0 ? cplx{0.0} : node_voltages(row);
  }
};

namespace detail {

inline Eigen::VectorXcd solve_dense(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(a);
  if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SingularMatrix, what, "admittance matrix is singular");
  return lu.solve(b);
}

/// Terminated solve with a Norton source at `driven_port`.
inline AcSolution ac_solve_compiled(const CompiledCircuit& c, double f, int driven_port, cplx source_amplitude) {
  if (driven_port < 0 || driven_port >= static_cast<int>(c.ports.size()))
    throw Error(ErrorCode::PortCount, std::to_string(driven_port), "no such port");
  const Eigen::MatrixXcd y = admittance(c, f, true);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(c.size());
  const auto& port = c.ports[driven_port];
  if (port.node >= 0) rhs(port.node) = source_amplitude / port.z0;
  AcSolution s;
  s.frequency = f;
  s.driven_port = driven_port;
  s.node_index = c.node_index;
  s.node_voltages = c.size() ? solve_dense(y, rhs, "ac_solve") : Eigen::VectorXcd();
  const double jn = rhs.norm();
  s.residual = jn > 0.0 ? (y * s.node_voltages - rhs).norm() / jn : 0.0;
  return s;
}

}  // namespace detail

/// Small-signal phasor solution with every port terminated in its z0 and a
/// Thevenin source of peak amplitude `source_amplitude` behind `driven_port`.
inline AcSolution ac_solve(const Netlist& netlist, double f, int driven_port, cplx source_amplitude,
                           JunctionTreatment treatment = JunctionTreatment::LinearizedAtZero) {
  if (!(f > 0.0)) throw Error(ErrorCode::DomainError, "f", "frequency must be positive");
  return detail::ac_solve_compiled(compile(netlist, treatment), f, driven_port, source_amplitude);
}

struct SParams {
  cplx t21;
  cplx t12;
  cplx r11;
  cplx r22;
};

/// Wave ratios with a = (V + Z0 I)/(2 sqrt Z0), b = (V - Z0 I)/(2 sqrt Z0).
inline SParams small_signal_sparams(const Netlist& netlist, double f,
                                    JunctionTreatment treatment = JunctionTreatment::LinearizedAtZero) {
  if (netlist.ports.size() != 2) throw Error(ErrorCode::PortCount, std::to_string(netlist.ports.size()));
  const auto c = compile(netlist, treatment);
  const auto& p1 = netlist.ports[0];
  const auto& p2 = netlist.ports[1];
  const auto fwd = detail::ac_solve_compiled(c, f, 0, 1.0);
  const auto bwd = detail::ac_solve_compiled(c, f, 1, 1.0);
  // b_out / a_in with a_in = Vs/(2 sqrt Z_in), b_out = V_out / sqrt Z_out.
  const double k12 = 2.0 * std::sqrt(p1.z0 / p2.z0);
  const double k21 = 2.0 * std::sqrt(p2.z0 / p1.z0);
  SParams s;
  s.t21 = k12 * fwd.voltage(p2.node);
  s.r11 = 2.0 * fwd.voltage(p1.node) - 1.0;
  s.t12 = k21 * bwd.voltage(p1.node);
  s.r22 = 2.0 * bwd.voltage(p2.node) - 1.0;
  return s;
}

}  // namespace isosim

#endif  // ISOSIM_LINMAP_HPP
