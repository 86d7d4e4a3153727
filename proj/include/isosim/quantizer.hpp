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

// Exact charge-basis diagonalization of one or two capacitively coupled
// transmons:
//
//   H = sum_i 4 E_C,ii n_i^2 + 8 E_C,12 n_1 n_2 - sum_i E_J,i cos(phi_i)
//
// with E_C = (e^2/2) C^-1 and cos(phi) = (|n+1><n| + |n><n+1|)/2.

#ifndef ISOSIM_QUANTIZER_HPP
#define ISOSIM_QUANTIZER_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "isosim/constants.hpp"
#include "isosim/error.hpp"
#include "isosim/netlist.hpp"

namespace isosim {

struct TransmonSpec {
  double ej;  ///< J
  double cq;  ///< F

  static TransmonSpec from_lj(double lj, double cq) {
    if (!(lj > 0.0)) throw Error(ErrorCode::DomainError, "lj", "inductance must be positive");
    return {constants::phi0 * constants::phi0 / lj, cq};
  }
  /// Single-island charging energy e^2 / (2 C_Q).
  double ec_isolated() const { return constants::e * constants::e / (2.0 * cq); }
  /// Anharmonic shift |eta| = e^2 / (2 hbar C_Q), rad/s.
  double eta() const { return ec_isolated() / constants::hbar; }
  bool transmon_regime() const { return ej / ec_isolated() >= 20.0; }
};

struct CoupledSystem {
  std::vector<TransmonSpec> transmons;
  Eigen::MatrixXd c_matrix;  ///< Maxwell capacitance matrix over the islands
  int n_max = 12;
};

inline CoupledSystem single_transmon_system(double ej, double c, int n_max = 12) {
  CoupledSystem s;
  s.transmons = {{ej, c}};
  s.c_matrix = Eigen::MatrixXd::Constant(1, 1, c);
  s.n_max = n_max;
  return s;
}

/// Two islands with shunts cq1, cq2 bridged by the coupling capacitance cd.
inline CoupledSystem two_transmon_system(double cq1, double cq2, double cd, double lj1, double lj2, int n_max = 12) {
  CoupledSystem s;
  s.transmons = {TransmonSpec::from_lj(lj1, cq1), TransmonSpec::from_lj(lj2, cq2)};
  s.c_matrix.resize(2, 2);
  s.c_matrix << cq1 + cd, -cd, -cd, cq2 + cd;
  s.n_max = n_max;
  return s;
}

/// Two islands, each coupled through its own cd_i to a shared floating node
/// of capacitance c_node to ground. The node is eliminated (Kron reduction),
/// leaving an effective 2x2 island matrix.
inline CoupledSystem two_transmon_via_node(double cq1, double cq2, double cd1, double cd2, double c_node, double lj1,
                                           double lj2, int n_max = 12) {
  if (!(c_node > 0.0)) throw Error(ErrorCode::SingularCapacitanceMatrix, "c_node", "node capacitance must be positive");
  CoupledSystem s;
  s.transmons = {TransmonSpec::from_lj(lj1, cq1), TransmonSpec::from_lj(lj2, cq2)};
  const double c_ll = c_node + cd1 + cd2;
  s.c_matrix.resize(2, 2);
  s.c_matrix << cq1 + cd1 - cd1 * cd1 / c_ll, -cd1 * cd2 / c_ll, -cd1 * cd2 / c_ll, cq2 + cd2 - cd2 * cd2 / c_ll;
  s.n_max = n_max;
  return s;
}

enum class IslandCoupling {
  Bridged,         ///< C_D directly between the islands
  SharedLineNode,  ///< each C_D to a common node carrying the line capacitance
};

/// Two-mode model of the isolator at junction inductances lj1, lj2.
inline CoupledSystem isolator_system(const IsolatorParams& p, double lj1, double lj2, IslandCoupling coupling,
                                     int n_max = 12) {
  if (coupling == IslandCoupling::Bridged) return two_transmon_system(p.cq1(), p.cq2, p.cd, lj1, lj2, n_max);
  const double c_line = delay_from_detuning(p.delta, p.f_design, p.v_p).delay / p.z0;
  double cd1 = p.cd, cd2 = p.cd, c_node = c_line;
  if (p.placement == FanoPlacement::LineShunt) {
    c_node += p.c1 + p.c2;
  } else {
    if (p.c1 > 0.0) cd1 = p.cd * p.c1 / (p.cd + p.c1);
    if (p.c2 > 0.0) cd2 = p.cd * p.c2 / (p.cd + p.c2);
  }
  return two_transmon_via_node(p.cq1(), p.cq2, cd1, cd2, c_node, lj1, lj2, n_max);
}

/// E_C = (e^2/2) C^-1, in joules.
inline Eigen::MatrixXd charging_matrix(const Eigen::MatrixXd& c_matrix) {
  if (c_matrix.rows() != c_matrix.cols() || c_matrix.rows() == 0)
    throw Error(ErrorCode::SingularCapacitanceMatrix, "", "capacitance matrix must be square");
  if ((c_matrix - c_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * c_matrix.cwiseAbs().maxCoeff())
    throw Error(ErrorCode::SingularCapacitanceMatrix, "", "capacitance matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(c_matrix);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::SingularCapacitanceMatrix, "", "capacitance matrix is not positive definite");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(c_matrix.rows(), c_matrix.cols()));
  return 0.5 * constants::e * constants::e * inv;
}

inline constexpr int kMaxChargeCutoff = 40;

inline Eigen::MatrixXd build_hamiltonian(const CoupledSystem& system) {
  const int q = static_cast<int>(system.transmons.size());
  if (q < 1 || q > 2) throw Error(ErrorCode::DomainError, "transmons", "one or two transmons supported");
  if (system.c_matrix.rows() != q) throw Error(ErrorCode::SingularCapacitanceMatrix, "", "size mismatch");
  if (system.n_max < 5) throw Error(ErrorCode::DomainError, "n_max", "charge cutoff must be >= 5");
  if (system.n_max > kMaxChargeCutoff) throw Error(ErrorCode::DimensionOverflow, "n_max");

  const Eigen::MatrixXd ec = charging_matrix(system.c_matrix);
  const int m = 2 * system.n_max + 1;
  const int dim = q == 1 ? m : m * m;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  auto charge = [&](int idx) { return idx - system.n_max; };

  if (q == 1) {
    const double ej = system.transmons[0].ej;
    for (int i = 0; i < m; ++i) {
      const double n = charge(i);
      h(i, i) = 4.0 * ec(0, 0) * n * n;
      if (i + 1 < m) h(i, i + 1) = h(i + 1, i) = -0.5 * ej;
    }
    return h;
  }

  const double ej1 = system.transmons[0].ej;
  const double ej2 = system.transmons[1].ej;
  // Basis index i1 * m + i2.
  for (int i1 = 0; i1 < m; ++i1) {
    for (int i2 = 0; i2 < m; ++i2) {
      const int r = i1 * m + i2;
      const double n1 = charge(i1), n2 = charge(i2);
      h(r, r) = 4.0 * ec(0, 0) * n1 * n1 + 4.0 * ec(1, 1) * n2 * n2 + 8.0 * ec(0, 1) * n1 * n2;
      if (i1 + 1 < m) h(r, r + m) = h(r + m, r) = -0.5 * ej1;
      if (i2 + 1 < m) h(r, r + 1) = h(r + 1, r) = -0.5 * ej2;
    }
  }
  return h;
}

struct SpectrumResult {
  std::vector<double> eigenvalues;               ///< lowest levels, ascending, J
  std::vector<double> transition_frequencies;    ///< (E_k - E_0)/h, k = 1, 2
  double convergence_estimate = 0.0;             ///< Hz, shift under n_max -> n_max + 3
  double f01() const { return transition_frequencies.at(0); }
  double f02() const { return transition_frequencies.at(1); }
};

namespace detail {

inline std::vector<double> lowest_levels(const CoupledSystem& system, int count) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_hamiltonian(system), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  count = std::min<int>(count, static_cast<int>(ev.size()));
  return {ev.data(), ev.data() + count};
}

}  // namespace detail

inline constexpr int kReportedLevels = 6;

/// First two transition frequencies plus a truncation-convergence estimate.
inline SpectrumResult transitions(const CoupledSystem& system, bool estimate_convergence = true) {
  SpectrumResult r;
  r.eigenvalues = detail::lowest_levels(system, kReportedLevels);
  if (r.eigenvalues.size() < 3) throw Error(ErrorCode::DomainError, "n_max", "basis too small");
  for (int k = 1; k <= 2; ++k) r.transition_frequencies.push_back((r.eigenvalues[k] - r.eigenvalues[0]) / constants::h);
  if (estimate_convergence && system.n_max + 3 <= kMaxChargeCutoff) {
    CoupledSystem bigger = system;
    bigger.n_max += 3;
    const auto ev = detail::lowest_levels(bigger, 3);
    for (int k = 0; k < 3; ++k)
      r.convergence_estimate = std::max(r.convergence_estimate, std::abs(ev[k] - r.eigenvalues[k]) / constants::h);
  }
  return r;
}

/// E_J,i / E_C,ii with E_C from the full capacitance network.
inline double ej_ec_ratio(const CoupledSystem& system, int qubit_index) {
  const Eigen::MatrixXd ec = charging_matrix(system.c_matrix);
  return system.transmons.at(qubit_index).ej / ec(qubit_index, qubit_index);
}

struct BranchRow {
  double lj = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double gap = 0.0;
  double ej_over_ec = 0.0;
  int n_max = 0;
  double convergence = 0.0;
};

/// Sweeps the first junction's inductance with the second fixed at fixed_lj2.
/// `system_template` supplies the capacitance matrix, shunts and cutoff.
inline std::vector<BranchRow> sweep_lj(const CoupledSystem& system_template, const std::vector<double>& lj_values,
                                       double fixed_lj2, bool estimate_convergence = true) {
  if (system_template.transmons.size() != 2)
    throw Error(ErrorCode::DomainError, "transmons", "lj sweep needs two transmons");
  std::vector<BranchRow> rows;
  rows.reserve(lj_values.size());
  for (double lj : lj_values) {
    CoupledSystem s = system_template;
    s.transmons[0] = TransmonSpec::from_lj(lj, s.transmons[0].cq);
    s.transmons[1] = TransmonSpec::from_lj(fixed_lj2, s.transmons[1].cq);
    const auto sr = transitions(s, estimate_convergence);
    rows.push_back({lj, sr.f01(), sr.f02(), sr.f02() - sr.f01(), ej_ec_ratio(s, 0), s.n_max, sr.convergence_estimate});
  }
  return rows;
}

struct AvoidedCrossing {
  double lj_star;
  double gap;
};

/// Minimum of the branch separation, refined by a parabola through the
/// smallest sample and its neighbours.
inline AvoidedCrossing find_avoided_crossing(const std::vector<BranchRow>& rows) {
  if (rows.size() < 5) throw Error(ErrorCode::DomainError, "rows", "need at least 5 sweep points");
  const auto it = std::min_element(rows.begin(), rows.end(),
                                   [](const BranchRow& a, const BranchRow& b) { return a.gap < b.gap; });
  const auto i = static_cast<std::size_t>(it - rows.begin());
  if (i == 0 || i + 1 == rows.size())
    throw Error(ErrorCode::MinimumOnBoundary, num(it->lj), "gap minimum at a sweep endpoint");
  const double x0 = rows[i - 1].lj, x1 = rows[i].lj, x2 = rows[i + 1].lj;
  const double y0 = rows[i - 1].gap, y1 = rows[i].gap, y2 = rows[i + 1].gap;
  // Vertex of the interpolating parabola (divided differences).
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a > 0.0)) return {x1, y1};
  const double b = d01 - a * (x0 + x1);
  const double xs = std::clamp(-b / (2.0 * a), x0, x2);
  const double ys = y0 + d01 * (xs - x0) + a * (xs - x0) * (xs - x1);
  return {xs, ys};
}

}  // namespace isosim

#endif  // ISOSIM_QUANTIZER_HPP
