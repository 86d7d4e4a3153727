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

// Brute-force time-domain reference for the harmonic-balance solver.
//
// Trapezoidal companion models for R, C and series R-L branches, Bergeron
// (method of characteristics) models for lossless lines with the step
// adjusted so every line delay is an integer number of steps, and junctions
// integrated as dphi/dt = v/phi0 with i = Ic sin(phi). The linear part is
// factored once; each step solves only a small Newton problem in the
// junction phases through the precomputed Schur complement.

#ifndef ISOSIM_TRANSIENT_HPP
#define ISOSIM_TRANSIENT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "isosim/circuit.hpp"
#include "isosim/drive.hpp"
#include "isosim/hb.hpp"
#include "isosim/spectrum.hpp"

namespace isosim {

struct TransientConfig {
  double dt = 0.0;  ///< requested step; 0 means 1/(400 f0). Shrunk to divide line delays.
  int n_periods = 20200;
  int settle_periods = 20000;
  bool line_characteristics = true;  ///< false: lines are rejected
  double ramp_periods = 0.0;         ///< raised-cosine amplitude ramp at the start
  int record_from_period = -1;       ///< -1: record from settle_periods
  double step_tol = 1e-12;
  int max_step_iterations = 50;
};

struct Waveforms {
  double f0 = 0.0;
  double dt = 0.0;
  std::size_t first_step = 0;  ///< step index of the first recorded sample
  std::size_t total_steps = 0;
  int settle_periods = 0;
  int n_periods = 0;
  std::vector<double> time;
  std::map<std::string, int> node_index;
  std::vector<std::string> node_names;
  std::vector<std::vector<double>> node_voltages;  ///< [node][sample]
  std::vector<std::string> junction_names;
  std::vector<std::vector<double>> junction_phases;  ///< [junction][sample]
  std::vector<double> source_voltage;               ///< Thevenin source samples

  const std::vector<double>& node(const std::string& name) const { return node_voltages.at(node_index.at(name)); }
};

namespace detail {

/// Largest step <= dt_max that divides every delay into an integer count.
inline double compatible_step(double dt_max, const std::vector<CompiledCircuit::Line>& lines) {
  if (lines.empty()) return dt_max;
  double dt = dt_max;
  for (int pass = 0; pass < 8; ++pass) {
    bool ok = true;
    for (const auto& l : lines) {
      const double m = std::ceil(l.delay / dt - 1e-9);
      const double cand = l.delay / m;
      if (std::abs(cand - dt) > 1e-12 * dt) ok = false;
      dt = std::min(dt, cand);
    }
    if (ok) break;
  }
  for (const auto& l : lines) {
    const double m = l.delay / dt;
    if (std::abs(m - std::round(m)) > 1e-6)
      throw Error(ErrorCode::StepSizeIncompatibleWithDelay, l.name, "no common step divides all line delays");
  }
  return dt;
}

}  // namespace detail

inline Waveforms transient_solve(const Netlist& netlist, const DriveSpec& drive, const TransientConfig& config) {
  const double f0 = drive.f0;
  if (!(f0 > 0.0)) throw Error(ErrorCode::DomainError, "f0", "drive frequency must be positive");
  if (!(config.n_periods > config.settle_periods && config.settle_periods >= 10))
    throw Error(ErrorCode::DomainError, "n_periods", "need n_periods > settle_periods >= 10");
  const double dt_req = config.dt > 0.0 ? config.dt : 1.0 / (400.0 * f0);
  if (dt_req > 1.0 / (200.0 * f0)) throw Error(ErrorCode::DomainError, "dt", "need dt <= 1/(200 f0)");

  const CompiledCircuit c = compile(netlist, JunctionTreatment::Nonlinear);
  if (!c.lines.empty() && !config.line_characteristics)
    throw Error(ErrorCode::DomainError, "line_model", "netlist has lines but no line model");
  const double dt = detail::compatible_step(dt_req, c.lines);
  const int n = c.size();
  const int m = static_cast<int>(c.junctions.size());
  const double z0_drive = c.ports.at(drive.port).z0;
  const double vs_amp = drive.source_amplitude(z0_drive);
  const double w = 2.0 * constants::pi * f0;

  // Constant conductance matrix.
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  auto stamp_g = [&](int a, int b, double val) {
    if (a >= 0) g(a, a) += val;
    if (b >= 0) g(b, b) += val;
    if (a >= 0 && b >= 0) {
      g(a, b) -= val;
      g(b, a) -= val;
    }
  };
  for (const auto& r : c.resistors) stamp_g(r.a, r.b, 1.0 / r.value);
  for (const auto& cap : c.capacitors) stamp_g(cap.a, cap.b, 2.0 * cap.value / dt);
  std::vector<double> rl_a(c.series_rl.size()), rl_b(c.series_rl.size());
  for (std::size_t i = 0; i < c.series_rl.size(); ++i) {
    rl_a[i] = c.series_rl[i].r / 2.0 + c.series_rl[i].l / dt;
    rl_b[i] = c.series_rl[i].r / 2.0 - c.series_rl[i].l / dt;
    stamp_g(c.series_rl[i].a, c.series_rl[i].b, 1.0 / (2.0 * rl_a[i]));
  }
  for (const auto& l : c.lines) {
    if (l.a >= 0) g(l.a, l.a) += 1.0 / l.z0;
    if (l.b >= 0) g(l.b, l.b) += 1.0 / l.z0;
  }
  for (const auto& p : c.ports)
    if (p.node >= 0) g(p.node, p.node) += 1.0 / p.z0;

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(g);
  if (!(lu.rcond() > 1e-15)) throw Error(ErrorCode::SingularMatrix, "transient", "conductance matrix is singular");

  // Schur data for the junction currents.
  Eigen::MatrixXd z(n, m), wmat(m, m);
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    if (c.junctions[j].p >= 0) e(c.junctions[j].p) += 1.0;
    if (c.junctions[j].n >= 0) e(c.junctions[j].n) -= 1.0;
    z.col(j) = lu.solve(e);
  }
  auto across = [&](const Eigen::VectorXd& v, int a, int b) {
    return (a >= 0 ? v(a) : 0.0) - (b >= 0 ? v(b) : 0.0);
  };
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) wmat(j, k) = across(z.col(k), c.junctions[j].p, c.junctions[j].n);

  // State.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  std::vector<double> i_cap(c.capacitors.size(), 0.0), v_cap(c.capacitors.size(), 0.0);
  std::vector<double> i_rl(c.series_rl.size(), 0.0), v_rl(c.series_rl.size(), 0.0);
  std::vector<double> phi(m, 0.0), u_j(m, 0.0);
  struct LineState {
    std::vector<double> wave_a, wave_b;  ///< v/Z0 + i at each end, ring buffers
    std::size_t delay_steps;
  };
  std::vector<LineState> lines;
  for (const auto& l : c.lines) {
    const auto steps = static_cast<std::size_t>(std::llround(l.delay / dt));
    lines.push_back({std::vector<double>(steps, 0.0), std::vector<double>(steps, 0.0), steps});
  }

  const auto steps_per_period = 1.0 / (f0 * dt);
  const auto total = static_cast<std::size_t>(std::llround(config.n_periods * steps_per_period));
  const int rec_period = config.record_from_period >= 0 ? config.record_from_period : config.settle_periods;
  const auto first = static_cast<std::size_t>(std::llround(rec_period * steps_per_period));

  Waveforms out;
  out.f0 = f0;
  out.dt = dt;
  out.first_step = first;
  out.total_steps = total;
  out.settle_periods = config.settle_periods;
  out.n_periods = config.n_periods;
  out.node_index = c.node_index;
  out.node_names = c.node_names;
  const std::size_t rec = total > first ? total - first : 0;
  out.time.reserve(rec);
  out.node_voltages.assign(n, {});
  for (auto& nv : out.node_voltages) nv.reserve(rec);
  out.junction_phases.assign(m, {});
  for (auto& jp : out.junction_phases) jp.reserve(rec);
  for (const auto& jj : c.junctions) out.junction_names.push_back(jj.name);
  out.source_voltage.reserve(rec);

  const double ramp_t = config.ramp_periods / f0;
  Eigen::VectorXd rhs(n), vlin(n);
  Eigen::VectorXd fj(m), phin(m);
  Eigen::MatrixXd jac(m, m);
  const double kphi = dt / (2.0 * constants::phi0);

  for (std::size_t s = 1; s <= total; ++s) {
    const double t = static_cast<double>(s) * dt;
    double env = 1.0;
    if (t < ramp_t) env = 0.5 * (1.0 - std::cos(constants::pi * t / ramp_t));
    const double vs = env * vs_amp * std::cos(w * t);

    rhs.setZero();
    auto inject = [&](int a, int b, double i) {  // current i flowing a -> b through the branch
      if (a >= 0) rhs(a) -= i;
      if (b >= 0) rhs(b) += i;
    };
    for (std::size_t i = 0; i < c.capacitors.size(); ++i) {
      const auto& cap = c.capacitors[i];
      const double geq = 2.0 * cap.value / dt;
      inject(cap.a, cap.b, -geq * v_cap[i] - i_cap[i]);
    }
    for (std::size_t i = 0; i < c.series_rl.size(); ++i) {
      const auto& rl = c.series_rl[i];
      inject(rl.a, rl.b, v_rl[i] / (2.0 * rl_a[i]) - (rl_b[i] / rl_a[i]) * i_rl[i]);
    }
    for (std::size_t i = 0; i < c.lines.size(); ++i) {
      const auto& l = c.lines[i];
      auto& st = lines[i];
      const std::size_t slot = s % st.delay_steps;
      // i_a = v_a/Z0 - h_a, h_a = wave_b(t - tau).
      if (l.a >= 0) rhs(l.a) += st.wave_b[slot];
      if (l.b >= 0) rhs(l.b) += st.wave_a[slot];
    }
    const auto& port = c.ports[drive.port];
    if (port.node >= 0) rhs(port.node) += vs / port.z0;

    vlin = lu.solve(rhs);

    // Junction phases: (phi - phi_n) 2 phi0/dt - u_n = u_lin - W Ic sin(phi).
    for (int j = 0; j < m; ++j) phin(j) = phi[j];
    Eigen::VectorXd ulin(m);
    for (int j = 0; j < m; ++j) ulin(j) = across(vlin, c.junctions[j].p, c.junctions[j].n);
    Eigen::VectorXd ph = phin;
    for (int j = 0; j < m; ++j) ph(j) += kphi * (2.0 * u_j[j]);  // explicit predictor
    bool converged = m == 0;
    for (int it = 0; it < config.max_step_iterations && !converged; ++it) {
      for (int j = 0; j < m; ++j) {
        double sum = 0.0;
        for (int k = 0; k < m; ++k) sum += wmat(j, k) * c.junctions[k].ic * std::sin(ph(k));
        fj(j) = (ph(j) - phin(j)) / kphi - u_j[j] - ulin(j) + sum;
        for (int k = 0; k < m; ++k) jac(j, k) = wmat(j, k) * c.junctions[k].ic * std::cos(ph(k));
        jac(j, j) += 1.0 / kphi;
      }
      const Eigen::VectorXd dph = jac.partialPivLu().solve(-fj);
      ph += dph;
      converged = dph.lpNorm<Eigen::Infinity>() <= config.step_tol * std::max(1.0, ph.lpNorm<Eigen::Infinity>());
    }
    if (!converged) throw Error(ErrorCode::NonConvergentStep, num(t), "junction update did not converge");

    v = vlin;
    for (int j = 0; j < m; ++j) v -= z.col(j) * (c.junctions[j].ic * std::sin(ph(j)));

    // Branch state updates.
    for (std::size_t i = 0; i < c.capacitors.size(); ++i) {
      const auto& cap = c.capacitors[i];
      const double geq = 2.0 * cap.value / dt;
      const double dv_new = across(v, cap.a, cap.b);
      i_cap[i] = geq * (dv_new - v_cap[i]) - i_cap[i];
      v_cap[i] = dv_new;
    }
    for (std::size_t i = 0; i < c.series_rl.size(); ++i) {
      const auto& rl = c.series_rl[i];
      const double dv_new = across(v, rl.a, rl.b);
      i_rl[i] = (dv_new + v_rl[i]) / (2.0 * rl_a[i]) - (rl_b[i] / rl_a[i]) * i_rl[i];
      v_rl[i] = dv_new;
    }
    for (std::size_t i = 0; i < c.lines.size(); ++i) {
      const auto& l = c.lines[i];
      auto& st = lines[i];
      const std::size_t slot = s % st.delay_steps;
      const double va = l.a >= 0 ? v(l.a) : 0.0;
      const double vb = l.b >= 0 ? v(l.b) : 0.0;
      const double ia = va / l.z0 - st.wave_b[slot];
      const double ib = vb / l.z0 - st.wave_a[slot];
      // Overwrites the value consumed this step; it is read again delay_steps later.
      st.wave_a[slot] = va / l.z0 + ia;
      st.wave_b[slot] = vb / l.z0 + ib;
    }
    for (int j = 0; j < m; ++j) {
      phi[j] = ph(j);
      u_j[j] = across(v, c.junctions[j].p, c.junctions[j].n);
    }
    if (s >= first) {
      out.time.push_back(t);
      for (int i = 0; i < n; ++i) out.node_voltages[i].push_back(v(i));
      for (int j = 0; j < m; ++j) out.junction_phases[j].push_back(phi[j]);
      out.source_voltage.push_back(vs);
    }
  }
  return out;
}

struct TransientHarmonics {
  HarmonicBasis basis;
  std::vector<std::string> node_names;
  std::map<std::string, int> node_index;
  std::vector<Spectrum> nodes;
  std::vector<Spectrum> junction_phases;
  double steadiness = 0.0;  ///< relative change of the fundamental between window halves

  Spectrum node(const std::string& name) const {
    if (name == kGround) return Spectrum(basis);
    const int row = node_index.at(name);
    return row < 0 ? Spectrum(basis) : nodes[row];
  }
};

namespace detail {

/// Least-squares fit of harmonics 0..K to samples [begin, end) of each trace.
inline std::vector<Spectrum> fit_harmonics(const Waveforms& w, const HarmonicBasis& basis,
                                           const std::vector<const std::vector<double>*>& traces, std::size_t begin,
                                           std::size_t end) {
  const int nb = 2 * basis.K + 1;
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nb, static_cast<Eigen::Index>(traces.size()));
  Eigen::VectorXd row(nb);
  for (std::size_t i = begin; i < end; ++i) {
    const double t = w.time[i];
    row(0) = 1.0;
    for (int k = 1; k <= basis.K; ++k) {
      row(2 * k - 1) = std::cos(basis.omega(k) * t);
      row(2 * k) = std::sin(basis.omega(k) * t);
    }
    gram.selfadjointView<Eigen::Lower>().rankUpdate(row);
    for (std::size_t tr = 0; tr < traces.size(); ++tr) rhs.col(static_cast<Eigen::Index>(tr)) += row * (*traces[tr])[i];
  }
  const Eigen::MatrixXd full = gram.selfadjointView<Eigen::Lower>();
  const Eigen::MatrixXd coef = full.ldlt().solve(rhs);
  std::vector<Spectrum> out;
  for (std::size_t tr = 0; tr < traces.size(); ++tr) {
    Spectrum s(basis);
    const auto col = coef.col(static_cast<Eigen::Index>(tr));
    s[0] = col(0);
    for (int k = 1; k <= basis.K; ++k) s[k] = {col(2 * k - 1), -col(2 * k)};
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace detail

/// Harmonics 0..K over the analysis window (samples after settle_periods).
/// Throws NotSettled when the fundamental drifts by more than settle_tol
/// between the two halves of the window.
inline TransientHarmonics steady_state_harmonics(const Waveforms& w, int K = 8, double settle_tol = 1e-5) {
  TransientHarmonics out;
  out.basis = {w.f0, K, 4 * (2 * K + 1)};
  out.node_names = w.node_names;
  out.node_index = w.node_index;
  const auto settle_step = static_cast<std::size_t>(std::llround(w.settle_periods / (w.f0 * w.dt)));
  const std::size_t begin = settle_step > w.first_step ? settle_step - w.first_step : 0;
  const std::size_t end = w.time.size();
  if (end <= begin + 4 * static_cast<std::size_t>(2 * K + 1))
    throw Error(ErrorCode::DomainError, "window", "analysis window too short");

  std::vector<const std::vector<double>*> traces;
  for (const auto& v : w.node_voltages) traces.push_back(&v);
  for (const auto& p : w.junction_phases) traces.push_back(&p);
  const auto all = detail::fit_harmonics(w, out.basis, traces, begin, end);
  const std::size_t nn = w.node_voltages.size();
  out.nodes.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(nn));
  out.junction_phases.assign(all.begin() + static_cast<std::ptrdiff_t>(nn), all.end());

  const std::size_t mid = begin + (end - begin) / 2;
  std::vector<const std::vector<double>*> node_traces(traces.begin(), traces.begin() + static_cast<std::ptrdiff_t>(nn));
  const auto first = detail::fit_harmonics(w, out.basis, node_traces, begin, mid);
  const auto second = detail::fit_harmonics(w, out.basis, node_traces, mid, end);
  double scale = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < nn; ++i) {
    scale = std::max(scale, std::abs(out.nodes[i][1]));
    drift = std::max(drift, std::abs(first[i][1] - second[i][1]));
  }
  out.steadiness = scale > 0.0 ? drift / scale : 0.0;
  if (out.steadiness > settle_tol)
    throw Error(ErrorCode::NotSettled, num(out.steadiness), "extend n_periods");
  return out;
}

struct HbTransientComparison {
  double rel_diff_fundamental = 0.0;       ///< max over nodes |dV_1| / max |V_1|
  std::vector<double> per_harmonic_diffs;  ///< k = 0..K, same normalization
  std::complex<double> t_hb;
  std::complex<double> t_transient;
  double rel_diff_t = 0.0;  ///< | |t_hb| - |t_tr| | / |t_hb|
  double steadiness = 0.0;
  int hb_iterations = 0;
};

/// HB and transient steady states for the same drive, compared harmonic by
/// harmonic on every node. The transmission is measured at the port other
/// than the driven one.
inline HbTransientComparison compare_hb_transient(const Netlist& netlist, const DriveSpec& drive,
                                                  const HbOptions& hb_options = {},
                                                  const TransientConfig& config = {}) {
  const auto hb = solve_hb(netlist, drive.f0, drive.port, drive.power_dbm, hb_options);
  const auto wave = transient_solve(netlist, drive, config);
  const auto tr = steady_state_harmonics(wave, hb_options.K);

  HbTransientComparison out;
  out.steadiness = tr.steadiness;
  out.hb_iterations = hb.iterations;
  out.per_harmonic_diffs.assign(hb_options.K + 1, 0.0);
  double scale = 0.0;
  for (const auto& name : wave.node_names) scale = std::max(scale, std::abs(hb.node(name)[1]));
  for (const auto& name : wave.node_names) {
    const auto a = hb.node(name), b = tr.node(name);
    for (int k = 0; k <= hb_options.K; ++k)
      out.per_harmonic_diffs[k] = std::max(out.per_harmonic_diffs[k], std::abs(a[k] - b[k]));
  }
  for (auto& d : out.per_harmonic_diffs) d = scale > 0.0 ? d / scale : d;
  out.rel_diff_fundamental = out.per_harmonic_diffs.at(1);

  const auto& in = netlist.ports.at(drive.port);
  const auto& other = netlist.ports.at(drive.port == 0 ? 1 : 0);
  const double vs = drive.source_amplitude(in.z0);
  if (vs > 0.0) {
    out.t_hb = wave_transmission(hb.node(other.node)[1], vs, in.z0, other.z0);
    out.t_transient = wave_transmission(tr.node(other.node)[1], vs, in.z0, other.z0);
    out.rel_diff_t = std::abs(std::abs(out.t_hb) - std::abs(out.t_transient)) / std::abs(out.t_hb);
  }
  return out;
}

/// CSV dump: time_s, one column per node voltage, one per junction phase.
inline void write_waveforms_csv(std::ostream& os, const Waveforms& w) {
  os << "time_s";
  for (const auto& n : w.node_names) os << ",v_" << n;
  for (const auto& j : w.junction_names) os << ",phi_" << j;
  os << "\n";
  char buf[64];
  for (std::size_t i = 0; i < w.time.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12e", w.time[i]);
    os << buf;
    for (const auto& v : w.node_voltages) {
      std::snprintf(buf, sizeof buf, ",%.12e", v[i]);
      os << buf;
    }
    for (const auto& p : w.junction_phases) {
      std::snprintf(buf, sizeof buf, ",%.12e", p[i]);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace isosim

#endif  // ISOSIM_TRANSIENT_HPP
