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

// Single-tone harmonic balance for circuits with Josephson junctions.
//
// Unknowns are node-voltage harmonics V_k (k = 0..K) and one DC phase per
// junction. Each junction is a current source Ic sin(phi) whose phase follows
// from its voltage, dphi/dt = v / phi0, so phi_k = V_k / (j k w phi0) for
// k >= 1 and phi_0 is the extra DC unknown. The nonlinearity is evaluated on
// N time samples per period and projected back onto the K harmonics.
//
// Real unknown vector layout:
//   [ V_0 (n) | I_short (s) | phi_dc (m) | Re V_1, Im V_1 | ... | Re V_K, Im V_K ]
// where shorts are the DC branches of inductors and lines (MNA currents).
// Voltages are carried in units of v_scale, short currents in i_scale. KCL
// rows are divided by max(|Y_row| v_scale, i_scale).

#ifndef ISOSIM_HB_HPP
#define ISOSIM_HB_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isosim/circuit.hpp"
#include "isosim/drive.hpp"
#include "isosim/linmap.hpp"
#include "isosim/spectrum.hpp"

namespace isosim {

/// phi_k = V_k / (j k w phi0) for k >= 1, phi_0 = phi_dc.
inline Spectrum phase_from_voltage(const Spectrum& v, double phi_dc) {
  Spectrum phi(v.basis);
  phi[0] = phi_dc;
  const std::complex<double> j(0.0, 1.0);
  for (int k = 1; k <= v.basis.K; ++k) phi[k] = v[k] / (j * v.basis.omega(k) * constants::phi0);
  return phi;
}

/// Harmonics of Ic sin(phi(t)) evaluated on the basis' time grid.
inline Spectrum junction_current(const Spectrum& phase, double ic) {
  auto x = phase.samples();
  for (auto& s : x) s = ic * std::sin(s);
  return Spectrum::from_samples(phase.basis, x);
}

struct HbOptions {
  int K = 8;
  int N = 128;
  double tol = 1e-9;
  int max_iterations = 50;
  double continuation_span_db = 40.0;
  double continuation_step_db = 2.0;
  double min_step_db = 1.0 / 64.0;
  double v_scale = 1e-6;
  double i_scale = 1e-9;
  bool check_multistability = false;
};

struct HbSolution {
  HarmonicBasis basis;
  std::map<std::string, int> node_index;
  std::vector<std::string> node_names;
  std::vector<Spectrum> node_spectra;
  std::vector<std::string> junction_names;
  std::vector<double> junction_ic;
  std::vector<double> junction_phi_dc;
  std::vector<Spectrum> junction_phase_spectra;
  int iterations = 0;
  double residual_norm = 0.0;
  std::vector<std::pair<double, int>> continuation_trace;  ///< (power dBm, Newton iterations)
  Eigen::VectorXd state;

  int folds_traversed = 0;
  bool multistability_checked = false;
  bool bistable = false;
  double warm_fundamental = 0.0;  ///< ||V_1|| over port nodes, continuation branch
  double cold_fundamental = std::numeric_limits<double>::quiet_NaN();

  Spectrum node(const std::string& name) const {
    if (name == kGround) return Spectrum(basis);
    const int row = node_index.at(name);
    return row < 0 ? Spectrum(basis) : node_spectra[row];
  }

  std::size_t junction(const std::string& name) const {
    for (std::size_t i = 0; i < junction_names.size(); ++i)
      if (junction_names[i] == name) return i;
    throw Error(ErrorCode::UnknownNode, name, "no such junction");
  }
};

class HarmonicBalance {
 public:
  HarmonicBalance(const Netlist& netlist, double f0, HbOptions options = {})
      : circuit_(compile(netlist, JunctionTreatment::Nonlinear)), options_(options) {
    basis_ = {f0, options.K, options.N};
    basis_.check();
    n_ = circuit_.size();
    shorts_ = static_cast<int>(circuit_.series_rl.size() + circuit_.lines.size());
    m_ = static_cast<int>(circuit_.junctions.size());
    dc_size_ = n_ + shorts_ + m_;
    build_linear_blocks();
    build_tables();
  }

  const HarmonicBasis& basis() const { return basis_; }
  const CompiledCircuit& circuit() const { return circuit_; }
  const HbOptions& options() const { return options_; }
  int size() const { return dc_size_ + 2 * n_ * basis_.K; }
  int node_count() const { return n_; }
  double row_scale(int row) const { return row_scale_[row]; }
  /// Terminated linear admittance at harmonic k >= 1.
  const Eigen::MatrixXcd& admittance_block(int k) const { return y_[k - 1]; }

  int re_index(int node, int k) const { return dc_size_ + 2 * n_ * (k - 1) + node; }
  int im_index(int node, int k) const { return re_index(node, k) + n_; }
  int phi_dc_index(int junction) const { return n_ + shorts_ + junction; }

  /// Node voltage harmonic in volts.
  std::complex<double> voltage(const Eigen::VectorXd& x, int node, int k) const {
    if (node < 0) return 0.0;
    if (k == 0) return x(node) * options_.v_scale;
    return {x(re_index(node, k)) * options_.v_scale, x(im_index(node, k)) * options_.v_scale};
  }

  /// Norton current injected at the driven port for a source of peak `vs`.
  std::complex<double> drive_current(int port, double vs) const { return vs / circuit_.ports.at(port).z0; }

  Spectrum junction_voltage(const Eigen::VectorXd& x, int j) const {
    const auto& jj = circuit_.junctions[j];
    Spectrum v(basis_);
    for (int k = 0; k <= basis_.K; ++k) v[k] = voltage(x, jj.p, k) - voltage(x, jj.n, k);
    v[0] = v[0].real();
    return v;
  }

  Spectrum junction_phase(const Eigen::VectorXd& x, int j) const {
    return phase_from_voltage(junction_voltage(x, j), x(phi_dc_index(j)));
  }

  Eigen::VectorXd residual(const Eigen::VectorXd& x, int driven_port, double vs) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(size());
    const double vsc = options_.v_scale;
    const double isc = options_.i_scale;

    // DC block, accumulated in amps (KCL) or volts (constraints).
    for (const auto& r : circuit_.resistors) {
      const double i = (dc_v(x, r.a) - dc_v(x, r.b)) / r.value;
      add_kcl(f, r.a, r.b, i);
    }
    for (int s = 0; s < shorts_; ++s) {
      const auto [a, b, rs] = short_branch(s);
      const double i = x(n_ + s) * isc;
      add_kcl(f, a, b, i);
      f(n_ + s) = dc_v(x, a) - dc_v(x, b) - rs * i;
    }
    for (const auto& p : circuit_.ports)
      if (p.node >= 0) f(p.node) += dc_v(x, p.node) / p.z0;

    std::vector<std::complex<double>> current(basis_.K + 1);
    for (int j = 0; j < m_; ++j) {
      junction_harmonics(x, j, current, nullptr);
      const auto& jj = circuit_.junctions[j];
      add_kcl(f, jj.p, jj.n, current[0].real());
      f(phi_dc_index(j)) = dc_v(x, jj.p) - dc_v(x, jj.n);
      for (int k = 1; k <= basis_.K; ++k) add_kcl_k(f, jj.p, jj.n, k, current[k]);
    }
    for (int i = 0; i < n_; ++i) {
      if (dc_pinned_[i]) f(i) = x(i) * vsc;
      f(i) /= row_scale_[i];
    }
    for (int i = n_; i < dc_size_; ++i) f(i) /= vsc;

    // Harmonic blocks: Y_k V_k + I_NL,k - J_k.
    for (int k = 1; k <= basis_.K; ++k) {
      Eigen::VectorXcd v(n_);
      for (int i = 0; i < n_; ++i) v(i) = {x(re_index(i, k)), x(im_index(i, k))};
      Eigen::VectorXcd yv = y_[k - 1] * v * vsc;
      if (k == 1) {
        const auto& port = circuit_.ports.at(driven_port);
        if (port.node >= 0) yv(port.node) -= drive_current(driven_port, vs);
      }
      for (int i = 0; i < n_; ++i) {
        f(re_index(i, k)) = (f(re_index(i, k)) + yv(i).real()) / row_scale_[re_index(i, k)];
        f(im_index(i, k)) = (f(im_index(i, k)) + yv(i).imag()) / row_scale_[im_index(i, k)];
      }
    }
    return f;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(size(), size());
    const double vsc = options_.v_scale;
    const double isc = options_.i_scale;

    // Linear DC part; units d(amps)/d(x) before row scaling.
    auto dc_add = [&](int row, int col, double val) {
      if (row >= 0 && col >= 0) jac(row, col) += val;
    };
    for (const auto& r : circuit_.resistors) {
      const double g = vsc / r.value;
      dc_add(r.a, r.a, g);
      dc_add(r.b, r.b, g);
      dc_add(r.a, r.b, -g);
      dc_add(r.b, r.a, -g);
    }
    for (int s = 0; s < shorts_; ++s) {
      const auto [a, b, rs] = short_branch(s);
      dc_add(a, n_ + s, isc);
      dc_add(b, n_ + s, -isc);
      dc_add(n_ + s, a, vsc);
      dc_add(n_ + s, b, -vsc);
      jac(n_ + s, n_ + s) -= rs * isc;
    }
    for (const auto& p : circuit_.ports)
      if (p.node >= 0) jac(p.node, p.node) += vsc / p.z0;

    for (int k = 1; k <= basis_.K; ++k) {
      const auto& y = y_[k - 1];
      for (int r = 0; r < n_; ++r)
        for (int c = 0; c < n_; ++c) {
          const auto a = y(r, c) * vsc;
          jac(re_index(r, k), re_index(c, k)) += a.real();
          jac(re_index(r, k), im_index(c, k)) -= a.imag();
          jac(im_index(r, k), re_index(c, k)) += a.imag();
          jac(im_index(r, k), im_index(c, k)) += a.real();
        }
    }

    std::vector<std::complex<double>> current(basis_.K + 1);
    std::vector<std::complex<double>> g(2 * basis_.K + 1);
    const std::complex<double> jay(0.0, 1.0);
    for (int j = 0; j < m_; ++j) {
      junction_harmonics(x, j, current, &g);
      const auto& jj = circuit_.junctions[j];
      const int pd = phi_dc_index(j);
      dc_add(pd, jj.p, vsc);
      dc_add(pd, jj.n, -vsc);
      auto gm = [&](int m) { return m >= 0 ? g[m] : std::conj(g[-m]); };

      // Output harmonic k, input phase harmonic l: dI_k = A dPhi_l + B conj(dPhi_l).
      for (int k = 0; k <= basis_.K; ++k) {
        const std::complex<double> d_phidc = (k == 0) ? g[0] : 2.0 * g[k];
        add_junction_entry(jac, jj, k, pd, d_phidc, 1.0);
        for (int l = 1; l <= basis_.K; ++l) {
          std::complex<double> a, b;
          if (k == 0) {
            a = 0.5 * gm(-l);
            b = 0.5 * gm(l);
          } else {
            a = gm(k - l);
            b = gm(k + l);
          }
          const std::complex<double> c = 1.0 / (jay * basis_.omega(l) * constants::phi0);
          const std::complex<double> d_re = (a * c + b * std::conj(c)) * vsc;
          const std::complex<double> d_im = jay * (a * c - b * std::conj(c)) * vsc;
          for (const auto& [node, sign] : {std::pair{jj.p, 1.0}, std::pair{jj.n, -1.0}}) {
            if (node < 0) continue;
            add_junction_entry(jac, jj, k, re_index(node, l), d_re, sign);
            add_junction_entry(jac, jj, k, im_index(node, l), d_im, sign);
          }
        }
      }
    }

    for (int i = 0; i < n_; ++i) {
      if (dc_pinned_[i]) {
        jac.row(i).setZero();
        jac(i, i) = vsc;
      }
    }
    for (int r = 0; r < size(); ++r) {
      const double s = (r >= n_ && r < dc_size_) ? vsc : row_scale_[r];
      jac.row(r) /= s;
    }
    return jac;
  }

  /// Harmonic-1 solution with every junction replaced by L_J0; DC and higher
  /// harmonics zero.
  Eigen::VectorXd initial_guess(int driven_port, double vs) const {
    Eigen::MatrixXcd y = y_[0];
    const std::complex<double> jay(0.0, 1.0);
    for (const auto& jj : circuit_.junctions)
      detail::stamp_branch(y, jj.p, jj.n, 1.0 / (jay * basis_.omega(1) * lj0_from_ic(jj.ic)));
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n_);
    const auto& port = circuit_.ports.at(driven_port);
    if (port.node >= 0) rhs(port.node) = drive_current(driven_port, vs);
    const Eigen::VectorXcd v = detail::solve_dense(y, rhs, "hb initial guess");
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
    for (int i = 0; i < n_; ++i) {
      x(re_index(i, 1)) = v(i).real() / options_.v_scale;
      x(im_index(i, 1)) = v(i).imag() / options_.v_scale;
    }
    return x;
  }

  struct NewtonResult {
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
  };

  /// Damped Newton with backtracking on ||F||_2; converged when ||F||_inf < tol.
  NewtonResult newton(Eigen::VectorXd& x, int driven_port, double vs) const {
    NewtonResult res;
    Eigen::VectorXd f = residual(x, driven_port, vs);
    res.residual = f.lpNorm<Eigen::Infinity>();
    while (res.residual >= options_.tol && res.iterations < options_.max_iterations) {
      ++res.iterations;
      const Eigen::MatrixXd jac = jacobian(x);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
      const Eigen::VectorXd dx = lu.solve(-f);
      if (!dx.allFinite()) return res;
      const double f2 = f.squaredNorm();
      double lambda = 1.0;
      bool accepted = false;
      while (lambda >= 1.0 / 1024.0) {
        Eigen::VectorXd xt = x + lambda * dx;
        Eigen::VectorXd ft = residual(xt, driven_port, vs);
        if (ft.allFinite() && ft.squaredNorm() < (1.0 - 1e-4 * lambda) * f2) {
          x = std::move(xt);
          f = std::move(ft);
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (!accepted) return res;
      res.residual = f.lpNorm<Eigen::Infinity>();
    }
    res.converged = res.residual < options_.tol && on_physical_branch(x);
    if (res.converged) polish(x, f, driven_port, vs, res);
    return res;
  }

  /// dF/d(vs): the drive enters only the harmonic-1 KCL row of the port.
  Eigen::VectorXd drive_sensitivity(int driven_port, double /*vs*/) const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(size());
    const auto& port = circuit_.ports.at(driven_port);
    if (port.node >= 0) d(re_index(port.node, 1)) = -1.0 / port.z0 / row_scale_[re_index(port.node, 1)];
    return d;
  }

  bool on_physical_branch(const Eigen::VectorXd& x) const {
    for (int j = 0; j < m_; ++j)
      if (!(std::abs(x(phi_dc_index(j))) < constants::pi / 2.0)) return false;
    return true;
  }

  HbSolution make_solution(const Eigen::VectorXd& x) const {
    HbSolution s;
    s.basis = basis_;
    s.node_index = circuit_.node_index;
    s.node_names = circuit_.node_names;
    for (int i = 0; i < n_; ++i) {
      Spectrum sp(basis_);
      for (int k = 0; k <= basis_.K; ++k) sp[k] = voltage(x, i, k);
      s.node_spectra.push_back(std::move(sp));
    }
    for (int j = 0; j < m_; ++j) {
      s.junction_names.push_back(circuit_.junctions[j].name);
      s.junction_ic.push_back(circuit_.junctions[j].ic);
      s.junction_phi_dc.push_back(x(phi_dc_index(j)));
      s.junction_phase_spectra.push_back(junction_phase(x, j));
    }
    s.state = x;
    return s;
  }

  double port_fundamental_norm(const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (const auto& p : circuit_.ports) acc += std::norm(voltage(x, p.node, 1));
    return std::sqrt(acc);
  }

 private:
  double dc_v(const Eigen::VectorXd& x, int node) const { return node < 0 ? 0.0 : x(node) * options_.v_scale; }

  static void add_kcl(Eigen::VectorXd& f, int a, int b, double i) {
    if (a >= 0) f(a) += i;
    if (b >= 0) f(b) -= i;
  }

  void add_kcl_k(Eigen::VectorXd& f, int a, int b, int k, std::complex<double> i) const {
    if (a >= 0) {
      f(re_index(a, k)) += i.real();
      f(im_index(a, k)) += i.imag();
    }
    if (b >= 0) {
      f(re_index(b, k)) -= i.real();
      f(im_index(b, k)) -= i.imag();
    }
  }

  void add_junction_entry(Eigen::MatrixXd& jac, const CompiledCircuit::Junction& jj, int k, int col,
                          std::complex<double> d, double sign) const {
    for (const auto& [node, s] : {std::pair{jj.p, 1.0}, std::pair{jj.n, -1.0}}) {
      if (node < 0) continue;
      if (k == 0) {
        jac(node, col) += s * sign * d.real();
      } else {
        jac(re_index(node, k), col) += s * sign * d.real();
        jac(im_index(node, k), col) += s * sign * d.imag();
      }
    }
  }

  std::tuple<int, int, double> short_branch(int s) const {
    const int nrl = static_cast<int>(circuit_.series_rl.size());
    if (s < nrl) {
      const auto& rl = circuit_.series_rl[s];
      return {rl.a, rl.b, rl.r};
    }
    const auto& line = circuit_.lines[s - nrl];
    return {line.a, line.b, 0.0};
  }

  /// Current harmonics of junction j; optionally the two-sided coefficients
  /// g_m (m = 0..2K) of Ic cos(phi(t)).
  void junction_harmonics(const Eigen::VectorXd& x, int j, std::vector<std::complex<double>>& current,
                          std::vector<std::complex<double>>* g) const {
    const int N = basis_.N, K = basis_.K;
    const Spectrum phi = junction_phase(x, j);
    const double ic = circuit_.junctions[j].ic;
    std::vector<double> sn(N), cs(N);
    for (int i = 0; i < N; ++i) {
      double p = phi[0].real();
      for (int k = 1; k <= K; ++k) p += phi[k].real() * cos_[k][i] - phi[k].imag() * sin_[k][i];
      sn[i] = ic * std::sin(p);
      cs[i] = ic * std::cos(p);
    }
    for (int k = 0; k <= K; ++k) current[k] = project(sn, k) * (k == 0 ? 1.0 : 2.0);
    current[0] = current[0].real();
    if (g)
      for (int m = 0; m <= 2 * K; ++m) (*g)[m] = project(cs, m);
  }

  std::complex<double> project(const std::vector<double>& s, int m) const {
    double re = 0.0, im = 0.0;
    for (int i = 0; i < basis_.N; ++i) {
      re += s[i] * cos_[m][i];
      im -= s[i] * sin_[m][i];
    }
    return {re / basis_.N, im / basis_.N};
  }

  void polish(Eigen::VectorXd& x, Eigen::VectorXd& f, int driven_port, double vs, NewtonResult& res) const {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian(x));
    Eigen::VectorXd xt = x + lu.solve(-f);
    Eigen::VectorXd ft = residual(xt, driven_port, vs);
    const double rt = ft.lpNorm<Eigen::Infinity>();
    if (ft.allFinite() && rt < res.residual && on_physical_branch(xt)) {
      x = std::move(xt);
      f = std::move(ft);
      res.residual = rt;
    }
  }

  void build_linear_blocks() {
    for (int k = 1; k <= basis_.K; ++k) y_.push_back(admittance(circuit_, basis_.f0 * k, true));

    row_scale_.assign(size(), 1.0);
    // DC conductance per row.
    std::vector<double> g_dc(n_, 0.0);
    for (const auto& r : circuit_.resistors)
      for (int node : {r.a, r.b})
        if (node >= 0) g_dc[node] += 2.0 / r.value;
    for (const auto& p : circuit_.ports)
      if (p.node >= 0) g_dc[p.node] += 1.0 / p.z0;
    for (int i = 0; i < n_; ++i) row_scale_[i] = std::max(g_dc[i] * options_.v_scale, options_.i_scale);
    for (int k = 1; k <= basis_.K; ++k) {
      for (int i = 0; i < n_; ++i) {
        const double s = std::max(y_[k - 1].row(i).cwiseAbs().sum() * options_.v_scale, options_.i_scale);
        row_scale_[re_index(i, k)] = s;
        row_scale_[im_index(i, k)] = s;
      }
    }

    // DC components not tied to ground get one node pinned to 0 V.
    detail::UnionFind uf(n_ + 1);
    auto id = [&](int node) { return node < 0 ? n_ : node; };
    for (const auto& r : circuit_.resistors) uf.unite(id(r.a), id(r.b));
    for (const auto& rl : circuit_.series_rl) uf.unite(id(rl.a), id(rl.b));
    for (const auto& l : circuit_.lines) uf.unite(id(l.a), id(l.b));
    for (const auto& jj : circuit_.junctions) uf.unite(id(jj.p), id(jj.n));
    for (const auto& p : circuit_.ports) uf.unite(id(p.node), n_);
    dc_pinned_.assign(n_, false);
    std::vector<bool> seen(n_ + 1, false);
    seen[uf.find(n_)] = true;
    for (int i = 0; i < n_; ++i) {
      const auto root = uf.find(i);
      if (!seen[root]) {
        seen[root] = true;
        dc_pinned_[i] = true;
      }
    }
  }

  void build_tables() {
    const int N = basis_.N;
    cos_.assign(2 * basis_.K + 1, std::vector<double>(N));
    sin_.assign(2 * basis_.K + 1, std::vector<double>(N));
    for (int m = 0; m <= 2 * basis_.K; ++m)
      for (int i = 0; i < N; ++i) {
        const double a = 2.0 * constants::pi * static_cast<double>((static_cast<long>(m) * i) % N) / N;
        cos_[m][i] = std::cos(a);
        sin_[m][i] = std::sin(a);
      }
  }

  CompiledCircuit circuit_;
  HbOptions options_;
  HarmonicBasis basis_;
  int n_ = 0;
  int shorts_ = 0;
  int m_ = 0;
  int dc_size_ = 0;
  std::vector<Eigen::MatrixXcd> y_;
  std::vector<double> row_scale_;
  std::vector<bool> dc_pinned_;
  std::vector<std::vector<double>> cos_;
  std::vector<std::vector<double>> sin_;
};

/// Up-sweep in source power with warm starts. When the sweep meets a fold
/// the curve is followed around it (arclength) onto the branch the circuit
/// jumps to.
class PowerContinuation {
 public:
  PowerContinuation(const HarmonicBalance& hb, int driven_port, double start_dbm)
      : hb_(hb), port_(driven_port), z0_(hb.circuit().ports.at(driven_port).z0), power_(start_dbm) {
    x_ = hb_.initial_guess(port_, vs(power_));
    auto first = hb_.newton(x_, port_, vs(power_));
    iterations_ += first.iterations;
    if (!first.converged) throw NoConvergence(first.residual, power_, "harmonic balance failed at the first step");
    residual_ = first.residual;
    trace_.emplace_back(power_, first.iterations);
    prev_x_ = x_;
    prev_power_ = power_;
  }

  void advance_to(double target_dbm) {
    const auto& opt = hb_.options();
    double step = opt.continuation_step_db;
    while (power_ < target_dbm) {
      const double next = std::min(power_ + step, target_dbm);
      Eigen::VectorXd guess = scaled(x_, power_, next);
      auto r = hb_.newton(guess, port_, vs(next));
      iterations_ += r.iterations;
      if (r.converged) {
        accept(std::move(guess), next, r.residual, r.iterations);
        step = std::min(step * 2.0, opt.continuation_step_db);
        continue;
      }
      step *= 0.5;
      if (step >= opt.min_step_db) continue;

      int iters = 0;
      Eigen::VectorXd xa = x_;
      double pa = power_;
      const bool ok = ++folds_ <= 16 && traverse_fold(xa, pa, power_ + opt.min_step_db, iters);
      iterations_ += iters;
      if (!ok) throw NoConvergence(r.residual, power_, "continuation stalled and the fold could not be traversed");
      if (pa > target_dbm) {
        // Overshot on the new branch; settle back at the target.
        Eigen::VectorXd back = scaled(xa, pa, target_dbm);
        auto rb = hb_.newton(back, port_, vs(target_dbm));
        iterations_ += rb.iterations;
        if (!rb.converged) throw NoConvergence(rb.residual, pa, "could not settle on the post-fold branch");
        xa = std::move(back);
        pa = target_dbm;
      }
      accept(std::move(xa), pa, hb_.residual(xa, port_, vs(pa)).lpNorm<Eigen::Infinity>(), iters);
      step = opt.continuation_step_db;
    }
  }

  HbSolution solution() const {
    HbSolution sol = hb_.make_solution(x_);
    sol.iterations = iterations_;
    sol.residual_norm = residual_;
    sol.continuation_trace = trace_;
    sol.folds_traversed = folds_;
    sol.warm_fundamental = hb_.port_fundamental_norm(x_);
    return sol;
  }

  double power() const { return power_; }
  const Eigen::VectorXd& state() const { return x_; }

 private:
  double vs(double p) const { return source_amplitude(p, z0_); }

  Eigen::VectorXd scaled(const Eigen::VectorXd& x, double from, double to) const {
    Eigen::VectorXd g = x;
    const double ratio = vs(to) / vs(from);
    for (int i = hb_.re_index(0, 1); i < g.size(); ++i) g(i) *= ratio;
    return g;
  }

  void accept(Eigen::VectorXd x, double p, double residual, int iters) {
    prev_x_ = std::move(x_);
    prev_power_ = power_;
    x_ = std::move(x);
    power_ = p;
    residual_ = residual;
    trace_.emplace_back(p, iters);
  }

  // Pseudo-arclength in (x, power dB), starting along the secant of the last
  // two converged points; stops once the curve climbs above past_dbm.
  bool traverse_fold(Eigen::VectorXd& x, double& power, double past_dbm, int& iterations) const {
    const auto& opt = hb_.options();
    const int n = hb_.size();
    Eigen::VectorXd y(n + 1), t(n + 1);
    y << x, power;
    t << x - prev_x_, power - prev_power_;
    if (t.norm() == 0.0) return false;
    t.normalize();

    double ds = std::min(0.1 * std::max(std::abs(power - prev_power_), 0.05) / std::max(std::abs(t(n)), 1e-3), 1.0);
    for (int step = 0; step < 4000; ++step) {
      const Eigen::VectorXd pred = y + ds * t;
      Eigen::VectorXd z = pred;
      bool ok = false;
      for (int it = 0; it < opt.max_iterations; ++it) {
        const Eigen::VectorXd xz = z.head(n);
        const Eigen::VectorXd f = hb_.residual(xz, port_, vs(z(n)));
        const double arc = t.dot(z - pred);
        if (!f.allFinite()) break;
        if (f.lpNorm<Eigen::Infinity>() < opt.tol && std::abs(arc) < 1e-10) {
          ok = true;
          break;
        }
        ++iterations;
        Eigen::MatrixXd a(n + 1, n + 1);
        a.topLeftCorner(n, n) = hb_.jacobian(xz);
        a.topRightCorner(n, 1) = hb_.drive_sensitivity(port_, vs(z(n))) * (vs(z(n)) * std::log(10.0) / 20.0);
        a.bottomRows(1) = t.transpose();
        Eigen::VectorXd rhs(n + 1);
        rhs << -f, -arc;
        const Eigen::VectorXd dz = a.partialPivLu().solve(rhs);
        if (!dz.allFinite()) break;
        z += dz;
      }
      if (!ok || !hb_.on_physical_branch(z.head(n))) {
        ds *= 0.5;
        if (ds < 1e-8) return false;
        continue;
      }
      Eigen::VectorXd tn = z - y;
      tn.normalize();
      y = z;
      t = tn;
      ds = std::min(ds * 1.5, 1.0);
      if (y(n) > past_dbm && t(n) > 0.0) {
        x = y.head(n);
        power = y(n);
        return true;
      }
    }
    return false;
  }

  const HarmonicBalance& hb_;
  int port_;
  double z0_;
  Eigen::VectorXd x_;
  double power_;
  Eigen::VectorXd prev_x_;
  double prev_power_;
  double residual_ = 0.0;
  int iterations_ = 0;
  int folds_ = 0;
  std::vector<std::pair<double, int>> trace_;
};

namespace detail {

inline void check_multistability(const HarmonicBalance& hb, int driven_port, double power_dbm, HbSolution& sol) {
  sol.multistability_checked = true;
  const double vs = source_amplitude(power_dbm, hb.circuit().ports.at(driven_port).z0);
  Eigen::VectorXd cold = hb.initial_guess(driven_port, vs);
  if (hb.newton(cold, driven_port, vs).converged) {
    sol.cold_fundamental = hb.port_fundamental_norm(cold);
    sol.bistable = std::abs(sol.cold_fundamental - sol.warm_fundamental) > 1e-6 * sol.warm_fundamental;
  }
}

}  // namespace detail

/// Central-difference Jacobian of the residual at x.
inline Eigen::MatrixXd finite_difference_jacobian(const HarmonicBalance& hb, const Eigen::VectorXd& x, int driven_port,
                                                  double vs, double rel_step = 1e-6) {
  Eigen::MatrixXd fd(hb.size(), hb.size());
  for (int c = 0; c < hb.size(); ++c) {
    const double h = rel_step * std::max(1.0, std::abs(x(c)));
    Eigen::VectorXd xp = x, xm = x;
    xp(c) += h;
    xm(c) -= h;
    fd.col(c) = (hb.residual(xp, driven_port, vs) - hb.residual(xm, driven_port, vs)) / (2.0 * h);
  }
  return fd;
}

/// max |J_analytic - J_fd| / max |J_analytic|.
inline double jacobian_fd_error(const HarmonicBalance& hb, const Eigen::VectorXd& x, int driven_port, double vs) {
  const Eigen::MatrixXd a = hb.jacobian(x);
  const Eigen::MatrixXd fd = finite_difference_jacobian(hb, x, driven_port, vs);
  return (a - fd).cwiseAbs().maxCoeff() / a.cwiseAbs().maxCoeff();
}

/// Periodic steady state at `power_dbm`, reached by continuation from
/// power_dbm - continuation_span_db.
inline HbSolution solve_hb(const Netlist& netlist, double f0, int driven_port, double power_dbm,
                           const HbOptions& options = {}) {
  if (std::isnan(power_dbm) || power_dbm == std::numeric_limits<double>::infinity())
    throw Error(ErrorCode::DomainError, "power_dbm", "must be finite or -inf");
  const HarmonicBalance hb(netlist, f0, options);
  if (std::isinf(power_dbm)) return hb.make_solution(Eigen::VectorXd::Zero(hb.size()));
  PowerContinuation cont(hb, driven_port, power_dbm - std::max(options.continuation_span_db, 0.0));
  cont.advance_to(power_dbm);
  HbSolution sol = cont.solution();
  if (options.check_multistability) detail::check_multistability(hb, driven_port, power_dbm, sol);
  return sol;
}

/// Solutions at each of `powers_dbm` (any order) from a single up-sweep
/// starting continuation_span_db below the lowest power. Unreachable points
/// are returned as std::nullopt together with the error text.
struct SweepPoint {
  double power_dbm;
  std::optional<HbSolution> solution;
  std::string error;
};

inline std::vector<SweepPoint> solve_hb_power_sweep(const Netlist& netlist, double f0, int driven_port,
                                                    std::vector<double> powers_dbm, const HbOptions& options = {}) {
  std::vector<SweepPoint> out;
  if (powers_dbm.empty()) return out;
  std::vector<std::size_t> order(powers_dbm.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return powers_dbm[a] < powers_dbm[b]; });
  out.resize(powers_dbm.size());
  for (std::size_t i = 0; i < powers_dbm.size(); ++i) out[i].power_dbm = powers_dbm[i];

  const HarmonicBalance hb(netlist, f0, options);
  std::optional<PowerContinuation> cont;
  std::string failure;
  try {
    cont.emplace(hb, driven_port, powers_dbm[order.front()] - std::max(options.continuation_span_db, 0.0));
  } catch (const Error& e) {
    failure = e.what();
  }
  for (std::size_t idx : order) {
    if (!cont) {
      out[idx].error = failure;
      continue;
    }
    try {
      cont->advance_to(powers_dbm[idx]);
      out[idx].solution = cont->solution();
      if (options.check_multistability) detail::check_multistability(hb, driven_port, powers_dbm[idx], *out[idx].solution);
    } catch (const Error& e) {
      failure = e.what();
      out[idx].error = failure;
      cont.reset();
    }
  }
  return out;
}

}  // namespace isosim

#endif  // ISOSIM_HB_HPP
