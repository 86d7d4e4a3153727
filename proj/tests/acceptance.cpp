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


// Acceptance run: one PASS/FAIL line per criterion with the measured value,
// the bar and the wall time. Exits 0 once every criterion has been evaluated;
// the verdicts are in the output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "isosim/hb.hpp"
#include "isosim/linmap.hpp"
#include "isosim/quantizer.hpp"
#include "isosim/response.hpp"
#include "isosim/transient.hpp"

using namespace isosim;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int g_passed = 0, g_total = 0;

void criterion(int id, const char* name, double budget_s, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = dt < budget_s;
  const bool ok = v.pass && in_time;
  ++g_total;
  g_passed += ok ? 1 : 0;
  std::printf("[%s] C%-2d %-34s %s [%.1f s%s]\n", ok ? "PASS" : "FAIL", id, name, v.detail.c_str(), dt,
              in_time ? "" : ", over budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char b[160];
  std::snprintf(b, sizeof b, f, a);
  return b;
}
std::string fmt(const char* f, double a, double c) {
  char b[160];
  std::snprintf(b, sizeof b, f, a, c);
  return b;
}
std::string fmt(const char* f, double a, double c, double d) {
  char b[200];
  std::snprintf(b, sizeof b, f, a, c, d);
  return b;
}

std::vector<double> range(double a, double b, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((b - a) / step + 0.5));
  for (long i = 0; i <= n; ++i) v.push_back(a + static_cast<double>(i) * step);
  return v;
}

/// Frequency of the small-signal |t21| minimum of a netlist within [lo, hi].
double transmission_minimum(const Netlist& n, double lo, double hi, double step) {
  double best = INFINITY, at = lo;
  for (double f : range(lo, hi, step)) {
    const double t = std::abs(small_signal_sparams(n, f).t21);
    if (t < best) best = t, at = f;
  }
  return at;
}

struct GridPeak {
  double iso = 0.0;  ///< signed isolation at the largest |isolation|
  double f = 0.0;
  double p = 0.0;
  std::size_t unconverged = 0;
  SweepResult rows;
};

GridPeak grid_peak(const NetlistBuilder& build, const std::vector<double>& fs, const std::vector<double>& ps) {
  SweepGrid g;
  g.f0 = fs;
  g.power_dbm = ps;
  GridPeak out;
  out.rows = sweep(build, g);
  for (const auto& r : out.rows) {
    if (!r.response.converged()) {
      ++out.unconverged;
      continue;
    }
    if (std::abs(r.response.isolation_db) > std::abs(out.iso)) {
      out.iso = r.response.isolation_db;
      out.f = r.response.f0;
      out.p = r.response.power_dbm;
    }
  }
  return out;
}

/// Rows of `rows` at one power (frequency cut) or one frequency (power cut),
/// with isolation re-signed so the peak direction counts as positive.
SweepResult cut(const GridPeak& g, bool at_power) {
  SweepResult out;
  const double sign = g.iso < 0.0 ? -1.0 : 1.0;
  for (auto r : g.rows) {
    const bool keep = at_power ? std::abs(r.response.power_dbm - g.p) < 1e-9 : std::abs(r.response.f0 - g.f) < 1e-3;
    if (!keep) continue;
    r.response.isolation_db *= sign;
    out.push_back(r);
  }
  return out;
}

}  // namespace

int main() {
  std::printf("isosim acceptance run\n");

  criterion(1, "linear equivalence HB vs AC", 1.0, [] {
    const auto lin = linearized(reference_lorentz());
    double worst = 0.0;
    for (double dbm : {-150.0, -123.0, -80.0}) {
      for (double f : {4.85e9, 4.9e9}) {
        const auto hb = solve_hb(lin, f, 0, dbm);
        const auto ac = ac_solve(lin, f, 0, source_amplitude(dbm, 50.0));
        for (const auto& name : lin.nodes) {
          const auto sp = hb.node(name);
          const double ref = std::abs(ac.voltage(name));
          worst = std::max(worst, std::abs(sp[1] - ac.voltage(name)) / ref);
          for (int k : {0, 2, 3, 4, 5, 6, 7, 8}) worst = std::max(worst, std::abs(sp[k]) / ref);
        }
      }
    }
    return Verdict{worst < 1e-8, fmt("max rel diff %.2e (bar 1e-8)", worst)};
  });

  criterion(2, "analytic vs FD Jacobian", 10.0, [] {
    const auto n = reference_lorentz();
    const HarmonicBalance hb(n, 4.9e9);
    const double vs = source_amplitude(-123.0, 50.0);
    std::mt19937 rng(2024);
    std::normal_distribution<double> g(0.0, 0.2);
    Eigen::VectorXd x = hb.initial_guess(0, vs);
    for (int c = 0; c < x.size(); ++c) x(c) *= 1.0 + g(rng);
    double worst = 0.0;
    for (int it = 0; it < 10; ++it) {
      worst = std::max(worst, jacobian_fd_error(hb, x, 0, vs));
      // Next undamped Newton iterate.
      const Eigen::VectorXd dx = hb.jacobian(x).partialPivLu().solve(-hb.residual(x, 0, vs));
      x += dx;
    }
    return Verdict{worst < 1e-6, fmt("max rel error %.2e over 10 iterates (bar 1e-6)", worst)};
  });

  criterion(3, "HB vs transient at 4.9 GHz, -123 dBm", 300.0, [] {
    const DriveSpec drive{0, 4.9e9, -123.0};
    const TransientConfig cfg;  // dt = T/400, 20000 settle periods, 200 analysed
    std::string detail;
    bool pass = true;
    for (const auto& [label, n] : {std::pair{"single transmon", single_transmon()},
                                   std::pair{"Lorentz", reference_lorentz()}}) {
      try {
        const auto c = compare_hb_transient(n, drive, {}, cfg);
        pass = pass && c.rel_diff_t < 0.02;
        detail += std::string(label) + fmt(": |t21| hb %.4f tr %.4f rel %.2e; ", std::abs(c.t_hb),
                                           std::abs(c.t_transient), c.rel_diff_t);
      } catch (const Error& e) {
        pass = false;
        detail += std::string(label) + ": " + e.what() + "; ";
      }
    }
    return Verdict{pass, detail + "(bar 2%)"};
  });

  criterion(4, "low-power reciprocity", 5.0, [] {
    const auto r = nonreciprocal_pair(reference_lorentz(), 4.9e9, -300.0);
    return Verdict{r.converged() && std::abs(r.isolation_db) < 1e-3,
                   fmt("|isolation| %.2e dB at -300 dBm (bar 1e-3)", std::abs(r.isolation_db))};
  });

  criterion(5, "third harmonic Ic A^3/24", 1.0, [] {
    const HarmonicBasis b{5e9, 8, 128};
    Spectrum phase(b);
    phase[1] = 0.3;
    const double ic = 40e-9;
    const auto cur = junction_current(phase, ic);
    const double ratio = std::abs(cur[3]) / (ic * 0.027 / 24.0);
    return Verdict{std::abs(ratio - 1.0) < 0.02, fmt("I3 / (Ic A^3/24) = %.5f at A = 0.3 (bar 2%%)", ratio)};
  });

  criterion(6, "quantizer truncation and decoupling", 30.0, [] {
    const auto p = lorentz_defaults();
    auto s = isolator_system(p, 8e-9, 8e-9, IslandCoupling::SharedLineNode, 12);
    const auto a = transitions(s, false);
    s.n_max = 15;
    const auto b = transitions(s, false);
    const double shift = std::max(std::abs(a.f01() - b.f01()), std::abs(a.f02() - b.f02()));

    auto loose = p;
    loose.cd = 1e-21;
    const auto dec = transitions(isolator_system(loose, 8e-9, 8e-9, IslandCoupling::SharedLineNode, 12), false);
    std::vector<double> iso;
    for (double c : {p.cq1(), p.cq2}) {
      const auto single = transitions(single_transmon_system(TransmonSpec::from_lj(8e-9, c).ej, c, 12), false);
      iso.push_back(single.f01());
    }
    std::sort(iso.begin(), iso.end());
    const double dev = std::max(std::abs(dec.f01() - iso[0]), std::abs(dec.f02() - iso[1]));
    return Verdict{shift < 1e3 && dev < 1e3,
                   fmt("n_max 12->15 shift %.3g Hz, decoupled deviation %.3g Hz (bar 1 kHz)", shift, dev)};
  });

  criterion(7, "saturable scattering, single transmon", 120.0, [] {
    const auto n = single_transmon();
    const double f = transmission_minimum(n, 4.5e9, 5.5e9, 0.5e6);
    SweepGrid g;
    g.f0 = {f};
    g.power_dbm = range(-160.0, -90.0, 1.0);
    const auto rows = sweep(n, g);
    bool mono = true;
    double prev = 0.0;
    for (const auto& r : rows) {
      if (!r.response.converged_fwd) return Verdict{false, "unconverged at " + fmt("%.0f dBm", r.response.power_dbm)};
      const double t = std::abs(r.response.t21);
      mono = mono && t >= prev - 1e-9;
      prev = t;
    }
    const double lo = std::abs(rows.front().response.t21), hi = std::abs(rows.back().response.t21);
    return Verdict{mono && lo < 0.3 && hi > 0.9,
                   fmt("f = %.4f GHz, |t| %.3f at -160 dBm, %.3f at -90 dBm", f / 1e9, lo, hi) +
                       (mono ? ", monotone" : ", NOT monotone")};
  });

  criterion(8, "avoided crossing near 8 nH", 60.0, [] {
    const auto p = lorentz_defaults();
    const auto ljs = range(6.5e-9, 9.5e-9, 0.05e-9);
    const auto rows = sweep_lj(isolator_system(p, 8e-9, 8e-9, IslandCoupling::SharedLineNode, 12), ljs, 8e-9, false);
    const auto x = find_avoided_crossing(rows);
    auto gap_at = [&](double lj) -> double {
      for (const auto& r : rows)
        if (std::abs(r.lj - lj) < 1e-13) return r.gap;
      return NAN;
    };
    const double g1 = gap_at(6.85e-9), g2 = gap_at(9.4e-9);
    const bool pass = x.lj_star >= 7.6e-9 && x.lj_star <= 8.4e-9 && g1 > x.gap && g2 > x.gap;
    return Verdict{pass, fmt("lj* = %.3f nH, gap %.1f MHz", x.lj_star * 1e9, x.gap / 1e6) +
                             fmt("; gaps %.0f / %.0f MHz at 6.85 / 9.4 nH", g1 / 1e6, g2 / 1e6)};
  });

  criterion(9, "linear extrema vs quantum transitions", 120.0, [] {
    double worst = 0.0;
    std::string detail;
    for (double lj : {6.85e-9, 8e-9, 9.4e-9}) {
      auto p = lorentz_defaults();
      p.ic1 = ic_from_lj0(lj);
      p.ic2 = ic_from_lj0(8e-9);
      const auto lin = linearized(reference_lorentz(p));
      // Local minima of the small-signal transmission (the two qubit dips).
      std::vector<double> dips;
      const auto fs = range(4.0e9, 6.0e9, 0.25e6);
      std::vector<double> t;
      for (double f : fs) t.push_back(std::abs(small_signal_sparams(lin, f).t21));
      for (std::size_t i = 1; i + 1 < t.size(); ++i)
        if (t[i] < t[i - 1] && t[i] <= t[i + 1]) dips.push_back(fs[i]);
      const auto q = transitions(isolator_system(p, lj, 8e-9, IslandCoupling::SharedLineNode, 12), false);
      if (dips.size() != 2) return Verdict{false, fmt("found %.0f dips at %.2f nH", double(dips.size()), lj * 1e9)};
      const double d = std::max(std::abs(dips[0] - q.f01()), std::abs(dips[1] - q.f02()));
      worst = std::max(worst, d);
      detail += fmt("%.2f nH: %.0f MHz; ", lj * 1e9, d / 1e6);
    }
    return Verdict{worst < 100e6, detail + "(bar 100 MHz)"};
  });

  GridPeak lorentz_opt;
  criterion(10, "Lorentz isolation over (f, P, delta)", 1800.0, [&] {
    const auto fs = range(4.80e9, 5.00e9, 2e6);
    const auto ps = range(-135.0, -110.0, 0.2);
    std::vector<std::pair<double, GridPeak>> peaks;
    for (double delta : {0.03, 0.06, 0.09, 0.12}) {
      auto p = lorentz_defaults();
      p.delta = delta;
      peaks.emplace_back(delta, grid_peak(isolator_builder(p), fs, ps));
    }
    std::string detail;
    double best_other = 0.0;
    for (const auto& [d, g] : peaks) {
      detail += fmt("d=%.2f: %.2f dB", d, g.iso) + fmt(" @%.3f GHz %.1f dBm; ", g.f / 1e9, g.p);
      if (std::abs(d - 0.09) > 1e-9) best_other = std::max(best_other, std::abs(g.iso));
      if (std::abs(d - 0.09) < 1e-9) lorentz_opt = g;
    }
    const double at09 = std::abs(lorentz_opt.iso);
    return Verdict{at09 >= 20.0 && at09 > best_other,
                   detail + fmt("peak |iso| at 0.09 = %.2f dB vs best other %.2f dB (bars: >= 20 dB, 0.09 best)",
                                at09, best_other)};
  });

  criterion(11, "Fano vs Lorentz isolation and bandwidth", 1800.0, [&] {
    if (lorentz_opt.rows.empty()) return Verdict{false, "Lorentz reference grid unavailable"};
    const auto fano = grid_peak(isolator_builder(fano_defaults()), range(4.70e9, 5.10e9, 2e6),
                                range(-135.0, -110.0, 0.2));
    const double gain = std::abs(fano.iso) - std::abs(lorentz_opt.iso);
    const double bw_f = spectral_bandwidth(cut(fano, true), 10.0);
    const double bw_l = spectral_bandwidth(cut(lorentz_opt, true), 10.0);
    const double pb_f = power_bandwidth(cut(fano, false), 10.0);
    const double pb_l = power_bandwidth(cut(lorentz_opt, false), 10.0);
    const double ratio = bw_l > 0.0 ? bw_f / bw_l : INFINITY;
    return Verdict{gain >= 5.0 && ratio >= 1.5,
                   fmt("Fano peak %.2f dB @%.3f GHz %.1f dBm", fano.iso, fano.f / 1e9, fano.p) +
                       fmt(", gain %.2f dB (bar 5); 10 dB bandwidth %.0f / %.0f MHz", gain, bw_f / 1e6, bw_l / 1e6) +
                       fmt(", ratio %.2f (bar 1.5); power bandwidth %.1f / %.1f dB", ratio, pb_f, pb_l) +
                       fmt(" (diff %.1f dB)", pb_f - pb_l)};
  });

  criterion(12, "E_J/E_C", 1.0, [] {
    const auto p = lorentz_defaults();
    const double lj = lj0_from_ic(p.ic1);
    const auto q1 = single_transmon_system(TransmonSpec::from_lj(lj, p.cq1()).ej, p.cq1());
    const auto q2 = single_transmon_system(TransmonSpec::from_lj(lj, p.cq2).ej, p.cq2);
    const double r1 = ej_ec_ratio(q1, 0), r2 = ej_ec_ratio(q2, 0);
    const double loaded = ej_ec_ratio(isolator_system(p, lj, lj, IslandCoupling::SharedLineNode), 0);
    return Verdict{std::abs(r1 - 67.0) <= 7.0 && std::abs(r2 - 67.0) <= 7.0,
                   fmt("island C_Q1 %.1f, C_Q2 %.1f (bar 67 +- 7); loaded network %.1f (info)", r1, r2, loaded)};
  });

  std::printf("%d/%d criteria passed\n", g_passed, g_total);
  return 0;
}
