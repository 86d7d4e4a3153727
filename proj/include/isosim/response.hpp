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


// Large-signal two-port figures of merit: fundamental wave ratios for each
// drive direction, isolation, diode efficiency, grid sweeps and bandwidths.

#ifndef ISOSIM_RESPONSE_HPP
#define ISOSIM_RESPONSE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "isosim/drive.hpp"
#include "isosim/hb.hpp"
#include "isosim/netlist.hpp"

namespace isosim {

namespace detail {

inline const Port& other_port(const Netlist& n, int driven) {
  if (n.ports.size() != 2) throw Error(ErrorCode::PortCount, std::to_string(n.ports.size()), "need two ports");
  return n.ports.at(driven == 0 ? 1 : 0);
}

inline std::complex<double> fundamental_transmission(const Netlist& n, const HbSolution& sol, int driven, double dbm) {
  const auto& in = n.ports.at(driven);
  const auto& out = other_port(n, driven);
  return wave_transmission(sol.node(out.node)[1], source_amplitude(dbm, in.z0), in.z0, out.z0);
}

/// Runs `fn(f)`; on a line resonance retries once at f (1 + 1e-9).
template <class Fn>
auto with_line_nudge(double f0, Fn&& fn) {
  try {
    return fn(f0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LineSingularity) throw;
    return fn(f0 * (1.0 + 1e-9));
  }
}

}  // namespace detail

/// Fundamental b_out / a_in with the opposite port matched.
inline std::complex<double> transmission(const Netlist& netlist, const DriveSpec& drive, const HbOptions& options = {}) {
  validate(netlist);
  detail::other_port(netlist, drive.port);
  return detail::with_line_nudge(drive.f0, [&](double f) {
    const auto sol = solve_hb(netlist, f, drive.port, drive.power_dbm, options);
    return detail::fundamental_transmission(netlist, sol, drive.port, drive.power_dbm);
  });
}

/// |t21| (|t21| - |t12|) / (|t21| + |t12|).
inline double efficiency(std::complex<double> t21, std::complex<double> t12) {
  const double a = std::abs(t21), b = std::abs(t12);
  if (!(a + b > 0.0)) throw Error(ErrorCode::DomainError, "efficiency", "both transmissions are zero");
  return a * (a - b) / (a + b);
}

inline double isolation_db(std::complex<double> t21, std::complex<double> t12) {
  return 20.0 * std::log10(std::abs(t21) / std::abs(t12));
}

struct TwoPortResponse {
  double f0 = 0.0;
  double power_dbm = 0.0;
  std::complex<double> t21{std::numeric_limits<double>::quiet_NaN(), 0.0};
  std::complex<double> t12{std::numeric_limits<double>::quiet_NaN(), 0.0};
  double isolation_db = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  bool converged_fwd = false;
  bool converged_bwd = false;
  int iters_fwd = 0;
  int iters_bwd = 0;
  std::string error;

  bool converged() const { return converged_fwd && converged_bwd; }
};

namespace detail {

inline void finish(TwoPortResponse& r) {
  if (!r.converged()) return;
  if (std::abs(r.t12) > 0.0) r.isolation_db = isolation_db(r.t21, r.t12);
  if (std::abs(r.t21) + std::abs(r.t12) > 0.0) r.epsilon = efficiency(r.t21, r.t12);
}

}  // namespace detail

/// Drives port 1, then port 2, at the same available power.
inline TwoPortResponse nonreciprocal_pair(const Netlist& netlist, double f0, double power_dbm,
                                          const HbOptions& options = {}) {
  validate(netlist);
  detail::other_port(netlist, 0);
  TwoPortResponse r;
  r.f0 = f0;
  r.power_dbm = power_dbm;
  for (int dir = 0; dir < 2; ++dir) {
    try {
      const auto [t, iters] = detail::with_line_nudge(f0, [&](double f) {
        const auto sol = solve_hb(netlist, f, dir, power_dbm, options);
        return std::pair{detail::fundamental_transmission(netlist, sol, dir, power_dbm), sol.iterations};
      });
      (dir == 0 ? r.t21 : r.t12) = t;
      (dir == 0 ? r.converged_fwd : r.converged_bwd) = true;
      (dir == 0 ? r.iters_fwd : r.iters_bwd) = iters;
    } catch (const Error& e) {
      if (!r.error.empty()) r.error += "; ";
      r.error += e.what();
    }
  }
  detail::finish(r);
  return r;
}

struct SweepGrid {
  std::vector<double> f0;
  std::vector<double> power_dbm;
  std::vector<double> delta;  ///< empty: netlist used as given
  std::vector<double> lj;     ///< empty: netlist used as given
};

struct SweepRow {
  double delta = std::numeric_limits<double>::quiet_NaN();
  double lj = std::numeric_limits<double>::quiet_NaN();
  TwoPortResponse response;
};

using SweepResult = std::vector<SweepRow>;

/// Builds the circuit for one (delta, lj) grid point. NaN means "not swept".
using NetlistBuilder = std::function<Netlist(double delta, double lj)>;

/// Builder over a reference isolator family starting from `base`.
inline NetlistBuilder isolator_builder(IsolatorParams base) {
  return [base](double delta, double lj) {
    IsolatorParams p = base;
    if (!std::isnan(delta)) p.delta = delta;
    if (!std::isnan(lj)) p.set_lj(lj);
    return reference_isolator(p);
  };
}

inline NetlistBuilder fixed_builder(Netlist n) {
  return [n = std::move(n)](double delta, double lj) {
    if (!std::isnan(delta) || !std::isnan(lj))
      throw Error(ErrorCode::ConfigError, "grid", "delta/lj sweeps need a reference netlist");
    return n;
  };
}

struct SweepOptions {
  HbOptions hb;
  int threads = 1;
};

/// Row order: delta, lj, f0, power (outermost to innermost), each list in
/// the given order. Each (delta, lj, f0, direction) task runs one power
/// up-sweep by continuation; tasks run in parallel on `threads` workers.
inline SweepResult sweep(const NetlistBuilder& build, const SweepGrid& grid, const SweepOptions& options = {}) {
  if (grid.f0.empty() || grid.power_dbm.empty()) throw Error(ErrorCode::EmptySweep, "grid", "need f0 and power values");
  const std::vector<double> deltas = grid.delta.empty() ? std::vector<double>{std::nan("")} : grid.delta;
  const std::vector<double> ljs = grid.lj.empty() ? std::vector<double>{std::nan("")} : grid.lj;
  const std::size_t np = grid.power_dbm.size();

  SweepResult rows;
  for (double d : deltas)
    for (double l : ljs)
      for (double f : grid.f0)
        for (double p : grid.power_dbm) {
          SweepRow row;
          row.delta = d;
          row.lj = l;
          row.response.f0 = f;
          row.response.power_dbm = p;
          rows.push_back(row);
        }

  const std::size_t blocks = rows.size() / np;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < 2 * blocks;) {
      const std::size_t block = task / 2;
      const int dir = static_cast<int>(task % 2);
      SweepRow& head = rows[block * np];
      std::vector<SweepPoint> pts;
      Netlist n;
      std::string failure;
      try {
        n = validate(build(head.delta, head.lj));
        detail::other_port(n, dir);
        pts = detail::with_line_nudge(head.response.f0, [&](double f) {
          // Probe the nudge at the linear level before the full sweep.
          ac_solve(n, f, dir, 1.0);
          return solve_hb_power_sweep(n, f, dir, grid.power_dbm, options.hb);
        });
      } catch (const Error& e) {
        failure = e.what();
      }
      for (std::size_t i = 0; i < np; ++i) {
        auto& r = rows[block * np + i].response;
        std::string err = failure;
        if (failure.empty() && pts[i].solution) {
          const auto t = detail::fundamental_transmission(n, *pts[i].solution, dir, r.power_dbm);
          (dir == 0 ? r.t21 : r.t12) = t;
          (dir == 0 ? r.converged_fwd : r.converged_bwd) = true;
          (dir == 0 ? r.iters_fwd : r.iters_bwd) = pts[i].solution->iterations;
        } else if (failure.empty()) {
          err = pts[i].error;
        }
        if (!err.empty()) (dir == 0 ? r.iters_fwd : r.iters_bwd) = -1;
        if (!err.empty()) r.error += (dir == 0 ? "fwd: " : "bwd: ") + err + " ";
      }
    }
  };
  const int nt = std::max(1, std::min<int>(options.threads, static_cast<int>(2 * blocks)));
  std::vector<std::thread> pool;
  for (int i = 1; i < nt; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& r : rows) detail::finish(r.response);
  return rows;
}

inline SweepResult sweep(const Netlist& netlist, const SweepGrid& grid, const SweepOptions& options = {}) {
  return sweep(fixed_builder(netlist), grid, options);
}

/// Width of the widest contiguous run of x where y >= threshold, with linear
/// interpolation at the crossings. NaN samples never qualify.
inline double threshold_width(const std::vector<double>& x, const std::vector<double>& y, double threshold) {
  if (x.empty() || x.size() != y.size()) throw Error(ErrorCode::EmptySweep, "rows", "no rows to measure");
  if (!(threshold > 0.0)) throw Error(ErrorCode::DomainError, "threshold_db", "threshold must be positive");
  auto above = [&](std::size_t i) { return !std::isnan(y[i]) && y[i] >= threshold; };
  auto cross = [&](std::size_t i, std::size_t j) {  // i below, j above or vice versa
    if (std::isnan(y[i]) || std::isnan(y[j])) return above(i) ? x[i] : x[j];
    return x[i] + (threshold - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
  };
  double best = 0.0;
  std::size_t i = 0;
  while (i < x.size()) {
    if (!above(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < x.size() && above(j + 1)) ++j;
    const double lo = i > 0 ? cross(i - 1, i) : x[i];
    const double hi = j + 1 < x.size() ? cross(j, j + 1) : x[j];
    best = std::max(best, std::abs(hi - lo));
    i = j + 1;
  }
  return best;
}

namespace detail {

inline std::vector<double> isolation_column(const SweepResult& rows) {
  std::vector<double> y;
  for (const auto& r : rows) y.push_back(r.response.isolation_db);
  return y;
}

}  // namespace detail

/// Rows must come from a frequency sweep at fixed power (sorted in f0).
inline double spectral_bandwidth(const SweepResult& rows, double threshold_db = 10.0) {
  std::vector<double> x;
  for (const auto& r : rows) x.push_back(r.response.f0);
  return threshold_width(x, detail::isolation_column(rows), threshold_db);
}

/// Rows must come from a power sweep at fixed frequency (sorted in power).
inline double power_bandwidth(const SweepResult& rows, double threshold_db = 10.0) {
  std::vector<double> x;
  for (const auto& r : rows) x.push_back(r.response.power_dbm);
  return threshold_width(x, detail::isolation_column(rows), threshold_db);
}

struct LjDiagnostic {
  double i_fundamental = 0.0;  ///< A, peak
  double lj_effective = 0.0;   ///< H
};

inline double lj_effective(double lj0, double current, double ic) {
  const double r = std::abs(current) / ic;
  if (!(r < 1.0)) throw Error(ErrorCode::DomainError, "current", "|I| must be below Ic");
  return lj0 / std::sqrt(1.0 - r * r);
}

/// Fundamental junction current and the L_J0 / sqrt(1 - (I/Ic)^2) estimate.
inline LjDiagnostic lj_diagnostic(const HbSolution& solution, const std::string& junction) {
  const std::size_t j = solution.junction(junction);
  const double ic = solution.junction_ic[j];
  const auto current = junction_current(solution.junction_phase_spectra[j], ic);
  LjDiagnostic d;
  d.i_fundamental = std::abs(current[1]);
  d.lj_effective = lj_effective(lj0_from_ic(ic), d.i_fundamental, ic);
  return d;
}

inline constexpr const char* kResponseCsvHeader =
    "f0_hz,pin_dbm,delta,lj_h,t21_mag,t21_phase_rad,t12_mag,t12_phase_rad,isolation_db,efficiency,"
    "converged_fwd,converged_bwd,iters_fwd,iters_bwd";

inline void write_sweep_csv(std::ostream& os, const SweepResult& rows) {
  os << kResponseCsvHeader << "\n";
  char buf[512];
  for (const auto& row : rows) {
    const auto& r = row.response;
    std::snprintf(buf, sizeof buf, "%.9e,%.6f,%.9g,%.9e,%.12e,%.12e,%.12e,%.12e,%.9f,%.12e,%d,%d,%d,%d\n", r.f0,
                  r.power_dbm, row.delta, row.lj, std::abs(r.t21), std::arg(r.t21), std::abs(r.t12), std::arg(r.t12),
                  r.isolation_db, r.epsilon, r.converged_fwd ? 1 : 0, r.converged_bwd ? 1 : 0, r.iters_fwd,
                  r.iters_bwd);
    os << buf;
  }
}

}  // namespace isosim

#endif  // ISOSIM_RESPONSE_HPP
