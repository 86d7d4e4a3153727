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


// isosim command-line front end: run, quantize, validate, plot.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "isosim/hb.hpp"
#include "isosim/io.hpp"
#include "isosim/plot.hpp"
#include "isosim/quantizer.hpp"
#include "isosim/response.hpp"
#include "isosim/transient.hpp"

namespace {

using namespace isosim;

enum Exit { kOk = 0, kConfig = 2, kPartial = 3, kValidation = 4, kInternal = 5 };

/// "start:stop:step", "a,b,c" or a single value; units allowed.
std::vector<double> parse_range(const std::string& text, const std::string& unit, const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() == 3) {
    const double a = parse_quantity(parts[0], unit), b = parse_quantity(parts[1], unit);
    const double step = parse_quantity(parts[2], unit);
    if (step == 0.0 || (b - a) * step < 0.0)
      throw Error(ErrorCode::ConfigError, key, "range '" + text + "' does not reach its end with that step");
    const auto n = static_cast<long>(std::floor((b - a) / step + 0.5));
    if (n > 1000000) throw Error(ErrorCode::ConfigError, key, "range too long");
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  if (parts.size() != 1) throw Error(ErrorCode::ConfigError, key, "malformed range '" + text + "'");
  std::vector<double> out;
  std::stringstream cs(text);
  for (std::string p; std::getline(cs, p, ',');) out.push_back(parse_quantity(p, unit));
  if (out.empty()) throw Error(ErrorCode::ConfigError, key, "empty list");
  return out;
}

/// Option values gathered from --config (JSON) and then from flags.
struct Settings {
  std::map<std::string, std::string> values;
  std::map<std::string, double> params;

  bool has(const std::string& k) const { return values.contains(k); }
  std::string str(const std::string& k, const std::string& fallback) const {
    return has(k) ? values.at(k) : fallback;
  }
  double num(const std::string& k, double fallback, const std::string& unit = "") const {
    return has(k) ? parse_quantity(values.at(k), unit) : fallback;
  }
  std::vector<double> list(const std::string& k, const std::string& unit) const {
    return has(k) ? parse_range(values.at(k), unit, k) : std::vector<double>{};
  }
};

void load_config(Settings& s, const std::string& path, const std::set<std::string>& allowed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, path, "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ConfigError, path, "config must be a JSON object");
  for (const auto& [k, v] : doc.items()) {
    if (k == "params" && allowed.contains("params")) {
      if (!v.is_object()) throw Error(ErrorCode::ConfigError, "params", "expected an object");
      for (const auto& [pk, pv] : v.items()) s.params[pk] = quantity(pv, "", "params." + pk);
      continue;
    }
    if (!allowed.contains(k)) throw Error(ErrorCode::ConfigError, k, "unknown config key");
    if (v.is_string()) s.values[k] = v.get<std::string>();
    else if (v.is_number()) s.values[k] = v.dump();
    else if (v.is_array()) {
      std::string joined;
      for (const auto& e : v) joined += (joined.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
      s.values[k] = joined;
    } else {
      throw Error(ErrorCode::ConfigError, k, "unsupported value type");
    }
  }
}

struct Command {
  explicit Command(CLI::App* a) : app(a) {}

  CLI::App* app;
  std::set<std::string> keys;
  std::map<std::string, std::string> flags;
  std::vector<std::string> param_flags;
  std::string config;

  void opt(const std::string& key, const std::string& names, const std::string& help) {
    keys.insert(key);
    app->add_option(names, flags[key], help);
  }

  Settings settings() {
    Settings s;
    if (!config.empty()) load_config(s, config, keys);
    for (const auto& [k, v] : flags)
      if (!v.empty()) s.values[k] = v;
    for (const auto& kv : param_flags) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, kv, "expected --param key=value");
      s.params[kv.substr(0, eq)] = parse_quantity(kv.substr(eq + 1));
    }
    return s;
  }
};

void add_common(Command& c, bool solver) {
  c.app->add_option("--config", c.config, "JSON config file; flags override its values");
  c.opt("output", "-o,--output", "output file (default: stdout)");
  c.opt("netlist", "--netlist", "built-in name (lorentz, fano) or netlist JSON path");
  c.keys.insert("params");
  c.app->add_option("--param", c.param_flags, "circuit parameter override key=value (built-in netlists)");
  if (solver) {
    c.opt("harmonics", "--harmonics", "harmonic order K");
    c.opt("samples", "--samples", "time samples per period N");
    c.opt("tol", "--tol", "Newton tolerance on the scaled residual");
    c.opt("threads", "--threads", "worker threads (env ISOSIM_THREADS)");
  }
}

HbOptions hb_options(const Settings& s) {
  HbOptions o;
  o.K = static_cast<int>(s.num("harmonics", o.K));
  o.N = static_cast<int>(s.num("samples", o.N));
  o.tol = s.num("tol", o.tol);
  HarmonicBasis{1.0, o.K, o.N}.check();
  if (!(o.tol > 0.0)) throw Error(ErrorCode::ConfigError, "tol", "must be positive");
  return o;
}

int thread_count(const Settings& s) {
  if (s.has("threads")) return std::max(1, static_cast<int>(s.num("threads", 1)));
  if (const char* env = std::getenv("ISOSIM_THREADS")) return std::max(1, std::atoi(env));
  return 1;
}

std::string netlist_name(const Settings& s) { return s.str("netlist", "lorentz"); }

IsolatorParams builtin_with_overrides(const Settings& s) {
  IsolatorParams p = builtin_params(netlist_name(s));
  for (const auto& [k, v] : s.params) apply_override(p, k, v);
  return p;
}

Netlist resolve_netlist(const Settings& s) {
  const auto name = netlist_name(s);
  if (is_builtin_netlist(name)) return reference_isolator(builtin_with_overrides(s));
  if (!s.params.empty()) throw Error(ErrorCode::ConfigError, "params", "overrides need a built-in netlist");
  return load_netlist(name);
}

template <class Fn>
void with_output(const Settings& s, Fn&& fn) {
  if (!s.has("output")) {
    fn(std::cout);
    return;
  }
  std::ofstream out(s.values.at("output"), std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, s.values.at("output"), "cannot write output file");
  fn(out);
}

int cmd_run(const Settings& s) {
  const auto opts = hb_options(s);
  SweepGrid grid;
  grid.delta = s.list("delta", "");
  grid.lj = s.list("lj", "H");
  for (double l : grid.lj)
    if (!(l > 0.0)) throw Error(ErrorCode::ConfigError, "lj", "values must be positive");
  const auto name = netlist_name(s);
  NetlistBuilder build;
  double f_design = 0.0;
  if (is_builtin_netlist(name)) {
    const auto p = builtin_with_overrides(s);
    build = isolator_builder(p);
    f_design = p.f_design;
    // Unswept built-in values still go in the CSV.
    if (grid.delta.empty()) grid.delta = {p.delta};
    if (grid.lj.empty() && p.ic1 == p.ic2) grid.lj = {lj0_from_ic(p.ic1)};
  } else {
    if (!grid.delta.empty() || !grid.lj.empty())
      throw Error(ErrorCode::ConfigError, "delta", "delta/lj sweeps need a built-in netlist");
    const auto n = resolve_netlist(s);
    build = fixed_builder(n);
    f_design = n.design_frequency;
  }
  grid.f0 = s.has("freq") ? s.list("freq", "Hz") : std::vector<double>{f_design};
  grid.power_dbm = s.has("power") ? s.list("power", "dBm") : std::vector<double>{-123.0};
  for (double f : grid.f0)
    if (!(f > 0.0)) throw Error(ErrorCode::ConfigError, "freq", "values must be positive");
  SweepOptions so{opts, thread_count(s)};
  const auto rows = sweep(build, grid, so);
  with_output(s, [&](std::ostream& os) { write_sweep_csv(os, rows); });

  std::size_t bad = 0;
  for (const auto& r : rows) bad += r.response.converged() ? 0 : 1;
  const double thr = s.num("threshold_db", 10.0);
  if (grid.delta.size() <= 1 && grid.lj.size() <= 1) {
    if (grid.power_dbm.size() == 1 && grid.f0.size() > 1)
      std::cerr << "spectral bandwidth at " << thr << " dB: " << spectral_bandwidth(rows, thr) / 1e6 << " MHz\n";
    if (grid.f0.size() == 1 && grid.power_dbm.size() > 1)
      std::cerr << "power bandwidth at " << thr << " dB: " << power_bandwidth(rows, thr) << " dB\n";
  }
  if (bad) {
    std::cerr << bad << " of " << rows.size() << " rows did not converge\n";
    return kPartial;
  }
  return kOk;
}

int cmd_quantize(const Settings& s) {
  const auto p = builtin_with_overrides(s);
  auto ljs = s.list("lj", "H");
  if (ljs.empty()) ljs = parse_range("6.5e-9:9.5e-9:0.05e-9", "H", "lj");
  for (double l : ljs)
    if (!(l > 0.0)) throw Error(ErrorCode::ConfigError, "lj", "values must be positive");
  const double lj2 = s.num("lj2", 8e-9, "H");
  if (!(lj2 > 0.0)) throw Error(ErrorCode::ConfigError, "lj2", "must be positive");
  const int nmax = static_cast<int>(s.num("nmax", 12));
  const auto coupling_name = s.str("coupling", "line-node");
  IslandCoupling coupling;
  if (coupling_name == "line-node") coupling = IslandCoupling::SharedLineNode;
  else if (coupling_name == "bridged") coupling = IslandCoupling::Bridged;
  else throw Error(ErrorCode::ConfigError, "coupling", "expected line-node or bridged");

  const auto system = isolator_system(p, ljs.front(), lj2, coupling, nmax);
  const auto rows = sweep_lj(system, ljs, lj2);
  with_output(s, [&](std::ostream& os) { write_branch_csv(os, rows); });
  if (rows.size() >= 5) {
    try {
      const auto x = find_avoided_crossing(rows);
      std::cerr << "avoided crossing: lj* = " << x.lj_star * 1e9 << " nH, gap = " << x.gap / 1e6 << " MHz\n";
    } catch (const Error& e) {
      std::cerr << "no interior gap minimum: " << e.what() << "\n";
    }
  }
  return kOk;
}

int cmd_validate(const Settings& s) {
  const auto opts = hb_options(s);
  const auto n = resolve_netlist(s);
  DriveSpec drive;
  drive.f0 = s.num("freq", n.design_frequency, "Hz");
  drive.power_dbm = s.num("power", -123.0, "dBm");
  drive.port = static_cast<int>(s.num("port", 1)) - 1;
  if (drive.port < 0 || drive.port >= static_cast<int>(n.ports.size()))
    throw Error(ErrorCode::ConfigError, "port", "no such port");
  TransientConfig tc;
  tc.dt = s.num("dt", 0.0, "s");
  tc.n_periods = static_cast<int>(s.num("n_periods", tc.n_periods));
  tc.settle_periods = static_cast<int>(s.num("settle_periods", tc.settle_periods));
  tc.ramp_periods = s.num("ramp_periods", 0.0);

  bool all = true;
  auto report = [&](const std::string& check, bool pass, const std::string& detail) {
    all = all && pass;
    std::printf("%-28s %s  %s\n", check.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  };

  // Jacobian against central differences at the solution and nearby iterates.
  try {
    const HarmonicBalance hb(n, drive.f0, opts);
    const double vs = drive.source_amplitude(n.ports[drive.port].z0);
    const auto sol = solve_hb(n, drive.f0, drive.port, drive.power_dbm, opts);
    std::mt19937 rng(7);
    std::normal_distribution<double> noise(0.0, 0.05);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      Eigen::VectorXd x = sol.state;
      if (i > 0)
        for (int c = 0; c < x.size(); ++c) x(c) *= 1.0 + noise(rng);
      worst = std::max(worst, jacobian_fd_error(hb, x, drive.port, vs));
    }
    report("jacobian_fd", worst < 1e-6, detail::fmt("max rel error %.3e", worst));
  } catch (const Error& e) {
    report("jacobian_fd", false, e.what());
  }

  try {
    const auto cmp = compare_hb_transient(n, drive, opts, tc);
    report("hb_vs_transient", cmp.rel_diff_t < 0.02 && cmp.rel_diff_fundamental < 0.02,
           detail::fmt("|t| rel diff %.3e", cmp.rel_diff_t) + detail::fmt(", node V1 rel diff %.3e", cmp.rel_diff_fundamental) +
               detail::fmt(", |t_hb| %.5f", std::abs(cmp.t_hb)) + detail::fmt(", |t_tr| %.5f", std::abs(cmp.t_transient)));
  } catch (const Error& e) {
    report("hb_vs_transient", false, e.what());
  }
  return all ? kOk : kValidation;
}

int cmd_plot(const Settings& s) {
  if (!s.has("input")) throw Error(ErrorCode::ConfigError, "input", "missing CSV input");
  std::ifstream in(s.values.at("input"));
  if (!in) throw Error(ErrorCode::ConfigError, s.values.at("input"), "cannot open CSV");
  const auto table = read_csv(in);
  const auto svg = plot_csv(table, s.str("kind", "isolation_vs_power"));
  with_output(s, [&](std::ostream& os) { os << svg; });
  return kOk;
}

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::SchemaMismatch:
    case ErrorCode::DomainError:
    case ErrorCode::UnknownNode:
    case ErrorCode::DisconnectedGraph:
    case ErrorCode::NonPositiveValue:
    case ErrorCode::PortCount:
    case ErrorCode::DuplicateName:
    case ErrorCode::InvalidNetlist:
    case ErrorCode::EmptySweep:
      return kConfig;
    default:
      return kInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isosim: harmonic-balance simulation of qubit-based microwave isolators"};
  app.require_subcommand(1);

  Command run{app.add_subcommand("run", "two-port sweep over frequency, power, delta and L_J")};
  add_common(run, true);
  run.opt("freq", "--freq", "frequencies in Hz (start:stop:step or list)");
  run.opt("power", "--power", "available powers in dBm");
  run.opt("delta", "--delta", "detuning coefficients (built-in netlists)");
  run.opt("lj", "--lj", "junction inductances in H (built-in netlists)");
  run.opt("threshold_db", "--threshold-db", "isolation threshold for bandwidth summaries");

  Command quant{app.add_subcommand("quantize", "charge-basis spectrum versus L_J of qubit 1")};
  add_common(quant, false);
  quant.opt("lj", "--lj", "qubit-1 inductances in H");
  quant.opt("lj2", "--lj2", "fixed qubit-2 inductance in H");
  quant.opt("nmax", "--nmax", "charge cutoff per island");
  quant.opt("coupling", "--coupling", "island coupling model: line-node or bridged");

  Command val{app.add_subcommand("validate", "Jacobian and transient cross-checks at one operating point")};
  add_common(val, true);
  val.opt("freq", "--freq", "drive frequency in Hz");
  val.opt("power", "--power", "available power in dBm");
  val.opt("port", "--port", "driven port (1 or 2)");
  val.opt("dt", "--dt", "transient step in s");
  val.opt("n_periods", "--periods", "transient length in drive periods");
  val.opt("settle_periods", "--settle", "periods discarded before analysis");
  val.opt("ramp_periods", "--ramp", "drive ramp length in periods");

  Command plot{app.add_subcommand("plot", "SVG figure from a run or quantize CSV")};
  plot.app->add_option("--config", plot.config, "JSON config file");
  plot.opt("input", "--input", "CSV produced by run or quantize");
  plot.opt("kind", "--kind", "isolation_vs_power, spectra_vs_freq or eigen_branches");
  plot.opt("output", "-o,--output", "SVG output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run.app) return cmd_run(run.settings());
    if (*quant.app) return cmd_quantize(quant.settings());
    if (*val.app) return cmd_validate(val.settings());
    if (*plot.app) return cmd_plot(plot.settings());
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
