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


// Netlist JSON files, quantity strings with unit suffixes, the quantizer CSV
// table and a small CSV reader.

#ifndef ISOSIM_IO_HPP
#define ISOSIM_IO_HPP

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "isosim/netlist.hpp"
#include "isosim/quantizer.hpp"

namespace isosim {

using json = nlohmann::json;

/// "68.67fF", "8 nH", "4.9GHz", "-123dBm", "50Ohm" or a plain number.
/// `unit` (if nonempty) is the only unit accepted besides a bare number.
inline double parse_quantity(const std::string& text, const std::string& unit = "") {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, text, "not a number");
  }
  std::string rest = text.substr(pos);
  rest.erase(0, rest.find_first_not_of(' '));
  if (rest.empty()) return value;
  if (rest == "dBm") {
    if (!unit.empty() && unit != "dBm") throw Error(ErrorCode::ConfigError, text, "expected unit " + unit);
    return value;
  }
  static const std::map<char, double> prefixes = {{'f', 1e-15}, {'p', 1e-12}, {'n', 1e-9}, {'u', 1e-6},
                                                  {'m', 1e-3},  {'k', 1e3},   {'M', 1e6},  {'G', 1e9}, {'T', 1e12}};
  static const std::set<std::string> units = {"F", "H", "Hz", "s", "A", "Ohm", "V"};
  // A bare prefix ("60f") takes the expected unit.
  if (rest.size() == 1 && prefixes.contains(rest[0])) return value * prefixes.at(rest[0]);
  double scale = 1.0;
  std::string base = rest;
  if (!units.contains(rest) && rest.size() > 1 && prefixes.contains(rest[0])) {
    scale = prefixes.at(rest[0]);
    base = rest.substr(1);
  }
  if (!units.contains(base)) throw Error(ErrorCode::ConfigError, text, "unknown unit");
  if (!unit.empty() && base != unit) throw Error(ErrorCode::ConfigError, text, "expected unit " + unit);
  return value * scale;
}

inline double quantity(const json& v, const std::string& unit, const std::string& key) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_quantity(v.get<std::string>(), unit);
  throw Error(ErrorCode::ConfigError, key, "expected a number or quantity string");
}

namespace detail {

inline void require_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (!allowed.contains(k)) throw Error(ErrorCode::ConfigError, where + "." + k, "unknown key");
}

inline const json& need(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorCode::ConfigError, where + "." + key, "missing key");
  return obj.at(key);
}

}  // namespace detail

/// Parses a netlist document. Unknown keys are rejected.
inline Netlist netlist_from_json(const json& doc) {
  detail::require_keys(doc, {"design_frequency_hz", "nodes", "elements", "ports"}, "netlist");
  Netlist n;
  n.design_frequency = quantity(detail::need(doc, "design_frequency_hz", "netlist"), "Hz", "design_frequency_hz");
  if (doc.contains("nodes"))
    for (const auto& v : doc.at("nodes")) n.add_node(v.get<std::string>());
  for (const auto& el : detail::need(doc, "elements", "netlist")) {
    detail::require_keys(el, {"type", "name", "nodes", "params"}, "element");
    const auto type = detail::need(el, "type", "element").get<std::string>();
    const auto name = detail::need(el, "name", "element").get<std::string>();
    const auto nodes = detail::need(el, "nodes", name).get<std::vector<std::string>>();
    const json params = el.value("params", json::object());
    const std::string where = name + ".params";
    auto get = [&](const char* key, const char* unit) { return quantity(detail::need(params, key, where), unit, key); };
    ElementKind kind;
    if (type == "resistor") {
      detail::require_keys(params, {"r_ohm"}, where);
      kind = Resistor{get("r_ohm", "Ohm")};
    } else if (type == "capacitor") {
      detail::require_keys(params, {"c_f"}, where);
      kind = Capacitor{get("c_f", "F")};
    } else if (type == "inductor") {
      detail::require_keys(params, {"l_h"}, where);
      kind = Inductor{get("l_h", "H")};
    } else if (type == "jj") {
      detail::require_keys(params, {"ic_a", "lj_h", "r_series_ohm"}, where);
      if (params.contains("ic_a") == params.contains("lj_h"))
        throw Error(ErrorCode::ConfigError, where, "give exactly one of ic_a, lj_h");
      const double ic = params.contains("ic_a") ? get("ic_a", "A") : ic_from_lj0(get("lj_h", "H"));
      kind = JosephsonJunction{ic, params.contains("r_series_ohm") ? get("r_series_ohm", "Ohm") : 0.0};
    } else if (type == "tline") {
      detail::require_keys(params, {"z0_ohm", "delay_s"}, where);
      kind = TransmissionLine{get("z0_ohm", "Ohm"), get("delay_s", "s")};
    } else {
      throw Error(ErrorCode::ConfigError, name + ".type", "unknown element type '" + type + "'");
    }
    n.add(name, kind, nodes);
  }
  for (const auto& p : detail::need(doc, "ports", "netlist")) {
    detail::require_keys(p, {"node", "z0_ohm"}, "port");
    n.add_port(detail::need(p, "node", "port").get<std::string>(),
               p.contains("z0_ohm") ? quantity(p.at("z0_ohm"), "Ohm", "z0_ohm") : 50.0);
  }
  return validate(n);
}

inline json netlist_to_json(const Netlist& n) {
  json doc;
  doc["design_frequency_hz"] = n.design_frequency;
  doc["nodes"] = n.nodes;
  doc["elements"] = json::array();
  for (const auto& el : n.elements) {
    json e{{"name", el.name}, {"nodes", el.nodes}};
    std::visit(
        [&](const auto& k) {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, Resistor>) {
            e["type"] = "resistor";
            e["params"] = {{"r_ohm", k.r}};
          } else if constexpr (std::is_same_v<T, Capacitor>) {
            e["type"] = "capacitor";
            e["params"] = {{"c_f", k.c}};
          } else if constexpr (std::is_same_v<T, Inductor>) {
            e["type"] = "inductor";
            e["params"] = {{"l_h", k.l}};
          } else if constexpr (std::is_same_v<T, JosephsonJunction>) {
            e["type"] = "jj";
            e["params"] = {{"ic_a", k.ic}, {"r_series_ohm", k.r_series}};
          } else {
            e["type"] = "tline";
            e["params"] = {{"z0_ohm", k.z0}, {"delay_s", k.delay}};
          }
        },
        el.kind);
    doc["elements"].push_back(e);
  }
  doc["ports"] = json::array();
  for (const auto& p : n.ports) doc["ports"].push_back({{"node", p.node}, {"z0_ohm", p.z0}});
  return doc;
}

inline bool is_builtin_netlist(const std::string& name) { return name == "lorentz" || name == "fano"; }

inline IsolatorParams builtin_params(const std::string& name) {
  if (name == "lorentz") return lorentz_defaults();
  if (name == "fano") return fano_defaults();
  throw Error(ErrorCode::ConfigError, name, "unknown built-in netlist");
}

/// A built-in name ("lorentz", "fano") or a path to a netlist JSON file.
inline Netlist load_netlist(const std::string& name_or_path) {
  if (is_builtin_netlist(name_or_path)) return reference_isolator(builtin_params(name_or_path));
  std::ifstream in(name_or_path);
  if (!in) throw Error(ErrorCode::ConfigError, name_or_path, "cannot open netlist file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, name_or_path, e.what());
  }
  return netlist_from_json(doc);
}

inline constexpr const char* kQuantizerCsvHeader = "lj_h,f01_hz,f02_hz,gap_hz,ej_over_ec,nmax,convergence_hz";

inline void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows) {
  os << kQuantizerCsvHeader << "\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.9e,%.9e,%.9e,%.9e,%.9g,%d,%.6e\n", r.lj, r.f1, r.f2, r.gap, r.ej_over_ec,
                  r.n_max, r.convergence);
    os << buf;
  }
}

/// Header plus numeric columns. Non-numeric cells read as NaN.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
  std::vector<double> values(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw Error(ErrorCode::SchemaMismatch, name, "missing column");
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(c < static_cast<int>(r.size()) ? r[c] : std::nan(""));
    return out;
  }
  void require(const std::vector<std::string>& names) const {
    std::string missing;
    for (const auto& n : names)
      if (column(n) < 0) missing += (missing.empty() ? "" : ",") + n;
    if (!missing.empty()) throw Error(ErrorCode::SchemaMismatch, missing, "missing columns");
  }
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(cell);
    return out;
  };
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaMismatch, "header", "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      row.push_back(end != cell.c_str() ? v : std::nan(""));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace isosim

#endif  // ISOSIM_IO_HPP
