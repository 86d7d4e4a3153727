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

// Circuit data model: lumped R/L/C elements, Josephson junctions and ideal
// transmission-line segments, plus the two reference isolator circuits.

#ifndef ISOSIM_NETLIST_HPP
#define ISOSIM_NETLIST_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "isosim/constants.hpp"
#include "isosim/error.hpp"

namespace isosim {

inline constexpr const char* kGround = "0";

struct Resistor {
  double r;
};
struct Capacitor {
  double c;
};
struct Inductor {
  double l;
};

inline double lj0_from_ic(double ic) {
  if (!(ic > 0.0)) throw Error(ErrorCode::DomainError, "ic", "critical current must be positive");
  return constants::Phi0 / (2.0 * constants::pi * ic);
}

inline double ic_from_lj0(double lj0) {
  if (!(lj0 > 0.0)) throw Error(ErrorCode::DomainError, "lj0", "inductance must be positive");
  return constants::Phi0 / (2.0 * constants::pi * lj0);
}

/// Junction with critical current `ic` and a series loss resistance.
struct JosephsonJunction {
  double ic;
  double r_series = 0.0;

  double lj0() const { return lj0_from_ic(ic); }
  /// Josephson energy Phi0*Ic/(2*pi), in joules.
  double ej() const { return constants::Phi0 * ic / (2.0 * constants::pi); }
};

/// Ideal lossless line; both ends referenced to ground. A zero delay is an
/// ideal through connection.
struct TransmissionLine {
  double z0;
  double delay;
};

using ElementKind = std::variant<Resistor, Capacitor, Inductor, JosephsonJunction, TransmissionLine>;

struct Element {
  std::string name;
  ElementKind kind;
  std::vector<std::string> nodes;

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(kind);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(kind);
  }
  template <class T>
  T& as() {
    return std::get<T>(kind);
  }
};

struct Port {
  std::string node;
  double z0 = 50.0;
};

struct Netlist {
  double design_frequency = 0.0;
  std::vector<std::string> nodes;
  std::vector<Element> elements;
  std::vector<Port> ports;

  void add_node(const std::string& n) {
    if (n == kGround) return;
    if (std::find(nodes.begin(), nodes.end(), n) == nodes.end()) nodes.push_back(n);
  }

  Netlist& add(std::string name, ElementKind kind, std::vector<std::string> element_nodes) {
    for (const auto& n : element_nodes) add_node(n);
    elements.push_back({std::move(name), kind, std::move(element_nodes)});
    return *this;
  }

  Netlist& add_port(const std::string& node, double z0 = 50.0) {
    add_node(node);
    ports.push_back({node, z0});
    return *this;
  }

  const Element* find(const std::string& name) const {
    for (const auto& el : elements)
      if (el.name == name) return &el;
    return nullptr;
  }
  Element* find(const std::string& name) {
    for (auto& el : elements)
      if (el.name == name) return &el;
    return nullptr;
  }

  std::size_t junction_count() const {
    return static_cast<std::size_t>(std::count_if(elements.begin(), elements.end(), [](const Element& el) {
      return el.is<JosephsonJunction>();
    }));
  }

  bool operator==(const Netlist&) const = default;
};

inline bool operator==(const Resistor& a, const Resistor& b) { return a.r == b.r; }
inline bool operator==(const Capacitor& a, const Capacitor& b) { return a.c == b.c; }
inline bool operator==(const Inductor& a, const Inductor& b) { return a.l == b.l; }
inline bool operator==(const JosephsonJunction& a, const JosephsonJunction& b) {
  return a.ic == b.ic && a.r_series == b.r_series;
}
inline bool operator==(const TransmissionLine& a, const TransmissionLine& b) {
  return a.z0 == b.z0 && a.delay == b.delay;
}
inline bool operator==(const Element& a, const Element& b) {
  return a.name == b.name && a.kind == b.kind && a.nodes == b.nodes;
}
inline bool operator==(const Port& a, const Port& b) { return a.node == b.node && a.z0 == b.z0; }

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

/// Ground-referenced endpoints of an element. Lines may list 2 nodes, or 4 as
/// (a, 0, b, 0).
inline std::vector<std::string> terminal_nodes(const Element& el) {
  if (el.is<TransmissionLine>() && el.nodes.size() == 4) return {el.nodes[0], el.nodes[2]};
  return el.nodes;
}

inline void require_positive(const Element& el, double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw Error(ErrorCode::NonPositiveValue, el.name, std::string(what) + " must be positive and finite");
}

}  // namespace detail

/// Checks every structural and value invariant. Returns a copy of the netlist
/// when it is well formed.
inline Netlist validate(const Netlist& netlist) {
  if (!(netlist.design_frequency > 0.0) || !std::isfinite(netlist.design_frequency))
    throw Error(ErrorCode::NonPositiveValue, "design_frequency", "must be positive");

  std::map<std::string, std::size_t> index;
  index[kGround] = 0;
  for (const auto& n : netlist.nodes) {
    if (n.empty()) throw Error(ErrorCode::InvalidNetlist, n, "empty node name");
    index.emplace(n, index.size());
  }

  std::set<std::string> names;
  detail::UnionFind uf(index.size());
  for (const auto& el : netlist.elements) {
    if (el.name.empty()) throw Error(ErrorCode::InvalidNetlist, "", "element without a name");
    if (!names.insert(el.name).second) throw Error(ErrorCode::DuplicateName, el.name);

    const bool line = el.is<TransmissionLine>();
    if (line) {
      if (el.nodes.size() == 4) {
        if (el.nodes[1] != kGround || el.nodes[3] != kGround)
          throw Error(ErrorCode::InvalidNetlist, el.name, "line node pairs must be referenced to ground");
      } else if (el.nodes.size() != 2) {
        throw Error(ErrorCode::InvalidNetlist, el.name, "line needs 2 or 4 nodes");
      }
    } else if (el.nodes.size() != 2) {
      throw Error(ErrorCode::InvalidNetlist, el.name, "element needs exactly 2 nodes");
    }
    for (const auto& n : el.nodes)
      if (!index.count(n)) throw Error(ErrorCode::UnknownNode, n, "referenced by element " + el.name);

    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Resistor>) detail::require_positive(el, v.r, "r");
          if constexpr (std::is_same_v<T, Capacitor>) detail::require_positive(el, v.c, "c");
          if constexpr (std::is_same_v<T, Inductor>) detail::require_positive(el, v.l, "l");
          if constexpr (std::is_same_v<T, JosephsonJunction>) {
            detail::require_positive(el, v.ic, "ic");
            if (!(v.r_series >= 0.0) || !std::isfinite(v.r_series))
              throw Error(ErrorCode::NonPositiveValue, el.name, "r_series must be >= 0");
          }
          if constexpr (std::is_same_v<T, TransmissionLine>) {
            detail::require_positive(el, v.z0, "z0");
            if (!(v.delay >= 0.0) || !std::isfinite(v.delay))
              throw Error(ErrorCode::NonPositiveValue, el.name, "delay must be >= 0");
          }
        },
        el.kind);

    const auto ends = detail::terminal_nodes(el);
    uf.unite(index.at(ends[0]), index.at(ends[1]));
    if (line) uf.unite(index.at(ends[0]), 0);
  }

  if (netlist.ports.size() != 2)
    throw Error(ErrorCode::PortCount, std::to_string(netlist.ports.size()), "exactly two ports required");
  for (const auto& p : netlist.ports) {
    if (!index.count(p.node)) throw Error(ErrorCode::UnknownNode, p.node, "referenced by a port");
    if (!(p.z0 > 0.0)) throw Error(ErrorCode::NonPositiveValue, "port:" + p.node, "z0 must be positive");
    // A terminated port is itself an AC/DC path to ground.
    uf.unite(index.at(p.node), 0);
  }

  for (const auto& [name, i] : index)
    if (uf.find(i) != uf.find(0)) throw Error(ErrorCode::DisconnectedGraph, name, "no path to ground");

  return netlist;
}

struct DetuningDelay {
  double d;      ///< inter-qubit spacing, m
  double delay;  ///< s
  double phase_at_f_design;
};

/// Spacing d = lambda (1 - delta/pi) / 2 and the matching line delay.
inline DetuningDelay delay_from_detuning(double delta, double f_design, double v_p = constants::c_light) {
  if (!(delta >= 0.0 && delta < constants::pi))
    throw Error(ErrorCode::DomainError, "delta", "detuning must lie in [0, pi)");
  if (!(f_design > 0.0)) throw Error(ErrorCode::DomainError, "f_design", "must be positive");
  if (!(v_p > 0.0)) throw Error(ErrorCode::DomainError, "v_p", "must be positive");
  const double frac = (1.0 - delta / constants::pi) / 2.0;
  const double d = v_p / f_design * frac;
  const double delay = frac / f_design;
  return {d, delay, constants::pi - delta};
}

/// Where the extra Fano capacitors sit.
enum class FanoPlacement {
  LineShunt,       ///< C1/C2 from the line nodes to ground
  SeriesCoupling,  ///< C1/C2 in series between the line node and C_D
};

/// Parameters of the two-transmon isolator. C_Q1 = C_Q2 (1 + delta).
struct IsolatorParams {
  double cq2 = 63e-15;
  double cd = 60e-15;
  double delta = 0.09;
  double ic1 = 40e-9;
  double ic2 = 40e-9;
  double rj = 0.5;
  double f_design = 4.9e9;
  double z0 = 50.0;
  double v_p = constants::c_light;
  double c1 = 0.0;
  double c2 = 0.0;
  FanoPlacement placement = FanoPlacement::LineShunt;

  double cq1() const { return cq2 * (1.0 + delta); }
  void set_lj(double lj) { ic1 = ic2 = ic_from_lj0(lj); }
};

inline IsolatorParams lorentz_defaults() { return IsolatorParams{}; }

inline IsolatorParams fano_defaults() {
  IsolatorParams p;
  p.c1 = 26e-15;
  p.c2 = 26e-15;
  p.f_design = 8.98e9;
  return p;
}

/// Overrides one named parameter; names follow the netlist JSON/CLI keys.
inline void apply_override(IsolatorParams& p, const std::string& key, double value) {
  if (key == "cq2") p.cq2 = value;
  else if (key == "cd") p.cd = value;
  else if (key == "delta") p.delta = value;
  else if (key == "ic") p.ic1 = p.ic2 = value;
  else if (key == "ic1") p.ic1 = value;
  else if (key == "ic2") p.ic2 = value;
  else if (key == "lj") p.set_lj(value);
  else if (key == "lj1") p.ic1 = ic_from_lj0(value);
  else if (key == "lj2") p.ic2 = ic_from_lj0(value);
  else if (key == "rj") p.rj = value;
  else if (key == "f_design") p.f_design = value;
  else if (key == "z0") p.z0 = value;
  else if (key == "v_p") p.v_p = value;
  else if (key == "c1") p.c1 = value;
  else if (key == "c2") p.c2 = value;
  else throw Error(ErrorCode::ConfigError, key, "unknown circuit parameter");
}

/// Two side-coupled transmons on a line of length d between ports a and b:
///
///   port1 - a ========= line(d) ========= b - port2
///           |                             |
///          C_D                           C_D
///           |                             |
///          q1 = JJ1(+R_J) || C_Q1        q2 = JJ2(+R_J) || C_Q2
///
/// With c1/c2 > 0 the Fano capacitors are added per `placement`.
inline Netlist reference_isolator(const IsolatorParams& p) {
  Netlist n;
  n.design_frequency = p.f_design;
  n.nodes = {"a", "b", "q1", "q2"};
  const auto dl = delay_from_detuning(p.delta, p.f_design, p.v_p);

  std::string tap1 = "a", tap2 = "b";
  if (p.placement == FanoPlacement::SeriesCoupling) {
    if (p.c1 > 0.0) {
      n.add("C1", Capacitor{p.c1}, {"a", "a1"});
      tap1 = "a1";
    }
    if (p.c2 > 0.0) {
      n.add("C2", Capacitor{p.c2}, {"b", "b1"});
      tap2 = "b1";
    }
  }
  n.add("CD1", Capacitor{p.cd}, {tap1, "q1"});
  n.add("CQ1", Capacitor{p.cq1()}, {"q1", kGround});
  n.add("J1", JosephsonJunction{p.ic1, p.rj}, {"q1", kGround});
  n.add("TL", TransmissionLine{p.z0, dl.delay}, {"a", "b"});
  n.add("CD2", Capacitor{p.cd}, {tap2, "q2"});
  n.add("CQ2", Capacitor{p.cq2}, {"q2", kGround});
  n.add("J2", JosephsonJunction{p.ic2, p.rj}, {"q2", kGround});
  if (p.placement == FanoPlacement::LineShunt) {
    if (p.c1 > 0.0) n.add("C1", Capacitor{p.c1}, {"a", kGround});
    if (p.c2 > 0.0) n.add("C2", Capacitor{p.c2}, {"b", kGround});
  }
  n.add_port("a", p.z0);
  n.add_port("b", p.z0);
  return validate(n);
}

inline Netlist reference_lorentz(IsolatorParams p = lorentz_defaults()) {
  p.c1 = p.c2 = 0.0;
  return reference_isolator(p);
}

inline Netlist reference_fano(const IsolatorParams& p = fano_defaults()) { return reference_isolator(p); }

/// One transmon side-coupled through C_D to a matched through line.
inline Netlist single_transmon(double cq = 63e-15, double cd = 60e-15, double ic = 40e-9, double rj = 0.5,
                               double z0 = 50.0) {
  Netlist n;
  n.design_frequency = 4.9e9;
  n.nodes = {"a", "q"};
  n.add("CD", Capacitor{cd}, {"a", "q"});
  n.add("CQ", Capacitor{cq}, {"q", kGround});
  n.add("J", JosephsonJunction{ic, rj}, {"q", kGround});
  n.add_port("a", z0);
  n.add_port("a", z0);
  return validate(n);
}

/// Same circuit with each junction replaced by its zero-current inductance
/// L_J0 (in series with R_J through an added internal node).
inline Netlist linearized(const Netlist& src) {
  Netlist out;
  out.design_frequency = src.design_frequency;
  out.nodes = src.nodes;
  out.ports = src.ports;
  for (const auto& el : src.elements) {
    if (!el.is<JosephsonJunction>()) {
      out.elements.push_back(el);
      continue;
    }
    const auto& jj = el.as<JosephsonJunction>();
    if (jj.r_series > 0.0) {
      const std::string mid = el.name + ".int";
      out.add(el.name + ".R", Resistor{jj.r_series}, {el.nodes[0], mid});
      out.add(el.name, Inductor{jj.lj0()}, {mid, el.nodes[1]});
    } else {
      out.add(el.name, Inductor{jj.lj0()}, el.nodes);
    }
  }
  return out;
}

/// Mirror image: port order swapped. Reversing the line is implicit since
/// lines are symmetric two-ports.
inline Netlist mirrored(const Netlist& src) {
  Netlist out = src;
  std::swap(out.ports[0], out.ports[1]);
  return out;
}

}  // namespace isosim

#endif  // ISOSIM_NETLIST_HPP
