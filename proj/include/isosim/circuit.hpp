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

// Index-based form of a netlist shared by the AC, harmonic-balance and
// transient solvers. Nodes joined by zero-delay lines are merged.

#ifndef ISOSIM_CIRCUIT_HPP
#define ISOSIM_CIRCUIT_HPP

#include <map>
#include <string>
#include <vector>

#include "isosim/netlist.hpp"

namespace isosim {

enum class JunctionTreatment {
  LinearizedAtZero,  ///< series R_J + L_J0 branch
  Omitted,           ///< junction removed
  Nonlinear,         ///< kept as Ic sin(phi); R_J gets an internal node
};

struct CompiledCircuit {
  static constexpr int kGroundIndex = -1;

  struct TwoTerminal {
    std::string name;
    int a;
    int b;
    double value;
  };
  /// Series R + L branch; inductors have r = 0.
  struct SeriesRL {
    std::string name;
    int a;
    int b;
    double r;
    double l;
  };
  struct Line {
    std::string name;
    int a;
    int b;
    double z0;
    double delay;
  };
  struct Junction {
    std::string name;
    int p;
    int n;
    double ic;
  };
  struct PortRef {
    int node;
    double z0;
  };

  std::vector<std::string> node_names;  ///< row order
  std::map<std::string, int> node_index;  ///< every netlist node (merged nodes share a row)
  std::vector<TwoTerminal> resistors;
  std::vector<TwoTerminal> capacitors;
  std::vector<SeriesRL> series_rl;
  std::vector<Line> lines;
  std::vector<Junction> junctions;
  std::vector<PortRef> ports;

  int size() const { return static_cast<int>(node_names.size()); }

  int index_of(const std::string& name) const {
    if (name == kGround) return kGroundIndex;
    auto it = node_index.find(name);
    if (it == node_index.end()) throw Error(ErrorCode::UnknownNode, name);
    return it->second;
  }
};

inline CompiledCircuit compile(const Netlist& netlist, JunctionTreatment treatment) {
  CompiledCircuit c;

  // Merge nodes connected by ideal zero-length lines.
  std::map<std::string, std::size_t> raw;
  raw[kGround] = 0;
  for (const auto& n : netlist.nodes) raw.emplace(n, raw.size());
  detail::UnionFind uf(raw.size());
  for (const auto& el : netlist.elements) {
    if (el.is<TransmissionLine>() && el.as<TransmissionLine>().delay == 0.0) {
      const auto ends = detail::terminal_nodes(el);
      uf.unite(raw.at(ends[0]), raw.at(ends[1]));
    }
  }
  std::map<std::size_t, int> rep_row;
  const std::size_t ground_rep = uf.find(0);
  for (const auto& n : netlist.nodes) {
    const std::size_t rep = uf.find(raw.at(n));
    if (rep == ground_rep) {
      c.node_index[n] = CompiledCircuit::kGroundIndex;
      continue;
    }
    auto [it, fresh] = rep_row.emplace(rep, c.size());
    if (fresh) c.node_names.push_back(n);
    c.node_index[n] = it->second;
  }

  for (const auto& el : netlist.elements) {
    const auto ends = detail::terminal_nodes(el);
    const int a = c.index_of(ends[0]);
    const int b = c.index_of(ends[1]);
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Resistor>) c.resistors.push_back({el.name, a, b, v.r});
          if constexpr (std::is_same_v<T, Capacitor>) c.capacitors.push_back({el.name, a, b, v.c});
          if constexpr (std::is_same_v<T, Inductor>) c.series_rl.push_back({el.name, a, b, 0.0, v.l});
          if constexpr (std::is_same_v<T, TransmissionLine>) {
            if (v.delay > 0.0) c.lines.push_back({el.name, a, b, v.z0, v.delay});
          }
          if constexpr (std::is_same_v<T, JosephsonJunction>) {
            switch (treatment) {
              case JunctionTreatment::Omitted:
                break;
              case JunctionTreatment::LinearizedAtZero:
                c.series_rl.push_back({el.name, a, b, v.r_series, v.lj0()});
                break;
              case JunctionTreatment::Nonlinear:
                if (v.r_series > 0.0) {
                  const std::string mid = el.name + ":j";
                  const int m = c.size();
                  c.node_names.push_back(mid);
                  c.node_index[mid] = m;
                  c.resistors.push_back({el.name + ":R", a, m, v.r_series});
                  c.junctions.push_back({el.name, m, b, v.ic});
                } else {
                  c.junctions.push_back({el.name, a, b, v.ic});
                }
                break;
            }
          }
        },
        el.kind);
  }
  for (const auto& p : netlist.ports) c.ports.push_back({c.index_of(p.node), p.z0});
  return c;
}

}  // namespace isosim

#endif  // ISOSIM_CIRCUIT_HPP
