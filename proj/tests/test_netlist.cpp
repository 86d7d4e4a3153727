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


#include <gtest/gtest.h>

#include <cmath>

#include "isosim/netlist.hpp"

using namespace isosim;

namespace {

Netlist two_port_rc() {
  Netlist n;
  n.design_frequency = 5e9;
  n.add("R", Resistor{50.0}, {"a", "b"});
  n.add("C", Capacitor{1e-12}, {"b", kGround});
  n.add_port("a");
  n.add_port("b");
  return n;
}

ErrorCode code_of(const Netlist& n) {
  try {
    validate(n);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ConfigError;  // sentinel: no error
}

}  // namespace

TEST(Validate, AcceptsWellFormedNetlist) { EXPECT_NO_THROW(validate(two_port_rc())); }

TEST(Validate, UnknownNode) {
  auto n = two_port_rc();
  n.elements.push_back({"X", Capacitor{1e-15}, {"b", "nowhere"}});
  EXPECT_EQ(code_of(n), ErrorCode::UnknownNode);
}

TEST(Validate, DisconnectedIsland) {
  auto n = two_port_rc();
  n.add("Cf", Capacitor{1e-15}, {"x", "y"});
  EXPECT_EQ(code_of(n), ErrorCode::DisconnectedGraph);
}

TEST(Validate, NonPositiveValues) {
  auto n = two_port_rc();
  n.elements[1].as<Capacitor>().c = 0.0;
  EXPECT_EQ(code_of(n), ErrorCode::NonPositiveValue);
  auto m = two_port_rc();
  m.add("J", JosephsonJunction{-1e-9, 0.0}, {"b", kGround});
  EXPECT_EQ(code_of(m), ErrorCode::NonPositiveValue);
}

TEST(Validate, PortCountAndDuplicates) {
  auto n = two_port_rc();
  n.ports.pop_back();
  EXPECT_EQ(code_of(n), ErrorCode::PortCount);
  auto m = two_port_rc();
  m.add("R", Resistor{1.0}, {"a", kGround});
  EXPECT_EQ(code_of(m), ErrorCode::DuplicateName);
}

TEST(Junction, InductanceFromCriticalCurrent) {
  EXPECT_NEAR(lj0_from_ic(40e-9), 8.228e-9, 0.005e-9);
  EXPECT_NEAR(ic_from_lj0(lj0_from_ic(37e-9)), 37e-9, 1e-20);
  EXPECT_THROW(lj0_from_ic(0.0), Error);
  // E_J = phi0^2 / L_J0.
  const JosephsonJunction jj{40e-9, 0.0};
  EXPECT_NEAR(jj.ej(), constants::phi0 * constants::phi0 / jj.lj0(), 1e-35);
}

TEST(Detuning, LineLengthFormula) {
  const double lambda = constants::c_light / 4.9e9;
  const auto d0 = delay_from_detuning(0.0, 4.9e9);
  EXPECT_NEAR(d0.d, lambda / 2.0, 1e-12);
  const auto d = delay_from_detuning(0.09, 4.9e9);
  EXPECT_NEAR(d.d, lambda * (1.0 - 0.09 / constants::pi) / 2.0, 1e-12);
  EXPECT_NEAR(d.delay, d.d / constants::c_light, 1e-20);
  EXPECT_NEAR(d.phase_at_f_design, constants::pi - 0.09, 1e-12);
  EXPECT_THROW(delay_from_detuning(-0.1, 4.9e9), Error);
  EXPECT_THROW(delay_from_detuning(constants::pi, 4.9e9), Error);
}

TEST(Reference, LorentzTopology) {
  const auto n = reference_lorentz();
  EXPECT_EQ(n.ports.size(), 2u);
  EXPECT_EQ(n.junction_count(), 2u);
  EXPECT_NEAR(n.find("CQ1")->as<Capacitor>().c, 68.67e-15, 1e-18);
  EXPECT_NEAR(n.find("CQ2")->as<Capacitor>().c, 63e-15, 1e-18);
  EXPECT_EQ(n.find("C1"), nullptr);
}

TEST(Reference, FanoAddsCapacitors) {
  auto p = fano_defaults();
  const auto shunt = reference_fano(p);
  ASSERT_NE(shunt.find("C1"), nullptr);
  EXPECT_EQ(shunt.find("C1")->nodes[1], kGround);
  p.placement = FanoPlacement::SeriesCoupling;
  const auto series = reference_fano(p);
  EXPECT_EQ(series.find("CD1")->nodes[0], "a1");
}

TEST(Reference, OverridesAreStrict) {
  auto p = lorentz_defaults();
  apply_override(p, "lj", 8e-9);
  EXPECT_NEAR(lj0_from_ic(p.ic1), 8e-9, 1e-20);
  EXPECT_THROW(apply_override(p, "bogus", 1.0), Error);
}

TEST(Transforms, MirrorAndLinearize) {
  const auto n = reference_lorentz();
  const auto m = mirrored(n);
  EXPECT_EQ(m.ports[0], n.ports[1]);
  EXPECT_EQ(mirrored(m), n);
  const auto lin = linearized(n);
  EXPECT_EQ(lin.junction_count(), 0u);
  ASSERT_NE(lin.find("J1"), nullptr);
  EXPECT_TRUE(lin.find("J1")->is<Inductor>());
  EXPECT_NO_THROW(validate(lin));
}

TEST(Validate, ZeroDelayLineIsAWire) {
  Netlist n;
  n.design_frequency = 5e9;
  n.add("W", TransmissionLine{50.0, 0.0}, {"a", "b"});
  n.add_port("a");
  n.add_port("b");
  EXPECT_NO_THROW(validate(n));
}
