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
#include <sstream>

#include "isosim/linmap.hpp"
#include "isosim/response.hpp"

using namespace isosim;

namespace {

Netlist shunt_c_two_port() {
  Netlist n;
  n.design_frequency = 5e9;
  n.add("C", Capacitor{80e-15}, {"a", kGround});
  n.add("TL", TransmissionLine{50.0, 0.1e-9}, {"a", "b"});
  n.add_port("a");
  n.add_port("b");
  return validate(n);
}

SweepResult synthetic(const std::vector<double>& iso, double spacing) {
  SweepResult rows;
  for (std::size_t i = 0; i < iso.size(); ++i) {
    SweepRow r;
    r.response.f0 = 5e9 + spacing * static_cast<double>(i);
    r.response.power_dbm = -130.0 + static_cast<double>(i);
    r.response.isolation_db = iso[i];
    rows.push_back(r);
  }
  return rows;
}

}  // namespace

TEST(Efficiency, ClosedForms) {
  EXPECT_DOUBLE_EQ(efficiency(1.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(efficiency(0.4, 0.4), 0.0);
  EXPECT_NEAR(efficiency(0.8, 0.2), 0.48, 1e-15);
  EXPECT_THROW(efficiency(0.0, 0.0), Error);
  // Bounded by |t21| and signed like the isolation.
  EXPECT_LT(efficiency(0.2, 0.7), 0.0);
  EXPECT_GE(efficiency(0.2, 0.7), -0.2);
}

TEST(Bandwidth, InterpolatedStaircase) {
  const auto rows = synthetic({5, 15, 15, 5}, 50e6);
  EXPECT_NEAR(spectral_bandwidth(rows, 10.0), 100e6, 1e-3);
  EXPECT_NEAR(power_bandwidth(rows, 10.0), 2.0, 1e-12);
  EXPECT_EQ(spectral_bandwidth(synthetic({1, 2, 3}, 1e6), 10.0), 0.0);
  EXPECT_THROW(spectral_bandwidth(SweepResult{}, 10.0), Error);
}

TEST(Bandwidth, MonotoneInThreshold) {
  const auto rows = synthetic({2, 7, 13, 21, 17, 9, 4, 12, 3}, 10e6);
  double prev = INFINITY;
  for (double t = 1.0; t < 25.0; t += 0.5) {
    const double w = spectral_bandwidth(rows, t);
    EXPECT_LE(w, prev + 1e-9);
    prev = w;
  }
}

TEST(LjDiagnostic, ClosedForms) {
  const double l0 = 8e-9, ic = 40e-9;
  EXPECT_DOUBLE_EQ(lj_effective(l0, 0.0, ic), l0);
  EXPECT_NEAR(lj_effective(l0, ic / std::sqrt(2.0), ic), l0 * std::sqrt(2.0), 1e-20);
  EXPECT_THROW(lj_effective(l0, ic, ic), Error);
}

TEST(LjDiagnostic, FromSolution) {
  const auto sol = solve_hb(single_transmon(), 4.9e9, 0, -140.0);
  const auto d = lj_diagnostic(sol, "J");
  EXPECT_GT(d.i_fundamental, 0.0);
  EXPECT_LT(d.i_fundamental, 40e-9);
  EXPECT_GE(d.lj_effective, lj0_from_ic(40e-9));
}

TEST(Transmission, DirectThroughIsUnity) {
  Netlist n;
  n.design_frequency = 5e9;
  n.add("W", TransmissionLine{50.0, 0.0}, {"a", "b"});
  n.add_port("a");
  n.add_port("b");
  for (double p : {-150.0, -100.0, -20.0}) EXPECT_NEAR(std::abs(transmission(n, {0, 5e9, p}) - 1.0), 0.0, 1e-12);
}

TEST(Transmission, LinearCircuitIsPowerIndependent) {
  const auto n = shunt_c_two_port();
  const auto s = small_signal_sparams(n, 4.7e9);
  for (double p : {-150.0, -90.0, -30.0}) EXPECT_LT(std::abs(transmission(n, {0, 4.7e9, p}) - s.t21), 1e-8);
}

TEST(Transmission, SaturableSingleTransmon) {
  const auto n = single_transmon();
  SweepGrid grid;
  grid.f0 = {4.9e9};
  for (double p = -160.0; p <= -90.0 + 1e-9; p += 2.0) grid.power_dbm.push_back(p);
  // Drive at the small-signal transmission minimum.
  double fmin = 0.0, tmin = 2.0;
  for (double f = 4.7e9; f < 5.1e9; f += 1e6) {
    const double t = std::abs(small_signal_sparams(n, f).t21);
    if (t < tmin) tmin = t, fmin = f;
  }
  grid.f0 = {fmin};
  const auto rows = sweep(n, grid);
  double prev = 0.0;
  for (const auto& r : rows) {
    ASSERT_TRUE(r.response.converged_fwd) << r.response.error;
    const double t = std::abs(r.response.t21);
    EXPECT_GE(t, prev - 1e-9) << r.response.power_dbm;
    EXPECT_LE(t, 1.0 + 1e-6);
    prev = t;
  }
  EXPECT_LT(std::abs(rows.front().response.t21), 0.3);
  EXPECT_GT(std::abs(rows.back().response.t21), 0.9);
}

TEST(NonreciprocalPair, LinearizedIsReciprocal) {
  const auto lin = linearized(reference_lorentz());
  for (double p : {-140.0, -100.0}) {
    const auto r = nonreciprocal_pair(lin, 4.9e9, p);
    ASSERT_TRUE(r.converged());
    EXPECT_LT(std::abs(r.isolation_db), 1e-8);
  }
}

TEST(NonreciprocalPair, ReciprocityRestoredAtLowPower) {
  for (double delta : {0.03, 0.09}) {
    auto p = lorentz_defaults();
    p.delta = delta;
    const auto r = nonreciprocal_pair(reference_lorentz(p), 4.9e9, -300.0);
    ASSERT_TRUE(r.converged()) << r.error;
    EXPECT_LT(std::abs(r.isolation_db), 1e-3);
  }
}

TEST(NonreciprocalPair, MirrorSwapsDirections) {
  const auto n = reference_lorentz();
  const auto a = nonreciprocal_pair(n, 4.88e9, -127.0);
  const auto b = nonreciprocal_pair(mirrored(n), 4.88e9, -127.0);
  ASSERT_TRUE(a.converged() && b.converged());
  EXPECT_LT(std::abs(a.t21 - b.t12), 1e-10);
  EXPECT_LT(std::abs(a.t12 - b.t21), 1e-10);
  EXPECT_NEAR(a.isolation_db, -b.isolation_db, 1e-8);
}

TEST(NonreciprocalPair, EfficiencySignTracksIsolation) {
  const auto n = reference_lorentz();
  for (double f : {4.86e9, 4.9e9, 4.93e9}) {
    const auto r = nonreciprocal_pair(n, f, -126.0);
    ASSERT_TRUE(r.converged());
    EXPECT_EQ(std::signbit(r.epsilon), std::signbit(r.isolation_db));
    EXPECT_LE(std::abs(r.epsilon), std::abs(r.t21) + 1e-15);
  }
}

TEST(Sweep, SinglePointMatchesPair) {
  const auto n = reference_lorentz();
  SweepGrid g;
  g.f0 = {4.9e9};
  g.power_dbm = {-130.0};
  const auto rows = sweep(n, g);
  ASSERT_EQ(rows.size(), 1u);
  const auto pair = nonreciprocal_pair(n, 4.9e9, -130.0);
  EXPECT_LT(std::abs(rows[0].response.t21 - pair.t21), 1e-9);
  EXPECT_LT(std::abs(rows[0].response.t12 - pair.t12), 1e-9);
}

TEST(Sweep, RowOrderAndThreadsAreDeterministic) {
  SweepGrid g;
  g.delta = {0.06, 0.09};
  g.f0 = {4.88e9, 4.9e9};
  g.power_dbm = {-135.0, -130.0};
  const auto a = sweep(isolator_builder(lorentz_defaults()), g, {HbOptions{}, 1});
  const auto b = sweep(isolator_builder(lorentz_defaults()), g, {HbOptions{}, 3});
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].response.t21, b[i].response.t21);
    EXPECT_EQ(a[i].delta, g.delta[i / 4]);
    EXPECT_EQ(a[i].response.f0, g.f0[(i / 2) % 2]);
    EXPECT_EQ(a[i].response.power_dbm, g.power_dbm[i % 2]);
  }
  std::ostringstream x, y;
  write_sweep_csv(x, a);
  write_sweep_csv(y, b);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_EQ(x.str().substr(0, x.str().find('\n')), kResponseCsvHeader);
}

TEST(Sweep, EmptyGridRejected) {
  EXPECT_THROW(sweep(reference_lorentz(), SweepGrid{}), Error);
}

TEST(Sweep, FixedNetlistRejectsDeltaAxis) {
  SweepGrid g;
  g.f0 = {4.9e9};
  g.power_dbm = {-130.0};
  g.delta = {0.09};
  const auto rows = sweep(reference_lorentz(), g);
  EXPECT_FALSE(rows[0].response.converged());
  EXPECT_TRUE(std::isnan(rows[0].response.isolation_db));
}
