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


#ifndef ISOSIM_DRIVE_HPP
#define ISOSIM_DRIVE_HPP

#include <cmath>
#include <complex>

namespace isosim {

/// Peak Thevenin voltage delivering `power_dbm` into a matched load z0.
inline double source_amplitude(double power_dbm, double z0) {
  const double watts = std::pow(10.0, (power_dbm - 30.0) / 10.0);
  return std::sqrt(8.0 * z0 * watts);
}

/// Single-tone drive. `port` is a zero-based index into Netlist::ports.
struct DriveSpec {
  int port = 0;
  double f0 = 0.0;
  double power_dbm = -300.0;

  double source_amplitude(double z0) const { return isosim::source_amplitude(power_dbm, z0); }
};

/// Forward wave ratio b_out / a_in at one harmonic: a_in = Vs/(2 sqrt z_in),
/// b_out = V_out / sqrt z_out for a matched output port.
inline std::complex<double> wave_transmission(std::complex<double> v_out, double vs, double z_in, double z_out) {
  return 2.0 * v_out / vs * std::sqrt(z_in / z_out);
}

}  // namespace isosim

#endif  // ISOSIM_DRIVE_HPP
