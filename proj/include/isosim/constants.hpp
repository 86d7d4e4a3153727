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

#ifndef ISOSIM_CONSTANTS_HPP
#define ISOSIM_CONSTANTS_HPP

#include <numbers>

namespace isosim::constants {

// CODATA 2018 (exact SI values for e and h).
inline constexpr double e = 1.602176634e-19;
inline constexpr double h = 6.62607015e-34;
inline constexpr double hbar = h / (2.0 * std::numbers::pi);

/// Reduced flux quantum hbar/2e.
inline constexpr double phi0 = hbar / (2.0 * e);
/// Magnetic flux quantum 2*pi*hbar/2e.
inline constexpr double Phi0 = 2.0 * std::numbers::pi * phi0;

inline constexpr double c_light = 299792458.0;

inline constexpr double pi = std::numbers::pi;

}  // namespace isosim::constants

#endif  // ISOSIM_CONSTANTS_HPP
