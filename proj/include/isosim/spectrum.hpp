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

#ifndef ISOSIM_SPECTRUM_HPP
#define ISOSIM_SPECTRUM_HPP

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "isosim/constants.hpp"
#include "isosim/error.hpp"

namespace isosim {

/// Harmonics 0..K of the fundamental f0, sampled at N points per period.
struct HarmonicBasis {
  double f0 = 0.0;
  int K = 8;
  int N = 128;

  void check() const {
    if (!(f0 > 0.0)) throw Error(ErrorCode::DomainError, "f0", "fundamental must be positive");
    if (K < 3) throw Error(ErrorCode::DomainError, "K", "need at least 3 harmonics");
    if (N < 4 * (2 * K + 1)) throw Error(ErrorCode::DomainError, "N", "need N >= 4(2K+1)");
    if ((N & (N - 1)) != 0) throw Error(ErrorCode::DomainError, "N", "sample count must be a power of two");
  }

  double omega(int k = 1) const { return 2.0 * constants::pi * f0 * k; }
};

/// Truncated harmonic series x(t) = Re sum_k X_k exp(j k w t); X_0 is real
/// and X_k (k >= 1) are peak phasors.
struct Spectrum {
  HarmonicBasis basis;
  std::vector<std::complex<double>> coeffs;

  Spectrum() = default;
  explicit Spectrum(const HarmonicBasis& b) : basis(b), coeffs(b.K + 1) {}

  std::complex<double>& operator[](int k) { return coeffs[k]; }
  const std::complex<double>& operator[](int k) const { return coeffs[k]; }

  double at(double t) const {
    double x = coeffs[0].real();
    for (int k = 1; k <= basis.K; ++k) x += std::real(coeffs[k] * std::polar(1.0, basis.omega(k) * t));
    return x;
  }

  /// Samples on the uniform grid t_n = n / (N f0).
  std::vector<double> samples() const {
    const int n = basis.N;
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      double x = coeffs[0].real();
      for (int k = 1; k <= basis.K; ++k)
        x += std::real(coeffs[k] * std::polar(1.0, 2.0 * constants::pi * k * i / n));
      out[i] = x;
    }
    return out;
  }

  /// Projection of one period of samples onto harmonics 0..K.
  static Spectrum from_samples(const HarmonicBasis& b, std::span<const double> x) {
    Spectrum s(b);
    const int n = static_cast<int>(x.size());
    for (int k = 0; k <= b.K; ++k) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2.0 * constants::pi * k * i / n);
      s.coeffs[k] = (k == 0 ? 1.0 : 2.0) * acc / static_cast<double>(n);
    }
    s.coeffs[0] = s.coeffs[0].real();
    return s;
  }
};

/// Two-sided DFT coefficients c_m = (1/N) sum x_n exp(-j 2 pi m n / N) for
/// m = 0..max_m.
inline std::vector<std::complex<double>> dft_coefficients(std::span<const double> x, int max_m) {
  const int n = static_cast<int>(x.size());
  std::vector<std::complex<double>> c(max_m + 1);
  for (int m = 0; m <= max_m; ++m) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2.0 * constants::pi * m * i / n);
    c[m] = acc / static_cast<double>(n);
  }
  return c;
}

}  // namespace isosim

#endif  // ISOSIM_SPECTRUM_HPP
