// SPDX-License-Identifier: Apache-2.0
//
// Shared scalar/matrix aliases and the deterministic random source used by
// every stochastic component. Distribution code is hand-rolled so results
// depend only on the engine's integer sequence, never on the standard
// library's distribution internals.

#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace agmp {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

// SplitMix64 finalizer; used to decorrelate seeds of named substreams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  std::uint64_t seed() const { return seed_; }

  // Independent stream derived from this source's seed and a tag. Forking
  // does not consume state, so pipeline stages can be reordered without
  // disturbing each other's draws.
  Rng fork(std::uint64_t tag) const { return Rng(mix64(seed_ ^ mix64(tag))); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (cosine branch only; two draws each).
  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

  // Circularly-symmetric complex Gaussian with E|x|^2 = variance.
  cplx cgaussian(double variance) {
    if (variance < 0.0) throw std::invalid_argument("cgaussian: negative variance");
    if (variance == 0.0) {
      return cplx(0.0, 0.0);
    }
    const double s = std::sqrt(variance / 2.0);
    const double re = gaussian();
    const double im = gaussian();
    return cplx(s * re, s * im);
  }

  // Unit-magnitude complex with uniform phase.
  cplx unit_phasor() { return std::polar(1.0, uniform(0.0, kTwoPi)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double linear) {
  if (linear < 0.0) throw std::invalid_argument("linear_to_db: negative power");
  if (linear == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(linear);
}

}  // namespace agmp
