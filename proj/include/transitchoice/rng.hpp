#pragma once
//------------------------------------------------------------------------------
//
//   Copyright 2025-2026 The transitchoice authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

// All sampling goes through mt19937_64 raw bits plus hand-rolled transforms so
// results are identical across standard libraries and platforms. The std::
// distribution objects are implementation-defined and deliberately avoided.

#include "transitchoice/common.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace tc {

// Maps 64 random bits to a double in the open interval (0,1).
inline double bits_to_unit_open(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stable seed derivation for named sub-streams (fold seeds, per-model seeds, ...).
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = splitmix64(base ^ 0x6a09e667f3bcc908ULL);
  s = splitmix64(s ^ a);
  s = splitmix64(s ^ b);
  s = splitmix64(s ^ c);
  return s;
}

// Counter-based uniform draw keyed by (seed, epoch, layer, element); used by
// dropout so masks do not depend on batch partitioning or evaluation order.
inline double counter_uniform(uint64_t seed, uint64_t epoch, uint64_t layer, uint64_t element) {
  return bits_to_unit_open(derive_seed(seed, epoch, layer, element));
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t bits() { return gen_(); }

  double uniform() { return bits_to_unit_open(gen_()); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  int64_t uniform_int(int64_t n) {
    if (n <= 0) throw StructuralError("uniform_int: n must be positive");
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t r = gen_();
    while (r >= limit) r = gen_();
    return static_cast<int64_t>(r % un);
  }

  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gumbel() { return -std::log(-std::log(uniform())); }

  // Marsaglia-Tsang; the alpha < 1 case boosts through alpha + 1.
  double gamma(double alpha) {
    if (!(alpha > 0)) throw StructuralError("gamma: alpha must be positive");
    if (alpha < 1.0) {
      double g = gamma(alpha + 1.0);
      return g * std::pow(uniform(), 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0) continue;
      double v = t * t * t;
      double u = uniform();
      if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
  }

  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double sum = 0;
    for (size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    if (sum <= 0) throw NumericalError("dirichlet: degenerate draw");
    for (double& v : out) v /= sum;
    return out;
  }

  int categorical(const std::vector<double>& probs) {
    double u = uniform();
    double acc = 0;
    for (size_t i = 0; i < probs.size(); ++i) {
      acc += probs[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(static_cast<int64_t>(i)));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace tc
