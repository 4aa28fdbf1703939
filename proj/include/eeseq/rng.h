// Copyright 2026  The eeseq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef EESEQ_RNG_H_
#define EESEQ_RNG_H_

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace eeseq {

// Seeded 64-bit linear congruential generator (Knuth MMIX constants, modulus
// 2^64). Distributions are derived from the high bits by hand so that
// sequences do not depend on the standard library's distribution classes.
class Rng {
 public:
  using Engine = std::linear_congruential_engine<std::uint64_t,
                                                 6364136223846793005ULL,
                                                 1442695040888963407ULL, 0>;

  explicit Rng(std::uint64_t seed) : engine_(Mix(seed)) {}

  // Seed derived from a base seed and a string key (e.g. a parameter name),
  // so that streams do not depend on creation order.
  static Rng ForKey(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : key) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return Rng(seed ^ Mix(h));
  }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>((NextU64() >> 16) % span);
  }

  // Standard normal via Box-Muller.
  double Normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t Mix(std::uint64_t x) {  // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  Engine engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace eeseq

#endif  // EESEQ_RNG_H_
