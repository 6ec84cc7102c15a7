// Copyright 2026 The VQE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef VQE_RNG_HPP
#define VQE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace vqe {

// mt19937_64 with fixed output mappings. The standard distribution objects
// are implementation-defined, so every draw here is pinned to a specific
// construction: checkpoints that serialize an Rng replay bit-identically.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Unbiased integer in [0, bound) via rejection sampling. bound > 0.
  uint64_t next_below(uint64_t bound) {
    const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % bound);
    uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return double(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Box-Muller without caching the second deviate, so the draw count per
  // call is fixed and state round-trips are exact.
  double normal() {
    double u1;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  bool bernoulli(double p) { return next_double() < p; }

  std::string serialize() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void deserialize(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

 private:
  std::mt19937_64 engine_;
};

// Derives an independent stream seed from a master seed, splitmix64-style.
inline uint64_t derive_seed(uint64_t master, uint64_t stream) {
  uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace vqe

#endif  // VQE_RNG_HPP
