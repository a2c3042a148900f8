/* Copyright 2026 The Docforge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DOCFORGE_RNG_HPP_
#define DOCFORGE_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace docforge {

// Seeded generator whose outputs are identical on every platform.
// std::mt19937_64 is fully specified by the standard; the distribution
// adaptors in <random> are not, so the bounded/real/normal draws are
// implemented here on top of the raw engine.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform_real();

  double normal();

  // Index drawn from unnormalized non-negative weights.
  std::size_t categorical(const std::vector<double>& weights);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_string(std::string_view s);

template <typename... Rest>
std::uint64_t derive_seed(std::uint64_t base, Rest... rest) {
  std::uint64_t h = splitmix64(base);
  ((h = mix_seed(h, static_cast<std::uint64_t>(rest))), ...);
  return h;
}

}  // namespace docforge

#endif  // DOCFORGE_RNG_HPP_
