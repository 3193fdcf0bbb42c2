// Copyright 2026 The BiasForge Authors.
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

#ifndef BIASFORGE_RNG_H_
#define BIASFORGE_RNG_H_

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <span>
#include <vector>

namespace biasforge {

// SplitMix64 (Steele, Lea & Flood 2014; constants from Vigna's reference
// implementation at https://prng.di.unimi.it/splitmix64.c).
//
// Every random draw in the library goes through this engine and the helpers
// below, never through <random> distributions, whose algorithms are
// implementation-defined. Output for a given seed is therefore identical on
// every conforming platform.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). Lemire's multiply-shift with rejection.
  std::uint64_t UniformIndex(std::uint64_t n);

  // Uniform integer in the closed range [lo, hi].
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);

  bool Bernoulli(double p) { return Uniform() < p; }

  // Standard normal via Box-Muller; the second variate is cached.
  double Normal();

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Finalizer of SplitMix64; a bijective 64-bit mixer.
std::uint64_t Mix64(std::uint64_t x);

// Derives an independent stream seed from a parent seed and a path of tags.
// Equal inputs always give equal outputs; any tag change reshuffles all bits.
std::uint64_t DeriveSeed(std::uint64_t parent,
                         std::initializer_list<std::uint64_t> tags);

// Stable 64-bit FNV-1a hash of a string, for use as a DeriveSeed tag.
std::uint64_t HashTag(std::string_view text);

// In-place Fisher-Yates shuffle.
template <typename T>
void Shuffle(std::span<T> items, SplitMix64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.UniformIndex(i);
    std::swap(items[i - 1], items[j]);
  }
}

// k distinct elements chosen uniformly from `pool`, in selection order.
std::vector<std::size_t> SampleWithoutReplacement(
    std::span<const std::size_t> pool, std::size_t k, SplitMix64& rng);

}  // namespace biasforge

#endif  // BIASFORGE_RNG_H_
