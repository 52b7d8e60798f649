// Copyright 2026 The fedkat Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FEDKAT_RNG_HPP_
#define FEDKAT_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fedkat {

// Counter-free splittable PRNG built on the splitmix64 state transition.
//
// Every source of randomness in the library is an explicit Rng value; there
// is no global state.  Streams for different roles (shared coin, per-worker
// compressors, data shuffles, ...) are derived from one master seed with
// Rng::derive, so a run is a pure function of its seed regardless of how many
// threads execute the per-worker loops.  std::uniform_*_distribution is
// implementation-defined, which would break byte-identical traces across
// toolchains; all mappings from raw 64-bit draws are therefore spelled out
// here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // splitmix64 step (Steele, Lea, Flood; public domain reference constants).
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound); rejection sampling keeps it exactly
  // unbiased.  bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  // Standard normal via Box-Muller.  Always consumes exactly two uniforms so
  // that stream positions stay predictable.
  double next_normal() {
    const double u1 = 1.0 - next_double();  // (0, 1]; keeps log() finite
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent child stream from (seed, tag).  Two rounds of the
  // splitmix64 finalizer decorrelate even adjacent tags.
  static Rng derive(std::uint64_t seed, std::uint64_t tag) {
    Rng mixer(seed ^ (0x9e3779b97f4a7c15ull * (tag + 1)));
    mixer.next_u64();
    return Rng(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

// Stream tags.  Keeping them in one table prevents accidental collisions
// between modules that derive from the same master seed.
namespace stream_tag {
inline constexpr std::uint64_t kShared = 0x01;
inline constexpr std::uint64_t kSyntheticData = 0x02;
inline constexpr std::uint64_t kShuffleRows = 0x03;
inline constexpr std::uint64_t kShuffleCols = 0x04;
inline constexpr std::uint64_t kPowerIteration = 0x05;
inline constexpr std::uint64_t kPermFamily = 0x06;
// Per-worker tags: base + worker index.
inline constexpr std::uint64_t kWorkerBase = 0x1000;
inline constexpr std::uint64_t kCompressorBase = 0x100000;
}  // namespace stream_tag

}  // namespace fedkat

#endif  // FEDKAT_RNG_HPP_
