// Copyright 2026 The diffqec Authors
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

#ifndef DIFFQEC_RNG_HPP
#define DIFFQEC_RNG_HPP

#include <cstdint>

namespace diffqec {

/// Deterministic SplitMix64 generator.
///
/// Every stochastic piece of the pipeline draws from one of these, seeded
/// through `for_stream`, so that shots, chains, and training steps can run
/// in any order (or in parallel) and still reproduce byte-identical output.
/// The standard-library distributions are avoided on purpose: their output
/// is implementation-defined, which would break cross-toolchain
/// reproducibility of datasets and checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Uniform integer in [0, n), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t n) {
    // Reject the final partial bucket of the 64-bit range.
    std::uint64_t threshold = -n % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// Independent stream derived from (seed, stream, substream).
  /// Used for counter-based per-shot / per-step seeding.
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
    Rng mixer(seed);
    std::uint64_t a = mixer.next_u64();
    mixer.state_ = a ^ (stream * 0xd1342543de82ef95ULL);
    std::uint64_t b = mixer.next_u64();
    mixer.state_ = b ^ (substream * 0xaf251af3b0f025b5ULL);
    return Rng(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

}  // namespace diffqec

#endif  // DIFFQEC_RNG_HPP
