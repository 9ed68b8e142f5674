// Copyright 2026 The HiSS Authors
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

#ifndef HISS_RNG_H_
#define HISS_RNG_H_

#include <cstdint>
#include <random>

namespace hiss {

// SplitMix64 finalizer. Used to derive independent per-chain seeds from a
// master seed so that results do not depend on thread scheduling.
std::uint64_t SplitMix64(std::uint64_t x);

// Seed for chain `chain_index` of a run seeded with `master`.
std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t chain_index);

// Per-chain random stream. Wraps mt19937_64 and produces uniforms by bit
// manipulation rather than std::uniform_real_distribution, whose output is
// implementation-defined, so traces are bit-identical across standard
// libraries.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double Uniform();

  // Uniform on the open interval (0, 1), clamped to [ulp, 1 - ulp].
  double OpenUniform();

  // Standard normal via Box-Muller on two open uniforms.
  double Normal();

  // Uniform integer in [0, n).
  std::uint64_t Below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace hiss

#endif  // HISS_RNG_H_
