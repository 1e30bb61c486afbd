/*
 * Copyright 2026 The dsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <random>

namespace dsim {

/// Seedable generator used for every stochastic choice in the simulator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions below are written out here rather than taken
/// from <random>, because the standard leaves the algorithms behind
/// std::uniform_real_distribution and friends to the library vendor. With
/// both pieces pinned, a seed yields the same trace on any conforming
/// toolchain (modulo libm differences in std::log for the geometric draw).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be > 0. Rejection sampling, unbiased.
  std::uint64_t uniform_below(std::uint64_t n);

  bool bernoulli(double p) { return uniform01() < p; }

  /// Geometric on {0, 1, 2, ...} with the given mean (inverse-CDF draw).
  std::uint64_t geometric_with_mean(double mean);

 private:
  std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index so sibling streams are unrelated.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace dsim
