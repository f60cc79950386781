// Copyright 2026 The mpipsim Authors
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

#ifndef MPIP_RNG_HPP
#define MPIP_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace mpip {

/// Seeded stream with portable draws. The standard distributions are
/// implementation-defined, so draws are derived from raw engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  /// Independent stream for a named component of a run.
  static Rng split(std::uint64_t run_seed, std::string_view component, std::uint64_t index = 0);

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be nonzero.
  std::uint64_t below(std::uint64_t n);

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return p > 0 && unit() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mpip

#endif  // MPIP_RNG_HPP
