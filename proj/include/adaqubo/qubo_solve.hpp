// Copyright 2026 The adaqubo Authors.
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>

#include "adaqubo/qubo.hpp"

namespace adaqubo {

/// Portable seeded generator. std::mt19937_64's output sequence is fixed by
/// the standard; conversions to doubles and bounded integers are done here
/// rather than through the implementation-defined std distributions.
class Rng {
 public:
  static constexpr std::string_view kName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }
  std::uint8_t bit() { return static_cast<std::uint8_t>(next() >> 63); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Per-subproblem seed: seed xor hash(layer, neuron). Independent of the
/// order in which subproblems are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t layer, std::uint64_t neuron) {
  return seed ^ mix64((layer << 32) ^ neuron);
}

enum class InitPolicy { rtn_seed, zeros, random };
enum class SolverKind { exact, sa };

std::string_view to_string(InitPolicy p);
std::string_view to_string(SolverKind s);

/// Simulated annealing settings. The schedule is geometric, T_k = T0 lambda^k
/// per sweep: T0 accepts the median uphill move of 100 random single flips
/// with probability `initial_acceptance`, and the last sweep runs at
/// T0 * final_temperature_factor.
struct SolveConfig {
  std::uint64_t seed = 42;
  int restarts = 8;
  int sweeps = 0;  // 0 selects 100 * dim
  double initial_acceptance = 0.8;
  double final_temperature_factor = 1e-3;
  InitPolicy init = InitPolicy::rtn_seed;

  void validate() const;
  int sweeps_for(Eigen::Index dim) const {
    return sweeps > 0 ? sweeps : static_cast<int>(std::max<Eigen::Index>(1, 100 * dim));
  }
};

struct Solution {
  BitVector v;
  double energy = 0.0;
  SolverKind solver = SolverKind::sa;
  int restarts_used = 0;
  std::int64_t sweeps_used = 0;
};

inline constexpr Eigen::Index kMaxExactDim = 24;

/// Exhaustive Gray-code enumeration; ties go to the lexicographically
/// smallest v. Throws UsageError above kMaxExactDim variables.
Solution solve_exact(const QuboMatrix& q);

/// Best state visited over all restarts. With a seed vector the first
/// restart starts from it (InitPolicy::rtn_seed) and the result never has
/// higher energy than the seed.
Solution solve_sa(const QuboMatrix& q, const SolveConfig& cfg,
                  std::optional<std::span<const std::uint8_t>> seed_vector = std::nullopt);

}  // namespace adaqubo
