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

#include "adaqubo/qubo_solve.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <vector>

namespace adaqubo {

namespace {

constexpr int kTemperatureProbes = 100;
constexpr std::uint64_t kExactResyncPeriod = 4096;

// Local fields h_j = sum_{k != j} Q_jk v_k, maintained under single flips.
class FlipState {
 public:
  FlipState(const QuboMatrix& q, BitVector v) : q_(q), v_(std::move(v)), field_(q.dim()) { resync(); }

  void resync() {
    const auto& m = q_.entries();
    for (Eigen::Index j = 0; j < q_.dim(); ++j) {
      double h = 0.0;
      for (Eigen::Index k = 0; k < q_.dim(); ++k)
        if (k != j && v_[static_cast<std::size_t>(k)]) h += m(j, k);
      field_[j] = h;
    }
    energy_ = adaqubo::energy(q_, v_);
  }

  double delta(Eigen::Index j) const {
    const double gain = q_(j, j) + 2.0 * field_[j];
    return v_[static_cast<std::size_t>(j)] ? -gain : gain;
  }

  void flip(Eigen::Index j, double delta) {
    auto& bit = v_[static_cast<std::size_t>(j)];
    bit ^= 1;
    const double step = bit ? 1.0 : -1.0;
    const auto col = q_.entries().col(j);
    for (Eigen::Index k = 0; k < q_.dim(); ++k)
      if (k != j) field_[k] += step * col[k];
    energy_ += delta;
  }

  const BitVector& bits() const { return v_; }
  double energy() const { return energy_; }

 private:
  const QuboMatrix& q_;
  BitVector v_;
  Eigen::VectorXd field_;
  double energy_ = 0.0;
};

bool lex_less(const BitVector& a, const BitVector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

BitVector random_bits(Rng& rng, Eigen::Index dim) {
  BitVector v(static_cast<std::size_t>(dim));
  for (auto& b : v) b = rng.bit();
  return v;
}

double initial_temperature(const QuboMatrix& q, const SolveConfig& cfg, Rng& rng) {
  std::vector<double> uphill;
  uphill.reserve(kTemperatureProbes);
  for (int probe = 0; probe < kTemperatureProbes; ++probe) {
    const BitVector v = random_bits(rng, q.dim());
    const auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(q.dim())));
    const double d = delta_energy(q, std::span<const std::uint8_t>(v), j);
    if (d > 0.0) uphill.push_back(d);
  }
  if (uphill.empty()) return 1.0;
  const auto mid = uphill.begin() + static_cast<std::ptrdiff_t>(uphill.size() / 2);
  std::nth_element(uphill.begin(), mid, uphill.end());
  const double t0 = -*mid / std::log(cfg.initial_acceptance);
  return t0 > 0.0 && std::isfinite(t0) ? t0 : 1.0;
}

}  // namespace

std::string_view to_string(InitPolicy p) {
  switch (p) {
    case InitPolicy::zeros:
      return "zeros";
    case InitPolicy::random:
      return "random";
    case InitPolicy::rtn_seed:
      break;
  }
  return "rtn_seed";
}

std::string_view to_string(SolverKind s) { return s == SolverKind::exact ? "exact" : "sa"; }

void SolveConfig::validate() const {
  if (restarts < 1) throw UsageError("restarts must be >= 1");
  if (sweeps < 0) throw UsageError("sweeps must be >= 0 (0 selects 100 * dim)");
  if (!(initial_acceptance > 0.0 && initial_acceptance < 1.0))
    throw UsageError("initial acceptance must lie in (0, 1)");
  if (!(final_temperature_factor > 0.0 && final_temperature_factor <= 1.0))
    throw UsageError("final temperature factor must lie in (0, 1]");
}

Solution solve_exact(const QuboMatrix& q) {
  const Eigen::Index dim = q.dim();
  if (dim > kMaxExactDim)
    throw UsageError("exact enumeration supports at most " + std::to_string(kMaxExactDim) +
                     " variables (got " + std::to_string(dim) + "); use simulated annealing");
  const double tol = 1e-12 * (1.0 + q.entries().cwiseAbs().sum());

  FlipState state(q, BitVector(static_cast<std::size_t>(dim), 0));
  BitVector best = state.bits();
  double best_energy = 0.0;
  const std::uint64_t count = std::uint64_t{1} << dim;
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto j = static_cast<Eigen::Index>(std::countr_zero(g));
    state.flip(j, state.delta(j));
    if (g % kExactResyncPeriod == 0) state.resync();
    const double e = state.energy();
    if (e < best_energy - tol) {
      best_energy = e;
      best = state.bits();
    } else if (e <= best_energy + tol && lex_less(state.bits(), best)) {
      best_energy = std::min(best_energy, e);
      best = state.bits();
    }
  }

  Solution sol;
  sol.energy = energy(q, std::span<const std::uint8_t>(best));
  sol.v = std::move(best);
  sol.solver = SolverKind::exact;
  return sol;
}

Solution solve_sa(const QuboMatrix& q, const SolveConfig& cfg,
                  std::optional<std::span<const std::uint8_t>> seed_vector) {
  cfg.validate();
  const Eigen::Index dim = q.dim();
  if (seed_vector) check_dim(q, *seed_vector);

  Solution sol;
  sol.solver = SolverKind::sa;
  if (dim == 0) return sol;

  Rng rng(cfg.seed);
  const int sweeps = cfg.sweeps_for(dim);
  const double t0 = initial_temperature(q, cfg, rng);
  const double cooling =
      sweeps > 1 ? std::pow(cfg.final_temperature_factor, 1.0 / static_cast<double>(sweeps - 1)) : 1.0;

  std::vector<BitVector> candidates;
  if (seed_vector) candidates.emplace_back(seed_vector->begin(), seed_vector->end());

  for (int restart = 0; restart < cfg.restarts; ++restart) {
    BitVector start;
    if (restart == 0 && cfg.init == InitPolicy::rtn_seed && seed_vector)
      start.assign(seed_vector->begin(), seed_vector->end());
    else if (restart == 0 && cfg.init != InitPolicy::random)
      start.assign(static_cast<std::size_t>(dim), 0);
    else
      start = random_bits(rng, dim);

    FlipState state(q, std::move(start));
    BitVector best = state.bits();
    double best_energy = state.energy();
    double temperature = t0;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        const double d = state.delta(j);
        const bool accept =
            d <= 0.0 || (d < 50.0 * temperature && rng.uniform01() < std::exp(-d / temperature));
        if (!accept) continue;
        state.flip(j, d);
        if (state.energy() < best_energy) {
          best_energy = state.energy();
          best = state.bits();
        }
      }
      temperature *= cooling;
    }
    candidates.push_back(std::move(best));
    sol.sweeps_used += sweeps;
    ++sol.restarts_used;
  }

  // Incremental energies drift; pick the winner on exactly recomputed values.
  std::size_t winner = 0;
  double winner_energy = energy(q, std::span<const std::uint8_t>(candidates[0]));
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const double e = energy(q, std::span<const std::uint8_t>(candidates[c]));
    if (e < winner_energy) {
      winner_energy = e;
      winner = c;
    }
  }
  sol.v = std::move(candidates[winner]);
  sol.energy = winner_energy;
  return sol;
}

}  // namespace adaqubo
