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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "adaqubo/model.hpp"
#include "adaqubo/pipeline.hpp"
#include "adaqubo/qubo_build.hpp"

namespace adaqubo {

double accuracy(const DenseNetwork& net, std::span<const Sample> samples);
double accuracy(const DequantizedNetwork& net, std::span<const Sample> samples);
double accuracy(const QuantizedNetwork& qnet, std::span<const Sample> samples);

/// C_QUBO of a plan: sum over layers and neurons of v_i^T E[S_i] v_i.
/// Both the per-layer values and the total are correctly rounded sums.
struct CostReport {
  std::vector<double> per_layer;
  double total = 0.0;
};

CostReport qubo_cost(std::span<const SubproblemBatch> batches, const RoundingPlan& plan);

/// Plan with every rounding bit drawn uniformly from `rng`.
RoundingPlan random_plan(const DenseNetwork& net, Rng& rng);

struct ScatterRow {
  std::size_t plan_id = 0;
  Method method = Method::random;
  double cost = 0.0;
  double accuracy = 0.0;
};

/// `count` uniformly random plans (ids 0..count-1), then the round-to-nearest
/// plan (id count) and the annealed plan (id count+1), each with its QUBO
/// cost and its accuracy on `eval_samples`. Deterministic for a given seed.
std::vector<ScatterRow> scatter_sample(const DenseNetwork& net,
                                       std::span<const Sample> calibration_samples,
                                       std::span<const Sample> eval_samples, int bits,
                                       std::size_t count, std::uint64_t seed,
                                       const SolveConfig& cfg, unsigned threads = 1);

/// Mean over samples of ||y - y_hat||^2 per layer, where every layer sees the
/// float network's input and y_hat uses the stored (clipped) codes.
std::vector<double> layer_frobenius_report(const DenseNetwork& net, const QuantizedNetwork& qnet,
                                           std::span<const Sample> samples);

/// Same quantity evaluated directly from the plan with unclipped
/// dequantization s (floor(a/s) + v), the form the QUBO objective models.
std::vector<double> plan_frobenius_report(const DenseNetwork& net,
                                          std::span<const LayerScales> scales,
                                          const RoundingPlan& plan,
                                          std::span<const Sample> samples);

double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace adaqubo
