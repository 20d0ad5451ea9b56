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

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adaqubo/model.hpp"
#include "adaqubo/quant.hpp"
#include "adaqubo/qubo_build.hpp"
#include "adaqubo/qubo_solve.hpp"

namespace adaqubo {

enum class Method { rtn, adaround, random };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BitColumn = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;
using CodeMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rounding bits of one layer: v_ij for the weights, v_i for the bias.
struct LayerPlan {
  BitMatrix weight_bits;  // n x f
  BitColumn bias_bits;    // n
  std::vector<double> energies;  // v_i^T E[S_i] v_i per neuron, when known

  /// (v_i1, ..., v_if, v_i) in subproblem variable order.
  BitVector subproblem_bits(Eigen::Index i) const;
  void set_subproblem_bits(Eigen::Index i, std::span<const std::uint8_t> v);
};

struct PlanConfig {
  int bits = 8;
  std::uint64_t seed = 42;
  double calibration_fraction = 0.1;
  int restarts = 8;
  int sweeps = 0;
  bool exact = false;
  std::string init = "rtn_seed";
  std::string rng = std::string(Rng::kName);
};

struct RoundingPlan {
  Method method = Method::adaround;
  PlanConfig config;
  std::vector<LayerPlan> layers;
};

/// Integer codes plus the quantizer that maps them back: value = s (code - z).
struct QuantizedTensor {
  CodeMatrix codes;
  QuantParams params;

  Eigen::MatrixXd dequantize() const {
    return params.scale * (codes.array() - params.zero_point).cast<double>().matrix();
  }
};

struct QuantizedLayer {
  QuantizedTensor weights;  // n x f
  QuantizedTensor bias;     // n x 1
  QuantParams input;        // s_x for the input codes x~
  Activation activation = Activation::none;
};

struct QuantizedNetwork {
  int bits = 8;
  std::vector<QuantizedLayer> layers;
  std::map<std::string, std::string> metadata;  // method, seed, rng, calibration_rows
};

/// Everything the solvers need for each layer: scales and E[S_i].
struct Calibration {
  int bits = 8;
  std::vector<LayerScales> scales;
  std::vector<SubproblemBatch> batches;
};

struct PipelineOptions {
  unsigned threads = 0;  // 0 selects the hardware thread count
  bool exact = false;    // exhaustive solve when f + 1 <= kMaxExactDim
  Eigen::Index max_subproblem_dim = 8193;
};

/// Seeded random subset of round(fraction * N) rows (at least one), kept in
/// their original order.
std::vector<Sample> calibration_subset(std::span<const Sample> data, double fraction,
                                       std::uint64_t seed);

/// Stores unclipped grid levels as codes. The zero-point maps the smallest
/// level onto qmin; levels beyond qmax after that shift are clipped.
QuantizedTensor encode_levels(const CodeMatrix& levels, QuantParams params);

/// Scales and subproblem batches for every layer from float-propagated
/// calibration inputs.
Calibration calibrate(const DenseNetwork& net, std::span<const Sample> samples, int bits,
                      unsigned threads = 1);

/// The rounding vector that reproduces round-to-nearest (ties away from zero).
/// Energies are filled in when `calibration` carries batches.
RoundingPlan rtn_plan(const DenseNetwork& net, const Calibration& calibration);

/// Solves every E[S_i], seeding the annealer with the round-to-nearest bits.
RoundingPlan solve_plan(const DenseNetwork& net, const Calibration& calibration,
                        const SolveConfig& cfg, const PipelineOptions& options = {});

QuantizedNetwork apply_plan(const DenseNetwork& net, std::span<const LayerScales> scales,
                            const RoundingPlan& plan);

QuantizedNetwork quantize_rtn(const DenseNetwork& net, std::span<const Sample> samples, int bits);

std::pair<QuantizedNetwork, RoundingPlan> quantize_adaround(const DenseNetwork& net,
                                                            std::span<const Sample> samples,
                                                            int bits, const SolveConfig& cfg,
                                                            const PipelineOptions& options = {});

/// Float network equivalent of a quantized one, with each layer's input
/// rounded onto its s_x grid before the product.
class DequantizedNetwork {
 public:
  explicit DequantizedNetwork(const QuantizedNetwork& qnet);

  std::vector<LayerOutput<double>> forward(const Eigen::VectorXd& x) const;
  Eigen::Index predict(const Eigen::VectorXd& x) const { return argmax(forward(x).back().post); }

  /// Output of layer `l` alone for float input x.
  Eigen::VectorXd layer_pre_activation(std::size_t l, const Eigen::VectorXd& x) const;

  std::size_t size() const { return layers_.size(); }

 private:
  struct Layer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
    double input_scale;
    Activation activation;
  };
  std::vector<Layer> layers_;
};

std::vector<LayerOutput<double>> dequantized_forward(const QuantizedNetwork& qnet,
                                                     const Eigen::VectorXd& x);

}  // namespace adaqubo
