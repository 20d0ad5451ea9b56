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

#include "adaqubo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "adaqubo/parallel.hpp"

namespace adaqubo {

namespace {
constexpr std::uint64_t kCalibrationStream = 0xca11b;
}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::rtn:
      return "rtn";
    case Method::random:
      return "random";
    case Method::adaround:
      break;
  }
  return "adaround";
}

Method parse_method(std::string_view name) {
  if (name == "rtn") return Method::rtn;
  if (name == "adaround") return Method::adaround;
  if (name == "random") return Method::random;
  throw DataError("unknown rounding method '" + std::string(name) + "'");
}

BitVector LayerPlan::subproblem_bits(Eigen::Index i) const {
  const Eigen::Index f = weight_bits.cols();
  BitVector v(static_cast<std::size_t>(f + 1));
  for (Eigen::Index j = 0; j < f; ++j) v[static_cast<std::size_t>(j)] = weight_bits(i, j);
  v.back() = bias_bits[i];
  return v;
}

void LayerPlan::set_subproblem_bits(Eigen::Index i, std::span<const std::uint8_t> v) {
  const Eigen::Index f = weight_bits.cols();
  if (static_cast<Eigen::Index>(v.size()) != f + 1)
    throw InvariantError("subproblem solution has the wrong length");
  for (Eigen::Index j = 0; j < f; ++j) weight_bits(i, j) = v[static_cast<std::size_t>(j)];
  bias_bits[i] = v.back();
}

std::vector<Sample> calibration_subset(std::span<const Sample> data, double fraction,
                                       std::uint64_t seed) {
  if (data.empty()) throw DataError("cannot draw a calibration subset from an empty dataset");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw UsageError("calibration fraction must lie in (0, 1]");
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size()))), 1, data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, kCalibrationStream, 0));
  for (std::size_t k = 0; k < count; ++k) {
    const auto pick = k + static_cast<std::size_t>(rng.below(order.size() - k));
    std::swap(order[k], order[pick]);
  }
  order.resize(count);
  std::sort(order.begin(), order.end());
  std::vector<Sample> subset;
  subset.reserve(count);
  for (auto idx : order) subset.push_back(data[idx]);
  return subset;
}

QuantizedTensor encode_levels(const CodeMatrix& levels, QuantParams params) {
  QuantizedTensor t;
  params.zero_point = params.qmin() - levels.minCoeff();
  t.codes = levels.unaryExpr([&params](std::int64_t level) { return params.clip(level + params.zero_point); });
  t.params = params;
  return t;
}

Calibration calibrate(const DenseNetwork& net, std::span<const Sample> samples, int bits,
                      unsigned threads) {
  check_bits(bits);
  net.validate();
  const auto inputs = per_layer_calibration_inputs(net, samples);
  Calibration cal;
  cal.bits = bits;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    cal.scales.push_back(make_layer_scales(net.layers[l], inputs[l], bits));
    cal.batches.push_back(build_batch(net.layers[l], cal.scales[l], inputs[l], l, threads));
  }
  return cal;
}

namespace {

void check_plan_shape(const DenseNetwork& net, std::span<const LayerScales> scales,
                      const RoundingPlan& plan) {
  if (plan.layers.size() != net.layers.size() || scales.size() != net.layers.size())
    throw DataError("plan has " + std::to_string(plan.layers.size()) + " layers, network has " +
                    std::to_string(net.layers.size()));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& lp = plan.layers[l];
    const auto& layer = net.layers[l];
    if (lp.weight_bits.rows() != layer.out_features() ||
        lp.weight_bits.cols() != layer.in_features() || lp.bias_bits.size() != layer.out_features())
      throw DataError("layer " + std::to_string(l) + ": plan dimensions do not match the layer");
    if ((lp.weight_bits.array() > 1).any() || (lp.bias_bits.array() > 1).any())
      throw DataError("layer " + std::to_string(l) + ": plan contains non-binary entries");
  }
}

std::vector<double> plan_energies(const SubproblemBatch& batch, const LayerPlan& lp) {
  std::vector<double> out(static_cast<std::size_t>(batch.neurons()));
  for (Eigen::Index i = 0; i < batch.neurons(); ++i) {
    const BitVector v = lp.subproblem_bits(i);
    out[static_cast<std::size_t>(i)] = energy(batch.subproblem(i), std::span<const std::uint8_t>(v));
  }
  return out;
}

}  // namespace

RoundingPlan rtn_plan(const DenseNetwork& net, const Calibration& calibration) {
  RoundingPlan plan;
  plan.method = Method::rtn;
  plan.config.bits = calibration.bits;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& s = calibration.scales[l];
    const double sw = s.weights.scale;
    const double sb = s.bias.scale;
    LayerPlan lp;
    lp.weight_bits = layer.weights.unaryExpr([sw](double w) { return rtn_bit(w, sw); });
    lp.bias_bits = layer.bias.unaryExpr([sb](double b) { return rtn_bit(b, sb); });
    if (l < calibration.batches.size()) lp.energies = plan_energies(calibration.batches[l], lp);
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

RoundingPlan solve_plan(const DenseNetwork& net, const Calibration& calibration,
                        const SolveConfig& cfg, const PipelineOptions& options) {
  cfg.validate();
  RoundingPlan plan = rtn_plan(net, calibration);
  plan.method = Method::adaround;
  plan.config.seed = cfg.seed;
  plan.config.restarts = cfg.restarts;
  plan.config.sweeps = cfg.sweeps;
  plan.config.exact = options.exact;
  plan.config.init = std::string(to_string(cfg.init));

  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& batch = calibration.batches.at(l);
    if (batch.subproblem_dim() > options.max_subproblem_dim)
      throw DataError("layer " + std::to_string(l) + ": subproblem dimension " +
                      std::to_string(batch.subproblem_dim()) + " exceeds the limit " +
                      std::to_string(options.max_subproblem_dim));
    LayerPlan& lp = plan.layers[l];
    const bool exact = options.exact && batch.subproblem_dim() <= kMaxExactDim;
    std::vector<Solution> solutions(static_cast<std::size_t>(batch.neurons()));
    parallel_for(solutions.size(), options.threads, [&](std::size_t i) {
      const auto neuron = static_cast<Eigen::Index>(i);
      const QuboMatrix q = batch.subproblem(neuron);
      if (exact) {
        solutions[i] = solve_exact(q);
      } else {
        SolveConfig local = cfg;
        local.seed = derive_seed(cfg.seed, l, i);
        const BitVector seed = lp.subproblem_bits(neuron);
        solutions[i] = solve_sa(q, local, std::span<const std::uint8_t>(seed));
      }
    });
    for (std::size_t i = 0; i < solutions.size(); ++i) {
      lp.set_subproblem_bits(static_cast<Eigen::Index>(i), solutions[i].v);
      lp.energies[i] = solutions[i].energy;
    }
  }
  return plan;
}

QuantizedNetwork apply_plan(const DenseNetwork& net, std::span<const LayerScales> scales,
                            const RoundingPlan& plan) {
  check_plan_shape(net, scales, plan);
  QuantizedNetwork q;
  q.bits = scales.empty() ? plan.config.bits : scales.front().weights.bits;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& s = scales[l];
    const auto& lp = plan.layers[l];
    const double sw = s.weights.scale;
    const double sb = s.bias.scale;
    CodeMatrix wl = layer.weights.unaryExpr([sw](double w) { return floor_code(w, sw); }) +
                    lp.weight_bits.cast<std::int64_t>();
    CodeMatrix bl = layer.bias.unaryExpr([sb](double b) { return floor_code(b, sb); }) +
                    lp.bias_bits.cast<std::int64_t>();
    QuantizedLayer ql;
    ql.weights = encode_levels(wl, s.weights);
    ql.bias = encode_levels(bl, s.bias);
    ql.input = s.input;
    ql.activation = layer.activation;
    q.layers.push_back(std::move(ql));
  }
  return q;
}

QuantizedNetwork quantize_rtn(const DenseNetwork& net, std::span<const Sample> samples, int bits) {
  check_bits(bits);
  net.validate();
  const auto inputs = per_layer_calibration_inputs(net, samples);
  QuantizedNetwork q;
  q.bits = bits;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const LayerScales s = make_layer_scales(layer, inputs[l], bits);
    const double sw = s.weights.scale;
    const double sb = s.bias.scale;
    QuantizedLayer ql;
    ql.weights = encode_levels(layer.weights.unaryExpr([sw](double w) { return rtn_code(w, sw); }), s.weights);
    ql.bias = encode_levels(layer.bias.unaryExpr([sb](double b) { return rtn_code(b, sb); }), s.bias);
    ql.input = s.input;
    ql.activation = layer.activation;
    q.layers.push_back(std::move(ql));
  }
  return q;
}

std::pair<QuantizedNetwork, RoundingPlan> quantize_adaround(const DenseNetwork& net,
                                                            std::span<const Sample> samples,
                                                            int bits, const SolveConfig& cfg,
                                                            const PipelineOptions& options) {
  const Calibration cal = calibrate(net, samples, bits, options.threads);
  RoundingPlan plan = solve_plan(net, cal, cfg, options);
  QuantizedNetwork q = apply_plan(net, cal.scales, plan);
  return {std::move(q), std::move(plan)};
}

DequantizedNetwork::DequantizedNetwork(const QuantizedNetwork& qnet) {
  if (qnet.layers.empty()) throw DataError("quantized network has no layers");
  for (const auto& ql : qnet.layers) {
    Layer layer;
    layer.weights = ql.weights.dequantize();
    layer.bias = ql.bias.dequantize().col(0);
    layer.input_scale = ql.input.scale;
    layer.activation = ql.activation;
    layers_.push_back(std::move(layer));
  }
}

Eigen::VectorXd DequantizedNetwork::layer_pre_activation(std::size_t l, const Eigen::VectorXd& x) const {
  const auto& layer = layers_.at(l);
  if (x.size() != layer.weights.cols())
    throw DataError("layer " + std::to_string(l) + ": expected input width " +
                    std::to_string(layer.weights.cols()) + ", got " + std::to_string(x.size()));
  const double sx = layer.input_scale;
  const Eigen::VectorXd xq = x.unaryExpr([sx](double v) { return rtn_dequantize(v, sx); });
  return layer.weights * xq + layer.bias;
}

std::vector<LayerOutput<double>> DequantizedNetwork::forward(const Eigen::VectorXd& x) const {
  std::vector<LayerOutput<double>> out;
  out.reserve(layers_.size());
  Eigen::VectorXd input = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    LayerOutput<double> o;
    o.pre = layer_pre_activation(l, input);
    o.post = activate(layers_[l].activation, o.pre);
    input = o.post;
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<LayerOutput<double>> dequantized_forward(const QuantizedNetwork& qnet,
                                                     const Eigen::VectorXd& x) {
  return DequantizedNetwork(qnet).forward(x);
}

}  // namespace adaqubo
