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

#include "adaqubo/eval.hpp"

#include <cmath>

#include "adaqubo/parallel.hpp"

namespace adaqubo {

namespace {

template <typename Predict>
double count_correct(std::span<const Sample> samples, Predict&& predict) {
  if (samples.empty()) throw DataError("cannot compute accuracy on an empty sample set");
  std::size_t correct = 0;
  for (const auto& s : samples)
    if (predict(s.features) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

constexpr std::uint64_t kScatterStream = 0x5ca7;

}  // namespace

double accuracy(const DenseNetwork& net, std::span<const Sample> samples) {
  net.validate();
  return count_correct(samples, [&](const Eigen::VectorXd& x) { return predict(net, x); });
}

double accuracy(const DequantizedNetwork& net, std::span<const Sample> samples) {
  return count_correct(samples, [&](const Eigen::VectorXd& x) { return net.predict(x); });
}

double accuracy(const QuantizedNetwork& qnet, std::span<const Sample> samples) {
  return accuracy(DequantizedNetwork(qnet), samples);
}

CostReport qubo_cost(std::span<const SubproblemBatch> batches, const RoundingPlan& plan) {
  if (batches.size() != plan.layers.size())
    throw DataError("plan has " + std::to_string(plan.layers.size()) + " layers, cost model has " +
                    std::to_string(batches.size()));
  CostReport report;
  ExactSum<double> total;
  for (std::size_t l = 0; l < batches.size(); ++l) {
    const auto& batch = batches[l];
    const auto& lp = plan.layers[l];
    if (lp.weight_bits.rows() != batch.neurons() || lp.weight_bits.cols() != batch.in_features())
      throw DataError("layer " + std::to_string(l) + ": plan dimensions do not match the layer");
    ExactSum<double> layer;
    for (Eigen::Index i = 0; i < batch.neurons(); ++i) {
      const BitVector v = lp.subproblem_bits(i);
      accumulate_energy(batch.subproblem(i), std::span<const std::uint8_t>(v), layer);
    }
    report.per_layer.push_back(layer.value());
    total.merge(layer);
  }
  report.total = total.value();
  return report;
}

RoundingPlan random_plan(const DenseNetwork& net, Rng& rng) {
  RoundingPlan plan;
  plan.method = Method::random;
  for (const auto& layer : net.layers) {
    LayerPlan lp;
    lp.weight_bits.resize(layer.out_features(), layer.in_features());
    lp.bias_bits.resize(layer.out_features());
    for (Eigen::Index i = 0; i < layer.out_features(); ++i) {
      for (Eigen::Index j = 0; j < layer.in_features(); ++j) lp.weight_bits(i, j) = rng.bit();
      lp.bias_bits[i] = rng.bit();
    }
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

std::vector<ScatterRow> scatter_sample(const DenseNetwork& net,
                                       std::span<const Sample> calibration_samples,
                                       std::span<const Sample> eval_samples, int bits,
                                       std::size_t count, std::uint64_t seed,
                                       const SolveConfig& cfg, unsigned threads) {
  if (count < 1) throw UsageError("scatter needs at least one random plan");
  const Calibration cal = calibrate(net, calibration_samples, bits, threads);

  std::vector<RoundingPlan> plans;
  plans.reserve(count + 2);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, kScatterStream, k));
    plans.push_back(random_plan(net, rng));
  }
  plans.push_back(rtn_plan(net, cal));
  SolveConfig annealer = cfg;
  annealer.seed = seed;
  plans.push_back(solve_plan(net, cal, annealer, PipelineOptions{threads}));

  std::vector<ScatterRow> rows(plans.size());
  parallel_for(plans.size(), threads, [&](std::size_t k) {
    const auto& plan = plans[k];
    rows[k].plan_id = k;
    rows[k].method = plan.method;
    rows[k].cost = qubo_cost(cal.batches, plan).total;
    rows[k].accuracy = accuracy(apply_plan(net, cal.scales, plan), eval_samples);
  });
  return rows;
}

std::vector<double> layer_frobenius_report(const DenseNetwork& net, const QuantizedNetwork& qnet,
                                           std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("cannot compute reconstruction error on an empty sample set");
  if (qnet.layers.size() != net.layers.size())
    throw DataError("quantized network layer count does not match the float network");
  const DequantizedNetwork dq(qnet);
  std::vector<double> mean(net.layers.size(), 0.0);
  for (const auto& s : samples) {
    const auto outputs = forward(net, s.features);
    Eigen::VectorXd input = s.features;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      mean[l] += (outputs[l].pre - dq.layer_pre_activation(l, input)).squaredNorm();
      input = outputs[l].post;
    }
  }
  for (auto& m : mean) m /= static_cast<double>(samples.size());
  return mean;
}

std::vector<double> plan_frobenius_report(const DenseNetwork& net,
                                          std::span<const LayerScales> scales,
                                          const RoundingPlan& plan,
                                          std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("cannot compute reconstruction error on an empty sample set");
  if (scales.size() != net.layers.size() || plan.layers.size() != net.layers.size())
    throw DataError("plan or scales do not match the network");
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const auto& lp = plan.layers[l];
    Eigen::MatrixXd w(layer.out_features(), layer.in_features());
    Eigen::VectorXd b(layer.out_features());
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j)
        w(i, j) = ada_dequantize(layer.weights(i, j), lp.weight_bits(i, j), scales[l].weights);
      b[i] = ada_dequantize(layer.bias[i], lp.bias_bits[i], scales[l].bias);
    }
    weights.push_back(std::move(w));
    biases.push_back(std::move(b));
  }

  std::vector<double> mean(net.layers.size(), 0.0);
  for (const auto& s : samples) {
    const auto outputs = forward(net, s.features);
    Eigen::VectorXd input = s.features;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      const auto& in_scale = scales[l].input;
      const Eigen::VectorXd xq = input.unaryExpr([&](double x) { return rtn_dequantize(x, in_scale); });
      mean[l] += (outputs[l].pre - (weights[l] * xq + biases[l])).squaredNorm();
      input = outputs[l].post;
    }
  }
  for (auto& m : mean) m /= static_cast<double>(samples.size());
  return mean;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw UsageError("pearson correlation needs two equally long series of length >= 2");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
  const Eigen::VectorXd xc = xv.array() - xv.mean();
  const Eigen::VectorXd yc = yv.array() - yv.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  return denom > 0.0 ? xc.dot(yc) / denom : 0.0;
}

}  // namespace adaqubo
