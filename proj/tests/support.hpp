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

// Test-side helpers and reference computations. The references here are
// written as plain scalar loops on purpose and share no code paths with the
// library beyond the data types.

#include <Eigen/Dense>

#include <adaqubo/io.hpp>
#include <adaqubo/model.hpp>
#include <adaqubo/quant.hpp>
#include <adaqubo/qubo.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace testing {

using adaqubo::BitVector;
using adaqubo::DenseLayer;
using adaqubo::DenseNetwork;
using adaqubo::LayerScales;
using adaqubo::QuantParams;
using adaqubo::QuboMatrix;
using adaqubo::Sample;

inline std::filesystem::path fixture_dir() { return ADAQUBO_FIXTURE_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return fixture_dir() / name; }

inline DenseNetwork load_fixture_model(const std::string& name) {
  return adaqubo::load_model(fixture(name + "_fixture.json"));
}

inline std::vector<Sample> load_test_digits(Eigen::Index width) {
  return adaqubo::load_dataset(fixture(width == 12 ? "digits12_test.csv" : "digits64_test.csv"));
}

inline nlohmann::json golden() {
  return nlohmann::json::parse(adaqubo::read_file(fixture("fixtures_golden.json")));
}

inline QuantParams scale_only(double s, int bits = 8) {
  QuantParams p;
  p.scale = s;
  p.bits = bits;
  return p;
}

inline LayerScales make_scales(double sw, double sb, double sx, int bits = 8) {
  return {scale_only(sw, bits), scale_only(sb, bits), scale_only(sx, bits)};
}

/// Layer with Gaussian weights/bias and a matching set of uniform inputs.
struct RandomLayerCase {
  DenseLayer layer;
  Eigen::MatrixXd inputs;  // f x t
};

inline RandomLayerCase random_layer_case(std::mt19937_64& gen, Eigen::Index n, Eigen::Index f,
                                         Eigen::Index t) {
  std::normal_distribution<double> normal(0.0, 0.5);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  RandomLayerCase c;
  c.layer.weights = Eigen::MatrixXd::NullaryExpr(n, f, [&] { return normal(gen); });
  c.layer.bias = Eigen::VectorXd::NullaryExpr(n, [&] { return normal(gen); });
  c.inputs = Eigen::MatrixXd::NullaryExpr(f, t, [&] { return uniform(gen); });
  return c;
}

inline BitVector random_bits(std::mt19937_64& gen, std::size_t dim) {
  BitVector v(dim);
  for (auto& b : v) b = static_cast<std::uint8_t>(gen() & 1u);
  return v;
}

inline BitVector bits_of_index(std::uint64_t index, std::size_t dim) {
  BitVector v(dim);
  for (std::size_t k = 0; k < dim; ++k) v[k] = static_cast<std::uint8_t>((index >> k) & 1u);
  return v;
}

/// v^T Q v with a plain double loop.
inline double naive_energy(const Eigen::MatrixXd& q, const BitVector& v) {
  double e = 0.0;
  for (Eigen::Index j = 0; j < q.rows(); ++j)
    for (Eigen::Index k = 0; k < q.cols(); ++k)
      if (v[static_cast<std::size_t>(j)] && v[static_cast<std::size_t>(k)]) e += q(j, k);
  return e;
}

struct BruteForce {
  double energy = std::numeric_limits<double>::infinity();
  std::vector<BitVector> minimizers;  // all vectors within `tol` of the minimum
};

/// Exhaustive search over all 2^dim vectors.
inline BruteForce brute_force(const Eigen::MatrixXd& q, double tol = 1e-9) {
  const auto dim = static_cast<std::size_t>(q.rows());
  std::vector<double> energies(std::size_t{1} << dim);
  BruteForce out;
  for (std::uint64_t m = 0; m < energies.size(); ++m) {
    energies[m] = naive_energy(q, bits_of_index(m, dim));
    out.energy = std::min(out.energy, energies[m]);
  }
  const double slack = tol * std::max(1.0, std::abs(out.energy));
  for (std::uint64_t m = 0; m < energies.size(); ++m)
    if (energies[m] <= out.energy + slack) out.minimizers.push_back(bits_of_index(m, dim));
  return out;
}

inline bool contains(const std::vector<BitVector>& set, const BitVector& v) {
  for (const auto& u : set)
    if (u == v) return true;
  return false;
}

/// d_i for one sample from the definition of the residual.
inline std::vector<double> reference_d(const DenseLayer& layer, const LayerScales& s,
                                       const Eigen::VectorXd& x) {
  const double sw = s.weights.scale, sb = s.bias.scale, sx = s.input.scale;
  std::vector<double> d(static_cast<std::size_t>(layer.out_features()));
  for (Eigen::Index i = 0; i < layer.out_features(); ++i) {
    double y = layer.bias[i];
    for (Eigen::Index j = 0; j < layer.in_features(); ++j) y += layer.weights(i, j) * x[j];
    double v = y / (sw * sx);
    for (Eigen::Index j = 0; j < layer.in_features(); ++j)
      v -= std::floor(layer.weights(i, j) / sw) * std::round(x[j] / sx);
    v -= (sb / (sx * sw)) * std::floor(layer.bias[i] / sb);
    d[static_cast<std::size_t>(i)] = v;
  }
  return d;
}

/// Per-sample objective written out term by term:
///   sum_ij x_j(x_j - 2 d_i) v_ij + sum_i sum_{j != k} x_j x_k v_ij v_ik
///   + sum_i r(r - 2 d_i) v_i + 2 r sum_ij x_j v_i v_ij
/// where `weight_bits` is n x f and `bias_bits` has n entries.
inline double reference_objective(const DenseLayer& layer, const LayerScales& s,
                                  const Eigen::VectorXd& x,
                                  const std::vector<std::vector<std::uint8_t>>& weight_bits,
                                  const std::vector<std::uint8_t>& bias_bits) {
  const auto d = reference_d(layer, s, x);
  const double r = s.bias.scale / (s.input.scale * s.weights.scale);
  const auto f = static_cast<std::size_t>(layer.in_features());
  std::vector<double> xt(f);
  for (std::size_t j = 0; j < f; ++j) xt[j] = std::round(x[static_cast<Eigen::Index>(j)] / s.input.scale);
  double q = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& v = weight_bits[i];
    for (std::size_t j = 0; j < f; ++j) q += xt[j] * (xt[j] - 2 * d[i]) * v[j];
    for (std::size_t j = 0; j < f; ++j)
      for (std::size_t k = 0; k < f; ++k)
        if (j != k) q += xt[j] * xt[k] * v[j] * v[k];
    q += r * (r - 2 * d[i]) * bias_bits[i];
    for (std::size_t j = 0; j < f; ++j) q += 2 * r * xt[j] * bias_bits[i] * v[j];
  }
  return q;
}

/// ||y - y_check||^2 summed over neurons for one sample, computed directly
/// from the dequantized weights, bias and input.
inline double reference_reconstruction(const DenseLayer& layer, const LayerScales& s,
                                       const Eigen::VectorXd& x,
                                       const std::vector<std::vector<std::uint8_t>>& weight_bits,
                                       const std::vector<std::uint8_t>& bias_bits) {
  const double sw = s.weights.scale, sb = s.bias.scale, sx = s.input.scale;
  double total = 0.0;
  for (Eigen::Index i = 0; i < layer.out_features(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    double y = layer.bias[i];
    double yq = sb * (std::floor(layer.bias[i] / sb) + bias_bits[ii]);
    for (Eigen::Index j = 0; j < layer.in_features(); ++j) {
      y += layer.weights(i, j) * x[j];
      const double wq = sw * (std::floor(layer.weights(i, j) / sw) + weight_bits[ii][static_cast<std::size_t>(j)]);
      yq += wq * sx * std::round(x[j] / sx);
    }
    total += (y - yq) * (y - yq);
  }
  return total;
}

inline std::vector<std::vector<std::uint8_t>> random_bit_rows(std::mt19937_64& gen, std::size_t n,
                                                              std::size_t f) {
  std::vector<std::vector<std::uint8_t>> rows(n);
  for (auto& row : rows) row = random_bits(gen, f);
  return rows;
}

inline double relative_gap(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

}  // namespace testing
