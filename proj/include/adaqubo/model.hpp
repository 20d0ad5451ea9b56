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

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adaqubo/errors.hpp"

namespace adaqubo {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation { none, relu, softmax };

std::string_view to_string(Activation act);
/// Throws DataError for anything other than "none", "relu" or "softmax".
Activation parse_activation(std::string_view name);

/// One dense layer y = W x + b followed by an activation. W is n x f
/// (output neurons by input features).
template <typename Scalar>
struct DenseLayerT {
  MatrixX<Scalar> weights;
  VectorX<Scalar> bias;
  Activation activation = Activation::none;

  Eigen::Index in_features() const { return weights.cols(); }
  Eigen::Index out_features() const { return weights.rows(); }
};

template <typename Scalar>
struct DenseNetworkT {
  std::vector<DenseLayerT<Scalar>> layers;

  Eigen::Index input_width() const { return layers.front().in_features(); }
  Eigen::Index output_width() const { return layers.back().out_features(); }

  /// Checks shapes, layer chaining and finiteness. Throws DataError naming
  /// the offending layer.
  void validate() const {
    if (layers.empty()) throw DataError("network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& layer = layers[l];
      if (layer.weights.rows() == 0 || layer.weights.cols() == 0)
        throw DataError("layer " + std::to_string(l) + ": empty weight matrix");
      if (layer.weights.rows() != layer.bias.size())
        throw DataError("layer " + std::to_string(l) + ": weights have " +
                        std::to_string(layer.weights.rows()) + " rows but bias has " +
                        std::to_string(layer.bias.size()) + " entries");
      if (!layer.weights.allFinite() || !layer.bias.allFinite())
        throw DataError("layer " + std::to_string(l) + ": non-finite parameter");
      if (l > 0 && layer.in_features() != layers[l - 1].out_features())
        throw DataError("layer " + std::to_string(l) + ": expects input width " +
                        std::to_string(layer.in_features()) + " but layer " +
                        std::to_string(l - 1) + " produces " +
                        std::to_string(layers[l - 1].out_features()));
    }
  }
};

using DenseLayer = DenseLayerT<double>;
using DenseNetwork = DenseNetworkT<double>;

struct Sample {
  Eigen::VectorXd features;
  int label = 0;
};

template <typename Scalar>
struct LayerOutput {
  VectorX<Scalar> pre;   // W x + b
  VectorX<Scalar> post;  // activation(pre)
};

template <typename Derived>
VectorX<typename Derived::Scalar> activate(Activation act, const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  switch (act) {
    case Activation::relu:
      return y.cwiseMax(Scalar(0));
    case Activation::softmax: {
      VectorX<Scalar> e = (y.array() - y.maxCoeff()).exp();
      return e / e.sum();
    }
    case Activation::none:
      break;
  }
  return y;
}

/// Index of the largest entry; ties resolve to the lowest index.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < v.size(); ++k)
    if (v[k] > v[best]) best = k;
  return best;
}

template <typename Scalar, typename Derived>
std::vector<LayerOutput<Scalar>> forward(const DenseNetworkT<Scalar>& net,
                                         const Eigen::MatrixBase<Derived>& x) {
  std::vector<LayerOutput<Scalar>> out;
  out.reserve(net.layers.size());
  VectorX<Scalar> input = x.template cast<Scalar>();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    if (input.size() != layer.in_features())
      throw DataError("layer " + std::to_string(l) + ": expected input width " +
                      std::to_string(layer.in_features()) + ", got " +
                      std::to_string(input.size()));
    LayerOutput<Scalar> o;
    o.pre = layer.weights * input + layer.bias;
    o.post = activate(layer.activation, o.pre);
    input = o.post;
    out.push_back(std::move(o));
  }
  return out;
}

template <typename Scalar, typename Derived>
Eigen::Index predict(const DenseNetworkT<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  return argmax(forward(net, x).back().post);
}

/// Per-layer calibration inputs, one f_l x t matrix per layer (a column per
/// sample). Layer 0 sees the raw features; layer l > 0 sees the float
/// post-activations of layer l-1 of the unquantized network.
std::vector<Eigen::MatrixXd> per_layer_calibration_inputs(const DenseNetwork& net,
                                                          std::span<const Sample> samples);

}  // namespace adaqubo
