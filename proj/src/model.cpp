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

#include "adaqubo/model.hpp"

namespace adaqubo {

std::string_view to_string(Activation act) {
  switch (act) {
    case Activation::relu:
      return "relu";
    case Activation::softmax:
      return "softmax";
    case Activation::none:
      break;
  }
  return "none";
}

Activation parse_activation(std::string_view name) {
  if (name == "none") return Activation::none;
  if (name == "relu") return Activation::relu;
  if (name == "softmax") return Activation::softmax;
  throw DataError("unknown activation '" + std::string(name) + "'");
}

std::vector<Eigen::MatrixXd> per_layer_calibration_inputs(const DenseNetwork& net,
                                                          std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("calibration set is empty");
  const auto t = static_cast<Eigen::Index>(samples.size());
  std::vector<Eigen::MatrixXd> inputs;
  inputs.reserve(net.layers.size());
  for (const auto& layer : net.layers) inputs.emplace_back(layer.in_features(), t);

  for (Eigen::Index s = 0; s < t; ++s) {
    const auto& x = samples[static_cast<std::size_t>(s)].features;
    const auto outputs = forward(net, x);
    inputs[0].col(s) = x;
    for (std::size_t l = 1; l < net.layers.size(); ++l) inputs[l].col(s) = outputs[l - 1].post;
  }
  return inputs;
}

}  // namespace adaqubo
