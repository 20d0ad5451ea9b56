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

#include "adaqubo/quant.hpp"

namespace adaqubo {

LayerScales make_layer_scales(const DenseLayer& layer, const Eigen::MatrixXd& inputs, int bits) {
  if (inputs.rows() != layer.in_features())
    throw DataError("calibration inputs have " + std::to_string(inputs.rows()) +
                    " features, layer expects " + std::to_string(layer.in_features()));
  LayerScales scales;
  scales.weights = make_quant_params(layer.weights, bits);
  scales.bias = make_quant_params(layer.bias, bits);
  scales.input = make_quant_params(inputs, bits);
  return scales;
}

}  // namespace adaqubo
