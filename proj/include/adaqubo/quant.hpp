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

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <string>

#include "adaqubo/errors.hpp"
#include "adaqubo/model.hpp"

namespace adaqubo {

/// Round half away from zero.
template <std::floating_point Scalar>
std::int64_t round_tn(Scalar a) {
  return static_cast<std::int64_t>(std::round(a));
}

/// floor(a / s): the round-down grid index that adaptive rounding starts from.
template <std::floating_point Scalar>
std::int64_t floor_code(Scalar a, Scalar s) {
  return static_cast<std::int64_t>(std::floor(a / s));
}

/// round_tn(a / s): the nearest grid index, used for layer inputs.
template <std::floating_point Scalar>
std::int64_t rtn_code(Scalar a, Scalar s) {
  return round_tn(a / s);
}

/// Rounding bit that makes floor(a/s) + v equal the nearest-rounded index,
/// ties included.
template <std::floating_point Scalar>
std::uint8_t rtn_bit(Scalar a, Scalar s) {
  return static_cast<std::uint8_t>(rtn_code(a, s) - floor_code(a, s));
}

/// Per-tensor linear quantizer. Codes live in [qmin, qmax] = [-2^(b-1), 2^(b-1)-1]
/// and dequantize as scale * (code - zero_point).
struct QuantParams {
  double scale = 1.0;
  std::int64_t zero_point = 0;
  int bits = 8;
  double alpha = 0.0;  // observed minimum
  double beta = 0.0;   // observed maximum

  std::int64_t qmin() const { return -(std::int64_t{1} << (bits - 1)); }
  std::int64_t qmax() const { return (std::int64_t{1} << (bits - 1)) - 1; }
  std::int64_t clip(std::int64_t code) const { return std::clamp(code, qmin(), qmax()); }
};

inline void check_bits(int bits) {
  if (bits < 1 || bits > 8)
    throw UsageError("bit width must be in [1, 8], got " + std::to_string(bits));
}

/// Scale from the value range: s = (beta - alpha) / (2^b - 1), or 1 when the
/// range is degenerate. The zero-point maps floor(alpha / s) onto qmin.
template <typename Derived>
QuantParams make_quant_params(const Eigen::DenseBase<Derived>& values, int bits) {
  check_bits(bits);
  if (values.size() == 0) throw DataError("cannot derive quantization range from an empty tensor");
  if (!values.derived().allFinite()) throw DataError("non-finite value in quantized tensor");
  QuantParams p;
  p.bits = bits;
  p.alpha = static_cast<double>(values.minCoeff());
  p.beta = static_cast<double>(values.maxCoeff());
  const double levels = static_cast<double>((std::int64_t{1} << bits) - 1);
  p.scale = p.beta > p.alpha ? (p.beta - p.alpha) / levels : 1.0;
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) p.scale = 1.0;
  p.zero_point = p.qmin() - floor_code(p.alpha, p.scale);
  return p;
}

/// clip(round_tn(a/s) + z, qmin, qmax)
inline std::int64_t rtn_quantize(double a, const QuantParams& p) {
  if (!std::isfinite(a)) throw DataError("non-finite value passed to rtn_quantize");
  return p.clip(rtn_code(a, p.scale) + p.zero_point);
}

/// clip(floor(a/s) + v + z, qmin, qmax)
inline std::int64_t ada_quantize(double a, std::uint8_t v, const QuantParams& p) {
  if (!std::isfinite(a)) throw DataError("non-finite value passed to ada_quantize");
  return p.clip(floor_code(a, p.scale) + v + p.zero_point);
}

/// s * round_tn(a/s), unclipped.
template <std::floating_point Scalar>
Scalar rtn_dequantize(Scalar a, Scalar s) {
  return s * static_cast<Scalar>(rtn_code(a, s));
}

inline double rtn_dequantize(double a, const QuantParams& p) { return rtn_dequantize(a, p.scale); }

/// s * (floor(a/s) + v), unclipped.
template <std::floating_point Scalar>
Scalar ada_dequantize(Scalar a, std::uint8_t v, Scalar s) {
  return s * static_cast<Scalar>(floor_code(a, s) + v);
}

inline double ada_dequantize(double a, std::uint8_t v, const QuantParams& p) {
  return ada_dequantize(a, v, p.scale);
}

/// Quantizers for one dense layer's weights, bias and input.
struct LayerScales {
  QuantParams weights;
  QuantParams bias;
  QuantParams input;

  /// r = s_b / (s_x s_w), the weight of bias bits relative to weight bits.
  double ratio() const { return bias.scale / (input.scale * weights.scale); }
  /// s_w s_x, the unit of the rescaled layer output.
  double output_unit() const { return weights.scale * input.scale; }
};

/// Scales from the full weight and bias tensors and from every entry of the
/// layer's calibration inputs (f x t).
LayerScales make_layer_scales(const DenseLayer& layer, const Eigen::MatrixXd& inputs, int bits);

}  // namespace adaqubo
