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

#include "adaqubo/qubo_build.hpp"

#include <cstdio>
#include <ostream>
#include <string>

#include "adaqubo/parallel.hpp"

namespace adaqubo {

namespace {

constexpr Eigen::Index kLeafSamples = 256;

void check_input_width(const DenseLayer& layer, Eigen::Index width) {
  if (width != layer.in_features())
    throw DataError("input has " + std::to_string(width) + " features, layer expects " +
                    std::to_string(layer.in_features()));
}

// Unnormalized sample moments over a block of calibration columns.
struct Moments {
  Eigen::MatrixXd gram;
  Eigen::VectorXd codes;
  Eigen::MatrixXd d_codes;
  Eigen::VectorXd d;
  Eigen::VectorXd d_sq;

  Moments& operator+=(const Moments& o) {
    gram += o.gram;
    codes += o.codes;
    d_codes += o.d_codes;
    d += o.d;
    d_sq += o.d_sq;
    return *this;
  }
};

Eigen::MatrixXd residuals(const DenseLayer& layer, const LayerScales& scales, const FloorCodes& fc,
                          const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& codes) {
  Eigen::MatrixXd y = layer.weights * inputs;
  y.colwise() += layer.bias;
  Eigen::MatrixXd d = y / scales.output_unit() - fc.weights * codes;
  d.colwise() -= scales.ratio() * fc.bias;
  return d;
}

Moments leaf_moments(const DenseLayer& layer, const LayerScales& scales, const FloorCodes& fc,
                     const Eigen::MatrixXd& inputs) {
  const Eigen::MatrixXd codes = input_codes(inputs, scales);
  const Eigen::MatrixXd d = residuals(layer, scales, fc, inputs, codes);
  Moments m;
  m.gram = codes * codes.transpose();
  m.codes = codes.rowwise().sum();
  m.d_codes = d * codes.transpose();
  m.d = d.rowwise().sum();
  m.d_sq = d.array().square().rowwise().sum();
  return m;
}

Moments tree_sum(std::vector<Moments>& leaves, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return leaves[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  Moments left = tree_sum(leaves, lo, mid);
  left += tree_sum(leaves, mid, hi);
  return left;
}

}  // namespace

FloorCodes floor_codes(const DenseLayer& layer, const LayerScales& scales) {
  const double sw = scales.weights.scale;
  const double sb = scales.bias.scale;
  FloorCodes fc;
  fc.weights = layer.weights.unaryExpr([sw](double w) { return static_cast<double>(floor_code(w, sw)); });
  fc.bias = layer.bias.unaryExpr([sb](double b) { return static_cast<double>(floor_code(b, sb)); });
  return fc;
}

Eigen::MatrixXd input_codes(const Eigen::MatrixXd& inputs, const LayerScales& scales) {
  const double sx = scales.input.scale;
  return inputs.unaryExpr([sx](double x) { return static_cast<double>(rtn_code(x, sx)); });
}

ResidualD residual_d(const DenseLayer& layer, const LayerScales& scales, const Eigen::VectorXd& x) {
  check_input_width(layer, x.size());
  const double sw = scales.weights.scale;
  const double sx = scales.input.scale;
  const double sb = scales.bias.scale;
  const double r = scales.ratio();
  ResidualD out;
  out.values.resize(layer.out_features());
  for (Eigen::Index i = 0; i < layer.out_features(); ++i) {
    double y = layer.bias[i];
    double floors = 0.0;
    for (Eigen::Index j = 0; j < layer.in_features(); ++j) {
      y += layer.weights(i, j) * x[j];
      floors += static_cast<double>(floor_code(layer.weights(i, j), sw)) *
                static_cast<double>(rtn_code(x[j], sx));
    }
    out.values[i] = y / (sw * sx) - floors - r * static_cast<double>(floor_code(layer.bias[i], sb));
  }
  return out;
}

std::vector<QuboMatrix> build_subproblem_sample(const DenseLayer& layer, const LayerScales& scales,
                                                const Eigen::VectorXd& x) {
  const ResidualD d = residual_d(layer, scales, x);
  const Eigen::Index f = layer.in_features();
  const double r = scales.ratio();
  const Eigen::VectorXd codes = input_codes(x, scales);

  Eigen::MatrixXd shared(f + 1, f + 1);
  shared.topLeftCorner(f, f) = codes * codes.transpose();
  shared.col(f).head(f) = r * codes;
  shared.row(f).head(f) = r * codes.transpose();

  std::vector<QuboMatrix> out;
  out.reserve(static_cast<std::size_t>(layer.out_features()));
  for (Eigen::Index i = 0; i < layer.out_features(); ++i) {
    Eigen::MatrixXd s = shared;
    for (Eigen::Index j = 0; j < f; ++j) s(j, j) = codes[j] * (codes[j] - 2.0 * d.values[i]);
    s(f, f) = r * (r - 2.0 * d.values[i]);
    out.emplace_back(std::move(s));
  }
  return out;
}

void SubproblemBatch::assemble() {
  const Eigen::Index f = in_features();
  const Eigen::Index n = neurons();
  core_ = Eigen::MatrixXd::Zero(f + 1, f + 1);
  for (Eigen::Index k = 0; k < f; ++k)
    for (Eigen::Index j = 0; j < f; ++j)
      if (j != k) core_(j, k) = mean_gram(j, k);
  core_.col(f).head(f) = ratio * mean_codes;
  core_.row(f).head(f) = ratio * mean_codes.transpose();

  diagonals_.resize(n, f + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < f; ++j)
      diagonals_(i, j) = mean_gram(j, j) - 2.0 * mean_d_codes(i, j);
    diagonals_(i, f) = ratio * (ratio - 2.0 * mean_d[i]);
  }
}

QuboMatrix SubproblemBatch::subproblem(Eigen::Index i) const {
  if (i < 0 || i >= neurons()) throw InvariantError("subproblem index out of range");
  Eigen::MatrixXd s = core_;
  s.diagonal() = diagonals_.row(i).transpose();
  return QuboMatrix(std::move(s));
}

SubproblemBatch build_batch(const DenseLayer& layer, const LayerScales& scales,
                            const Eigen::MatrixXd& inputs, std::size_t layer_index,
                            unsigned threads) {
  check_input_width(layer, inputs.rows());
  const Eigen::Index t = inputs.cols();
  if (t == 0) throw DataError("layer " + std::to_string(layer_index) + ": empty calibration set");

  const FloorCodes fc = floor_codes(layer, scales);
  const auto leaves = static_cast<std::size_t>((t + kLeafSamples - 1) / kLeafSamples);
  std::vector<Moments> partial(leaves);
  parallel_for(leaves, threads, [&](std::size_t k) {
    const Eigen::Index begin = static_cast<Eigen::Index>(k) * kLeafSamples;
    const Eigen::Index width = std::min(kLeafSamples, t - begin);
    partial[k] = leaf_moments(layer, scales, fc, inputs.middleCols(begin, width));
  });
  const Moments total = tree_sum(partial, 0, leaves);

  const double inv = 1.0 / static_cast<double>(t);
  SubproblemBatch batch;
  batch.layer_index = layer_index;
  batch.samples = t;
  batch.ratio = scales.ratio();
  batch.output_unit = scales.output_unit();
  // Mirror the lower triangle so the Gram average is exactly symmetric.
  batch.mean_gram = (total.gram * inv).selfadjointView<Eigen::Lower>();
  batch.mean_codes = total.codes * inv;
  batch.mean_d = total.d * inv;
  batch.mean_d_codes = total.d_codes * inv;
  batch.mean_d_sq = total.d_sq * inv;
  batch.assemble();
  return batch;
}

QuboMatrix build_full_M(const SubproblemBatch& batch, Eigen::Index cap) {
  const Eigen::Index f = batch.in_features();
  const Eigen::Index n = batch.neurons();
  const Eigen::Index dim = n * f + n;
  if (dim > cap)
    throw UsageError("full QUBO matrix would have dimension " + std::to_string(dim) +
                     ", above the verification cap " + std::to_string(cap));
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index base = i * f;
    const Eigen::Index bias = n * f + i;
    const Eigen::VectorXd diag = batch.diagonal(i);
    m.block(base, base, f, f) = batch.core().topLeftCorner(f, f);
    for (Eigen::Index j = 0; j < f; ++j) {
      m(base + j, base + j) = diag[j];
      m(base + j, bias) = batch.core()(j, f);
      m(bias, base + j) = batch.core()(f, j);
    }
    m(bias, bias) = diag[f];
  }
  return QuboMatrix(std::move(m));
}

QuboMatrix build_full_M(const DenseLayer& layer, const LayerScales& scales,
                        const Eigen::MatrixXd& inputs, Eigen::Index cap) {
  const Eigen::Index dim = layer.out_features() * (layer.in_features() + 1);
  if (dim > cap)
    throw UsageError("full QUBO matrix would have dimension " + std::to_string(dim) +
                     ", above the verification cap " + std::to_string(cap));
  return build_full_M(build_batch(layer, scales, inputs), cap);
}

void write_qubo_csv(std::ostream& out, const QuboMatrix& q) {
  char buf[32];
  for (Eigen::Index j = 0; j < q.dim(); ++j) {
    for (Eigen::Index k = 0; k < q.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", q(j, k));
      if (k > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace adaqubo
