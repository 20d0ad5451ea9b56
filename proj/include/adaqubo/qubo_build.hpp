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

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "adaqubo/model.hpp"
#include "adaqubo/quant.hpp"
#include "adaqubo/qubo.hpp"

namespace adaqubo {

/// Round-down grid indices of a layer's parameters, stored as doubles so
/// they enter matrix products directly.
struct FloorCodes {
  Eigen::MatrixXd weights;  // floor(w_ij / s_w), n x f
  Eigen::VectorXd bias;     // floor(b_i / s_b), n
};

FloorCodes floor_codes(const DenseLayer& layer, const LayerScales& scales);

/// round_tn(x_j / s_x) for every entry; works column-wise on f x t inputs.
Eigen::MatrixXd input_codes(const Eigen::MatrixXd& inputs, const LayerScales& scales);

/// Per-neuron residual between the rescaled float pre-activation and its
/// all-round-down reconstruction:
///   d_i = y_i / (s_w s_x) - sum_j floor(w_ij/s_w) x~_j - r floor(b_i/s_b)
struct ResidualD {
  Eigen::VectorXd values;
};

ResidualD residual_d(const DenseLayer& layer, const LayerScales& scales, const Eigen::VectorXd& x);

/// The n matrices S_i for a single input vector. Variable order inside S_i is
/// (v_i1, ..., v_if, v_i).
std::vector<QuboMatrix> build_subproblem_sample(const DenseLayer& layer, const LayerScales& scales,
                                                const Eigen::VectorXd& x);

/// Calibration-averaged subproblems E[S_i] for one layer.
///
/// Only sample moments are stored. The matrices share every off-diagonal
/// entry (x~ Gram terms and the r E[x~_j] bias coupling); only the diagonal
/// depends on the neuron through E[d_i x~_j] and E[d_i].
class SubproblemBatch {
 public:
  SubproblemBatch() = default;

  std::size_t layer_index = 0;
  Eigen::Index samples = 0;
  double ratio = 0.0;             // r = s_b / (s_x s_w)
  double output_unit = 1.0;       // s_w s_x
  Eigen::MatrixXd mean_gram;      // E[x~_j x~_k], f x f
  Eigen::VectorXd mean_codes;     // E[x~_j]
  Eigen::VectorXd mean_d;         // E[d_i]
  Eigen::MatrixXd mean_d_codes;   // E[d_i x~_j], n x f
  Eigen::VectorXd mean_d_sq;      // E[d_i^2]

  Eigen::Index in_features() const { return mean_codes.size(); }
  Eigen::Index neurons() const { return mean_d.size(); }
  Eigen::Index subproblem_dim() const { return in_features() + 1; }

  /// Builds the shared core and the per-neuron diagonals from the moments.
  /// Must be called after the moments are filled in.
  void assemble();

  /// Shared off-diagonal part; its diagonal is zero.
  const Eigen::MatrixXd& core() const { return core_; }
  /// Diagonal of E[S_i] (length f + 1).
  Eigen::VectorXd diagonal(Eigen::Index i) const { return diagonals_.row(i).transpose(); }
  QuboMatrix subproblem(Eigen::Index i) const;

  /// E[sum_i d_i^2]: the plan-independent part of the rescaled error.
  double constant_term() const { return mean_d_sq.sum(); }

 private:
  Eigen::MatrixXd core_;
  Eigen::MatrixXd diagonals_;  // n x (f + 1)
};

/// Averages the per-sample subproblems over the columns of `inputs` (f x t).
/// Moments are summed over fixed 256-sample leaves combined in a pairwise
/// tree, so the result is identical for any thread count.
SubproblemBatch build_batch(const DenseLayer& layer, const LayerScales& scales,
                            const Eigen::MatrixXd& inputs, std::size_t layer_index = 0,
                            unsigned threads = 1);

inline constexpr Eigen::Index kDefaultFullMatrixCap = 4096;

/// Full layer matrix E[M] over v = (v_11..v_1f, ..., v_n1..v_nf, v_1..v_n).
/// Verification only: throws UsageError when n f + n exceeds `cap`.
QuboMatrix build_full_M(const SubproblemBatch& batch, Eigen::Index cap = kDefaultFullMatrixCap);
QuboMatrix build_full_M(const DenseLayer& layer, const LayerScales& scales,
                        const Eigen::MatrixXd& inputs, Eigen::Index cap = kDefaultFullMatrixCap);

/// Row-major CSV, 17 significant digits, LF line endings.
void write_qubo_csv(std::ostream& out, const QuboMatrix& q);

}  // namespace adaqubo
