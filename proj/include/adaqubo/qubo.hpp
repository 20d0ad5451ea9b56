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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "adaqubo/errors.hpp"

namespace adaqubo {

using BitVector = std::vector<std::uint8_t>;

/// Correctly rounded floating-point sum (Shewchuk's partials, as in Python's
/// math.fsum). The result does not depend on the order terms were added.
template <std::floating_point Scalar>
class ExactSum {
 public:
  void add(Scalar x) {
    std::size_t used = 0;
    for (Scalar y : partials_) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const Scalar hi = x + y;
      const Scalar lo = y - (hi - x);
      if (lo != Scalar(0)) partials_[used++] = lo;
      x = hi;
    }
    partials_.resize(used);
    partials_.push_back(x);
  }

  void merge(const ExactSum& other) {
    for (Scalar p : other.partials_) add(p);
  }

  Scalar value() const {
    std::size_t n = partials_.size();
    if (n == 0) return Scalar(0);
    Scalar hi = partials_[--n];
    Scalar lo = 0;
    while (n > 0) {
      const Scalar x = hi;
      const Scalar y = partials_[--n];
      hi = x + y;
      lo = y - (hi - x);
      if (lo != Scalar(0)) break;
    }
    // Round-half-even correction when the remaining partials push the
    // discarded tail past the halfway point.
    if (n > 0 && ((lo < 0 && partials_[n - 1] < 0) || (lo > 0 && partials_[n - 1] > 0))) {
      const Scalar y = lo * 2;
      const Scalar x = hi + y;
      if (y == x - hi) hi = x;
    }
    return hi;
  }

 private:
  std::vector<Scalar> partials_;
};

/// Dense symmetric QUBO coefficient matrix; the objective is v^T Q v over
/// binary v.
template <typename Scalar>
class QuboMatrixT {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  QuboMatrixT() = default;
  explicit QuboMatrixT(Eigen::Index dim) : entries_(Matrix::Zero(dim, dim)) {}
  explicit QuboMatrixT(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols())
      throw InvariantError("QUBO matrix must be square");
    if (!entries_.allFinite()) throw InvariantError("QUBO matrix has non-finite entries");
    const Scalar scale = std::max(Scalar(1), entries_.cwiseAbs().maxCoeff());
    if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw InvariantError("QUBO matrix is not symmetric");
  }

  Eigen::Index dim() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }
  Scalar operator()(Eigen::Index j, Eigen::Index k) const { return entries_(j, k); }

 private:
  Matrix entries_;
};

using QuboMatrix = QuboMatrixT<double>;

template <typename Scalar>
void check_dim(const QuboMatrixT<Scalar>& q, std::span<const std::uint8_t> v) {
  if (static_cast<Eigen::Index>(v.size()) != q.dim())
    throw InvariantError("bit vector length " + std::to_string(v.size()) +
                         " does not match QUBO dimension " + std::to_string(q.dim()));
}

/// Adds every Q[j][k] with v_j = v_k = 1 into `acc`.
template <typename Scalar>
void accumulate_energy(const QuboMatrixT<Scalar>& q, std::span<const std::uint8_t> v,
                       ExactSum<Scalar>& acc) {
  check_dim(q, v);
  const auto& m = q.entries();
  for (Eigen::Index k = 0; k < q.dim(); ++k) {
    if (!v[static_cast<std::size_t>(k)]) continue;
    for (Eigen::Index j = 0; j < q.dim(); ++j)
      if (v[static_cast<std::size_t>(j)]) acc.add(m(j, k));
  }
}

/// v^T Q v, correctly rounded.
template <typename Scalar>
Scalar energy(const QuboMatrixT<Scalar>& q, std::span<const std::uint8_t> v) {
  ExactSum<Scalar> acc;
  accumulate_energy(q, v, acc);
  return acc.value();
}

/// energy(flip(v, j)) - energy(v) = (1 - 2 v_j) (Q_jj + 2 sum_{k != j} Q_jk v_k).
template <typename Scalar>
Scalar delta_energy(const QuboMatrixT<Scalar>& q, std::span<const std::uint8_t> v,
                    Eigen::Index j) {
  check_dim(q, v);
  if (j < 0 || j >= q.dim()) throw InvariantError("flip index out of range");
  Scalar field = 0;
  for (Eigen::Index k = 0; k < q.dim(); ++k)
    if (k != j && v[static_cast<std::size_t>(k)]) field += q(j, k);
  const Scalar sign = v[static_cast<std::size_t>(j)] ? Scalar(-1) : Scalar(1);
  return sign * (q(j, j) + 2 * field);
}

}  // namespace adaqubo
