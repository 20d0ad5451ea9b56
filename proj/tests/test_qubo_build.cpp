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

#include <doctest.h>

#include <adaqubo/qubo_build.hpp>

#include <random>
#include <sstream>

#include "support.hpp"

using namespace adaqubo;

namespace {

// The 1x1 layer: w = 0.3, b = 0, s_w = s_x = 0.25, s_b = 0.0625, x = 0.25.
struct TinyCase {
  DenseLayer layer{Eigen::MatrixXd::Constant(1, 1, 0.3), Eigen::VectorXd::Zero(1), Activation::none};
  LayerScales scales = testing::make_scales(0.25, 0.0625, 0.25);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(1, 0.25);
};

std::span<const std::uint8_t> as_span(const BitVector& v) { return {v.data(), v.size()}; }

Eigen::MatrixXd naive_mean(const std::vector<std::vector<QuboMatrix>>& per_sample, std::size_t i) {
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(per_sample[0][i].dim(), per_sample[0][i].dim());
  for (const auto& s : per_sample) sum += s[i].entries();
  return sum / static_cast<double>(per_sample.size());
}

}  // namespace

TEST_CASE("residual of the tiny layer") {
  TinyCase c;
  const auto d = residual_d(c.layer, c.scales, c.x);
  REQUIRE(d.values.size() == 1);
  CHECK(d.values[0] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(d.values[0] == doctest::Approx(testing::reference_d(c.layer, c.scales, c.x)[0]).epsilon(1e-15));
}

TEST_CASE("residual vanishes on the grid") {
  DenseLayer layer{Eigen::MatrixXd(2, 3), Eigen::Vector2d(0.5, -1.0), Activation::none};
  layer.weights << 0.25, -0.5, 0.75, 0.0, 1.0, -0.25;
  const auto s = testing::make_scales(0.25, 0.5, 0.5);
  const auto d = residual_d(layer, s, Eigen::Vector3d(1.0, -0.5, 2.0));
  CHECK(d.values.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("residual with zero input keeps only the bias terms") {
  std::mt19937_64 gen(1);
  const auto c = testing::random_layer_case(gen, 4, 3, 1);
  const auto s = testing::make_scales(0.1, 0.07, 0.3);
  const auto d = residual_d(c.layer, s, Eigen::Vector3d::Zero());
  for (Eigen::Index i = 0; i < 4; ++i)
    CHECK(d.values[i] == doctest::Approx(c.layer.bias[i] / (0.1 * 0.3) -
                                         s.ratio() * std::floor(c.layer.bias[i] / 0.07))
                             .epsilon(1e-12));
}

TEST_CASE("residual matches the scalar reference on random layers") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testing::random_layer_case(gen, 1 + trial % 7, 1 + trial % 5, 1);
    const auto s = make_layer_scales(c.layer, c.inputs, 1 + trial % 8);
    const auto d = residual_d(c.layer, s, c.inputs.col(0));
    const auto ref = testing::reference_d(c.layer, s, c.inputs.col(0));
    for (std::size_t i = 0; i < ref.size(); ++i)
      CHECK(testing::relative_gap(d.values[static_cast<Eigen::Index>(i)], ref[i]) <= 1e-12);
  }
}

TEST_CASE("per-sample subproblem of the tiny layer") {
  TinyCase c;
  const auto s = build_subproblem_sample(c.layer, c.scales, c.x);
  REQUIRE(s.size() == 1);
  Eigen::Matrix2d expected;
  expected << 0.6, 1.0, 1.0, 0.6;
  CHECK((s[0].entries() - expected).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(energy(s[0], as_span({0, 0})) == 0.0);
  CHECK(energy(s[0], as_span({1, 0})) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(energy(s[0], as_span({0, 1})) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(energy(s[0], as_span({1, 1})) == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("per-sample subproblems match the term-by-term objective") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 5, f = 1 + trial % 6;
    const auto c = testing::random_layer_case(gen, n, f, 1);
    const auto s = make_layer_scales(c.layer, c.inputs, 2 + trial % 7);
    const Eigen::VectorXd x = c.inputs.col(0);
    const auto sub = build_subproblem_sample(c.layer, s, x);
    const auto wb = testing::random_bit_rows(gen, static_cast<std::size_t>(n), static_cast<std::size_t>(f));
    const auto bb = testing::random_bits(gen, static_cast<std::size_t>(n));
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto v = wb[static_cast<std::size_t>(i)];
      v.push_back(bb[static_cast<std::size_t>(i)]);
      total += energy(sub[static_cast<std::size_t>(i)], as_span(v));
      CHECK(energy(sub[static_cast<std::size_t>(i)], as_span(BitVector(static_cast<std::size_t>(f + 1), 0))) == 0.0);
    }
    const double ref = testing::reference_objective(c.layer, s, x, wb, bb);
    CHECK(std::abs(total - ref) <= 1e-9 * std::max(1.0, std::abs(ref)));
  }
}

TEST_CASE("batch of one sample equals the per-sample matrices") {
  std::mt19937_64 gen(4);
  const auto c = testing::random_layer_case(gen, 3, 4, 1);
  const auto s = make_layer_scales(c.layer, c.inputs, 4);
  const auto batch = build_batch(c.layer, s, c.inputs);
  const auto single = build_subproblem_sample(c.layer, s, c.inputs.col(0));
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK((batch.subproblem(i).entries() - single[static_cast<std::size_t>(i)].entries()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, single[static_cast<std::size_t>(i)].entries().cwiseAbs().maxCoeff()));

  Eigen::MatrixXd twice(4, 2);
  twice << c.inputs, c.inputs;
  const auto doubled = build_batch(c.layer, s, twice);
  for (Eigen::Index i = 0; i < 3; ++i)
    CHECK((doubled.subproblem(i).entries() - batch.subproblem(i).entries()).cwiseAbs().maxCoeff() <=
          1e-12 * std::max(1.0, batch.subproblem(i).entries().cwiseAbs().maxCoeff()));
}

TEST_CASE("batch mean matches naive averaging") {
  std::mt19937_64 gen(5);
  for (Eigen::Index t : {5, 40, 300, 1100}) {
    CAPTURE(t);
    const auto c = testing::random_layer_case(gen, 3, 5, t);
    const auto s = make_layer_scales(c.layer, c.inputs, 3);
    std::vector<std::vector<QuboMatrix>> per_sample;
    for (Eigen::Index k = 0; k < t; ++k) per_sample.push_back(build_subproblem_sample(c.layer, s, c.inputs.col(k)));
    const auto batch = build_batch(c.layer, s, c.inputs);
    CHECK(batch.samples == t);
    for (Eigen::Index i = 0; i < 3; ++i) {
      const Eigen::MatrixXd ref = naive_mean(per_sample, static_cast<std::size_t>(i));
      const double scale = std::max(1.0, ref.cwiseAbs().maxCoeff());
      CHECK((batch.subproblem(i).entries() - ref).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("subproblems share their off-diagonal part") {
  std::mt19937_64 gen(6);
  const auto c = testing::random_layer_case(gen, 4, 6, 30);
  const auto s = make_layer_scales(c.layer, c.inputs, 2);
  const auto batch = build_batch(c.layer, s, c.inputs);
  CHECK(batch.subproblem_dim() == 7);
  CHECK(batch.ratio == s.ratio());
  for (Eigen::Index i = 0; i < 4; ++i) {
    Eigen::MatrixXd q = batch.subproblem(i).entries();
    CHECK(q == q.transpose());
    q.diagonal().setZero();
    CHECK(q == batch.core());
    Eigen::MatrixXd first = batch.subproblem(0).entries();
    first.diagonal().setZero();
    CHECK(q == first);
  }
}

TEST_CASE("batch construction does not depend on the thread count") {
  std::mt19937_64 gen(7);
  const auto c = testing::random_layer_case(gen, 5, 8, 2000);
  const auto s = make_layer_scales(c.layer, c.inputs, 4);
  const auto one = build_batch(c.layer, s, c.inputs, 0, 1);
  const auto many = build_batch(c.layer, s, c.inputs, 0, 6);
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(one.subproblem(i).entries() == many.subproblem(i).entries());
  CHECK(one.mean_d_sq == many.mean_d_sq);
}

TEST_CASE("batch rejects empty or mismatched calibration inputs") {
  std::mt19937_64 gen(8);
  const auto c = testing::random_layer_case(gen, 2, 3, 4);
  const auto s = make_layer_scales(c.layer, c.inputs, 4);
  CHECK_THROWS_AS(build_batch(c.layer, s, Eigen::MatrixXd(3, 0)), DataError);
  CHECK_THROWS_AS(build_batch(c.layer, s, Eigen::MatrixXd::Zero(2, 4)), DataError);
}

TEST_CASE("full matrix decomposes into the subproblems") {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 1 + trial % 4, f = 1 + (trial / 4) % 4;
    const auto c = testing::random_layer_case(gen, n, f, 12);
    const auto s = make_layer_scales(c.layer, c.inputs, 2);
    const auto batch = build_batch(c.layer, s, c.inputs);
    const QuboMatrix m = build_full_M(batch);
    REQUIRE(m.dim() == n * f + n);
    CHECK(m.entries() == m.entries().transpose());
    for (int k = 0; k < 100; ++k) {
      const auto v = testing::random_bits(gen, static_cast<std::size_t>(m.dim()));
      ExactSum<double> parts;
      for (Eigen::Index i = 0; i < n; ++i) {
        BitVector vi(static_cast<std::size_t>(f + 1));
        for (Eigen::Index j = 0; j < f; ++j) vi[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(i * f + j)];
        vi.back() = v[static_cast<std::size_t>(n * f + i)];
        accumulate_energy(batch.subproblem(i), as_span(vi), parts);
      }
      CHECK(energy(m, as_span(v)) == parts.value());
    }
  }
}

TEST_CASE("full matrix of a single neuron is the subproblem") {
  std::mt19937_64 gen(10);
  const auto c = testing::random_layer_case(gen, 1, 5, 9);
  const auto s = make_layer_scales(c.layer, c.inputs, 3);
  CHECK(build_full_M(c.layer, s, c.inputs).entries() == build_batch(c.layer, s, c.inputs).subproblem(0).entries());
}

TEST_CASE("full matrix argmin is the concatenation of subproblem argmins") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 10; ++trial) {
    const auto c = testing::random_layer_case(gen, 2, 2, 15);
    const auto s = make_layer_scales(c.layer, c.inputs, 2);
    const auto batch = build_batch(c.layer, s, c.inputs);
    const auto full = testing::brute_force(build_full_M(batch).entries());
    const auto a = testing::brute_force(batch.subproblem(0).entries());
    const auto b = testing::brute_force(batch.subproblem(1).entries());
    CHECK(full.energy == doctest::Approx(a.energy + b.energy).epsilon(1e-12));
    for (const auto& va : a.minimizers)
      for (const auto& vb : b.minimizers) {
        const BitVector joined{va[0], va[1], vb[0], vb[1], va[2], vb[2]};
        CHECK(testing::contains(full.minimizers, joined));
      }
  }
}

TEST_CASE("full matrix is gated by a size cap") {
  std::mt19937_64 gen(12);
  const auto c = testing::random_layer_case(gen, 10, 10, 3);
  const auto s = make_layer_scales(c.layer, c.inputs, 8);
  CHECK_THROWS_AS(build_full_M(c.layer, s, c.inputs, 100), UsageError);
  CHECK(build_full_M(c.layer, s, c.inputs, 110).dim() == 110);
  CHECK_THROWS_AS(build_full_M(build_batch(c.layer, s, c.inputs), 50), UsageError);
}

TEST_CASE("frobenius identity on random layers") {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 10, f = 1 + (trial * 7) % 10;
    const auto c = testing::random_layer_case(gen, n, f, 1);
    const auto s = make_layer_scales(c.layer, c.inputs, 1 + trial % 8);
    const Eigen::VectorXd x = c.inputs.col(0);
    const auto wb = testing::random_bit_rows(gen, static_cast<std::size_t>(n), static_cast<std::size_t>(f));
    const auto bb = testing::random_bits(gen, static_cast<std::size_t>(n));
    const double direct = testing::reference_reconstruction(c.layer, s, x, wb, bb);
    const auto d = residual_d(c.layer, s, x);
    const auto sub = build_subproblem_sample(c.layer, s, x);
    double q = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      auto v = wb[static_cast<std::size_t>(i)];
      v.push_back(bb[static_cast<std::size_t>(i)]);
      q += energy(sub[static_cast<std::size_t>(i)], as_span(v));
    }
    const double unit = s.output_unit();
    const double via_qubo = unit * unit * (d.values.squaredNorm() + q);
    CHECK(std::abs(direct - via_qubo) / std::max(1.0, direct) <= 1e-9);
  }
}

TEST_CASE("subproblem CSV dump round-trips") {
  std::mt19937_64 gen(14);
  const auto c = testing::random_layer_case(gen, 2, 3, 10);
  const auto s = make_layer_scales(c.layer, c.inputs, 4);
  const QuboMatrix q = build_batch(c.layer, s, c.inputs).subproblem(1);
  std::ostringstream out;
  write_qubo_csv(out, q);
  std::istringstream in(out.str());
  std::string line;
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    CHECK(line.find('\r') == std::string::npos);
    std::istringstream cells(line);
    std::string cell;
    Eigen::Index col = 0;
    while (std::getline(cells, cell, ',')) {
      CHECK(std::stod(cell) == q(row, col));
      ++col;
    }
    CHECK(col == q.dim());
    ++row;
  }
  CHECK(row == q.dim());
}
