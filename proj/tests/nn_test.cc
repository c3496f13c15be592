// Copyright 2026 The colight-cpp Authors. All rights reserved.
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

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "colight/matrix.h"
#include "colight/params.h"
#include "colight/tape.h"
#include "doctest.h"
#include "test_util.h"

using colight::nn::Activation;
using colight::nn::AdamState;
using colight::nn::Dense;
using colight::nn::Mask;
using colight::nn::Matrix;
using colight::nn::ParamSet;
using colight::nn::ShapeError;
using colight::nn::SoftmaxTemp;
using colight::nn::Tape;
using colight::testing::RandomMatrix;

TEST_CASE("dense examples") {
  const Matrix w = Matrix::Identity(2);
  const Matrix b(1, 2);
  CHECK(Dense(Matrix::RowVector({1, 0}), w, b, Activation::kRelu) == Matrix::RowVector({1, 0}));
  CHECK(Dense(Matrix::RowVector({1, -1}), w, b, Activation::kRelu) == Matrix::RowVector({1, 0}));
  CHECK_THROWS_AS(Dense(Matrix::RowVector({1, 2, 3}), w, b, Activation::kNone), ShapeError);
}

TEST_CASE("dense matches a naive matmul oracle") {
  std::mt19937_64 rng(3);
  const Matrix x = RandomMatrix(1, 3, rng), w = RandomMatrix(3, 4, rng), b = RandomMatrix(1, 4, rng);
  Matrix expect = colight::testing::NaiveMatMul(x, w);
  expect += b;
  CHECK(colight::testing::MaxAbsDiff(Dense(x, w, b, Activation::kNone), expect) < 1e-12);
  const Matrix a = RandomMatrix(5, 7, rng), c = RandomMatrix(7, 3, rng);
  CHECK(colight::testing::MaxAbsDiff(colight::nn::MatMul(a, c),
                                     colight::testing::NaiveMatMul(a, c)) < 1e-12);
}

TEST_CASE("dense without activation is linear") {
  std::mt19937_64 rng(4);
  const Matrix w = RandomMatrix(4, 3, rng), zero(1, 3);
  const Matrix x = RandomMatrix(1, 4, rng), y = RandomMatrix(1, 4, rng);
  const double a = 0.7, c = -1.3;
  Matrix mix(1, 4);
  for (int j = 0; j < 4; ++j) mix(0, j) = a * x(0, j) + c * y(0, j);
  Matrix expect = Dense(x, w, zero, Activation::kNone);
  expect *= a;
  Matrix other = Dense(y, w, zero, Activation::kNone);
  other *= c;
  expect += other;
  CHECK(colight::testing::MaxAbsDiff(Dense(mix, w, zero, Activation::kNone), expect) < 1e-12);
}

TEST_CASE("softmax with temperature") {
  const auto third = SoftmaxTemp(std::vector<double>{1, 1, 1}, 1.0);
  for (double v : third) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
  const auto two = SoftmaxTemp(std::vector<double>{0, std::log(2.0)}, 1.0);
  CHECK(two[0] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  CHECK(two[1] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  const auto shift = SoftmaxTemp(std::vector<double>{5, 5 + std::log(3.0)}, 1.0);
  CHECK(shift[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(shift[1] == doctest::Approx(0.75).epsilon(1e-12));
  const Mask mask{1, 0, 1};
  const auto masked = SoftmaxTemp(std::vector<double>{0, 100, 0}, 1.0, mask);
  CHECK(masked[1] == 0.0);
  CHECK(masked[0] == doctest::Approx(0.5));
  CHECK_THROWS(SoftmaxTemp(std::vector<double>{1, 2}, 1.0, Mask{0, 0}));
  CHECK_THROWS(SoftmaxTemp(std::vector<double>{1, 2}, 0.0));
  // Huge logits stay finite thanks to max subtraction.
  const auto big = SoftmaxTemp(std::vector<double>{1000, 1000}, 0.5);
  CHECK(big[0] == doctest::Approx(0.5));
}

TEST_CASE("softmax properties on random logits") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  std::bernoulli_distribution keep(0.7);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 7;
    std::vector<double> e(n);
    Mask mask(n);
    for (int j = 0; j < n; ++j) {
      e[j] = u(rng);
      mask[j] = keep(rng);
    }
    mask[trial % n] = 1;
    const double tau = 0.1 + (trial % 5);
    const auto a = SoftmaxTemp(e, tau, mask);
    double sum = 0;
    for (int j = 0; j < n; ++j) {
      CHECK(a[j] >= 0.0);
      CHECK(a[j] <= 1.0);
      if (!mask[j]) CHECK(a[j] == 0.0);
      sum += a[j];
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    auto shifted = e;
    for (auto& v : shifted) v += 3.25;
    const auto b = SoftmaxTemp(shifted, tau, mask);
    for (int j = 0; j < n; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-12);
  }
}

TEST_CASE("backward of a sum is all ones") {
  std::mt19937_64 rng(6);
  const Matrix w = RandomMatrix(3, 4, rng);
  Tape tape;
  const auto p = tape.Param(w);
  tape.Backward(tape.Sum(p));
  CHECK(tape.grad(p) == Matrix(3, 4, 1.0));
}

TEST_CASE("gradients accumulate across disjoint passes on one tape") {
  std::mt19937_64 rng(7);
  const Matrix w = RandomMatrix(3, 2, rng);
  const Matrix x1 = RandomMatrix(1, 3, rng), x2 = RandomMatrix(1, 3, rng);
  auto grad_of = [&](const std::vector<Matrix>& xs) {
    Tape tape;
    const auto p = tape.Param(w);
    for (const auto& x : xs) tape.Backward(tape.Sum(tape.Relu(tape.MatMul(tape.Input(x), p))));
    return tape.grad(p);
  };
  Matrix both = grad_of({x1});
  both += grad_of({x2});
  CHECK(colight::testing::MaxAbsDiff(grad_of({x1, x2}), both) < 1e-15);
}

TEST_CASE("backward rejects a non-scalar loss") {
  Tape tape;
  const Matrix w(2, 2, 1.0);
  const auto p = tape.Param(w);
  CHECK_THROWS(tape.Backward(p));
}

TEST_CASE("every tape op passes a finite-difference check") {
  std::mt19937_64 rng(8);
  const int rows = 3, slots = 2, d = 4;
  ParamSet ps;
  ps.Add("a", RandomMatrix(rows, d, rng));
  ps.Add("w", RandomMatrix(d, d, rng));
  ps.Add("bias", RandomMatrix(1, d, rng));
  const std::vector<int> gather{0, 1, 1, 2, 2, 0};
  const Mask mask{1, 1, 1, 0, 1, 1};
  const std::vector<int> pick{0, 3, 1};
  const Matrix target = RandomMatrix(rows, 1, rng);
  auto build = [&](Tape& tape, std::vector<colight::nn::Var>& vars) {
    vars.clear();
    for (const auto& t : ps.tensors()) vars.push_back(tape.Param(t));
    auto h = tape.Relu(tape.AddRow(tape.MatMul(vars[0], vars[1]), vars[2]));
    auto g = tape.GatherRows(h, gather);
    auto s = tape.MaskedSoftmax(tape.SlotDot(vars[0], g, slots), mask, 0.7);
    auto agg = tape.Add(tape.SlotWeightedSum(s, g), tape.Scale(h, 0.5));
    return tape.SquaredErrorSum(tape.Pick(agg, pick), target);
  };
  Tape tape;
  std::vector<colight::nn::Var> vars;
  tape.Backward(build(tape, vars));
  std::vector<Matrix> analytic;
  for (const auto& v : vars) analytic.push_back(tape.grad(v));
  auto loss = [&] {
    Tape t;
    std::vector<colight::nn::Var> vs;
    return t.value(build(t, vs))(0, 0);
  };
  CHECK(colight::testing::GradientCheck(ps, analytic, loss) < 1e-4);
}

TEST_CASE("adam: zero gradient leaves params unchanged") {
  std::mt19937_64 rng(9);
  ParamSet ps;
  ps.Add("w", RandomMatrix(3, 3, rng));
  const ParamSet before = ps;
  AdamState adam(ps, {});
  adam.Step(ps, ps.ZerosLike());
  CHECK(ps == before);
  CHECK(adam.step_count() == 1);
}

TEST_CASE("adam: constant gradient steps approach the learning rate") {
  ParamSet ps;
  ps.Add("w", Matrix(1, 2, 0.0));
  AdamState adam(ps, {.learning_rate = 0.01});
  std::vector<Matrix> g{Matrix::RowVector({0.3, -2.0})};
  double prev0 = 0, prev1 = 0;
  for (int s = 0; s < 200; ++s) {
    adam.Step(ps, g);
    const double d0 = ps[0](0, 0) - prev0, d1 = ps[0](0, 1) - prev1;
    prev0 = ps[0](0, 0);
    prev1 = ps[0](0, 1);
    // Bias correction makes m_hat / sqrt(v_hat) = sign(g) exactly for a constant g.
    CHECK(d0 == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(d1 == doctest::Approx(0.01).epsilon(1e-6));
  }
}

TEST_CASE("adam: non-finite gradient is rejected without mutation") {
  ParamSet ps;
  ps.Add("w", Matrix(2, 2, 1.0));
  const ParamSet before = ps;
  AdamState adam(ps, {});
  auto g = ps.ZerosLike();
  g[0](1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(adam.Step(ps, g), colight::nn::NonFiniteGradient);
  CHECK(ps == before);
  CHECK(adam.step_count() == 0);
  CHECK(adam.first_moment()[0] == Matrix(2, 2));
  auto bad_shape = std::vector<Matrix>{Matrix(1, 2)};
  CHECK_THROWS_AS(adam.Step(ps, bad_shape), ShapeError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  std::mt19937_64 rng(10);
  ParamSet ps;
  ps.Add("embed.W", RandomMatrix(4, 3, rng, -1e3, 1e3));
  ps.Add("embed.b", RandomMatrix(1, 3, rng, -1e-300, 1e-300));
  ps.Add("tiny", Matrix(1, 1, 5e-324));
  std::stringstream buf;
  colight::nn::SaveParams(ps, buf);
  const ParamSet back = colight::nn::LoadParams(buf);
  CHECK(back == ps);
  std::stringstream broken("{\"order\": [\"x\"], \"tensors\": {}}");
  CHECK_THROWS(colight::nn::LoadParams(broken));
}

TEST_CASE("param set bookkeeping") {
  ParamSet ps;
  ps.Add("a", Matrix(2, 3));
  ps.Add("b", Matrix(1, 3));
  CHECK(ps.ScalarCount() == 9);
  CHECK_THROWS(ps.Add("a", Matrix(1, 1)));
  ParamSet other;
  other.Add("a", Matrix(2, 3, 1.0));
  other.Add("b", Matrix(1, 3));
  CHECK(ps.SameLayout(other));
  other.Add("c", Matrix(1, 1));
  CHECK_FALSE(ps.SameLayout(other));
}
