/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "causalnet/error.hpp"
#include "causalnet/tensor.hpp"
#include "test_support.hpp"

namespace causalnet {
namespace {

using testing::random_tensor;
using testing::to_vector;

// Central differences of f around `x`, computed without any tape.
std::vector<double> numeric_gradient(const std::function<double(const Tensor&)>& f, const Tensor& x,
                                     double eps = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto plus = to_vector(x);
    auto minus = to_vector(x);
    plus[i] += eps;
    minus[i] -= eps;
    g[i] = (f(Tensor(x.shape(), plus)) - f(Tensor(x.shape(), minus))) / (2 * eps);
  }
  return g;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], tol * std::max(1.0, std::fabs(b[i]))) << "entry " << i;
  }
}

// Analytic gradient of sum(w ⊙ op(x)) with respect to x, w fixed random.
std::vector<double> analytic_gradient(const std::function<Tensor(const Tensor&)>& op, const Tensor& x,
                                      const Tensor& w) {
  Tape tape;
  Tensor v = tape.variable(x);
  Tensor loss = ad::sum(ad::multiply(op(v), w));
  return to_vector(tape.backward(loss).of(v));
}

void check_unary(const std::function<Tensor(const Tensor&)>& op, const Tensor& x, std::mt19937_64& rng) {
  const Tensor w = random_tensor(rng, op(x).shape());
  auto f = [&](const Tensor& p) { return ad::sum(ad::multiply(op(p), w)).item(); };
  expect_close(analytic_gradient(op, x, w), numeric_gradient(f, x), 1e-6);
}

TEST(TensorTest, ConstructionRejectsSizeMismatch) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), Error);
  EXPECT_EQ(Tensor::zeros({2, 3}).size(), 6u);
  EXPECT_EQ(Tensor().rank(), 0u);
  EXPECT_EQ(Tensor().item(), 0.0);
}

TEST(TensorTest, MatmulIdentity) {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor id = Tensor::matrix({{1, 0}, {0, 1}});
  EXPECT_EQ(to_vector(ad::matmul(a, id)), (std::vector<double>{1, 2, 3, 4}));
}

TEST(TensorTest, FixedPoints) {
  const Tensor z = ad::tanh(Tensor::zeros({3, 2}));
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(ad::relu(Tensor::scalar(-1.0)).item(), 0.0);
}

TEST(TensorTest, ConcatShape) {
  const Tensor c = ad::concat(Tensor::ones({2, 3}), Tensor::zeros({2, 5}));
  EXPECT_EQ(c.shape(), (Shape{2, 8}));
  EXPECT_EQ(c.at(1, 2), 1.0);
  EXPECT_EQ(c.at(1, 3), 0.0);
}

TEST(TensorTest, ShapeErrorNamesOperatorAndShapes) {
  try {
    ad::add(Tensor::zeros({2, 3}), Tensor::zeros({4, 5}));
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Shape);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos);
    EXPECT_NE(msg.find("(2,3)"), std::string::npos);
    EXPECT_NE(msg.find("(4,5)"), std::string::npos);
  }
  EXPECT_THROW(ad::matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), Error);
  EXPECT_THROW(ad::concat(Tensor::zeros({2, 3}), Tensor::zeros({3, 3})), Error);
}

TEST(TensorTest, MatmulMatchesNaiveLoops) {
  std::mt19937_64 rng(7);
  for (auto [n, k, m] : {std::array<std::size_t, 3>{3, 4, 5}, {1, 7, 2}, {40, 30, 20}, {200, 100, 3}}) {
    const Tensor a = random_tensor(rng, {n, k});
    const Tensor b = random_tensor(rng, {k, m});
    const Tensor c = ad::matmul(a, b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * m + j];
        EXPECT_NEAR(c.at(i, j), s, 1e-12);
      }
    }
  }
}

TEST(TensorTest, BatchedMatmulSharesRankTwoOperand) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor(rng, {2, 3, 4});
  const Tensor b = random_tensor(rng, {4, 2});
  const Tensor c = ad::matmul(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 2}));
  for (std::size_t batch = 0; batch < 2; ++batch) {
    std::vector<double> slice(a.values().begin() + batch * 12, a.values().begin() + (batch + 1) * 12);
    const Tensor ref = ad::matmul(Tensor({3, 4}, slice), b);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(c[batch * 6 + i], ref[i], 1e-14);
  }
}

TEST(TensorTest, BroadcastAddsRowVector) {
  const Tensor a = Tensor::matrix({{1, 2}, {3, 4}});
  const Tensor b = Tensor({2}, {10, 20});
  EXPECT_EQ(to_vector(ad::add(a, b)), (std::vector<double>{11, 22, 13, 24}));
  EXPECT_EQ(to_vector(ad::multiply(a, Tensor({2, 1}, {2, 3}))), (std::vector<double>{2, 4, 9, 12}));
}

TEST(TensorTest, ConstantsStayOffTape) {
  const Tensor c = ad::add(Tensor::ones({2}), Tensor::ones({2}));
  EXPECT_FALSE(c.on_tape());
  Tape tape;
  const Tensor v = tape.variable(Tensor::ones({2}));
  EXPECT_TRUE(ad::add(v, c).on_tape());
  EXPECT_FALSE(v.detach().on_tape());
}

TEST(BackwardTest, SumGivesOnes) {
  Tape tape;
  const Tensor p = tape.variable(Tensor::full({2, 3, 4}, 0.3));
  const auto g = tape.backward(ad::sum(p)).of(p);
  EXPECT_EQ(g.shape(), (Shape{2, 3, 4}));
  for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

TEST(BackwardTest, SquareGivesTwiceValue) {
  Tape tape;
  const Tensor p = tape.variable(Tensor({3}, {1, 2, 3}));
  EXPECT_EQ(to_vector(tape.backward(ad::sum(ad::multiply(p, p))).of(p)), (std::vector<double>{2, 4, 6}));
}

TEST(BackwardTest, TanhAtOrigin) {
  Tape tape;
  const Tensor p = tape.variable(Tensor::zeros({4}));
  const Tensor g = tape.backward(ad::sum(ad::tanh(p))).of(p);
  for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

TEST(BackwardTest, RejectsNonScalarLoss) {
  Tape tape;
  const Tensor p = tape.variable(Tensor::zeros({4}));
  EXPECT_THROW(tape.backward(ad::tanh(p)), Error);
  Tape other;
  const Tensor q = other.variable(Tensor::zeros({1}));
  EXPECT_THROW(tape.backward(ad::sum(q)), Error);
}

TEST(BackwardTest, UnreachedVariableGetsZeros) {
  Tape tape;
  const Tensor p = tape.variable(Tensor::ones({2}));
  const Tensor q = tape.variable(Tensor::ones({3}));
  const auto grads = tape.backward(ad::sum(p));
  EXPECT_TRUE(grads.reached(p));
  EXPECT_FALSE(grads.reached(q));
  const Tensor gq = grads.of(q);
  for (double v : gq.values()) EXPECT_EQ(v, 0.0);
}

TEST(BackwardTest, SharedSubexpressionAccumulates) {
  Tape tape;
  const Tensor p = tape.variable(Tensor::scalar(1.5));
  const Tensor y = ad::tanh(p);
  // d/dp (y + y*y) = (1 + 2y) sech^2(p)
  const Tensor loss = ad::sum(ad::add(y, ad::multiply(y, y)));
  const double t = std::tanh(1.5);
  EXPECT_NEAR(tape.backward(loss).of(p).item(), (1 + 2 * t) * (1 - t * t), 1e-14);
}

class PrimitiveGradientTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng{11};
};

TEST_F(PrimitiveGradientTest, Elementwise) {
  const Tensor x = random_tensor(rng, {3, 4}, -2.0, 2.0);
  check_unary([](const Tensor& a) { return ad::sigmoid(a); }, x, rng);
  check_unary([](const Tensor& a) { return ad::tanh(a); }, x, rng);
  check_unary([](const Tensor& a) { return ad::scale(a, -2.5); }, x, rng);
  check_unary([](const Tensor& a) { return ad::add_scalar(a, 0.7); }, x, rng);
  check_unary([](const Tensor& a) { return ad::transpose(a); }, x, rng);
  check_unary([](const Tensor& a) { return ad::reshape(a, {2, 6}); }, x, rng);
  check_unary([](const Tensor& a) { return ad::sum_last(a); }, x, rng);
  check_unary([](const Tensor& a) { return ad::mean(a); }, x, rng);
  check_unary([](const Tensor& a) { return ad::broadcast_to(ad::reshape(a, {1, 3, 4}), {2, 3, 4}); }, x, rng);
  const Tensor away = random_tensor(rng, {3, 4}, 0.5, 2.0);
  check_unary([](const Tensor& a) { return ad::relu(a); }, away, rng);
  check_unary([](const Tensor& a) { return ad::relu(ad::scale(a, -1.0)); }, away, rng);
  check_unary([](const Tensor& a) { return ad::abs(ad::scale(a, -1.0)); }, away, rng);
  check_unary([](const Tensor& a) { return ad::reciprocal(a); }, away, rng);
}

TEST_F(PrimitiveGradientTest, BinaryOperandsIncludingBroadcast) {
  const Tensor a = random_tensor(rng, {2, 3, 4});
  const Tensor b = random_tensor(rng, {3, 4});
  const Tensor col = random_tensor(rng, {3, 1});
  for (const Tensor& other : {b, col}) {
    check_unary([&](const Tensor& x) { return ad::add(x, other); }, a, rng);
    check_unary([&](const Tensor& x) { return ad::subtract(other, x); }, a, rng);
    check_unary([&](const Tensor& x) { return ad::multiply(x, other); }, a, rng);
    check_unary([&](const Tensor& x) { return ad::add(a, x); }, other, rng);
    check_unary([&](const Tensor& x) { return ad::subtract(a, x); }, other, rng);
    check_unary([&](const Tensor& x) { return ad::multiply(a, x); }, other, rng);
  }
}

TEST_F(PrimitiveGradientTest, MatmulConcatAffine) {
  const Tensor a = random_tensor(rng, {2, 3, 4});
  const Tensor w = random_tensor(rng, {4, 5});
  const Tensor big = random_tensor(rng, {70, 80});
  const Tensor big_w = random_tensor(rng, {80, 9});
  const Tensor bias = random_tensor(rng, {5});
  check_unary([&](const Tensor& x) { return ad::matmul(x, w); }, a, rng);
  check_unary([&](const Tensor& x) { return ad::matmul(a, x); }, w, rng);
  check_unary([&](const Tensor& x) { return ad::matmul(x, big_w); }, big, rng);
  check_unary([&](const Tensor& x) { return ad::matmul(big, x); }, big_w, rng);
  check_unary([&](const Tensor& x) { return ad::concat(x, a); }, a, rng);
  check_unary([&](const Tensor& x) { return ad::concat(a, x); }, a, rng);
  check_unary([&](const Tensor& x) { return ad::affine(x, w, bias); }, a, rng);
  check_unary([&](const Tensor& x) { return ad::affine(a, x, bias); }, w, rng);
  check_unary([&](const Tensor& x) { return ad::affine(a, w, x); }, bias, rng);
}

TEST(TensorPropertyTest, MatmulAssociative) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = random_tensor(rng, {4, 6});
    const Tensor b = random_tensor(rng, {6, 3});
    const Tensor c = random_tensor(rng, {3, 5});
    const Tensor left = ad::matmul(ad::matmul(a, b), c);
    const Tensor right = ad::matmul(a, ad::matmul(b, c));
    for (std::size_t i = 0; i < left.size(); ++i) EXPECT_NEAR(left[i], right[i], 1e-12);
  }
}

TEST(TensorPropertyTest, BackwardIsDeterministic) {
  auto run = [] {
    std::mt19937_64 rng(9);
    Tape tape;
    const Tensor x = tape.variable(random_tensor(rng, {5, 7}));
    const Tensor w = tape.variable(random_tensor(rng, {7, 3}));
    const Tensor loss = ad::mean(ad::tanh(ad::matmul(x, w)));
    const auto g = tape.backward(loss);
    auto out = to_vector(g.of(x));
    const auto gw = to_vector(g.of(w));
    out.insert(out.end(), gw.begin(), gw.end());
    out.push_back(loss.item());
    return out;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace causalnet
