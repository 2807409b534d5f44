/**
 * Copyright 2026 The spokendial Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
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
#include <limits>
#include <random>
#include <string>

#include "spokendial/numerics/autograd.hpp"
#include "spokendial/numerics/grad_check.hpp"
#include "spokendial/numerics/init.hpp"
#include "spokendial/numerics/ops.hpp"

namespace spokendial::numerics {
namespace {

using Td = Tensor<double>;
using Vd = Var<double>;

TEST(TensorTest, RejectsMismatchedValueCount) {
  EXPECT_THROW(Td(Shape{2, 3}, std::vector<double>(5)), ShapeError);
  Td t(Shape{2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(ShapeElementCount(t.shape()), t.size());
}

TEST(OpsTest, MatMulByIdentityIsIdentity) {
  std::mt19937_64 rng(1);
  auto a = Vd::Constant(RandomNormal<double>(3, 4, 1.0, rng));
  auto out = MatMul(a, Vd::Constant(Td::Identity(4)));
  EXPECT_EQ(out.value(), a.value());
}

TEST(OpsTest, MatMulShapeErrorNamesBothShapes) {
  auto a = Vd::Constant(Td::Zeros(2, 3));
  auto b = Vd::Constant(Td::Zeros(4, 5));
  try {
    MatMul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2 x 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4 x 5]"), std::string::npos) << msg;
  }
}

TEST(OpsTest, NoImplicitBroadcast) {
  auto a = Vd::Constant(Td::Zeros(2, 3));
  auto b = Vd::Constant(Td::Zeros(1, 3));
  EXPECT_THROW(Add(a, b), ShapeError);
  EXPECT_NO_THROW(AddRow(a, b));
}

TEST(OpsTest, GeluAtZeroIsZero) {
  auto out = Gelu(Vd::Constant(Td::Zeros(1, 1)));
  EXPECT_EQ(out.value().item(), 0.0);
}

TEST(OpsTest, SoftmaxOfUniformLogits) {
  auto out = SoftmaxRows(Vd::Constant(Td::Full(1, 4, 0.7)));
  for (double v : out.value().values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(OpsTest, SoftmaxMaskedColumnsGetZeroMass) {
  std::mt19937_64 rng(2);
  auto x = Vd::Constant(RandomNormal<double>(3, 5, 1.0, rng));
  const std::uint8_t valid[] = {1, 0, 1, 1, 0};
  auto y = SoftmaxRows(x, valid);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(y.value()(r, 1), 0.0);
    EXPECT_EQ(y.value()(r, 4), 0.0);
    double total = 0;
    for (double v : y.value().row(r)) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  const std::uint8_t none[] = {0, 0, 0, 0, 0};
  EXPECT_THROW(SoftmaxRows(x, none), ShapeError);
}

TEST(OpsTest, CrossEntropyOfUniformLogitsIsLogClassCount) {
  const std::size_t target[] = {2};
  auto loss = CrossEntropy(Vd::Constant(Td::Zeros(1, 4)), target);
  EXPECT_NEAR(loss.value().item(), std::log(4.0), 1e-12);
  EXPECT_NEAR(loss.value().item(), 1.386294, 1e-6);
}

TEST(OpsTest, LayerNormOfConstantRowIsShift) {
  auto x = Vd::Constant(Td::Full(2, 6, 3.5));
  std::mt19937_64 rng(3);
  auto gamma = Vd::Constant(RandomNormal<double>(1, 6, 1.0, rng));
  auto beta = Vd::Constant(RandomNormal<double>(1, 6, 1.0, rng));
  auto y = LayerNorm(x, gamma, beta);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < 6; ++c) EXPECT_EQ(y.value()(r, c), beta.value()[c]);
  }
}

TEST(OpsTest, NonFiniteValuesAreSurfaced) {
  auto x = Vd::Constant(Td::Full(1, 2, std::numeric_limits<double>::max()));
  EXPECT_THROW(Scale(x, 10.0), NonFiniteError);
}

TEST(OpsTest, ConvValidLengthMatchesSlidingWindowCount) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> k_dist(1, 7), s_dist(1, 5), l_dist(1, 60);
  for (int trial = 0; trial < 500; ++trial) {
    Conv1dOptions opts{k_dist(rng), s_dist(rng), 1, Padding::kValid};
    const std::size_t len = l_dist(rng);
    // Count window origins by stepping, independent of the closed form.
    std::size_t windows = 0;
    for (std::size_t start = 0; start + opts.kernel <= len; start += opts.stride) ++windows;
    if (windows == 0) {
      EXPECT_THROW(Conv1dOutputLength(len, opts), ShapeError);
    } else {
      EXPECT_EQ(Conv1dOutputLength(len, opts), windows);
    }
  }
}

TEST(OpsTest, ConvSamePaddingKeepsLengthAtUnitStride) {
  std::mt19937_64 rng(5);
  auto x = Vd::Constant(RandomNormal<double>(11, 4, 1.0, rng));
  auto w = Vd::Constant(RandomNormal<double>(4, 2 * 5, 1.0, rng));
  auto b = Vd::Constant(Td::Zeros(1, 4));
  auto y = Conv1d(x, w, b, Conv1dOptions{5, 1, 2, Padding::kSame});
  EXPECT_EQ(y.rows(), 11u);
  EXPECT_EQ(y.cols(), 4u);
}

TEST(OpsTest, ConvMatchesDirectSum) {
  std::mt19937_64 rng(6);
  auto x = Vd::Constant(RandomNormal<double>(9, 2, 1.0, rng));
  auto w = Vd::Constant(RandomNormal<double>(3, 2 * 3, 1.0, rng));
  auto b = Vd::Constant(RandomNormal<double>(1, 3, 1.0, rng));
  auto y = Conv1d(x, w, b, Conv1dOptions{3, 2, 1, Padding::kValid});
  ASSERT_EQ(y.rows(), 4u);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t co = 0; co < 3; ++co) {
      double expected = b.value()[co];
      for (std::size_t ci = 0; ci < 2; ++ci) {
        for (std::size_t k = 0; k < 3; ++k) {
          expected += w.value()(co, ci * 3 + k) * x.value()(2 * t + k, ci);
        }
      }
      EXPECT_NEAR(y.value()(t, co), expected, 1e-12);
    }
  }
}

TEST(GradCheckTest, SumOfSquares) {
  Parameter<double> v("v", Td(Shape{1, 3}, {0.3, -1.2, 2.5}));
  auto loss_fn = [&] { return Sum(Mul(v.var(), v.var())); };
  auto report = GradCheck(loss_fn, {&v});
  EXPECT_LT(report.max_relative_error, 1e-8);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(v.grad()[i], 2.0 * v.value()[i]);
  }
}

TEST(GradCheckTest, NonFiniteLossIsAnError) {
  Parameter<double> v("v", Td(Shape{1, 1}, {1.0}));
  auto loss_fn = [&] {
    return Vd::Constant(Td::Scalar(std::numeric_limits<double>::quiet_NaN()));
  };
  EXPECT_THROW(GradCheck(loss_fn, {&v}), NonFiniteError);
}

TEST(ParameterTest, ZeroGradResetsAccumulation) {
  Parameter<double> p("p", Td::Full(2, 2, 1.0));
  Backward(Sum(p.var()));
  Backward(Sum(p.var()));
  EXPECT_EQ(p.grad()[0], 2.0);
  p.ZeroGrad();
  EXPECT_EQ(p.grad().shape(), p.value().shape());
  for (double g : p.grad().values()) EXPECT_EQ(g, 0.0);
}

// Every differentiable op against central differences on random operands.
struct OpCase {
  std::string name;
  std::function<Vd(const std::vector<Vd>&)> apply;
  std::vector<Shape> shapes;
};

void PrintTo(const OpCase& c, std::ostream* os) { *os << c.name; }

class OpGradientTest : public ::testing::TestWithParam<OpCase> {};

TEST_P(OpGradientTest, MatchesFiniteDifferences) {
  const auto& tc = GetParam();
  std::mt19937_64 rng(42);
  std::vector<Parameter<double>> params;
  params.reserve(tc.shapes.size());
  for (std::size_t i = 0; i < tc.shapes.size(); ++i) {
    params.emplace_back("in" + std::to_string(i),
                        RandomNormal<double>(tc.shapes[i][0], tc.shapes[i][1], 1.0, rng));
  }
  // Weighted sum so that every output coordinate carries a distinct weight.
  Td probe_weights;
  auto loss_fn = [&] {
    std::vector<Vd> vars;
    for (auto& p : params) vars.push_back(p.var());
    Vd out = tc.apply(vars);
    if (probe_weights.shape() != out.shape()) {
      std::mt19937_64 prng(7);
      probe_weights = RandomNormal<double>(out.rows(), out.cols(), 1.0, prng);
    }
    return Sum(Mul(out, Vd::Constant(probe_weights)));
  };
  ParameterRefs<double> refs;
  for (auto& p : params) refs.push_back(&p);
  auto report = GradCheck(loss_fn, refs);
  EXPECT_LT(report.max_relative_error, 1e-4) << tc.name;
}

std::vector<OpCase> AllOps() {
  static const std::size_t kIdx[] = {2, 0, 2, 4};
  static const std::size_t kTargets[] = {1, 0, 3};
  static const std::uint8_t kValid[] = {1, 1, 0, 1, 1};
  static const double kRowScale[] = {0.5, -2.0, 1.5};
  return {
      {"MatMul", [](auto& v) { return MatMul(v[0], v[1]); }, {{3, 4}, {4, 2}}},
      {"MatMulNT", [](auto& v) { return MatMulNT(v[0], v[1]); }, {{3, 4}, {5, 4}}},
      {"Transpose", [](auto& v) { return Transpose(v[0]); }, {{3, 4}}},
      {"Add", [](auto& v) { return Add(v[0], v[1]); }, {{2, 3}, {2, 3}}},
      {"Sub", [](auto& v) { return Sub(v[0], v[1]); }, {{2, 3}, {2, 3}}},
      {"Mul", [](auto& v) { return Mul(v[0], v[1]); }, {{2, 3}, {2, 3}}},
      {"Scale", [](auto& v) { return Scale(v[0], 1.7); }, {{2, 3}}},
      {"AddRow", [](auto& v) { return AddRow(v[0], v[1]); }, {{4, 3}, {1, 3}}},
      {"ScaleRows", [](auto& v) { return ScaleRows<double>(v[0], kRowScale); }, {{3, 2}}},
      {"Gelu", [](auto& v) { return Gelu(v[0]); }, {{3, 5}}},
      {"Softmax", [](auto& v) { return SoftmaxRows(v[0]); }, {{3, 5}}},
      {"SoftmaxMasked", [](auto& v) { return SoftmaxRows<double>(v[0], kValid); }, {{3, 5}}},
      {"LayerNorm", [](auto& v) { return LayerNorm(v[0], v[1], v[2]); }, {{3, 6}, {1, 6}, {1, 6}}},
      {"Conv1dValid",
       [](auto& v) { return Conv1d(v[0], v[1], v[2], Conv1dOptions{3, 2, 1, Padding::kValid}); },
       {{9, 2}, {4, 6}, {1, 4}}},
      {"Conv1dSameGrouped",
       [](auto& v) { return Conv1d(v[0], v[1], v[2], Conv1dOptions{5, 1, 2, Padding::kSame}); },
       {{8, 4}, {4, 10}, {1, 4}}},
      {"GatherRows", [](auto& v) { return GatherRows<double>(v[0], kIdx); }, {{5, 3}}},
      {"ConcatRows",
       [](auto& v) { return ConcatRows<double>(std::vector<Vd>{v[0], v[1]}); },
       {{2, 3}, {4, 3}}},
      {"ConcatCols",
       [](auto& v) { return ConcatCols<double>(std::vector<Vd>{v[0], v[1]}); },
       {{3, 2}, {3, 4}}},
      {"SliceRows", [](auto& v) { return SliceRows(v[0], 1, 3); }, {{4, 3}}},
      {"SliceCols", [](auto& v) { return SliceCols(v[0], 1, 3); }, {{4, 3}}},
      {"Mean", [](auto& v) { return Mean(v[0]); }, {{4, 3}}},
      {"CrossEntropy", [](auto& v) { return CrossEntropy<double>(v[0], kTargets); }, {{3, 4}}},
      {"MSE", [](auto& v) { return MeanSquaredError(v[0], v[1]); }, {{3, 4}, {3, 4}}},
      {"MAE", [](auto& v) { return MeanAbsoluteError(v[0], v[1]); }, {{3, 4}, {3, 4}}},
  };
}

INSTANTIATE_TEST_SUITE_P(AllDifferentiableOps, OpGradientTest, ::testing::ValuesIn(AllOps()),
                         [](const auto& info) { return info.param.name; });

TEST(OpsTest, ForwardIsBitReproducible) {
  auto run = [] {
    std::mt19937_64 rng(9);
    auto x = Var<float>::Constant(RandomNormal<float>(6, 8, 1.0, rng));
    auto w = Var<float>::Constant(RandomNormal<float>(8, 8, 0.3, rng));
    auto g = Var<float>::Constant(Tensor<float>::Full(1, 8, 1.0f));
    auto b = Var<float>::Constant(Tensor<float>::Zeros(1, 8));
    return SoftmaxRows(Gelu(LayerNorm(MatMul(x, w), g, b))).value();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace spokendial::numerics
