// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "encbnn/model.hpp"
#include "generators.hpp"

namespace {

using namespace encbnn;
using model::BatchNorm;
using model::DenseLayer;
using model::FoldedThreshold;
using model::SignActivation;
using model::TernaryModel;

TernaryModel single_dense(std::vector<std::int8_t> w, std::size_t in, std::size_t out,
                          std::vector<std::int64_t> b) {
  TernaryModel m;
  m.input_shape = model::Shape::vector(in);
  m.layers = {DenseLayer{in, out, std::move(w), std::move(b), std::nullopt}, SignActivation{}};
  return m;
}

// Real-valued reference for one channel: sign(gamma (z + b - mu) / sqrt(var) + beta).
bool real_bn(std::int64_t z, std::int64_t b, const BatchNorm& bn, std::size_t c) {
  const double a = static_cast<double>(z + b);
  return bn.gamma[c] * (a - bn.mu[c]) / std::sqrt(bn.sigma2[c] + bn.epsilon) + bn.beta[c] >= 0.0;
}

TEST(Fold, IdentityNormalization) {
  const std::vector<std::int64_t> bias{0};
  const auto th = model::fold_batchnorm(bias, BatchNorm::identity(1));
  ASSERT_EQ(th.size(), 1u);
  EXPECT_EQ(th[0].mode, FoldedThreshold::Mode::Compare);
  EXPECT_EQ(th[0].threshold, 0);
  EXPECT_FALSE(th[0].flip);
}

TEST(Fold, ZeroGammaIsConstant) {
  BatchNorm bn{{0.0}, {-1.0}, {0.0}, {1.0}, 0.0};
  const std::vector<std::int64_t> bias{3};
  const auto th = model::fold_batchnorm(bias, bn);
  EXPECT_EQ(th[0].mode, FoldedThreshold::Mode::Constant);
  EXPECT_FALSE(th[0].constant_bit);
  for (std::int64_t z = -5; z <= 5; ++z) EXPECT_FALSE(th[0].apply(z));
}

TEST(Fold, RandomParametersAgreeWithRealArithmetic) {
  gen::Rng rng(21);
  for (int rep = 0; rep < 2000; ++rep) {
    const auto d = static_cast<std::int64_t>(gen::uniform(rng, 1, 8));
    const auto bn = gen::batchnorm(rng, 1, static_cast<double>(d));
    const std::vector<std::int64_t> bias{gen::uniform(rng, -d, d)};
    const auto th = model::fold_batchnorm(bias, bn);
    for (std::int64_t z = -d; z <= d; ++z) {
      ASSERT_EQ(th[0].apply(z), real_bn(z, bias[0], bn, 0))
          << "gamma=" << bn.gamma[0] << " beta=" << bn.beta[0] << " mu=" << bn.mu[0] << " z=" << z;
    }
  }
}

TEST(Fold, ExactBoundaryHitsGreaterOrEqual) {
  // tau is an exact integer: mu = 3, beta = 0 -> activation iff z >= 3.
  BatchNorm bn{{1.0, -1.0}, {0.0, 0.0}, {3.0, 3.0}, {1.0, 1.0}, 0.0};
  const std::vector<std::int64_t> bias{0, 0};
  const auto th = model::fold_batchnorm(bias, bn);
  EXPECT_FALSE(th[0].apply(2));
  EXPECT_TRUE(th[0].apply(3));
  EXPECT_TRUE(th[1].apply(3));
  EXPECT_FALSE(th[1].apply(4));
  EXPECT_TRUE(th[1].flip);
}

TEST(Fold, HugeParametersAreClamped) {
  BatchNorm bn{{1e-300}, {1.0}, {0.0}, {1.0}, 0.0};
  const std::vector<std::int64_t> bias{0};
  const auto th = model::fold_batchnorm(bias, bn);
  // tau ~ -1e300: always on, with the threshold held in range.
  EXPECT_TRUE(th[0].apply(-1000));
  EXPECT_EQ(th[0].threshold, -4000000000000000);
}

TEST(Fold, ShapeMismatchThrows) {
  const std::vector<std::int64_t> bias{0, 0};
  EXPECT_THROW(model::fold_batchnorm(bias, BatchNorm::identity(3)), encbnn::ShapeError);
}

TEST(Oracle, SingleWeight) {
  const auto m = single_dense({1}, 1, 1, {0});
  const std::vector<std::int8_t> x{1};
  EXPECT_EQ(model::oracle_eval(m, x).values, (std::vector<std::int64_t>{1}));
}

TEST(Oracle, PopcountIdentity) {
  // P pluses, all-ones input: a = 2P - d + b for a dense row of +1/-1.
  gen::Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const auto d = static_cast<std::size_t>(gen::uniform(rng, 1, 20));
    auto w = gen::ternary(rng, d, 0.0);
    const auto b = gen::uniform(rng, -5, 5);
    std::int64_t P = 0;
    for (auto v : w) P += v > 0;
    TernaryModel m;
    m.input_shape = model::Shape::vector(d);
    m.output_mode = model::OutputMode::ScoreWords;
    m.layers = {DenseLayer{d, 1, w, {b}, std::nullopt}};
    const std::vector<std::int8_t> x(d, 1);
    EXPECT_EQ(model::oracle_eval(m, x).values[0], 2 * P - static_cast<std::int64_t>(d) + b);
  }
}

TEST(Oracle, XnorPopcountFormEqualsDotProduct) {
  gen::Rng rng(4);
  for (int rep = 0; rep < 40; ++rep) {
    const auto d = static_cast<std::size_t>(gen::uniform(rng, 1, 16));
    const auto w = gen::ternary(rng, d, 0.3);
    std::vector<std::size_t> window(d);
    for (std::size_t i = 0; i < d; ++i) window[i] = i;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << d); ++code) {
      const auto x = gen::pm1_from_code(code, d);
      ASSERT_EQ(model::dot(w, x, window), model::dot_xnor_popcount(w, x, window));
    }
  }
}

TEST(Oracle, RejectsBadInput) {
  const auto m = single_dense({1, -1}, 2, 1, {0});
  const std::vector<std::int8_t> short_x{1};
  const std::vector<std::int8_t> bad{1, 0};
  EXPECT_THROW(model::oracle_eval(m, short_x), encbnn::ShapeError);
  EXPECT_THROW(model::oracle_eval(m, bad), encbnn::ShapeError);
}

TEST(Oracle, ConvHandComputed) {
  // 1x3x3 input, one 2x2 all-ones filter, stride 1 -> 2x2 output of window sums.
  TernaryModel m;
  m.input_shape = model::Shape::image(1, 3, 3);
  m.output_mode = model::OutputMode::ScoreWords;
  model::ConvLayer c{1, 1, 2, 2, 1, {1, 1, 1, 1}, {0}, std::nullopt};
  m.layers = {c};
  const std::vector<std::int8_t> x{1, 1, -1, 1, -1, -1, 1, 1, 1};
  EXPECT_EQ(model::oracle_eval(m, x).values, (std::vector<std::int64_t>{2, -2, 2, 0}));
  m.layers = {model::ConvLayer{1, 1, 2, 2, 2, {1, 1, 1, 1}, {0}, std::nullopt}};
  EXPECT_EQ(model::oracle_eval(m, x).values, (std::vector<std::int64_t>{2}));
}

TEST(Validate, Rules) {
  auto m = single_dense({1, 2}, 2, 1, {0});
  try {
    model::validate(m);
    FAIL() << "weight 2 accepted";
  } catch (const encbnn::SchemaError& e) {
    EXPECT_EQ(e.where(), "/layers/0/weights/1");
  }
  m = single_dense({1, 1}, 2, 1, {0});
  m.layers.insert(m.layers.begin(), SignActivation{});
  EXPECT_THROW(model::validate(m), encbnn::SchemaError);

  m = single_dense({1, 1}, 2, 1, {0});
  m.layers.push_back(BatchNorm::identity(1));
  EXPECT_THROW(model::validate(m), encbnn::SchemaError);  // batchnorm after sign

  m = single_dense({1, 1}, 2, 1, {0});
  m.layers.push_back(DenseLayer{1, 1, {1}, {0}, std::nullopt});
  m.layers.push_back(DenseLayer{1, 1, {1}, {0}, std::nullopt});
  EXPECT_THROW(model::validate(m), encbnn::SchemaError);  // dense after dense

  m = single_dense({1, 1}, 2, 1, {0});
  m.output_mode = model::OutputMode::ScoreWords;
  EXPECT_THROW(model::validate(m), encbnn::SchemaError);  // score model ending in sign

  m = single_dense({1, 1, 1}, 3, 1, {0});
  m.input_shape = model::Shape::vector(4);
  EXPECT_THROW(model::validate(m), encbnn::SchemaError);  // input size mismatch
}

TEST(Validate, ImplicitFinalSign) {
  TernaryModel m;
  m.input_shape = model::Shape::vector(2);
  m.layers = {DenseLayer{2, 1, {1, 1}, {0}, std::nullopt}};
  const auto blocks = model::validate(m);
  ASSERT_EQ(blocks.size(), 1u);
  EXPECT_TRUE(blocks[0].binarize);
  const std::vector<std::int8_t> x{-1, -1};
  EXPECT_EQ(model::oracle_eval(m, x).values, (std::vector<std::int64_t>{-1}));
}

TEST(Ternarize, ZeroFractionIsIdentity) {
  gen::Rng rng(8);
  const auto m = gen::random_model(rng);
  EXPECT_EQ(model::ternarize(m, 0.0, 1), m);
}

TEST(Ternarize, FullFractionZeroesEverything) {
  gen::Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = gen::random_model(rng);
    const auto t = model::ternarize(m, 1.0, 1);
    for (const auto& l : t.layers) EXPECT_EQ(model::nonzero_weights(l), 0u);
    // Outputs depend on thresholds only.
    const auto a = model::oracle_eval(t, gen::pm1(rng, m.input_shape.size()));
    const auto b = model::oracle_eval(t, gen::pm1(rng, m.input_shape.size()));
    EXPECT_EQ(a, b);
  }
}

TEST(Ternarize, CeilRuleExact) {
  gen::Rng rng(13);
  for (double f : {0.1, 0.25, 0.5, 0.75, 0.33}) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto m = gen::random_model(rng);
      const auto t = model::ternarize(m, f, static_cast<std::uint64_t>(rep));
      for (std::size_t i = 0; i < m.layers.size(); ++i) {
        if (!model::is_linear(m.layers[i])) continue;
        const auto before = static_cast<double>(model::nonzero_weights(m.layers[i]));
        const auto expected = static_cast<std::size_t>(std::ceil((1.0 - f) * before - 1e-9));
        EXPECT_EQ(model::nonzero_weights(t.layers[i]), expected);
      }
    }
  }
  // 25% of 8 non-zeros leaves exactly 6; of 10 leaves ceil(7.5) = 8.
  EXPECT_EQ(model::detail::kept_count(8, 0.25), 6u);
  EXPECT_EQ(model::detail::kept_count(10, 0.25), 8u);
}

TEST(Ternarize, OnlyZeroesExistingWeights) {
  gen::Rng rng(17);
  const auto m = gen::random_model(rng, {false, false, false, 1, 0.0});
  const auto t = model::ternarize(m, 0.4, 99);
  const auto& a = std::get<DenseLayer>(m.layers[0]).weights;
  const auto& b = std::get<DenseLayer>(t.layers[0]).weights;
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(b[i] == 0 || b[i] == a[i]);
}

TEST(Ternarize, DeterministicForSeed) {
  gen::Rng rng(19);
  const auto m = gen::random_model(rng);
  EXPECT_EQ(model::ternarize(m, 0.3, 5), model::ternarize(m, 0.3, 5));
}

TEST(Ternarize, SmallestMagnitudesGoFirst) {
  auto m = single_dense({1, -1, 1, -1}, 4, 1, {0});
  auto& d = std::get<DenseLayer>(m.layers[0]);
  d.magnitudes = std::vector<double>{0.9, -0.1, 0.5, -0.3};
  const auto t = model::ternarize(m, 0.5, 0);
  EXPECT_EQ(std::get<DenseLayer>(t.layers[0]).weights, (std::vector<std::int8_t>{1, 0, 1, 0}));
}

TEST(FoldModel, RemovesBatchNormsAndKeepsOutputs) {
  gen::Rng rng(23);
  int folded = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const auto m = gen::random_model(rng);
    const auto f = model::fold_model(m);
    bool has_bn_before_sign = false;
    for (std::size_t i = 0; i + 1 < f.layers.size(); ++i) {
      if (std::holds_alternative<BatchNorm>(f.layers[i])) has_bn_before_sign = true;
    }
    EXPECT_FALSE(has_bn_before_sign && f.output_mode == model::OutputMode::SignBits);
    folded += f.layers.size() < m.layers.size();
    for (int k = 0; k < 100; ++k) {
      const auto x = gen::pm1(rng, m.input_shape.size());
      ASSERT_EQ(model::oracle_eval(m, x), model::oracle_eval(f, x));
    }
  }
  EXPECT_GT(folded, 10);
}

}  // namespace
