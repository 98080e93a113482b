// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

// Builds a small dense+batchnorm+sign model in code, evaluates it on an
// encrypted input and prints the prediction with its gate count and the
// sequential runtime estimate.

#include <cstdint>
#include <iostream>
#include <random>
#include <vector>

#include "encbnn/compiler.hpp"
#include "encbnn/costsched.hpp"
#include "encbnn/hegate.hpp"
#include "encbnn/model.hpp"

int main() {
  using namespace encbnn;
  constexpr std::size_t d = 32;
  constexpr std::size_t p = 4;

  std::mt19937 rng(7);
  std::uniform_int_distribution<int> tern(-1, 1);

  model::DenseLayer dense{d, p, {}, std::vector<std::int64_t>(p, 0), std::nullopt};
  for (std::size_t i = 0; i < d * p; ++i) dense.weights.push_back(static_cast<std::int8_t>(tern(rng)));
  auto bn = model::BatchNorm::identity(p);
  bn.beta = {0.5, -0.25, 1.0, 0.0};

  model::TernaryModel m;
  m.input_shape = model::Shape::vector(d);
  m.layers = {dense, bn, model::SignActivation{}};

  std::vector<std::int8_t> x(d);
  for (auto& v : x) v = rng() % 2 ? 1 : -1;

  hegate::SimContext ctx;
  const auto enc = compiler::encrypt_input(ctx, x);
  const auto result = compiler::eval_model(ctx, m, enc);
  const auto out = compiler::decrypt_output(ctx, result);
  const auto est = costsched::estimate(result.stats, costsched::CostModel{});

  std::cout << "prediction:";
  for (auto v : out.values) std::cout << ' ' << v;
  std::cout << "\nreference: ";
  for (auto v : model::oracle_eval(m, x).values) std::cout << ' ' << v;
  std::cout << "\ngates: " << result.stats.total().total() << "\nout_seq: " << est.out_seq << " s\n";
}
