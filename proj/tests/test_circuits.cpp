// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <random>
#include <vector>

#include "encbnn/circuits.hpp"
#include "generators.hpp"

namespace {

using namespace encbnn;
using circuits::CipherWord;
using hegate::CipherBit;
using hegate::GateKind;
using hegate::SimContext;

std::vector<CipherBit> encrypt_bits(const SimContext& ctx, const std::vector<int>& v) {
  std::vector<CipherBit> out;
  for (int b : v) out.push_back(ctx.encrypt(b != 0));
  return out;
}

std::vector<int> decrypt_bits(const SimContext& ctx, const std::vector<CipherBit>& v) {
  std::vector<int> out;
  for (const auto& b : v) out.push_back(ctx.decrypt(b) ? 1 : 0);
  return out;
}

// Popcount-layer oracle: count gates of the tree by simulation over widths
// only, independent of the circuit code.
std::uint64_t tree_gates_oracle(std::size_t n) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> layer(n, {1, 1});  // (width, max value)
  std::uint64_t g = 0;
  while (layer.size() > 1) {
    decltype(layer) next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      const auto w = std::max(layer[i].first, layer[i + 1].first);
      g += w == 1 ? 2 : 5 * w;
      const auto m = layer[i].second + layer[i + 1].second;
      next.push_back({static_cast<std::uint64_t>(std::bit_width(m)), m});
    }
    if (layer.size() % 2) next.push_back(layer.back());
    layer = next;
  }
  return g;
}

TEST(HalfAdder, Examples) {
  SimContext ctx;
  auto r = circuits::half_adder(ctx, ctx.encrypt(true), ctx.encrypt(true));
  EXPECT_FALSE(ctx.decrypt(r.sum));
  EXPECT_TRUE(ctx.decrypt(r.carry));
  r = circuits::half_adder(ctx, ctx.encrypt(false), ctx.encrypt(false));
  EXPECT_FALSE(ctx.decrypt(r.sum));
  EXPECT_FALSE(ctx.decrypt(r.carry));
  EXPECT_EQ(ctx.global_stats().total(), 4u);
}

TEST(HalfAdder, ScopeCountsOneXorOneAnd) {
  SimContext ctx;
  ctx.begin_scope("ha");
  circuits::half_adder(ctx, ctx.encrypt(true), ctx.encrypt(false));
  const auto s = ctx.end_scope();
  EXPECT_EQ(s.count(GateKind::Xor), 1u);
  EXPECT_EQ(s.count(GateKind::And), 1u);
  EXPECT_EQ(s.total(), 2u);
  EXPECT_EQ(s.max_level, 1u);
}

TEST(FullAdder, TruthTableAndFiveGates) {
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      for (int c = 0; c < 2; ++c) {
        SimContext ctx;
        auto r = circuits::full_adder(ctx, ctx.encrypt(a), ctx.encrypt(b), ctx.encrypt(c));
        EXPECT_EQ(ctx.decrypt(r.sum), ((a + b + c) & 1) != 0);
        EXPECT_EQ(ctx.decrypt(r.carry), a + b + c >= 2);
        const auto s = ctx.global_stats();
        EXPECT_EQ(s.count(GateKind::Xor), 2u);
        EXPECT_EQ(s.count(GateKind::And), 2u);
        EXPECT_EQ(s.count(GateKind::Or), 1u);
      }
    }
  }
}

TEST(RcAdd, FivePlusThreeIsEightInFifteenGates) {
  SimContext ctx;
  const auto sum = circuits::rc_add(ctx, circuits::encrypt_word(ctx, 5, 3), circuits::encrypt_word(ctx, 3, 3));
  EXPECT_EQ(sum.width(), 4u);
  EXPECT_EQ(circuits::decrypt_word(ctx, sum), 8);
  EXPECT_EQ(ctx.global_stats().total(), 15u);
}

TEST(RcAdd, ExhaustiveFourBit) {
  for (std::int64_t a = 0; a < 16; ++a) {
    for (std::int64_t b = 0; b < 16; ++b) {
      SimContext ctx;
      const auto s = circuits::rc_add(ctx, circuits::encrypt_word(ctx, a, 4), circuits::encrypt_word(ctx, b, 4));
      ASSERT_EQ(circuits::decrypt_word(ctx, s), a + b);
      ASSERT_EQ(ctx.global_stats().total(), 20u);
    }
  }
}

TEST(RcAdd, CountIsFiveKForEveryWidth) {
  gen::Rng rng(11);
  for (std::size_t k = 1; k <= 20; ++k) {
    SimContext ctx;
    const auto a = gen::uniform(rng, 0, (std::int64_t{1} << k) - 1);
    const auto b = gen::uniform(rng, 0, (std::int64_t{1} << k) - 1);
    const auto s = circuits::rc_add(ctx, circuits::encrypt_word(ctx, a, k), circuits::encrypt_word(ctx, b, k));
    EXPECT_EQ(circuits::decrypt_word(ctx, s), a + b);
    EXPECT_EQ(ctx.global_stats().total(), 5 * k);
    EXPECT_EQ(circuits::cost::rc_add(k), 5 * k);
  }
}

TEST(RcAdd, AddingZeroPreservesValue) {
  SimContext ctx;
  for (std::int64_t a = 0; a < 32; ++a) {
    const auto s = circuits::rc_add(ctx, circuits::encrypt_word(ctx, a, 5), circuits::encrypt_word(ctx, 0, 5));
    EXPECT_EQ(circuits::decrypt_word(ctx, s), a);
  }
}

TEST(RcAdd, SignedOperands) {
  for (std::int64_t a = -8; a < 8; ++a) {
    for (std::int64_t b = -8; b < 8; ++b) {
      SimContext ctx;
      const auto s = circuits::rc_add(ctx, circuits::encrypt_word(ctx, a, 4, true),
                                      circuits::encrypt_word(ctx, b, 4, true));
      ASSERT_TRUE(s.is_signed);
      ASSERT_EQ(circuits::decrypt_word(ctx, s), a + b);
    }
  }
}

TEST(RcAdd, WidthMismatchThrows) {
  SimContext ctx;
  EXPECT_THROW(circuits::rc_add(ctx, circuits::encrypt_word(ctx, 1, 2), circuits::encrypt_word(ctx, 1, 3)),
               encbnn::ShapeError);
}

TEST(RcSub, Examples) {
  SimContext ctx;
  const auto a = circuits::encrypt_word(ctx, 5, 3);
  const auto b = circuits::encrypt_word(ctx, 3, 3);
  EXPECT_EQ(circuits::decrypt_word(ctx, circuits::rc_sub(ctx, a, b)), 2);
  EXPECT_EQ(circuits::decrypt_word(ctx, circuits::rc_sub(ctx, b, a)), -2);
}

TEST(RcSub, ExhaustiveFourBit) {
  SimContext ctx;
  for (std::int64_t a = 0; a < 16; ++a) {
    for (std::int64_t b = 0; b < 16; ++b) {
      const auto d = circuits::rc_sub(ctx, circuits::encrypt_word(ctx, a, 4), circuits::encrypt_word(ctx, b, 4));
      ASSERT_EQ(d.width(), 5u);
      ASSERT_EQ(circuits::decrypt_word(ctx, d), a - b);
    }
  }
}

TEST(RcSub, SignedExhaustive) {
  SimContext ctx;
  for (std::int64_t a = -8; a < 8; ++a) {
    for (std::int64_t b = -8; b < 8; ++b) {
      const auto d = circuits::rc_sub(ctx, circuits::encrypt_word(ctx, a, 4, true),
                                      circuits::encrypt_word(ctx, b, 4, true));
      ASSERT_EQ(circuits::decrypt_word(ctx, d), a - b);
    }
  }
}

TEST(Shift, FreeDoubling) {
  SimContext ctx;
  const auto a = circuits::encrypt_word(ctx, 5, 3);
  EXPECT_EQ(circuits::decrypt_word(ctx, circuits::shift_mul_pow2(ctx, a, 1)), 10);
  EXPECT_EQ(circuits::decrypt_word(ctx, circuits::shift_mul_pow2(ctx, a, 0)), 5);
  EXPECT_EQ(ctx.global_stats().total(), 0u);
  gen::Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto v = gen::uniform(rng, 0, 255);
    const auto s = static_cast<std::size_t>(gen::uniform(rng, 0, 4));
    EXPECT_EQ(circuits::decrypt_word(ctx, circuits::shift_mul_pow2(ctx, circuits::encrypt_word(ctx, v, 8), s)),
              v << s);
  }
}

TEST(AddConst, SignedResults) {
  SimContext ctx;
  for (std::int64_t v = 0; v < 16; ++v) {
    for (std::int64_t c = -20; c <= 20; ++c) {
      const auto w = circuits::add_const(ctx, circuits::encrypt_word(ctx, v, 4), c, 7);
      ASSERT_EQ(circuits::decrypt_word(ctx, w), v + c);
    }
  }
}

TEST(Widths, Helpers) {
  EXPECT_EQ(circuits::unsigned_width(0), 1u);
  EXPECT_EQ(circuits::unsigned_width(1), 1u);
  EXPECT_EQ(circuits::unsigned_width(8), 4u);
  EXPECT_EQ(circuits::unsigned_width(255), 8u);
  EXPECT_EQ(circuits::signed_width(-1, 0), 1u);
  EXPECT_EQ(circuits::signed_width(-8, 7), 4u);
  EXPECT_EQ(circuits::signed_width(-9, 7), 5u);
  EXPECT_EQ(circuits::signed_width(0, 8), 5u);
}

TEST(ReduceTree, EightOnesIsEight) {
  SimContext ctx;
  const auto w = circuits::reduce_tree_sum(ctx, encrypt_bits(ctx, std::vector<int>(8, 1)));
  EXPECT_EQ(circuits::decrypt_word(ctx, w), 8);
  EXPECT_EQ(w.width(), 4u);
}

TEST(ReduceTree, SingleBitIsFree) {
  SimContext ctx;
  const auto bits = encrypt_bits(ctx, {1});
  const auto w = circuits::reduce_tree_sum(ctx, bits);
  EXPECT_EQ(w.width(), 1u);
  EXPECT_TRUE(ctx.decrypt(w.bits[0]));
  EXPECT_EQ(ctx.global_stats().total(), 0u);
}

TEST(ReduceTree, RandomVectorsMatchPopcount) {
  gen::Rng rng(5);
  for (std::size_t n : {3u, 17u, 64u, 90u}) {
    for (int rep = 0; rep < 50; ++rep) {
      SimContext ctx;
      std::vector<int> v(n);
      int pop = 0;
      for (auto& b : v) pop += (b = gen::coin(rng) ? 1 : 0);
      const auto w = circuits::reduce_tree_sum(ctx, encrypt_bits(ctx, v));
      ASSERT_EQ(circuits::decrypt_word(ctx, w), pop);
      ASSERT_EQ(w.width(), static_cast<std::size_t>(std::bit_width(n)));
      ASSERT_EQ(ctx.global_stats().total(), tree_gates_oracle(n));
    }
  }
}

TEST(ReduceTree, ExhaustiveSmall) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::uint32_t code = 0; code < (1U << n); ++code) {
      SimContext ctx;
      std::vector<int> v(n);
      for (std::size_t i = 0; i < n; ++i) v[i] = (code >> i) & 1U;
      const auto w = circuits::reduce_tree_sum(ctx, encrypt_bits(ctx, v));
      ASSERT_EQ(circuits::decrypt_word(ctx, w), std::popcount(code));
    }
  }
}

TEST(ReduceTree, CostFormulaMatchesMeasurement) {
  for (std::size_t n = 1; n <= 300; ++n) {
    SimContext ctx;
    circuits::reduce_tree_sum(ctx, encrypt_bits(ctx, std::vector<int>(n, 1)));
    ASSERT_EQ(ctx.global_stats().total(), circuits::cost::reduce_tree(n)) << n;
    ASSERT_EQ(circuits::cost::reduce_tree(n), tree_gates_oracle(n)) << n;
  }
}

TEST(ReduceTree, EmptyThrows) {
  SimContext ctx;
  EXPECT_THROW(circuits::reduce_tree_sum(ctx, std::vector<CipherBit>{}), encbnn::ShapeError);
}

TEST(Bitonic, ZeroOneZeroOne) {
  SimContext ctx;
  EXPECT_EQ(decrypt_bits(ctx, circuits::batcher_sort_desc(ctx, encrypt_bits(ctx, {0, 1, 0, 1}))),
            (std::vector<int>{1, 1, 0, 0}));
}

TEST(Bitonic, FourInputsUseSixExchanges) {
  const auto net = circuits::bitonic_network(4);
  std::size_t ex = 0;
  for (const auto& st : net) ex += st.size();
  EXPECT_EQ(ex, 6u);
  SimContext ctx;
  circuits::batcher_sort_desc(ctx, encrypt_bits(ctx, {1, 0, 1, 1}));
  EXPECT_LE(ctx.global_stats().total(), 12u);
}

TEST(Bitonic, ExchangeCountFormula) {
  for (std::size_t q = 1; q <= 10; ++q) {
    const std::size_t n = std::size_t{1} << q;
    const auto net = circuits::bitonic_network(n);
    EXPECT_EQ(net.size(), q * (q + 1) / 2);
    std::size_t ex = 0;
    for (const auto& st : net) {
      EXPECT_EQ(st.size(), n / 2);
      ex += st.size();
    }
    EXPECT_EQ(ex, n * q * (q + 1) / 4);
    SimContext ctx;
    circuits::batcher_sort_desc(ctx, encrypt_bits(ctx, std::vector<int>(n, 1)));
    EXPECT_EQ(ctx.global_stats().total(), 2 * ex);
  }
}

TEST(Bitonic, NonPowerOfTwoRejectedByNetwork) {
  EXPECT_THROW(circuits::bitonic_network(6), encbnn::ShapeError);
}

TEST(Bitonic, RandomVectorsSortedAndPreserveCount) {
  gen::Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const auto n = static_cast<std::size_t>(gen::uniform(rng, 1, 64));
    std::vector<int> v(n);
    int pop = 0;
    for (auto& b : v) pop += (b = gen::coin(rng) ? 1 : 0);
    SimContext ctx;
    const auto sorted = circuits::batcher_sort_desc(ctx, encrypt_bits(ctx, v));
    const auto out = decrypt_bits(ctx, sorted);
    ASSERT_EQ(out.size(), n);
    ASSERT_TRUE(std::is_sorted(out.rbegin(), out.rend()));
    ASSERT_EQ(std::count(out.begin(), out.end(), 1), pop);
    for (std::int64_t m = 0; m <= static_cast<std::int64_t>(n) + 1; ++m) {
      ASSERT_EQ(ctx.decrypt(circuits::sign_from_sorted(ctx, sorted, m)), pop >= m);
    }
  }
}

TEST(SignFromSorted, Examples) {
  SimContext ctx;
  EXPECT_TRUE(ctx.decrypt(circuits::sign_from_sorted(ctx, encrypt_bits(ctx, {1, 1, 0, 0}), 2)));
  EXPECT_FALSE(ctx.decrypt(circuits::sign_from_sorted(ctx, encrypt_bits(ctx, {1, 0, 0, 0}), 2)));
}

TEST(CompareGe, Examples) {
  SimContext ctx;
  EXPECT_TRUE(ctx.decrypt(circuits::compare_ge_const(ctx, circuits::encrypt_word(ctx, 3, 3), 3)));
  EXPECT_FALSE(ctx.decrypt(circuits::compare_ge_const(ctx, circuits::encrypt_word(ctx, 2, 3), 3)));
}

TEST(CompareGe, ExhaustiveEightBitWithinKMux) {
  constexpr std::size_t k = 8;
  for (std::int64_t t = -2; t <= 257; ++t) {
    for (std::int64_t s = 0; s < 256; ++s) {
      SimContext ctx;
      const auto bit = circuits::compare_ge_const(ctx, circuits::encrypt_word(ctx, s, k), t);
      ASSERT_EQ(ctx.decrypt(bit), s >= t) << s << " >= " << t;
      const auto st = ctx.global_stats();
      ASSERT_LE(st.count(GateKind::Mux), k);
      ASSERT_EQ(st.total(), st.count(GateKind::Mux));
    }
  }
}

TEST(CompareGe, CostDependsOnWidthOnly) {
  for (std::size_t k = 1; k <= 10; ++k) {
    for (std::int64_t t = 1; t < (std::int64_t{1} << k); ++t) {
      SimContext ctx;
      circuits::compare_ge_const(ctx, circuits::encrypt_word(ctx, 0, k), t);
      ASSERT_EQ(ctx.global_stats().count(GateKind::Mux), k) << "k=" << k << " t=" << t;
    }
  }
}

TEST(CompareGe, SignedExamples) {
  SimContext ctx;
  EXPECT_FALSE(ctx.decrypt(circuits::compare_signed_ge_const(ctx, circuits::encrypt_word(ctx, -2, 4, true), 0)));
  EXPECT_TRUE(ctx.decrypt(circuits::compare_signed_ge_const(ctx, circuits::encrypt_word(ctx, 0, 4, true), 0)));
}

TEST(CompareGe, SignedExhaustiveSixBit) {
  constexpr std::size_t k = 6;
  for (std::int64_t s = -32; s < 32; ++s) {
    for (std::int64_t t = -40; t <= 40; ++t) {
      SimContext ctx;
      const auto bit = circuits::compare_signed_ge_const(ctx, circuits::encrypt_word(ctx, s, k, true), t);
      ASSERT_EQ(ctx.decrypt(bit), s >= t) << s << " >= " << t;
      ASSERT_LE(ctx.global_stats().count(GateKind::Mux), k);
    }
  }
}

TEST(CompareGe, ChainScansFromLeastSignificantBit) {
  // With threshold 0 the chain result is OR of all bits; the last MUX is
  // selected by the most significant bit.
  SimContext ctx;
  const auto s = circuits::encrypt_word(ctx, 4, 3);
  const auto bit = circuits::compare_gt_const_chain(ctx, s, 0);
  EXPECT_TRUE(ctx.decrypt(bit));
  EXPECT_EQ(bit.level(), ctx.global_stats().max_level);
}

}  // namespace
