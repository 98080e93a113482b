// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* circuits.hpp
 * Data-oblivious building blocks over any GateBackend: ripple-carry adders,
 * the popcount reduce tree, a bitonic sorting network on bits and MUX-chain
 * comparators against plaintext thresholds.
 *
 * Gate counts are structural: a k-bit rc_add always costs 5k gates and a
 * k-bit comparator k MUX gates. The only simplifications applied are to gates
 * whose result is fixed by a public (trivial) operand: bitonic exchanges
 * touching a padding constant, and comparator MUXes with a constant selector.
 */
#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "encbnn/error.hpp"
#include "encbnn/hegate.hpp"

namespace encbnn::circuits {

using hegate::GateBackend;

/// Multi-bit integer, least significant bit first.
template <class Bit>
struct BasicWord {
  std::vector<Bit> bits;
  bool is_signed = false;

  std::size_t width() const noexcept { return bits.size(); }
};

using CipherWord = BasicWord<hegate::CipherBit>;

template <GateBackend Ctx>
using WordOf = BasicWord<typename Ctx::bit_type>;

/// Number of bits needed to hold values in [0, v].
inline std::size_t unsigned_width(std::uint64_t v) {
  return v == 0 ? 1 : static_cast<std::size_t>(std::bit_width(v));
}

/// Number of two's-complement bits needed to hold every value in [lo, hi].
inline std::size_t signed_width(std::int64_t lo, std::int64_t hi) {
  std::size_t w = 1;
  while (w < 63) {
    const std::int64_t min = -(std::int64_t{1} << (w - 1));
    const std::int64_t max = (std::int64_t{1} << (w - 1)) - 1;
    if (lo >= min && hi <= max) break;
    ++w;
  }
  return w;
}

/// Word holding a plaintext constant as trivial bits.
template <GateBackend Ctx>
WordOf<Ctx> constant_word(Ctx& ctx, std::int64_t value, std::size_t width, bool is_signed) {
  WordOf<Ctx> w;
  w.is_signed = is_signed;
  w.bits.reserve(width);
  const auto u = static_cast<std::uint64_t>(value);
  for (std::size_t i = 0; i < width; ++i) {
    w.bits.push_back(ctx.trivial_const(i < 64 && ((u >> i) & 1U)));
  }
  return w;
}

/// Widen to `width` bits, replicating the sign bit for signed words and
/// padding with trivial zeros otherwise. Free.
template <GateBackend Ctx>
WordOf<Ctx> extend(Ctx& ctx, WordOf<Ctx> w, std::size_t width) {
  if (w.width() >= width) return w;
  if (w.is_signed && !w.bits.empty()) {
    const auto msb = w.bits.back();
    w.bits.resize(width, msb);
  } else {
    w.bits.resize(width, ctx.trivial_const(false));
  }
  return w;
}

/// Drop high bits. Only valid when the caller knows they carry no value.
template <class Bit>
BasicWord<Bit> truncate(BasicWord<Bit> w, std::size_t width) {
  if (w.width() > width) w.bits.resize(width);
  return w;
}

template <class Bit>
struct SumCarry {
  Bit sum;
  Bit carry;
};

/// sum = a XOR b, carry = a AND b. 2 gates.
template <GateBackend Ctx>
SumCarry<typename Ctx::bit_type> half_adder(Ctx& ctx, const typename Ctx::bit_type& a,
                                            const typename Ctx::bit_type& b) {
  return {ctx.g_xor(a, b), ctx.g_and(a, b)};
}

/// 2 XOR + 2 AND + 1 OR.
template <GateBackend Ctx>
SumCarry<typename Ctx::bit_type> full_adder(Ctx& ctx, const typename Ctx::bit_type& a,
                                            const typename Ctx::bit_type& b,
                                            const typename Ctx::bit_type& cin) {
  auto t = ctx.g_xor(a, b);
  auto sum = ctx.g_xor(t, cin);
  auto g = ctx.g_and(a, b);
  auto p = ctx.g_and(t, cin);
  return {std::move(sum), ctx.g_or(g, p)};
}

namespace detail {

// k full adders; returns k sum bits and the carry out.
template <GateBackend Ctx>
std::pair<std::vector<typename Ctx::bit_type>, typename Ctx::bit_type> ripple(
    Ctx& ctx, const std::vector<typename Ctx::bit_type>& a,
    const std::vector<typename Ctx::bit_type>& b, typename Ctx::bit_type carry) {
  std::vector<typename Ctx::bit_type> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto fa = full_adder(ctx, a[i], b[i], carry);
    out.push_back(std::move(fa.sum));
    carry = std::move(fa.carry);
  }
  return {std::move(out), std::move(carry)};
}

}  // namespace detail

/// Ripple-carry addition of two equal-width words.
///
/// Unsigned operands of width k give a (k+1)-bit unsigned sum for exactly 5k
/// gates. If either operand is signed both are sign-extended by one bit first
/// and the (k+1)-bit result is signed (5(k+1) gates).
template <GateBackend Ctx>
WordOf<Ctx> rc_add(Ctx& ctx, const WordOf<Ctx>& a, const WordOf<Ctx>& b) {
  if (a.width() != b.width() || a.width() == 0) {
    throw ShapeError("rc_add: operand widths " + std::to_string(a.width()) + " and " +
                     std::to_string(b.width()) + " must be equal and non-zero");
  }
  if (!a.is_signed && !b.is_signed) {
    auto [bits, carry] = detail::ripple(ctx, a.bits, b.bits, ctx.trivial_const(false));
    bits.push_back(std::move(carry));
    return {std::move(bits), false};
  }
  const auto k = a.width() + 1;
  auto ea = extend(ctx, a, k);
  auto eb = extend(ctx, b, k);
  auto [bits, carry] = detail::ripple(ctx, ea.bits, eb.bits, ctx.trivial_const(false));
  return {std::move(bits), true};
}

/// a - b as a signed word one bit wider than the operands; computed as
/// a + NOT(b) + 1 with free negations.
template <GateBackend Ctx>
WordOf<Ctx> rc_sub(Ctx& ctx, const WordOf<Ctx>& a, const WordOf<Ctx>& b) {
  if (a.width() != b.width() || a.width() == 0) {
    throw ShapeError("rc_sub: operand widths " + std::to_string(a.width()) + " and " +
                     std::to_string(b.width()) + " must be equal and non-zero");
  }
  if (!a.is_signed && !b.is_signed) {
    std::vector<typename Ctx::bit_type> nb;
    nb.reserve(b.width());
    for (const auto& bit : b.bits) nb.push_back(ctx.g_not(bit));
    auto [bits, carry] = detail::ripple(ctx, a.bits, nb, ctx.trivial_const(true));
    // Carry out is set exactly when a >= b.
    bits.push_back(ctx.g_not(carry));
    return {std::move(bits), true};
  }
  const auto k = a.width() + 1;
  auto ea = extend(ctx, a, k);
  auto eb = extend(ctx, b, k);
  std::vector<typename Ctx::bit_type> nb;
  nb.reserve(k);
  for (const auto& bit : eb.bits) nb.push_back(ctx.g_not(bit));
  auto [bits, carry] = detail::ripple(ctx, ea.bits, nb, ctx.trivial_const(true));
  return {std::move(bits), true};
}

/// Multiply by 2^s by prepending s trivial zero bits. Free.
template <GateBackend Ctx>
WordOf<Ctx> shift_mul_pow2(Ctx& ctx, const WordOf<Ctx>& a, std::size_t s) {
  WordOf<Ctx> out;
  out.is_signed = a.is_signed;
  out.bits.reserve(a.width() + s);
  for (std::size_t i = 0; i < s; ++i) out.bits.push_back(ctx.trivial_const(false));
  out.bits.insert(out.bits.end(), a.bits.begin(), a.bits.end());
  return out;
}

/// w + c for a plaintext constant c, as a signed word of `width` bits. The
/// caller guarantees the result fits.
template <GateBackend Ctx>
WordOf<Ctx> add_const(Ctx& ctx, const WordOf<Ctx>& w, std::int64_t c, std::size_t width) {
  auto ew = extend(ctx, w, width);
  ew.is_signed = false;
  auto cw = constant_word(ctx, c, width, false);
  auto [bits, carry] = detail::ripple(ctx, ew.bits, cw.bits, ctx.trivial_const(false));
  return {std::move(bits), true};
}

namespace detail {

template <class Bit>
struct BoundedWord {
  BasicWord<Bit> word;
  std::uint64_t bound;  // plaintext upper bound on the value
};

}  // namespace detail

/// Popcount of `bits` through a binary tree of half adders (first layer) and
/// ripple-carry adders. Odd leftovers are promoted to the next layer
/// unchanged. Output width is bit_width(n).
template <GateBackend Ctx>
WordOf<Ctx> reduce_tree_sum(Ctx& ctx, std::span<const typename Ctx::bit_type> bits) {
  using Bit = typename Ctx::bit_type;
  if (bits.empty()) throw ShapeError("reduce_tree_sum: empty input");

  std::vector<detail::BoundedWord<Bit>> layer;
  layer.reserve(bits.size());
  for (const auto& b : bits) layer.push_back({{{b}, false}, 1});

  while (layer.size() > 1) {
    std::vector<detail::BoundedWord<Bit>> next;
    next.reserve((layer.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      auto& x = layer[i];
      auto& y = layer[i + 1];
      const auto bound = x.bound + y.bound;
      WordOf<Ctx> sum;
      if (x.word.width() == 1 && y.word.width() == 1) {
        auto ha = half_adder(ctx, x.word.bits[0], y.word.bits[0]);
        sum.bits = {std::move(ha.sum), std::move(ha.carry)};
      } else {
        const auto k = std::max(x.word.width(), y.word.width());
        sum = rc_add(ctx, extend(ctx, x.word, k), extend(ctx, y.word, k));
      }
      next.push_back({truncate(std::move(sum), unsigned_width(bound)), bound});
    }
    if (layer.size() % 2 == 1) next.push_back(std::move(layer.back()));
    layer = std::move(next);
  }
  return std::move(layer.front().word);
}

template <GateBackend Ctx>
WordOf<Ctx> reduce_tree_sum(Ctx& ctx, const std::vector<typename Ctx::bit_type>& bits) {
  return reduce_tree_sum(ctx, std::span<const typename Ctx::bit_type>(bits));
}

/// One compare-exchange: afterwards `hi` holds OR(a,b) and `lo` AND(a,b).
struct Exchange {
  std::size_t hi;
  std::size_t lo;
};

/// Bitonic sorting network for a power-of-two `n`, arranged in stages of
/// independent exchanges; sorts into descending order.
inline std::vector<std::vector<Exchange>> bitonic_network(std::size_t n) {
  if (n == 0 || !std::has_single_bit(n)) {
    throw ShapeError("bitonic_network: size must be a power of two");
  }
  std::vector<std::vector<Exchange>> stages;
  for (std::size_t k = 2; k <= n; k <<= 1) {
    for (std::size_t j = k >> 1; j > 0; j >>= 1) {
      std::vector<Exchange> stage;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = i ^ j;
        if (l <= i) continue;
        if ((i & k) == 0) {
          stage.push_back({i, l});
        } else {
          stage.push_back({l, i});
        }
      }
      stages.push_back(std::move(stage));
    }
  }
  return stages;
}

/// Sorts encrypted bits so that all ones precede all zeros. The input is
/// padded with trivial zeros to a power of two; exchanges touching a trivial
/// operand are resolved in the clear.
template <GateBackend Ctx>
std::vector<typename Ctx::bit_type> batcher_sort_desc(Ctx& ctx,
                                                      std::span<const typename Ctx::bit_type> bits) {
  if (bits.empty()) throw ShapeError("batcher_sort_desc: empty input");
  const std::size_t n = bits.size();
  const std::size_t padded = std::bit_ceil(n);
  std::vector<typename Ctx::bit_type> v(bits.begin(), bits.end());
  v.resize(padded, ctx.trivial_const(false));

  for (const auto& stage : bitonic_network(padded)) {
    for (const auto& ex : stage) {
      auto& a = v[ex.hi];
      auto& b = v[ex.lo];
      const auto pa = a.public_value();
      const auto pb = b.public_value();
      if (pa && pb) {
        const bool hi = *pa || *pb;
        const bool lo = *pa && *pb;
        a = ctx.trivial_const(hi);
        b = ctx.trivial_const(lo);
      } else if (pa) {
        // (c, x) -> (c OR x, c AND x)
        if (*pa) {
          // (1, x) already in order.
        } else {
          std::swap(a, b);
        }
      } else if (pb) {
        if (!*pb) {
          // (x, 0) already in order.
        } else {
          std::swap(a, b);
        }
      } else {
        auto hi = ctx.g_or(a, b);
        auto lo = ctx.g_and(a, b);
        a = std::move(hi);
        b = std::move(lo);
      }
    }
  }
  v.resize(n);
  return v;
}

template <GateBackend Ctx>
std::vector<typename Ctx::bit_type> batcher_sort_desc(Ctx& ctx,
                                                      const std::vector<typename Ctx::bit_type>& bits) {
  return batcher_sort_desc(ctx, std::span<const typename Ctx::bit_type>(bits));
}

namespace detail {

// MUX that resolves in the clear when the selector is public. Constant data
// inputs are not folded so that the chain cost depends on the width only.
template <GateBackend Ctx>
typename Ctx::bit_type mux(Ctx& ctx, const typename Ctx::bit_type& s,
                           const typename Ctx::bit_type& a, const typename Ctx::bit_type& b) {
  if (auto ps = s.public_value()) return *ps ? a : b;
  return ctx.g_mux(s, a, b);
}

}  // namespace detail

/// Encrypted [value(s) > c] for 0 <= c < 2^k by the MUX chain scanning from
/// the least significant bit; later bits dominate.
template <GateBackend Ctx>
typename Ctx::bit_type compare_gt_const_chain(Ctx& ctx, const WordOf<Ctx>& s, std::uint64_t c) {
  const auto one = ctx.trivial_const(true);
  const auto zero = ctx.trivial_const(false);
  auto o = zero;
  for (std::size_t i = 0; i < s.width(); ++i) {
    const bool ci = i < 64 && ((c >> i) & 1U);
    if (!ci) {
      o = detail::mux(ctx, s.bits[i], one, o);
    } else {
      o = detail::mux(ctx, s.bits[i], o, zero);
    }
  }
  return o;
}

/// Encrypted [value(s) >= t] for an unsigned word. Uses one MUX per
/// encrypted bit of s; thresholds outside the representable range give
/// constants.
template <GateBackend Ctx>
typename Ctx::bit_type compare_ge_const(Ctx& ctx, const WordOf<Ctx>& s, std::int64_t t) {
  if (s.width() == 0) throw ShapeError("compare_ge_const: empty word");
  if (t <= 0) return ctx.trivial_const(true);
  const auto k = s.width();
  if (k < 63 && t > (std::int64_t{1} << k) - 1) return ctx.trivial_const(false);
  return compare_gt_const_chain(ctx, s, static_cast<std::uint64_t>(t - 1));
}

/// Encrypted [value(s) >= t] for a two's-complement word: flipping the sign
/// bit adds 2^(k-1), turning it into an unsigned comparison.
template <GateBackend Ctx>
typename Ctx::bit_type compare_signed_ge_const(Ctx& ctx, const WordOf<Ctx>& s, std::int64_t t) {
  if (s.width() == 0) throw ShapeError("compare_signed_ge_const: empty word");
  auto biased = s;
  biased.is_signed = false;
  biased.bits.back() = ctx.g_not(biased.bits.back());
  const std::int64_t offset = std::int64_t{1} << (s.width() - 1);
  return compare_ge_const(ctx, biased, t + offset);
}

/// Given ones-first sorted bits, returns the m-th element (1-indexed), which
/// is set exactly when popcount >= m. Free.
template <GateBackend Ctx>
typename Ctx::bit_type sign_from_sorted(Ctx& ctx, std::span<const typename Ctx::bit_type> sorted,
                                        std::int64_t m) {
  if (m <= 0) return ctx.trivial_const(true);
  if (static_cast<std::uint64_t>(m) > sorted.size()) return ctx.trivial_const(false);
  return sorted[static_cast<std::size_t>(m - 1)];
}

template <GateBackend Ctx>
typename Ctx::bit_type sign_from_sorted(Ctx& ctx, const std::vector<typename Ctx::bit_type>& sorted,
                                        std::int64_t m) {
  return sign_from_sorted(ctx, std::span<const typename Ctx::bit_type>(sorted), m);
}

/// Decrypts a word to its integer value.
inline std::int64_t decrypt_word(const hegate::SimContext& ctx, const CipherWord& w) {
  std::uint64_t u = 0;
  for (std::size_t i = 0; i < w.width() && i < 64; ++i) {
    if (ctx.decrypt(w.bits[i])) u |= std::uint64_t{1} << i;
  }
  if (w.is_signed && w.width() > 0 && w.width() < 64 && ctx.decrypt(w.bits.back())) {
    u |= ~std::uint64_t{0} << w.width();
  }
  return static_cast<std::int64_t>(u);
}

/// Encrypts the low `width` bits of v.
inline CipherWord encrypt_word(const hegate::SimContext& ctx, std::int64_t v, std::size_t width,
                               bool is_signed = false) {
  CipherWord w;
  w.is_signed = is_signed;
  const auto u = static_cast<std::uint64_t>(v);
  for (std::size_t i = 0; i < width; ++i) w.bits.push_back(ctx.encrypt(i < 64 && ((u >> i) & 1U)));
  return w;
}

// Closed-form gate counts that mirror the constructions above.
namespace cost {

inline constexpr std::uint64_t kHalfAdder = 2;
inline constexpr std::uint64_t kFullAdder = 5;

inline std::uint64_t rc_add(std::size_t k) { return kFullAdder * k; }

/// Exact gate count of reduce_tree_sum over n encrypted bits.
inline std::uint64_t reduce_tree(std::size_t n) {
  if (n <= 1) return 0;
  struct W {
    std::size_t width;
    std::uint64_t bound;
  };
  std::vector<W> layer(n, W{1, 1});
  std::uint64_t gates = 0;
  while (layer.size() > 1) {
    std::vector<W> next;
    for (std::size_t i = 0; i + 1 < layer.size(); i += 2) {
      const auto& x = layer[i];
      const auto& y = layer[i + 1];
      if (x.width == 1 && y.width == 1) {
        gates += kHalfAdder;
      } else {
        gates += rc_add(std::max(x.width, y.width));
      }
      const auto bound = x.bound + y.bound;
      next.push_back({unsigned_width(bound), bound});
    }
    if (layer.size() % 2 == 1) next.push_back(layer.back());
    layer = std::move(next);
  }
  return gates;
}

/// Number of adder layers in reduce_tree_sum: ceil(log2 n).
inline std::size_t reduce_tree_layers(std::size_t n) {
  return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

/// Upper bound on comparator MUX gates for a k-bit word.
inline std::uint64_t compare(std::size_t k) { return k; }

}  // namespace cost

}  // namespace encbnn::circuits
