// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "encbnn/circuits.hpp"
#include "encbnn/compiler.hpp"
#include "encbnn/hegate.hpp"

namespace encbnn::selftest {

using hegate::CipherBit;
using hegate::SimContext;

using CompareFn = std::function<CipherBit(SimContext&, const circuits::CipherWord&, std::int64_t)>;

struct Hooks {
  // Comparator under test; replaced by the mutation check in the test suite.
  CompareFn compare_ge = [](SimContext& ctx, const circuits::CipherWord& s, std::int64_t t) {
    return circuits::compare_ge_const(ctx, s, t);
  };
  std::size_t max_identity_dim = 8;
};

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

struct Result {
  std::vector<Check> checks;
  double seconds = 0.0;

  bool ok() const {
    for (const auto& c : checks) {
      if (!c.ok) return false;
    }
    return true;
  }
};

namespace detail {

inline Check truth_tables() {
  Check c{"gate truth tables", true, ""};
  SimContext ctx;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto x = ctx.encrypt(a);
      const auto y = ctx.encrypt(b);
      const bool ok = ctx.decrypt(ctx.g_and(x, y)) == (a && b) &&
                      ctx.decrypt(ctx.g_or(x, y)) == (a || b) &&
                      ctx.decrypt(ctx.g_xor(x, y)) == (a != b) &&
                      ctx.decrypt(ctx.g_xnor(x, y)) == (a == b) &&
                      ctx.decrypt(ctx.g_not(x)) == !a;
      for (int s = 0; s < 2; ++s) {
        if (ctx.decrypt(ctx.g_mux(ctx.encrypt(s), x, y)) != (s ? a : b)) c.ok = false;
      }
      if (!ok) c.ok = false;
    }
  }
  if (!c.ok) c.detail = "gate output differs from its truth table";
  return c;
}

inline Check adders() {
  Check c{"ripple-carry add/sub, k <= 4", true, ""};
  for (std::size_t k = 1; k <= 4; ++k) {
    for (std::int64_t a = 0; a < (1 << k); ++a) {
      for (std::int64_t b = 0; b < (1 << k); ++b) {
        SimContext ctx;
        const auto A = circuits::encrypt_word(ctx, a, k);
        const auto B = circuits::encrypt_word(ctx, b, k);
        const auto sum = circuits::rc_add(ctx, A, B);
        if (ctx.global_stats().total() != 5 * k || circuits::decrypt_word(ctx, sum) != a + b) {
          c.ok = false;
          c.detail = "rc_add " + std::to_string(a) + "+" + std::to_string(b);
          return c;
        }
        const auto diff = circuits::rc_sub(ctx, A, B);
        if (circuits::decrypt_word(ctx, diff) != a - b) {
          c.ok = false;
          c.detail = "rc_sub " + std::to_string(a) + "-" + std::to_string(b);
          return c;
        }
      }
    }
  }
  return c;
}

inline Check comparators(const Hooks& hooks) {
  Check c{"comparators, unsigned k <= 6, signed k <= 5", true, ""};
  SimContext ctx;
  for (std::size_t k = 1; k <= 6; ++k) {
    const std::int64_t top = std::int64_t{1} << k;
    for (std::int64_t s = 0; s < top; ++s) {
      const auto S = circuits::encrypt_word(ctx, s, k);
      for (std::int64_t t = -2; t <= top + 1; ++t) {
        if (ctx.decrypt(hooks.compare_ge(ctx, S, t)) != (s >= t)) {
          c.ok = false;
          c.detail = "unsigned " + std::to_string(s) + " >= " + std::to_string(t);
          return c;
        }
      }
    }
  }
  for (std::size_t k = 1; k <= 5; ++k) {
    const std::int64_t half = std::int64_t{1} << (k - 1);
    for (std::int64_t s = -half; s < half; ++s) {
      const auto S = circuits::encrypt_word(ctx, s, k, true);
      for (std::int64_t t = -half - 2; t <= half + 2; ++t) {
        if (ctx.decrypt(circuits::compare_signed_ge_const(ctx, S, t)) != (s >= t)) {
          c.ok = false;
          c.detail = "signed " + std::to_string(s) + " >= " + std::to_string(t);
          return c;
        }
      }
    }
  }
  return c;
}

}  // namespace detail

/// Brute-force check of both plus-one forms, and of the plan's chosen form
/// and direct count, against [w.x + b >= 0] for all ternary w, {-1,+1} x and
/// b in [-d, d], d = 1..max_dim. Returns the number of mismatches.
inline std::uint64_t plus_one_identity_mismatches(std::size_t max_dim) {
  std::uint64_t bad = 0;
  for (std::size_t d = 1; d <= max_dim; ++d) {
    std::size_t wcount = 1;
    for (std::size_t i = 0; i < d; ++i) wcount *= 3;
    std::vector<std::int8_t> w(d);
    for (std::size_t wi = 0; wi < wcount; ++wi) {
      std::size_t code = wi;
      std::int64_t P = 0, N = 0;
      for (std::size_t i = 0; i < d; ++i) {
        w[i] = static_cast<std::int8_t>(static_cast<int>(code % 3) - 1);
        code /= 3;
        P += w[i] > 0;
        N += w[i] < 0;
      }
      for (std::int64_t b = -static_cast<std::int64_t>(d); b <= static_cast<std::int64_t>(d); ++b) {
        const auto plan = compiler::plan_row(w, model::FoldedThreshold::from_bias(b));
        const std::int64_t t = -b;
        const std::int64_t rhs_plus = P - N + t;
        const std::int64_t rhs_minus = P + 3 * N + t;
        if (plan.plus_one_rhs != (plan.polarity == compiler::Polarity::Plus ? rhs_plus : rhs_minus)) {
          ++bad;
        }
        for (std::uint32_t xm = 0; xm < (1U << d); ++xm) {
          std::int64_t dot = 0, s_plus = 0, s_notminus = 0, s_supp = 0;
          for (std::size_t i = 0; i < d; ++i) {
            const bool xb = (xm >> i) & 1U;
            dot += w[i] * (xb ? 1 : -1);
            if (w[i] != 0) s_supp += xb;
            if (w[i] > 0) s_plus += xb;
            if (w[i] < 0) s_notminus += !xb;
          }
          const bool expected = dot + b >= 0;
          if ((4 * s_plus - 2 * s_supp >= rhs_plus) != expected) ++bad;
          if ((4 * s_notminus + 2 * s_supp >= rhs_minus) != expected) ++bad;
          // XNOR(wbar, xbar) is set for w=+1,x=+1 and w=-1,x=-1.
          if ((s_plus + s_notminus >= plan.direct_count) != expected) ++bad;
        }
      }
    }
  }
  return bad;
}

inline Result run(const Hooks& hooks = {}) {
  const auto start = std::chrono::steady_clock::now();
  Result r;
  r.checks.push_back(detail::truth_tables());
  r.checks.push_back(detail::adders());
  r.checks.push_back(detail::comparators(hooks));
  Check id{"plus-one identity, d <= " + std::to_string(hooks.max_identity_dim), true, ""};
  if (const auto bad = plus_one_identity_mismatches(hooks.max_identity_dim); bad != 0) {
    id.ok = false;
    id.detail = std::to_string(bad) + " mismatching cases";
  }
  r.checks.push_back(id);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace encbnn::selftest
