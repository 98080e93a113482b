// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* hegate.hpp
 * Homomorphic-bit backend. SimContext evaluates boolean gates on opaque bit
 * handles in the clear while counting bootstrapped gates and circuit depth.
 * Circuit code is written against the GateBackend concept so that an adapter
 * over a real gate-bootstrapping library can be dropped in.
 */
#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <concepts>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "encbnn/error.hpp"

namespace encbnn::hegate {

// Negation needs no bootstrapping in gate-bootstrapping schemes. Flip to
// false to charge NOT as a costed gate everywhere.
inline constexpr bool kFreeNot = true;

enum class GateKind : std::uint8_t { And, Or, Xor, Xnor, Mux, Not };

inline constexpr std::size_t kGateKindCount = 6;

inline constexpr std::array<GateKind, kGateKindCount> kAllGateKinds = {
    GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Xnor, GateKind::Mux, GateKind::Not};

inline constexpr std::string_view gate_name(GateKind k) {
  switch (k) {
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Xor: return "XOR";
    case GateKind::Xnor: return "XNOR";
    case GateKind::Mux: return "MUX";
    case GateKind::Not: return "NOT";
  }
  return "?";
}

inline constexpr bool is_costed(GateKind k) { return k != GateKind::Not || !kFreeNot; }

/// Gate counts by kind plus a histogram of output levels.
/// Invariant: sum(level_histogram) == total(); max_level is the largest key.
struct GateStats {
  std::string label;
  std::array<std::uint64_t, kGateKindCount> counts{};
  std::map<std::uint32_t, std::uint64_t> level_histogram;
  std::uint32_t max_level = 0;

  std::uint64_t count(GateKind k) const { return counts[static_cast<std::size_t>(k)]; }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  bool empty() const { return total() == 0; }

  void record(GateKind k, std::uint32_t level) {
    ++counts[static_cast<std::size_t>(k)];
    ++level_histogram[level];
    max_level = std::max(max_level, level);
  }

  /// Merge another set of counts into this one; the label is kept.
  GateStats& operator+=(const GateStats& o) {
    for (std::size_t i = 0; i < kGateKindCount; ++i) counts[i] += o.counts[i];
    for (const auto& [lvl, n] : o.level_histogram) level_histogram[lvl] += n;
    max_level = std::max(max_level, o.max_level);
    return *this;
  }

  friend bool operator==(const GateStats& a, const GateStats& b) {
    return a.counts == b.counts && a.level_histogram == b.level_histogram &&
           a.max_level == b.max_level;
  }
};

class SimContext;

/// Opaque handle to a (simulated) encrypted bit. Copyable value type; the
/// plaintext is reachable only through SimContext::decrypt. Trivial constants
/// are public by construction and expose their value through public_value().
class CipherBit {
 public:
  CipherBit() = default;

  std::uint32_t level() const noexcept { return level_; }
  bool is_trivial() const noexcept { return trivial_; }
  std::optional<bool> public_value() const noexcept {
    if (trivial_) return value_;
    return std::nullopt;
  }
  std::uint64_t context_id() const noexcept { return ctx_; }

 private:
  friend class SimContext;
  CipherBit(std::uint64_t ctx, bool v, std::uint32_t level, bool trivial)
      : ctx_(ctx), level_(level), value_(v), trivial_(trivial) {}

  std::uint64_t ctx_ = 0;
  std::uint32_t level_ = 0;
  bool value_ = false;
  bool trivial_ = false;
};

/// What circuit builders need from a backend. A real gate-bootstrapping
/// adapter implements the same surface over its own ciphertext type.
template <class B>
concept GateBackend = requires(B& ctx, const typename B::bit_type& a) {
  typename B::bit_type;
  { ctx.trivial_const(true) } -> std::same_as<typename B::bit_type>;
  { ctx.g_and(a, a) } -> std::same_as<typename B::bit_type>;
  { ctx.g_or(a, a) } -> std::same_as<typename B::bit_type>;
  { ctx.g_xor(a, a) } -> std::same_as<typename B::bit_type>;
  { ctx.g_xnor(a, a) } -> std::same_as<typename B::bit_type>;
  { ctx.g_not(a) } -> std::same_as<typename B::bit_type>;
  { ctx.g_mux(a, a, a) } -> std::same_as<typename B::bit_type>;
  { a.public_value() } -> std::same_as<std::optional<bool>>;
};

/// Plaintext-simulating backend with gate accounting.
///
/// Gate calls are thread-safe. Scopes are tracked per calling thread: a gate
/// is charged to the global stats and to every scope open on the thread that
/// issued it.
class SimContext {
 public:
  using bit_type = CipherBit;

  SimContext() : id_(next_id()) {}
  SimContext(const SimContext&) = delete;
  SimContext& operator=(const SimContext&) = delete;

  std::uint64_t id() const noexcept { return id_; }

  CipherBit encrypt(bool b) const { return CipherBit(id_, b, 0, false); }

  bool decrypt(const CipherBit& c) const {
    check(c);
    return c.value_;
  }

  CipherBit trivial_const(bool b) const { return CipherBit(id_, b, 0, true); }

  CipherBit g_and(const CipherBit& a, const CipherBit& b) {
    return binary(GateKind::And, a, b, a.value_ && b.value_);
  }
  CipherBit g_or(const CipherBit& a, const CipherBit& b) {
    return binary(GateKind::Or, a, b, a.value_ || b.value_);
  }
  CipherBit g_xor(const CipherBit& a, const CipherBit& b) {
    return binary(GateKind::Xor, a, b, a.value_ != b.value_);
  }
  CipherBit g_xnor(const CipherBit& a, const CipherBit& b) {
    return binary(GateKind::Xnor, a, b, a.value_ == b.value_);
  }

  CipherBit g_not(const CipherBit& a) {
    check(a);
    if constexpr (kFreeNot) {
      return CipherBit(id_, !a.value_, a.level_, a.trivial_);
    } else {
      return charge(GateKind::Not, !a.value_, a.level_ + 1);
    }
  }

  /// s ? a : b
  CipherBit g_mux(const CipherBit& s, const CipherBit& a, const CipherBit& b) {
    check(s);
    check(a);
    check(b);
    const auto lvl = std::max({s.level_, a.level_, b.level_}) + 1;
    return charge(GateKind::Mux, s.value_ ? a.value_ : b.value_, lvl);
  }

  void begin_scope(std::string label) {
    std::lock_guard lk(mu_);
    GateStats s;
    s.label = std::move(label);
    scopes_[std::this_thread::get_id()].push_back(std::move(s));
  }

  GateStats end_scope() {
    std::lock_guard lk(mu_);
    auto it = scopes_.find(std::this_thread::get_id());
    if (it == scopes_.end() || it->second.empty()) {
      throw ScopeError("end_scope without matching begin_scope");
    }
    GateStats out = std::move(it->second.back());
    it->second.pop_back();
    if (it->second.empty()) scopes_.erase(it);
    return out;
  }

  /// Number of scopes open on the calling thread.
  std::size_t open_scopes() const {
    std::lock_guard lk(mu_);
    auto it = scopes_.find(std::this_thread::get_id());
    return it == scopes_.end() ? 0 : it->second.size();
  }

  GateStats global_stats() const {
    std::lock_guard lk(mu_);
    return global_;
  }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
  }

  void check(const CipherBit& c) const {
    if (c.ctx_ != id_) {
      throw ContextMismatch("ciphertext handle belongs to context " + std::to_string(c.ctx_) +
                            ", used with context " + std::to_string(id_));
    }
  }

  CipherBit binary(GateKind k, const CipherBit& a, const CipherBit& b, bool v) {
    check(a);
    check(b);
    return charge(k, v, std::max(a.level_, b.level_) + 1);
  }

  CipherBit charge(GateKind k, bool v, std::uint32_t level) {
    {
      std::lock_guard lk(mu_);
      global_.record(k, level);
      auto it = scopes_.find(std::this_thread::get_id());
      if (it != scopes_.end()) {
        for (auto& s : it->second) s.record(k, level);
      }
    }
    return CipherBit(id_, v, level, false);
  }

  std::uint64_t id_;
  mutable std::mutex mu_;
  GateStats global_;
  std::unordered_map<std::thread::id, std::vector<GateStats>> scopes_;
};

static_assert(GateBackend<SimContext>);

/// RAII wrapper around begin_scope/end_scope; the collected stats are
/// available from finish() or discarded on destruction.
template <class Ctx>
class ScopeGuard {
 public:
  ScopeGuard(Ctx& ctx, std::string label) : ctx_(&ctx) { ctx_->begin_scope(std::move(label)); }
  ScopeGuard(const ScopeGuard&) = delete;
  ScopeGuard& operator=(const ScopeGuard&) = delete;
  ~ScopeGuard() {
    if (ctx_) ctx_->end_scope();
  }

  GateStats finish() {
    auto s = ctx_->end_scope();
    ctx_ = nullptr;
    return s;
  }

 private:
  Ctx* ctx_;
};

}  // namespace encbnn::hegate
