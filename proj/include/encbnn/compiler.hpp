// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* compiler.hpp
 * Lowers dense/conv blocks to circuits over encrypted activations.
 *
 * A neuron computes [w.x >= t] (t from the folded bias/batch norm) for
 * plaintext ternary w and encrypted x in {-1,+1}, stored as xbar in {0,1}.
 * Multiplying by a plaintext weight is free (identity or NOT), so the cost is
 * all in summation and comparison. Two forms are available:
 *
 *   direct:   S = popcount over the support of XNOR(wbar, xbar);
 *             activation <=> S >= ceil((s + t) / 2).
 *   plus-one: with S+ = sum of xbar over w=+1, Sbar- = sum of NOT xbar over
 *             w=-1 and Ssupp = sum of xbar over the support,
 *               P <= N:  4 S+ - 2 Ssupp >= P - N + t
 *               P >  N:  4 Sbar- + 2 Ssupp >= P + 3N + t
 *             Ssupp comes from a per-window sum shared by all rows, minus
 *             the row's zero-weight inputs when the row is ternary.
 */
#pragma once

#include <cstdint>
#include <exception>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "encbnn/circuits.hpp"
#include "encbnn/error.hpp"
#include "encbnn/hegate.hpp"
#include "encbnn/model.hpp"

namespace encbnn::compiler {

using circuits::WordOf;
using hegate::GateStats;

/// Backend with per-thread statistics scopes.
template <class Ctx>
concept ScopedBackend = hegate::GateBackend<Ctx> && requires(Ctx& ctx) {
  ctx.begin_scope(std::string{});
  { ctx.end_scope() } -> std::same_as<GateStats>;
};

enum class Comparator { Reduce, Sort };

struct Options {
  bool plus_one = true;
  Comparator comparator = Comparator::Reduce;
  std::optional<std::size_t> stride;  // overrides every conv layer's stride
  bool cache_shared_sums = true;
  std::size_t threads = 1;  // workers evaluating output units of a layer
};

enum class Polarity { Plus, Minus };
enum class Method { Direct, PlusOne };

inline std::int64_t floor_div2(std::int64_t a) { return a >= 0 ? a / 2 : -((-a + 1) / 2); }
inline std::int64_t ceil_div2(std::int64_t a) { return -floor_div2(-a); }

/// Compilation plan of one weight row. Indices are positions in the row's
/// input window.
struct RowPlan {
  std::vector<std::size_t> support;
  std::vector<bool> support_sign;  // true where w = +1, aligned with support
  std::size_t window = 0;
  std::size_t s = 0;
  std::size_t P = 0;
  std::size_t N = 0;
  Polarity polarity = Polarity::Plus;
  std::vector<std::size_t> sum_indices;   // w = +1 (plus) or w = -1 (minus)
  std::vector<std::size_t> zero_indices;  // w = 0
  model::FoldedThreshold threshold;
  Method method = Method::Direct;
  // Output bit when the threshold alone decides it (t <= -s or t > s, or a
  // constant threshold); such neurons cost nothing.
  std::optional<bool> fixed_bit;

  // direct: activation <=> popcount(XNOR) >= direct_count
  std::int64_t direct_count = 0;
  // plus-one: activation <=> (polarity form) >= plus_one_rhs
  std::int64_t plus_one_rhs = 0;

  std::uint64_t predicted_direct_gates = 0;
  std::uint64_t predicted_plus_one_gates = 0;

  std::size_t summed_bits_direct() const { return s; }
  std::size_t summed_bits_plus_one() const { return sum_indices.size() + zero_indices.size(); }
};

struct PlanParams {
  bool plus_one = true;
  Comparator comparator = Comparator::Reduce;
  // Amortized cost of the shared window sum charged to each row using it.
  double shared_cost_share = 0.0;
};

/// Bits needed by the plus-one combination word for a row.
inline std::size_t plus_one_width(const RowPlan& p) {
  if (p.polarity == Polarity::Plus) return circuits::unsigned_width(4 * p.s);
  return circuits::unsigned_width(4 * p.N + 2 * p.s);
}

inline RowPlan plan_row(std::span<const std::int8_t> w, const model::FoldedThreshold& threshold,
                        const PlanParams& params = {}) {
  RowPlan p;
  p.window = w.size();
  p.threshold = threshold;
  std::vector<std::size_t> plus, minus;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0) {
      p.zero_indices.push_back(i);
      continue;
    }
    p.support.push_back(i);
    p.support_sign.push_back(w[i] > 0);
    (w[i] > 0 ? plus : minus).push_back(i);
  }
  p.s = p.support.size();
  p.P = plus.size();
  p.N = minus.size();
  p.polarity = p.P <= p.N ? Polarity::Plus : Polarity::Minus;
  p.sum_indices = p.polarity == Polarity::Plus ? plus : minus;

  const auto t = threshold.threshold;
  const auto s = static_cast<std::int64_t>(p.s);
  const auto P = static_cast<std::int64_t>(p.P);
  const auto N = static_cast<std::int64_t>(p.N);
  p.direct_count = ceil_div2(s + t);
  p.plus_one_rhs = p.polarity == Polarity::Plus ? P - N + t : P + 3 * N + t;
  if (threshold.mode == model::FoldedThreshold::Mode::Constant) {
    p.fixed_bit = threshold.constant_bit;
  } else if (t <= -s) {
    p.fixed_bit = !threshold.flip;
  } else if (t > s) {
    p.fixed_bit = threshold.flip;
  }

  using namespace circuits;
  p.predicted_direct_gates =
      p.s == 0 ? 0 : cost::reduce_tree(p.s) + cost::compare(unsigned_width(p.s));

  std::uint64_t plus_one = cost::reduce_tree(p.sum_indices.size());
  const auto full_width = unsigned_width(p.window);
  if (!p.zero_indices.empty()) {
    plus_one += cost::reduce_tree(p.zero_indices.size()) + cost::rc_add(full_width);
  }
  const auto k = plus_one_width(p);
  if (!p.sum_indices.empty()) plus_one += cost::rc_add(k);
  plus_one += cost::compare(k + 1);
  p.predicted_plus_one_gates = plus_one;

  const bool usable = params.plus_one && params.comparator == Comparator::Reduce && p.s > 0 &&
                      threshold.mode == model::FoldedThreshold::Mode::Compare;
  if (usable && static_cast<double>(p.predicted_plus_one_gates) + params.shared_cost_share <
                    static_cast<double>(p.predicted_direct_gates)) {
    p.method = Method::PlusOne;
  }
  return p;
}

/// Cache of per-window popcount words shared by every row of a layer. The
/// first request for a key computes the sum; concurrent requests wait for it,
/// so each window's gates are charged exactly once.
template <class Ctx>
class SharedSumCache {
 public:
  using Word = WordOf<Ctx>;

  explicit SharedSumCache(bool enabled = true) : enabled_(enabled) {}

  bool enabled() const { return enabled_; }

  Word get(Ctx& ctx, std::size_t key, std::span<const typename Ctx::bit_type> bits) {
    if (!enabled_) return circuits::reduce_tree_sum(ctx, bits);
    std::promise<Word> promise;
    std::shared_future<Word> fut;
    bool owner = false;
    {
      std::lock_guard lk(mu_);
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        fut = promise.get_future().share();
        entries_.emplace(key, fut);
        owner = true;
      } else {
        fut = it->second;
      }
    }
    if (owner) {
      try {
        promise.set_value(circuits::reduce_tree_sum(ctx, bits));
      } catch (...) {
        promise.set_exception(std::current_exception());
      }
    }
    return fut.get();
  }

  bool contains(std::size_t key) const {
    std::lock_guard lk(mu_);
    return entries_.count(key) > 0;
  }

 private:
  bool enabled_;
  mutable std::mutex mu_;
  std::map<std::size_t, std::shared_future<Word>> entries_;
};

/// Popcount over an index set of the input, through the cache.
template <class Ctx>
WordOf<Ctx> shared_input_sum(Ctx& ctx, SharedSumCache<Ctx>& cache, std::size_t key,
                             std::span<const typename Ctx::bit_type> bits) {
  if (bits.empty()) throw ShapeError("shared_input_sum: empty index set");
  return cache.get(ctx, key, bits);
}

namespace detail {

template <class Ctx>
std::vector<typename Ctx::bit_type> xnor_support(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                                                 const RowPlan& p) {
  std::vector<typename Ctx::bit_type> bits;
  bits.reserve(p.s);
  for (std::size_t k = 0; k < p.s; ++k) {
    const auto& x = xs[p.support[k]];
    bits.push_back(p.support_sign[k] ? x : ctx.g_not(x));
  }
  return bits;
}

template <class Ctx>
typename Ctx::bit_type apply_flip(Ctx& ctx, typename Ctx::bit_type b, const RowPlan& p) {
  return p.threshold.flip ? ctx.g_not(b) : b;
}

template <class Ctx>
WordOf<Ctx> gather_sum(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                       std::span<const std::size_t> idx, bool negate) {
  if (idx.empty()) return circuits::constant_word(ctx, 0, 1, false);
  std::vector<typename Ctx::bit_type> bits;
  bits.reserve(idx.size());
  for (auto i : idx) bits.push_back(negate ? ctx.g_not(xs[i]) : xs[i]);
  return circuits::reduce_tree_sum(ctx, bits);
}

// Sum of xbar over the row's support: the shared window sum, corrected by the
// row's zero-weight inputs when there are any.
template <class Ctx>
WordOf<Ctx> support_sum(Ctx& ctx, std::span<const typename Ctx::bit_type> xs, const RowPlan& p,
                        const WordOf<Ctx>& shared) {
  if (p.zero_indices.empty()) return shared;
  auto zeros = gather_sum(ctx, xs, p.zero_indices, false);
  const auto k = std::max(shared.width(), zeros.width());
  auto diff = circuits::rc_sub(ctx, circuits::extend(ctx, shared, k), circuits::extend(ctx, zeros, k));
  diff.is_signed = false;
  return circuits::truncate(std::move(diff), circuits::unsigned_width(p.s));
}

// Word holding the plus-one combination: 4 S+ - 2 Ssupp (signed) or
// 4 Sbar- + 2 Ssupp (unsigned).
template <class Ctx>
WordOf<Ctx> plus_one_word(Ctx& ctx, std::span<const typename Ctx::bit_type> xs, const RowPlan& p,
                          const WordOf<Ctx>& supp) {
  const auto k = plus_one_width(p);
  const bool plus = p.polarity == Polarity::Plus;
  auto part = gather_sum(ctx, xs, p.sum_indices, !plus);
  // Both values fit in k bits; the shifts may leave spare high zeros.
  auto a = circuits::truncate(circuits::extend(ctx, circuits::shift_mul_pow2(ctx, part, 2), k), k);
  auto b = circuits::truncate(circuits::extend(ctx, circuits::shift_mul_pow2(ctx, supp, 1), k), k);
  return plus ? circuits::rc_sub(ctx, a, b) : circuits::rc_add(ctx, a, b);
}

}  // namespace detail

/// XNOR with the plaintext weights, popcount, then threshold test through the
/// MUX comparator or the sorting network.
template <class Ctx>
typename Ctx::bit_type neuron_direct(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                                     const RowPlan& p, Comparator cmp = Comparator::Reduce) {
  if (xs.size() != p.window) throw ShapeError("neuron_direct: window size mismatch");
  if (p.fixed_bit) return ctx.trivial_const(*p.fixed_bit);
  auto bits = detail::xnor_support(ctx, xs, p);
  typename Ctx::bit_type out;
  if (cmp == Comparator::Reduce) {
    auto sum = circuits::reduce_tree_sum(ctx, bits);
    out = circuits::compare_ge_const(ctx, sum, p.direct_count);
  } else {
    auto sorted = circuits::batcher_sort_desc(ctx, bits);
    out = circuits::sign_from_sorted(ctx, sorted, p.direct_count);
  }
  return detail::apply_flip(ctx, out, p);
}

/// Plus-one form. `shared` is the popcount of the whole window.
template <class Ctx>
typename Ctx::bit_type neuron_plus_one(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                                       const RowPlan& p, const WordOf<Ctx>* shared) {
  if (xs.size() != p.window) throw ShapeError("neuron_plus_one: window size mismatch");
  if (p.fixed_bit) return ctx.trivial_const(*p.fixed_bit);
  if (shared == nullptr) throw Error("neuron_plus_one: shared window sum not available");

  auto supp = detail::support_sum(ctx, xs, p, *shared);
  const auto c = p.plus_one_rhs;
  typename Ctx::bit_type out;
  if (p.sum_indices.empty()) {
    // Only the support sum remains: 2 Ssupp >= c, or -2 Ssupp >= c.
    if (p.polarity == Polarity::Minus) {
      out = circuits::compare_ge_const(ctx, supp, ceil_div2(c));
    } else {
      out = ctx.g_not(circuits::compare_ge_const(ctx, supp, floor_div2(-c) + 1));
    }
  } else {
    auto word = detail::plus_one_word(ctx, xs, p, supp);
    out = word.is_signed ? circuits::compare_signed_ge_const(ctx, word, c)
                         : circuits::compare_ge_const(ctx, word, c);
  }
  return detail::apply_flip(ctx, out, p);
}

/// Integer pre-activation w.x + bias as a signed word (score outputs).
template <class Ctx>
WordOf<Ctx> neuron_score(Ctx& ctx, std::span<const typename Ctx::bit_type> xs, const RowPlan& p,
                         std::int64_t bias, const WordOf<Ctx>* shared) {
  if (xs.size() != p.window) throw ShapeError("neuron_score: window size mismatch");
  const auto s = static_cast<std::int64_t>(p.s);
  const auto range_width = circuits::signed_width(bias - s, bias + s);
  if (p.s == 0) return circuits::constant_word(ctx, bias, range_width, true);

  if (p.method == Method::PlusOne && shared != nullptr) {
    auto supp = detail::support_sum(ctx, xs, p, *shared);
    auto word = detail::plus_one_word(ctx, xs, p, supp);
    const auto P = static_cast<std::int64_t>(p.P);
    const auto N = static_cast<std::int64_t>(p.N);
    // plus:  w.x = (4 S+ - 2 Ssupp) + N - P
    // minus: w.x = (4 Sbar- + 2 Ssupp) - P - 3N
    const auto offset = p.polarity == Polarity::Plus ? N - P + bias : bias - P - 3 * N;
    const auto width = std::max(range_width, word.width() + 1);
    return circuits::add_const(ctx, word, offset, width);
  }
  auto bits = detail::xnor_support(ctx, xs, p);
  auto sum = circuits::reduce_tree_sum(ctx, bits);
  // w.x = 2 S - s
  auto doubled = circuits::shift_mul_pow2(ctx, sum, 1);
  const auto width = std::max(range_width, doubled.width() + 1);
  return circuits::add_const(ctx, doubled, bias - s, width);
}

/// Per-layer statistics: one scope for the shared window sums, one per
/// output unit.
struct LayerStats {
  std::string label;
  std::string kind;
  GateStats shared;
  std::vector<GateStats> outputs;
  std::vector<std::size_t> summed_bits;  // encrypted bits entering row-local sums

  GateStats total() const {
    GateStats t = shared;
    t.label = label;
    for (const auto& o : outputs) t += o;
    return t;
  }
};

struct StatsTree {
  std::vector<LayerStats> layers;

  GateStats total() const {
    GateStats t;
    t.label = "model";
    for (const auto& l : layers) t += l.total();
    return t;
  }
};

template <class Ctx>
struct LayerOutput {
  std::vector<typename Ctx::bit_type> bits;  // binarized blocks
  std::vector<WordOf<Ctx>> words;            // score blocks
  LayerStats stats;
  std::vector<RowPlan> plans;  // per channel
};

namespace detail {

template <class F>
void parallel_for(std::size_t n, std::size_t threads, const F& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

/// Evaluates every unit of a lowered dense/conv layer.
template <class Ctx>
  requires ScopedBackend<Ctx>
LayerOutput<Ctx> eval_linear(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                             const model::LinearUnits& units,
                             std::span<const model::FoldedThreshold> thresholds, bool binarize,
                             const Options& opt, const std::string& label, const std::string& kind) {
  using Bit = typename Ctx::bit_type;
  if (thresholds.size() != units.channels) throw ShapeError(label + ": threshold count mismatch");
  for (const auto& win : units.windows) {
    for (auto i : win) {
      if (i >= xs.size()) throw ShapeError(label + ": input too small for layer");
    }
  }

  LayerOutput<Ctx> out;
  out.stats.label = label;
  out.stats.kind = kind;

  const auto window = units.windows.front().size();
  PlanParams params;
  params.plus_one = opt.plus_one;
  params.comparator = binarize ? opt.comparator : Comparator::Reduce;
  params.shared_cost_share =
      opt.cache_shared_sums
          ? static_cast<double>(circuits::cost::reduce_tree(window)) / static_cast<double>(units.channels)
          : static_cast<double>(circuits::cost::reduce_tree(window));
  for (std::size_t ch = 0; ch < units.channels; ++ch) {
    out.plans.push_back(plan_row(units.weights[ch], thresholds[ch], params));
  }
  // Whether unit rows need the shared window sum.
  const auto needs_shared = [&](const RowPlan& p) {
    return p.method == Method::PlusOne && p.s > 0 && !(binarize && p.fixed_bit);
  };
  bool any_plus_one = false;
  for (const auto& p : out.plans) any_plus_one |= needs_shared(p);

  // Window inputs, gathered once.
  std::vector<std::vector<Bit>> windows(units.positions);
  for (std::size_t w = 0; w < units.positions; ++w) {
    windows[w].reserve(window);
    for (auto i : units.windows[w]) windows[w].push_back(xs[i]);
  }

  SharedSumCache<Ctx> cache(opt.cache_shared_sums);
  std::vector<std::optional<WordOf<Ctx>>> shared(units.positions);
  ctx.begin_scope(label + "/shared");
  try {
    if (any_plus_one && cache.enabled()) {
      for (std::size_t w = 0; w < units.positions; ++w) {
        shared[w] = shared_input_sum(ctx, cache, w, std::span<const Bit>(windows[w]));
      }
    }
  } catch (...) {
    ctx.end_scope();
    throw;
  }
  out.stats.shared = ctx.end_scope();

  const auto n = units.units();
  out.stats.outputs.resize(n);
  out.stats.summed_bits.resize(n);
  if (binarize) {
    out.bits.resize(n);
  } else {
    out.words.resize(n);
  }

  detail::parallel_for(n, opt.threads, [&](std::size_t u) {
    const auto ch = u / units.positions;
    const auto pos = u % units.positions;
    const auto& p = out.plans[ch];
    const std::span<const Bit> win(windows[pos]);
    hegate::ScopeGuard<Ctx> scope(ctx, label + "/out" + std::to_string(u));

    std::optional<WordOf<Ctx>> local;
    const WordOf<Ctx>* sh = nullptr;
    if (needs_shared(p)) {
      if (shared[pos]) {
        sh = &*shared[pos];
      } else {
        local = shared_input_sum(ctx, cache, pos, win);
        sh = &*local;
      }
    }
    if (binarize) {
      out.bits[u] = p.method == Method::PlusOne ? neuron_plus_one(ctx, win, p, sh)
                                                : neuron_direct(ctx, win, p, opt.comparator);
    } else {
      out.words[u] = neuron_score(ctx, win, p, units.bias[ch], sh);
    }
    if (binarize && p.fixed_bit) {
      out.stats.summed_bits[u] = 0;
    } else {
      out.stats.summed_bits[u] =
          p.method == Method::PlusOne ? p.summed_bits_plus_one() : p.summed_bits_direct();
    }
    out.stats.outputs[u] = scope.finish();
  });
  return out;
}

template <class Ctx>
  requires ScopedBackend<Ctx>
LayerOutput<Ctx> dense_layer(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                             const model::DenseLayer& layer,
                             std::span<const model::FoldedThreshold> thresholds, bool binarize,
                             const Options& opt, const std::string& label = "dense") {
  if (xs.size() != layer.in) {
    throw ShapeError(label + ": expected " + std::to_string(layer.in) + " inputs, got " +
                     std::to_string(xs.size()));
  }
  const model::Layer l = layer;
  const auto units = model::lower_linear(l, model::Shape::vector(layer.in));
  return eval_linear(ctx, xs, units, thresholds, binarize, opt, label, "dense");
}

template <class Ctx>
  requires ScopedBackend<Ctx>
LayerOutput<Ctx> conv_layer(Ctx& ctx, std::span<const typename Ctx::bit_type> xs,
                            const model::ConvLayer& layer, const model::Shape& in_shape,
                            std::span<const model::FoldedThreshold> thresholds, bool binarize,
                            const Options& opt, const std::string& label = "conv") {
  if (xs.size() != in_shape.size()) throw ShapeError(label + ": input size does not match its shape");
  model::ConvLayer c = layer;
  if (opt.stride) c.stride = *opt.stride;
  const model::Layer l = c;
  const auto units = model::lower_linear(l, in_shape);
  return eval_linear(ctx, xs, units, thresholds, binarize, opt, label, "conv");
}

/// Copy of a model with every conv stride replaced.
inline model::TernaryModel with_stride(model::TernaryModel m, std::size_t stride) {
  for (auto& l : m.layers) {
    if (auto* c = std::get_if<model::ConvLayer>(&l)) c->stride = stride;
  }
  return m;
}

template <class Ctx>
struct EvalResult {
  model::OutputMode mode = model::OutputMode::SignBits;
  std::vector<typename Ctx::bit_type> bits;
  std::vector<WordOf<Ctx>> words;
  StatsTree stats;
  std::vector<std::vector<RowPlan>> plans;  // per block, per channel
};

/// Evaluates the whole model on encrypted stored-binary input bits.
template <class Ctx>
  requires ScopedBackend<Ctx>
EvalResult<Ctx> eval_model(Ctx& ctx, const model::TernaryModel& input_model,
                           std::span<const typename Ctx::bit_type> input, const Options& opt = {}) {
  const auto m = opt.stride ? with_stride(input_model, *opt.stride) : input_model;
  const auto blocks = model::validate(m);
  if (input.size() != m.input_shape.size()) {
    throw ShapeError("input has " + std::to_string(input.size()) + " bits, model expects " +
                     std::to_string(m.input_shape.size()));
  }
  EvalResult<Ctx> res;
  res.mode = m.output_mode;
  std::vector<typename Ctx::bit_type> cur(input.begin(), input.end());
  Options layer_opt = opt;
  layer_opt.stride.reset();

  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const auto& b = blocks[bi];
    const auto& layer = m.layers[b.linear];
    const auto th = model::block_thresholds(m, b);
    const auto units = model::lower_linear(layer, b.in_shape);
    const bool dense = std::holds_alternative<model::DenseLayer>(layer);
    const auto label = "L" + std::to_string(bi) + (dense ? "/dense" : "/conv");
    auto lo = eval_linear(ctx, std::span<const typename Ctx::bit_type>(cur), units, th, b.binarize,
                          layer_opt, label, dense ? "dense" : "conv");
    res.stats.layers.push_back(std::move(lo.stats));
    res.plans.push_back(std::move(lo.plans));
    if (b.binarize) {
      cur = std::move(lo.bits);
      if (bi + 1 == blocks.size()) res.bits = cur;
    } else {
      res.words = std::move(lo.words);
    }
  }
  return res;
}

/// Encrypts a {-1,+1} vector as stored-binary bits.
inline std::vector<hegate::CipherBit> encrypt_input(const hegate::SimContext& ctx,
                                                    std::span<const std::int8_t> x) {
  std::vector<hegate::CipherBit> out;
  out.reserve(x.size());
  for (auto v : x) out.push_back(ctx.encrypt(v > 0));
  return out;
}

/// Decrypts an evaluation result into the oracle's output representation.
inline model::PlainOutput decrypt_output(const hegate::SimContext& ctx,
                                         const EvalResult<hegate::SimContext>& r) {
  model::PlainOutput out;
  out.mode = r.mode;
  if (r.mode == model::OutputMode::SignBits) {
    for (const auto& b : r.bits) out.values.push_back(ctx.decrypt(b) ? 1 : -1);
  } else {
    for (const auto& w : r.words) out.values.push_back(circuits::decrypt_word(ctx, w));
  }
  return out;
}

}  // namespace encbnn::compiler
