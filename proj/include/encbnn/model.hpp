// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* model.hpp
 * Binary/ternary network description, batch-norm folding into integer
 * thresholds, weight dropping, and the exact integer reference evaluator.
 *
 * Activations live in {-1,+1}; on the wire and inside circuits they are
 * stored as {0,1} with -1 -> 0. sign(0) = +1 throughout.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "encbnn/error.hpp"

namespace encbnn::model {

/// Either a flat vector (flat == true, size in `channels`) or a C x H x W
/// tensor flattened in channel-major order.
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 1;
  std::size_t width = 1;
  bool flat = true;

  static Shape vector(std::size_t d) { return {d, 1, 1, true}; }
  static Shape image(std::size_t c, std::size_t h, std::size_t w) { return {c, h, w, false}; }

  std::size_t size() const { return channels * height * width; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<std::int8_t> weights;  // out x in, row-major
  std::vector<std::int64_t> bias;    // out
  std::optional<std::vector<double>> magnitudes;

  std::span<const std::int8_t> row(std::size_t r) const {
    return std::span<const std::int8_t>(weights).subspan(r * in, in);
  }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct ConvLayer {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;
  std::size_t stride = 1;
  std::vector<std::int8_t> filters;  // [out][in][kh][kw]
  std::vector<std::int64_t> bias;    // out
  std::optional<std::vector<double>> magnitudes;

  std::size_t filter_size() const { return in_channels * kernel_h * kernel_w; }

  std::span<const std::int8_t> filter(std::size_t oc) const {
    return std::span<const std::int8_t>(filters).subspan(oc * filter_size(), filter_size());
  }

  friend bool operator==(const ConvLayer&, const ConvLayer&) = default;
};

/// Per-channel y = gamma * (a - mu) / sqrt(sigma2 + epsilon) + beta.
struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mu;
  std::vector<double> sigma2;
  double epsilon = 0.0;

  std::size_t channels() const { return gamma.size(); }

  static BatchNorm identity(std::size_t channels) {
    return {std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
            std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0), 0.0};
  }

  friend bool operator==(const BatchNorm&, const BatchNorm&) = default;
};

struct SignActivation {
  friend bool operator==(const SignActivation&, const SignActivation&) = default;
};

using Layer = std::variant<DenseLayer, ConvLayer, BatchNorm, SignActivation>;

enum class OutputMode { SignBits, ScoreWords };

struct TernaryModel {
  Shape input_shape;
  std::vector<Layer> layers;
  OutputMode output_mode = OutputMode::SignBits;

  friend bool operator==(const TernaryModel&, const TernaryModel&) = default;
};

inline bool is_linear(const Layer& l) {
  return std::holds_alternative<DenseLayer>(l) || std::holds_alternative<ConvLayer>(l);
}

/// Integer test applied to a pre-activation z = w.x (bias already absorbed).
/// Compare: bit = [z >= threshold] XOR flip. Constant: bit is fixed.
struct FoldedThreshold {
  enum class Mode { Compare, Constant };
  Mode mode = Mode::Compare;
  std::int64_t threshold = 0;
  bool flip = false;
  bool constant_bit = true;

  bool apply(std::int64_t z) const {
    if (mode == Mode::Constant) return constant_bit;
    return (z >= threshold) != flip;
  }

  static FoldedThreshold from_bias(std::int64_t b) { return {Mode::Compare, -b, false, true}; }

  friend bool operator==(const FoldedThreshold&, const FoldedThreshold&) = default;
};

namespace detail {

// Keeps folded thresholds far from int64 overflow in later arithmetic.
inline constexpr double kThresholdClamp = 4.0e15;

inline std::int64_t clamp_to_int(double v) {
  if (!(v == v)) throw Error("batch-norm folding produced NaN");
  v = std::clamp(v, -kThresholdClamp, kThresholdClamp);
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

/// Absorbs the integer bias and a batch norm into one integer test per unit.
///
/// With tau = mu - beta * sqrt(sigma2 + eps) / gamma - b the activation is
/// [z >= ceil(tau)] for gamma > 0, [z <= floor(tau)] for gamma < 0 and
/// sign(beta) for gamma == 0.
inline std::vector<FoldedThreshold> fold_batchnorm(std::span<const std::int64_t> bias,
                                                   const BatchNorm& bn) {
  if (bias.size() != bn.channels()) {
    throw ShapeError("fold_batchnorm: " + std::to_string(bias.size()) + " biases vs " +
                     std::to_string(bn.channels()) + " batch-norm channels");
  }
  std::vector<FoldedThreshold> out;
  out.reserve(bias.size());
  for (std::size_t i = 0; i < bias.size(); ++i) {
    const double g = bn.gamma[i];
    const double var = bn.sigma2[i] + bn.epsilon;
    if (!(var > 0.0)) throw ShapeError("fold_batchnorm: sigma2 + epsilon must be positive");
    FoldedThreshold t;
    if (g == 0.0) {
      t.mode = FoldedThreshold::Mode::Constant;
      t.constant_bit = bn.beta[i] >= 0.0;
    } else {
      const double tau =
          bn.mu[i] - bn.beta[i] * std::sqrt(var) / g - static_cast<double>(bias[i]);
      if (g > 0.0) {
        t.threshold = detail::clamp_to_int(std::ceil(tau));
      } else {
        t.threshold = detail::clamp_to_int(std::floor(tau)) + 1;
        t.flip = true;
      }
    }
    out.push_back(t);
  }
  return out;
}

/// Real-valued batch norm followed by sign, used as a cross-check.
inline bool batchnorm_sign(double a, const BatchNorm& bn, std::size_t ch) {
  const double y =
      bn.gamma[ch] * (a - bn.mu[ch]) / std::sqrt(bn.sigma2[ch] + bn.epsilon) + bn.beta[ch];
  return y >= 0.0;
}

/// Output shape of one layer; throws ShapeError when it does not apply.
inline Shape output_shape(const Layer& layer, const Shape& in) {
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    if (d->in != in.size()) {
      throw ShapeError("dense layer expects " + std::to_string(d->in) + " inputs, got " +
                       std::to_string(in.size()));
    }
    return Shape::vector(d->out);
  }
  if (const auto* c = std::get_if<ConvLayer>(&layer)) {
    if (in.flat) throw ShapeError("conv layer needs a channels x height x width input");
    if (c->in_channels != in.channels) {
      throw ShapeError("conv layer expects " + std::to_string(c->in_channels) +
                       " input channels, got " + std::to_string(in.channels));
    }
    if (c->stride == 0) throw ShapeError("conv stride must be positive");
    if (c->kernel_h > in.height || c->kernel_w > in.width || c->kernel_h == 0 ||
        c->kernel_w == 0) {
      throw ShapeError("conv window " + std::to_string(c->kernel_h) + "x" +
                       std::to_string(c->kernel_w) + " does not fit input " +
                       std::to_string(in.height) + "x" + std::to_string(in.width));
    }
    return Shape::image(c->out_channels, (in.height - c->kernel_h) / c->stride + 1,
                        (in.width - c->kernel_w) / c->stride + 1);
  }
  return in;
}

/// A dense or conv layer seen as a set of neurons. Unit u has channel
/// u / positions and reads the inputs windows[u % positions] against the
/// weights of its channel, in matching order.
struct LinearUnits {
  std::size_t channels = 0;
  std::size_t positions = 0;
  std::vector<std::vector<std::size_t>> windows;
  std::vector<std::span<const std::int8_t>> weights;  // per channel
  std::span<const std::int64_t> bias;                 // per channel
  Shape out_shape;

  std::size_t units() const { return channels * positions; }
};

inline LinearUnits lower_linear(const Layer& layer, const Shape& in) {
  LinearUnits u;
  u.out_shape = output_shape(layer, in);
  if (const auto* d = std::get_if<DenseLayer>(&layer)) {
    u.channels = d->out;
    u.positions = 1;
    std::vector<std::size_t> all(d->in);
    std::iota(all.begin(), all.end(), std::size_t{0});
    u.windows.push_back(std::move(all));
    for (std::size_t r = 0; r < d->out; ++r) u.weights.push_back(d->row(r));
    u.bias = d->bias;
    return u;
  }
  const auto& c = std::get<ConvLayer>(layer);
  u.channels = c.out_channels;
  u.positions = u.out_shape.height * u.out_shape.width;
  for (std::size_t oy = 0; oy < u.out_shape.height; ++oy) {
    for (std::size_t ox = 0; ox < u.out_shape.width; ++ox) {
      std::vector<std::size_t> win;
      win.reserve(c.filter_size());
      for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
        for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
          for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
            const auto y = oy * c.stride + ky;
            const auto x = ox * c.stride + kx;
            win.push_back((ci * in.height + y) * in.width + x);
          }
        }
      }
      u.windows.push_back(std::move(win));
    }
  }
  for (std::size_t oc = 0; oc < c.out_channels; ++oc) u.weights.push_back(c.filter(oc));
  u.bias = c.bias;
  return u;
}

/// A linear layer, its optional batch norm, and whether the block ends in a
/// sign (explicit, or implied for the last block of a sign_bits model).
struct Block {
  std::size_t linear = 0;
  std::optional<std::size_t> batchnorm;
  bool binarize = false;
  Shape in_shape;
  Shape out_shape;
};

namespace detail {

inline std::string layer_path(std::size_t i) { return "/layers/" + std::to_string(i); }

inline std::size_t channels_of(const Layer& l) {
  if (const auto* d = std::get_if<DenseLayer>(&l)) return d->out;
  return std::get<ConvLayer>(l).out_channels;
}

}  // namespace detail

/// Checks every structural rule of a model and groups it into blocks.
/// Throws SchemaError naming the offending location.
inline std::vector<Block> validate(const TernaryModel& m) {
  if (m.input_shape.size() == 0) throw SchemaError("/input_shape", "input size must be positive");
  std::vector<Block> blocks;
  Shape shape = m.input_shape;
  bool binary_input = true;  // next linear layer sees {-1,+1} data

  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    const auto& layer = m.layers[i];
    const auto path = detail::layer_path(i);

    if (is_linear(layer)) {
      if (!binary_input) {
        throw SchemaError(path, "dense/conv layer must be first or follow a sign layer");
      }
      std::span<const std::int8_t> w;
      std::size_t expect_w = 0;
      std::size_t channels = 0;
      std::span<const std::int64_t> bias;
      const std::optional<std::vector<double>>* mags = nullptr;
      if (const auto* d = std::get_if<DenseLayer>(&layer)) {
        w = d->weights;
        expect_w = d->in * d->out;
        channels = d->out;
        bias = d->bias;
        mags = &d->magnitudes;
        if (d->out == 0) throw SchemaError(path, "dense layer needs at least one output");
      } else {
        const auto& c = std::get<ConvLayer>(layer);
        w = c.filters;
        expect_w = c.out_channels * c.filter_size();
        channels = c.out_channels;
        bias = c.bias;
        mags = &c.magnitudes;
        if (c.out_channels == 0) throw SchemaError(path, "conv layer needs at least one filter");
      }
      if (w.size() != expect_w) {
        throw SchemaError(path + "/weights", "expected " + std::to_string(expect_w) +
                                                 " weights, got " + std::to_string(w.size()));
      }
      for (std::size_t k = 0; k < w.size(); ++k) {
        if (w[k] < -1 || w[k] > 1) {
          throw SchemaError(path + "/weights/" + std::to_string(k),
                            "weight " + std::to_string(w[k]) + " outside {-1,0,1}");
        }
      }
      if (bias.size() != channels) {
        throw SchemaError(path + "/bias", "expected " + std::to_string(channels) +
                                              " biases, got " + std::to_string(bias.size()));
      }
      if (*mags && (*mags)->size() != w.size()) {
        throw SchemaError(path + "/magnitudes", "magnitudes must match weights one to one");
      }
      Shape out;
      try {
        out = output_shape(layer, shape);
      } catch (const ShapeError& e) {
        throw SchemaError(path, e.what());
      }
      blocks.push_back({i, std::nullopt, false, shape, out});
      shape = out;
      binary_input = false;
    } else if (const auto* bn = std::get_if<BatchNorm>(&layer)) {
      if (i == 0 || !is_linear(m.layers[i - 1])) {
        throw SchemaError(path, "batchnorm must follow a dense or conv layer");
      }
      const auto ch = detail::channels_of(m.layers[i - 1]);
      if (bn->gamma.size() != ch || bn->beta.size() != ch || bn->mu.size() != ch ||
          bn->sigma2.size() != ch) {
        throw SchemaError(path, "batchnorm parameters must have " + std::to_string(ch) +
                                    " channels");
      }
      if (!(bn->epsilon >= 0.0)) throw SchemaError(path + "/epsilon", "epsilon must be >= 0");
      for (std::size_t c = 0; c < ch; ++c) {
        if (!(bn->sigma2[c] + bn->epsilon > 0.0)) {
          throw SchemaError(path + "/sigma2/" + std::to_string(c), "sigma2 + epsilon must be > 0");
        }
      }
      blocks.back().batchnorm = i;
    } else {
      if (i == 0 || std::holds_alternative<SignActivation>(m.layers[i - 1])) {
        throw SchemaError(path, "sign must follow a dense, conv or batchnorm layer");
      }
      if (m.output_mode == OutputMode::ScoreWords && i + 1 == m.layers.size()) {
        throw SchemaError(path, "score_words models must end in a dense/conv or batchnorm layer");
      }
      blocks.back().binarize = true;
      binary_input = true;
    }
  }
  if (blocks.empty()) throw SchemaError("/layers", "model has no dense or conv layer");
  if (m.output_mode == OutputMode::SignBits) blocks.back().binarize = true;
  return blocks;
}

/// Thresholds for every channel of a block.
inline std::vector<FoldedThreshold> block_thresholds(const TernaryModel& m, const Block& b) {
  const auto& layer = m.layers[b.linear];
  std::span<const std::int64_t> bias = std::holds_alternative<DenseLayer>(layer)
                                           ? std::span<const std::int64_t>(std::get<DenseLayer>(layer).bias)
                                           : std::span<const std::int64_t>(std::get<ConvLayer>(layer).bias);
  if (b.batchnorm) return fold_batchnorm(bias, std::get<BatchNorm>(m.layers[*b.batchnorm]));
  std::vector<FoldedThreshold> out;
  for (auto v : bias) out.push_back(FoldedThreshold::from_bias(v));
  return out;
}

/// Result of a plaintext forward pass: +-1 values for sign_bits models,
/// integer pre-activations (w.x + b) of the last linear layer otherwise.
struct PlainOutput {
  OutputMode mode = OutputMode::SignBits;
  std::vector<std::int64_t> values;

  friend bool operator==(const PlainOutput&, const PlainOutput&) = default;
};

/// w.x over a window, x in {-1,+1}.
inline std::int64_t dot(std::span<const std::int8_t> w, std::span<const std::int8_t> x,
                        std::span<const std::size_t> window) {
  std::int64_t z = 0;
  for (std::size_t i = 0; i < w.size(); ++i) z += std::int64_t{w[i]} * x[window[i]];
  return z;
}

/// The same inner product through the binary form: with s non-zero weights,
/// w.x = 2 * popcount(XNOR(wbar, xbar) over the support) - s.
inline std::int64_t dot_xnor_popcount(std::span<const std::int8_t> w,
                                      std::span<const std::int8_t> x,
                                      std::span<const std::size_t> window) {
  std::int64_t pop = 0;
  std::int64_t s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0) continue;
    ++s;
    const bool wb = w[i] > 0;
    const bool xb = x[window[i]] > 0;
    pop += (wb == xb) ? 1 : 0;
  }
  return 2 * pop - s;
}

inline void check_input(const TernaryModel& m, std::span<const std::int8_t> x) {
  if (x.size() != m.input_shape.size()) {
    throw ShapeError("input has " + std::to_string(x.size()) + " values, model expects " +
                     std::to_string(m.input_shape.size()));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 1 && x[i] != -1) {
      throw ShapeError("input value at " + std::to_string(i) + " is not -1 or +1");
    }
  }
}

/// Exact integer forward pass.
inline PlainOutput oracle_eval(const TernaryModel& m, std::span<const std::int8_t> x) {
  const auto blocks = validate(m);
  check_input(m, x);
  std::vector<std::int8_t> cur(x.begin(), x.end());
  PlainOutput out;
  out.mode = m.output_mode;
  for (const auto& b : blocks) {
    const auto units = lower_linear(m.layers[b.linear], b.in_shape);
    const auto th = block_thresholds(m, b);
    std::vector<std::int8_t> next;
    std::vector<std::int64_t> scores;
    for (std::size_t u = 0; u < units.units(); ++u) {
      const auto ch = u / units.positions;
      const auto z = dot(units.weights[ch], cur, units.windows[u % units.positions]);
      if (b.binarize) {
        next.push_back(th[ch].apply(z) ? 1 : -1);
      } else {
        scores.push_back(z + units.bias[ch]);
      }
    }
    if (b.binarize) {
      cur = std::move(next);
      out.values.assign(cur.begin(), cur.end());
    } else {
      out.values = std::move(scores);
    }
  }
  return out;
}

/// Converts {-1,+1} to stored binary {0,1}.
inline std::vector<bool> to_binary(std::span<const std::int8_t> pm1) {
  std::vector<bool> out;
  out.reserve(pm1.size());
  for (auto v : pm1) out.push_back(v > 0);
  return out;
}

namespace detail {

// Uniform draw in [0, n) from a standard engine with rejection, so results do
// not depend on the standard library's distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline std::size_t kept_count(std::size_t nonzero, double drop_fraction) {
  const double keep = (1.0 - drop_fraction) * static_cast<double>(nonzero);
  return static_cast<std::size_t>(std::ceil(keep - 1e-9));
}

inline void drop_weights(std::vector<std::int8_t>& w, std::optional<std::vector<double>>& mags,
                         double fraction, std::mt19937_64& rng) {
  std::vector<std::size_t> nz;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0) nz.push_back(i);
  }
  const auto keep = kept_count(nz.size(), fraction);
  const auto drop = nz.size() - keep;
  if (drop == 0) return;
  if (mags) {
    const auto& m = *mags;
    std::stable_sort(nz.begin(), nz.end(), [&](std::size_t a, std::size_t b) {
      return std::fabs(m[a]) < std::fabs(m[b]);
    });
  } else {
    for (std::size_t i = nz.size(); i > 1; --i) {
      std::swap(nz[i - 1], nz[uniform_below(rng, i)]);
    }
  }
  for (std::size_t k = 0; k < drop; ++k) {
    w[nz[k]] = 0;
    if (mags) (*mags)[nz[k]] = 0.0;
  }
}

}  // namespace detail

/// Sets a fraction of each linear layer's non-zero weights to zero, leaving
/// ceil((1 - fraction) * nonzero) of them. Smallest stored magnitudes go first
/// when magnitudes are present; otherwise a seeded shuffle picks them.
inline TernaryModel ternarize(const TernaryModel& m, double drop_fraction, std::uint64_t seed) {
  if (!(drop_fraction >= 0.0 && drop_fraction <= 1.0)) {
    throw Error("drop fraction must lie in [0, 1]");
  }
  TernaryModel out = m;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (i + 1)));
    if (auto* d = std::get_if<DenseLayer>(&out.layers[i])) {
      detail::drop_weights(d->weights, d->magnitudes, drop_fraction, rng);
    } else if (auto* c = std::get_if<ConvLayer>(&out.layers[i])) {
      detail::drop_weights(c->filters, c->magnitudes, drop_fraction, rng);
    }
  }
  return out;
}

inline std::size_t nonzero_weights(const Layer& l) {
  std::span<const std::int8_t> w;
  if (const auto* d = std::get_if<DenseLayer>(&l)) w = d->weights;
  if (const auto* c = std::get_if<ConvLayer>(&l)) w = c->filters;
  return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](auto v) { return v != 0; }));
}

/// Replaces every batch norm that feeds a sign with adjusted biases on the
/// preceding layer. Flipped tests negate the weights; constant outputs zero
/// them. A trailing batch norm of a score_words model is kept.
inline TernaryModel fold_model(const TernaryModel& m) {
  const auto blocks = validate(m);
  TernaryModel out;
  out.input_shape = m.input_shape;
  out.output_mode = m.output_mode;
  std::vector<bool> skip(m.layers.size(), false);
  std::vector<Layer> layers = m.layers;

  for (const auto& b : blocks) {
    if (!b.batchnorm || !b.binarize) continue;
    const auto th = block_thresholds(m, b);
    auto& layer = layers[b.linear];
    std::vector<std::int8_t>* w = nullptr;
    std::vector<std::int64_t>* bias = nullptr;
    std::optional<std::vector<double>>* mags = nullptr;
    std::size_t row = 0;
    if (auto* d = std::get_if<DenseLayer>(&layer)) {
      w = &d->weights;
      bias = &d->bias;
      mags = &d->magnitudes;
      row = d->in;
    } else {
      auto& c = std::get<ConvLayer>(layer);
      w = &c.filters;
      bias = &c.bias;
      mags = &c.magnitudes;
      row = c.filter_size();
    }
    for (std::size_t ch = 0; ch < th.size(); ++ch) {
      auto first = w->begin() + static_cast<std::ptrdiff_t>(ch * row);
      auto last = first + static_cast<std::ptrdiff_t>(row);
      const auto& t = th[ch];
      if (t.mode == FoldedThreshold::Mode::Constant) {
        std::fill(first, last, std::int8_t{0});
        if (*mags) {
          std::fill((*mags)->begin() + static_cast<std::ptrdiff_t>(ch * row),
                    (*mags)->begin() + static_cast<std::ptrdiff_t>((ch + 1) * row), 0.0);
        }
        (*bias)[ch] = t.constant_bit ? 0 : -1;
      } else if (!t.flip) {
        (*bias)[ch] = -t.threshold;
      } else {
        // NOT [z >= t]  <=>  -z + (t - 1) >= 0
        std::transform(first, last, first, [](std::int8_t v) { return static_cast<std::int8_t>(-v); });
        (*bias)[ch] = t.threshold - 1;
      }
    }
    skip[*b.batchnorm] = true;
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (!skip[i]) out.layers.push_back(std::move(layers[i]));
  }
  return out;
}

}  // namespace encbnn::model
