// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* cli.hpp
 * Commands behind the `encbnn` tool. Each returns a process exit code and
 * writes to the given streams, so they can be driven from tests.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "encbnn/compiler.hpp"
#include "encbnn/costsched.hpp"
#include "encbnn/error.hpp"
#include "encbnn/hegate.hpp"
#include "encbnn/io.hpp"
#include "encbnn/model.hpp"
#include "encbnn/selftest.hpp"

namespace encbnn::cli {

using Json = io::Json;

struct Flags {
  compiler::Options options;
  costsched::CostModel cost;
  std::optional<std::string> report_path;
  std::uint64_t seed = 0;
};

inline Json options_echo(const Flags& f) {
  Json j;
  j["plus_one"] = f.options.plus_one ? "on" : "off";
  j["comparator"] = f.options.comparator == compiler::Comparator::Reduce ? "reduce" : "sort";
  if (f.options.stride) {
    j["stride"] = *f.options.stride;
  } else {
    j["stride"] = nullptr;
  }
  j["cache_shared_sums"] = f.options.cache_shared_sums ? "on" : "off";
  j["t_gate"] = f.cost.t_gate;
  j["intra_workers"] = f.cost.intra_workers;
  j["machines"] = f.cost.machines;
  j["strategy"] = costsched::strategy_name(f.cost.strategy);
  j["seed"] = f.seed;
  return j;
}

/// Index of the largest score; ties go to the lowest index.
template <class T>
std::size_t argmax(const std::vector<T>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

/// Scores used for ranking: the integer pre-activations, passed through a
/// trailing batch norm when the model has one.
inline std::vector<double> ranking_scores(const model::TernaryModel& m,
                                          const std::vector<std::int64_t>& scores) {
  std::vector<double> out(scores.begin(), scores.end());
  if (m.layers.empty()) return out;
  const auto* bn = std::get_if<model::BatchNorm>(&m.layers.back());
  if (!bn) return out;
  const auto channels = bn->channels();
  const auto positions = channels == 0 ? 1 : scores.size() / channels;
  for (std::size_t u = 0; u < scores.size(); ++u) {
    const auto ch = u / positions;
    out[u] = bn->gamma[ch] * (static_cast<double>(scores[u]) - bn->mu[ch]) /
                 std::sqrt(bn->sigma2[ch] + bn->epsilon) +
             bn->beta[ch];
  }
  return out;
}

namespace detail {

struct Compiled {
  compiler::EvalResult<hegate::SimContext> result;
  model::PlainOutput output;
  Json report;
};

inline Compiled run(const model::TernaryModel& m, std::span<const std::int8_t> x, const Flags& f) {
  hegate::SimContext ctx;
  const auto enc = compiler::encrypt_input(ctx, x);
  Compiled c{compiler::eval_model(ctx, m, enc, f.options), {}, {}};
  c.output = compiler::decrypt_output(ctx, c.result);
  const auto est = costsched::estimate(c.result.stats, f.cost);
  c.report = costsched::report(c.result.stats, est, f.cost, options_echo(f));
  return c;
}

inline void emit_report(const Json& report, const Flags& f, std::ostream* fallback) {
  const auto text = report.dump(2) + "\n";
  if (f.report_path) {
    io::write_file(*f.report_path, text);
  } else if (fallback) {
    *fallback << text;
  }
}

template <class F>
int guarded(std::ostream& err, const F& body) {
  try {
    return body();
  } catch (const SchemaError& e) {
    err << "error: invalid document: " << e.what() << "\n";
  } catch (const ShapeError& e) {
    err << "error: shape mismatch: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace detail

/// encrypt -> evaluate -> decrypt. Prints a JSON line with the prediction and
/// writes the report to --report when given.
inline int cmd_eval(const std::string& model_path, const std::string& input_path, const Flags& f,
                    std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto m = io::load_model(model_path);
    const auto x = io::load_input(input_path, m.input_shape);
    auto c = detail::run(m, x, f);
    const auto oracle = model::oracle_eval(f.options.stride ? compiler::with_stride(m, *f.options.stride) : m, x);

    Json line;
    if (m.output_mode == model::OutputMode::SignBits) {
      line["mode"] = "sign_bits";
      line["outputs"] = c.output.values;
      if (c.output.values.size() == 1) line["prediction"] = c.output.values.front();
    } else {
      line["mode"] = "score_words";
      line["scores"] = c.output.values;
      const auto ranked = ranking_scores(m, c.output.values);
      if (std::holds_alternative<model::BatchNorm>(m.layers.back())) line["normalized_scores"] = ranked;
      line["prediction"] = argmax(ranked);
    }
    line["oracle_agrees"] = c.output == oracle;
    line["gates"] = c.report["gates"]["total"];
    line["out_seq"] = c.report["estimates"]["out_seq"];
    out << line.dump() << "\n";
    detail::emit_report(c.report, f, nullptr);
    if (!(c.output == oracle)) {
      err << "error: decrypted output differs from the plaintext reference\n";
      return 3;
    }
    return 0;
  });
}

/// Compiles against an all-(-1) input and emits only the report; the
/// circuit does not depend on input values.
inline int cmd_estimate(const std::string& model_path, const Flags& f, std::ostream& out,
                        std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto m = io::load_model(model_path);
    const std::vector<std::int8_t> x(m.input_shape.size(), -1);
    auto c = detail::run(m, x, f);
    detail::emit_report(c.report, f, &out);
    return 0;
  });
}

inline int cmd_fold(const std::string& model_path, const std::string& out_path, std::ostream& out,
                    std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto folded = model::fold_model(io::load_model(model_path));
    io::save_model(folded, out_path);
    out << "wrote " << out_path << "\n";
    return 0;
  });
}

inline int cmd_ternarize(const std::string& model_path, double fraction, std::uint64_t seed,
                         const std::string& out_path, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const auto m = io::load_model(model_path);
    const auto t = model::ternarize(m, fraction, seed);
    io::save_model(t, out_path);
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      if (!model::is_linear(m.layers[i])) continue;
      out << "layer " << i << ": " << model::nonzero_weights(m.layers[i]) << " -> "
          << model::nonzero_weights(t.layers[i]) << " non-zero weights\n";
    }
    out << "wrote " << out_path << "\n";
    return 0;
  });
}

inline int cmd_selftest(std::ostream& out, std::ostream& err, const selftest::Hooks& hooks = {}) {
  return detail::guarded(err, [&] {
    const auto r = selftest::run(hooks);
    for (const auto& c : r.checks) {
      out << (c.ok ? "PASS " : "FAIL ") << c.name;
      if (!c.detail.empty()) out << " (" << c.detail << ")";
      out << "\n";
    }
    out << (r.ok() ? "selftest passed" : "selftest FAILED") << " in " << std::fixed
        << std::setprecision(2) << r.seconds << " s\n";
    return r.ok() ? 0 : 1;
  });
}

}  // namespace encbnn::cli
