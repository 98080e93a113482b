// Copyright 2026 The encbnn Authors
// SPDX-License-Identifier: Apache-2.0

/* io.hpp
 * Model and input documents (JSON, version 1).
 *
 * Model document:
 *   { "version": 1,
 *     "input_shape": [d] | [c, h, w],
 *     "output_mode": "sign_bits" | "score_words",
 *     "layers": [
 *       { "type": "dense", "weights": [[..], ..], "bias": [..], "magnitudes"?: [[..], ..] },
 *       { "type": "conv", "filters": [out][in][kh][kw], "bias": [..], "stride"?: 1,
 *         "magnitudes"?: [out][in][kh][kw] },
 *       { "type": "batchnorm", "gamma": [..], "beta": [..], "mu": [..], "sigma2": [..],
 *         "epsilon": ".." },
 *       { "type": "sign" } ] }
 *
 * Input document:
 *   { "version"?: 1, "encoding": "pm1" | "binary", "values": flat or nested }
 *
 * Reals are written as shortest round-trip decimal strings; JSON numbers are
 * accepted on input. Unknown fields are rejected.
 */
#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "encbnn/error.hpp"
#include "encbnn/model.hpp"

namespace encbnn::io {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline std::string at(const std::string& base, std::size_t i) { return base + "/" + std::to_string(i); }

inline void only_fields(const Json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw SchemaError(path + "/" + key, "unknown field");
  }
}

inline const Json& field(const Json& obj, const std::string& path, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw SchemaError(path + "/" + name, "missing required field");
  return *it;
}

inline const Json& array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  return j;
}

inline std::int64_t integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<std::int64_t>();
}

inline double real(const Json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw SchemaError(path, "expected a decimal string");
  const auto& s = j.get_ref<const std::string&>();
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last) throw SchemaError(path, "'" + s + "' is not a decimal number");
  return v;
}

inline std::string real_text(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format real");
  return std::string(buf, p);
}

inline std::vector<double> reals(const Json& j, const std::string& path) {
  std::vector<double> out;
  const auto& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(real(a[i], at(path, i)));
  return out;
}

inline std::vector<std::int64_t> integers(const Json& j, const std::string& path) {
  std::vector<std::int64_t> out;
  const auto& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(integer(a[i], at(path, i)));
  return out;
}

inline std::int8_t weight(const Json& j, const std::string& path) {
  const auto v = integer(j, path);
  if (v < -1 || v > 1) throw SchemaError(path, "weight " + std::to_string(v) + " outside {-1,0,1}");
  return static_cast<std::int8_t>(v);
}

// Flattens a rectangular nested array of the given depth, recording its
// dimensions.
template <class Leaf>
void flatten(const Json& j, const std::string& path, std::size_t depth,
             std::vector<std::size_t>& dims, std::size_t level, const Leaf& leaf) {
  if (level == depth) {
    leaf(j, path);
    return;
  }
  const auto& a = array(j, path);
  if (dims.size() <= level) {
    dims.push_back(a.size());
  } else if (dims[level] != a.size()) {
    throw SchemaError(path, "ragged array: expected " + std::to_string(dims[level]) +
                                " entries, got " + std::to_string(a.size()));
  }
  for (std::size_t i = 0; i < a.size(); ++i) flatten(a[i], at(path, i), depth, dims, level + 1, leaf);
}

inline model::Layer parse_dense(const Json& j, const std::string& path) {
  only_fields(j, path, {"type", "weights", "bias", "magnitudes"});
  model::DenseLayer d;
  std::vector<std::size_t> dims;
  flatten(field(j, path, "weights"), path + "/weights", 2, dims, 0,
          [&](const Json& v, const std::string& p) { d.weights.push_back(weight(v, p)); });
  if (dims.size() < 2 || dims[0] == 0 || dims[1] == 0) {
    throw SchemaError(path + "/weights", "expected a non-empty matrix");
  }
  d.out = dims[0];
  d.in = dims[1];
  d.bias = integers(field(j, path, "bias"), path + "/bias");
  if (j.contains("magnitudes")) {
    std::vector<double> m;
    std::vector<std::size_t> mdims;
    flatten(j["magnitudes"], path + "/magnitudes", 2, mdims, 0,
            [&](const Json& v, const std::string& p) { m.push_back(real(v, p)); });
    if (mdims != dims) throw SchemaError(path + "/magnitudes", "shape must match weights");
    d.magnitudes = std::move(m);
  }
  return d;
}

inline model::Layer parse_conv(const Json& j, const std::string& path) {
  only_fields(j, path, {"type", "filters", "bias", "stride", "magnitudes"});
  model::ConvLayer c;
  std::vector<std::size_t> dims;
  flatten(field(j, path, "filters"), path + "/filters", 4, dims, 0,
          [&](const Json& v, const std::string& p) { c.filters.push_back(weight(v, p)); });
  if (dims.size() < 4 || c.filters.empty()) {
    throw SchemaError(path + "/filters", "expected a non-empty [out][in][kh][kw] array");
  }
  c.out_channels = dims[0];
  c.in_channels = dims[1];
  c.kernel_h = dims[2];
  c.kernel_w = dims[3];
  c.bias = integers(field(j, path, "bias"), path + "/bias");
  if (j.contains("stride")) {
    const auto s = integer(j["stride"], path + "/stride");
    if (s < 1) throw SchemaError(path + "/stride", "stride must be >= 1");
    c.stride = static_cast<std::size_t>(s);
  }
  if (j.contains("magnitudes")) {
    std::vector<double> m;
    std::vector<std::size_t> mdims;
    flatten(j["magnitudes"], path + "/magnitudes", 4, mdims, 0,
            [&](const Json& v, const std::string& p) { m.push_back(real(v, p)); });
    if (mdims != dims) throw SchemaError(path + "/magnitudes", "shape must match filters");
    c.magnitudes = std::move(m);
  }
  return c;
}

inline model::Layer parse_batchnorm(const Json& j, const std::string& path) {
  only_fields(j, path, {"type", "gamma", "beta", "mu", "sigma2", "epsilon"});
  model::BatchNorm bn;
  bn.gamma = reals(field(j, path, "gamma"), path + "/gamma");
  bn.beta = reals(field(j, path, "beta"), path + "/beta");
  bn.mu = reals(field(j, path, "mu"), path + "/mu");
  bn.sigma2 = reals(field(j, path, "sigma2"), path + "/sigma2");
  bn.epsilon = j.contains("epsilon") ? real(j["epsilon"], path + "/epsilon") : 0.0;
  return bn;
}

inline Json reals_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(real_text(x));
  return a;
}

template <class T, class F>
Json matrix_json(std::span<const T> flat, std::size_t rows, std::size_t cols, const F& cell) {
  Json m = Json::array();
  for (std::size_t r = 0; r < rows; ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < cols; ++c) row.push_back(cell(flat[r * cols + c]));
    m.push_back(std::move(row));
  }
  return m;
}

template <class T, class F>
Json tensor4_json(std::span<const T> flat, std::size_t a, std::size_t b, std::size_t c,
                  std::size_t d, const F& cell) {
  Json out = Json::array();
  for (std::size_t i = 0; i < a; ++i) {
    Json per_in = Json::array();
    for (std::size_t j = 0; j < b; ++j) {
      per_in.push_back(matrix_json(flat.subspan((i * b + j) * c * d, c * d), c, d, cell));
    }
    out.push_back(std::move(per_in));
  }
  return out;
}

}  // namespace detail

/// Parses and validates a model document.
inline model::TernaryModel model_from_json(const Json& doc) {
  detail::only_fields(doc, "", {"version", "input_shape", "output_mode", "layers"});
  const auto version = detail::integer(detail::field(doc, "", "version"), "/version");
  if (version != kFormatVersion) {
    throw SchemaError("/version", "unsupported version " + std::to_string(version));
  }
  model::TernaryModel m;
  const auto dims = detail::integers(detail::field(doc, "", "input_shape"), "/input_shape");
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] < 1) throw SchemaError(detail::at("/input_shape", i), "dimension must be >= 1");
  }
  if (dims.size() == 1) {
    m.input_shape = model::Shape::vector(static_cast<std::size_t>(dims[0]));
  } else if (dims.size() == 3) {
    m.input_shape = model::Shape::image(static_cast<std::size_t>(dims[0]),
                                        static_cast<std::size_t>(dims[1]),
                                        static_cast<std::size_t>(dims[2]));
  } else {
    throw SchemaError("/input_shape", "expected [d] or [channels, height, width]");
  }
  const auto& mode = detail::field(doc, "", "output_mode");
  if (mode == "sign_bits") {
    m.output_mode = model::OutputMode::SignBits;
  } else if (mode == "score_words") {
    m.output_mode = model::OutputMode::ScoreWords;
  } else {
    throw SchemaError("/output_mode", "expected \"sign_bits\" or \"score_words\"");
  }
  const auto& layers = detail::array(detail::field(doc, "", "layers"), "/layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto path = detail::at("/layers", i);
    const auto& l = layers[i];
    if (!l.is_object()) throw SchemaError(path, "expected an object");
    const auto& type = detail::field(l, path, "type");
    if (type == "dense") {
      m.layers.push_back(detail::parse_dense(l, path));
    } else if (type == "conv") {
      m.layers.push_back(detail::parse_conv(l, path));
    } else if (type == "batchnorm") {
      m.layers.push_back(detail::parse_batchnorm(l, path));
    } else if (type == "sign") {
      detail::only_fields(l, path, {"type"});
      m.layers.push_back(model::SignActivation{});
    } else {
      throw SchemaError(path + "/type", "unknown layer type");
    }
  }
  model::validate(m);
  return m;
}

inline Json model_to_json(const model::TernaryModel& m) {
  Json doc;
  doc["version"] = kFormatVersion;
  if (m.input_shape.flat) {
    doc["input_shape"] = Json::array({m.input_shape.channels});
  } else {
    doc["input_shape"] = Json::array({m.input_shape.channels, m.input_shape.height, m.input_shape.width});
  }
  doc["output_mode"] = m.output_mode == model::OutputMode::SignBits ? "sign_bits" : "score_words";
  Json layers = Json::array();
  const auto as_int = [](std::int8_t v) { return static_cast<int>(v); };
  const auto as_real = [](double v) { return detail::real_text(v); };
  for (const auto& layer : m.layers) {
    Json l;
    if (const auto* d = std::get_if<model::DenseLayer>(&layer)) {
      l["type"] = "dense";
      l["weights"] = detail::matrix_json(std::span<const std::int8_t>(d->weights), d->out, d->in, as_int);
      l["bias"] = d->bias;
      if (d->magnitudes) {
        l["magnitudes"] =
            detail::matrix_json(std::span<const double>(*d->magnitudes), d->out, d->in, as_real);
      }
    } else if (const auto* c = std::get_if<model::ConvLayer>(&layer)) {
      l["type"] = "conv";
      l["filters"] = detail::tensor4_json(std::span<const std::int8_t>(c->filters), c->out_channels,
                                          c->in_channels, c->kernel_h, c->kernel_w, as_int);
      l["bias"] = c->bias;
      l["stride"] = c->stride;
      if (c->magnitudes) {
        l["magnitudes"] = detail::tensor4_json(std::span<const double>(*c->magnitudes), c->out_channels,
                                               c->in_channels, c->kernel_h, c->kernel_w, as_real);
      }
    } else if (const auto* bn = std::get_if<model::BatchNorm>(&layer)) {
      l["type"] = "batchnorm";
      l["gamma"] = detail::reals_json(bn->gamma);
      l["beta"] = detail::reals_json(bn->beta);
      l["mu"] = detail::reals_json(bn->mu);
      l["sigma2"] = detail::reals_json(bn->sigma2);
      l["epsilon"] = detail::real_text(bn->epsilon);
    } else {
      l["type"] = "sign";
    }
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", source + ": malformed JSON: " + e.what());
  }
}

/// Canonical text of a model document (two-space indent, trailing newline).
inline std::string dump_model(const model::TernaryModel& m) { return model_to_json(m).dump(2) + "\n"; }

inline model::TernaryModel load_model(const std::string& path) {
  return model_from_json(parse_json(read_file(path), path));
}

inline void save_model(const model::TernaryModel& m, const std::string& path) {
  write_file(path, dump_model(m));
}

/// Parses an input document into {-1,+1} values matching `shape`.
inline std::vector<std::int8_t> input_from_json(const Json& doc, const model::Shape& shape) {
  detail::only_fields(doc, "", {"version", "encoding", "values"});
  if (doc.contains("version") &&
      detail::integer(doc["version"], "/version") != kFormatVersion) {
    throw SchemaError("/version", "unsupported version");
  }
  const auto& enc = detail::field(doc, "", "encoding");
  bool pm1;
  if (enc == "pm1") {
    pm1 = true;
  } else if (enc == "binary") {
    pm1 = false;
  } else {
    throw SchemaError("/encoding", "expected \"pm1\" or \"binary\"");
  }
  const auto& values = detail::field(doc, "", "values");
  std::size_t depth = 0;
  for (const Json* p = &values; p->is_array() && !p->empty(); p = &(*p)[0]) ++depth;
  std::vector<std::int8_t> out;
  std::vector<std::size_t> dims;
  detail::flatten(values, "/values", depth, dims, 0, [&](const Json& v, const std::string& p) {
    const auto x = detail::integer(v, p);
    if (pm1 && x != 1 && x != -1) throw SchemaError(p, "pm1 values must be -1 or 1");
    if (!pm1 && x != 0 && x != 1) throw SchemaError(p, "binary values must be 0 or 1");
    out.push_back(pm1 ? static_cast<std::int8_t>(x) : static_cast<std::int8_t>(x ? 1 : -1));
  });
  if (out.size() != shape.size()) {
    throw ShapeError("input has " + std::to_string(out.size()) + " values, model expects " +
                     std::to_string(shape.size()));
  }
  if (dims.size() == 3 && !shape.flat &&
      (dims[0] != shape.channels || dims[1] != shape.height || dims[2] != shape.width)) {
    throw ShapeError("input grid does not match the model's channels x height x width");
  }
  return out;
}

inline Json input_to_json(std::span<const std::int8_t> x) {
  Json doc;
  doc["version"] = kFormatVersion;
  doc["encoding"] = "pm1";
  Json v = Json::array();
  for (auto b : x) v.push_back(static_cast<int>(b));
  doc["values"] = std::move(v);
  return doc;
}

inline std::vector<std::int8_t> load_input(const std::string& path, const model::Shape& shape) {
  return input_from_json(parse_json(read_file(path), path), shape);
}

}  // namespace encbnn::io
