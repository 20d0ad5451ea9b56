// Copyright 2026 The adaqubo Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "adaqubo/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace adaqubo {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw DataError(origin + ": " + what);
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(origin, std::string("malformed JSON: ") + e.what());
  }
}

const json& member(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw DataError(ctx + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(ctx + ": missing field '" + key + "'");
  return *it;
}

double finite_number(const json& v, const std::string& ctx) {
  if (!v.is_number()) throw DataError(ctx + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw DataError(ctx + ": non-finite number");
  return d;
}

std::int64_t integer(const json& v, const std::string& ctx) {
  if (!v.is_number_integer()) throw DataError(ctx + ": expected an integer");
  return v.get<std::int64_t>();
}

void check_header(const json& doc, const char* format, const std::string& origin) {
  const auto& f = member(doc, "format", origin);
  if (!f.is_string() || f.get<std::string>() != format)
    fail(origin, std::string("expected format '") + format + "'");
  const auto version = integer(member(doc, "version", origin), origin + ": version");
  if (version != kFormatVersion) fail(origin, "unsupported version " + std::to_string(version));
}

Eigen::VectorXd real_vector(const json& arr, const std::string& ctx) {
  if (!arr.is_array()) throw DataError(ctx + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t k = 0; k < arr.size(); ++k)
    v[static_cast<Eigen::Index>(k)] = finite_number(arr[k], ctx + "[" + std::to_string(k) + "]");
  return v;
}

template <typename Scalar, typename Convert>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_of(const json& arr, const std::string& ctx,
                                                                Convert&& convert) {
  if (!arr.is_array() || arr.empty()) throw DataError(ctx + ": expected a non-empty 2-D array");
  const auto rows = static_cast<Eigen::Index>(arr.size());
  if (!arr[0].is_array()) throw DataError(ctx + "[0]: expected an array");
  const auto cols = static_cast<Eigen::Index>(arr[0].size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = arr[static_cast<std::size_t>(i)];
    const std::string rctx = ctx + "[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw DataError(rctx + ": ragged row (expected " + std::to_string(cols) + " entries)");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = convert(row[static_cast<std::size_t>(j)], rctx + "[" + std::to_string(j) + "]");
  }
  return m;
}

template <typename Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Derived>
json vector_json(const Eigen::MatrixBase<Derived>& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v[k]);
  return arr;
}

json params_json(const QuantParams& p) {
  return json{{"scale", p.scale}, {"zero_point", p.zero_point}, {"alpha", p.alpha}, {"beta", p.beta}};
}

QuantParams params_from(const json& j, int bits, const std::string& ctx) {
  QuantParams p;
  p.bits = bits;
  p.scale = finite_number(member(j, "scale", ctx), ctx + ".scale");
  if (!(p.scale > 0.0)) throw DataError(ctx + ".scale: must be positive");
  p.zero_point = integer(member(j, "zero_point", ctx), ctx + ".zero_point");
  p.alpha = finite_number(member(j, "alpha", ctx), ctx + ".alpha");
  p.beta = finite_number(member(j, "beta", ctx), ctx + ".beta");
  return p;
}

std::string dump(const json& doc) { return doc.dump(1) + "\n"; }

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(path.string() + ": cannot open for writing");
    out << contents;
    if (!out.flush()) throw DataError(path.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(path.string() + ": cannot replace file: " + ec.message());
}

// ---- float models ----------------------------------------------------------

DenseNetwork parse_model(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  check_header(doc, "adaqubo-model", origin);
  const auto& layers = member(doc, "layers", origin);
  if (!layers.is_array() || layers.empty()) fail(origin, "'layers' must be a non-empty array");
  DenseNetwork net;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string ctx = origin + ": layer " + std::to_string(l);
    const auto& lj = layers[l];
    DenseLayer layer;
    layer.weights = matrix_of<double>(member(lj, "weights", ctx), ctx + ".weights", finite_number);
    layer.bias = real_vector(member(lj, "bias", ctx), ctx + ".bias");
    const auto& act = member(lj, "activation", ctx);
    if (!act.is_string()) throw DataError(ctx + ".activation: expected a string");
    try {
      layer.activation = parse_activation(act.get<std::string>());
    } catch (const DataError& e) {
      throw DataError(ctx + ": " + e.what());
    }
    net.layers.push_back(std::move(layer));
  }
  try {
    net.validate();
  } catch (const DataError& e) {
    fail(origin, e.what());
  }
  return net;
}

std::string format_model(const DenseNetwork& net) {
  net.validate();
  json layers = json::array();
  for (const auto& layer : net.layers)
    layers.push_back(json{{"weights", matrix_json(layer.weights)},
                          {"bias", vector_json(layer.bias)},
                          {"activation", std::string(to_string(layer.activation))}});
  return dump(json{{"format", "adaqubo-model"}, {"version", kFormatVersion}, {"layers", layers}});
}

DenseNetwork load_model(const std::filesystem::path& path) {
  return parse_model(read_file(path), path.string());
}

void save_model(const std::filesystem::path& path, const DenseNetwork& net) {
  write_file_atomic(path, format_model(net));
}

// ---- quantized models ------------------------------------------------------

QuantizedNetwork parse_quantized(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  check_header(doc, "adaqubo-quantized", origin);
  QuantizedNetwork q;
  q.bits = static_cast<int>(integer(member(doc, "bits", origin), origin + ": bits"));
  if (q.bits < 1 || q.bits > 8) fail(origin, "bits must be in [1, 8]");
  if (const auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) fail(origin, "metadata must be an object");
    for (const auto& [key, value] : it->items()) {
      if (!value.is_string()) fail(origin, "metadata." + key + ": expected a string");
      q.metadata[key] = value.get<std::string>();
    }
  }
  const auto& layers = member(doc, "layers", origin);
  if (!layers.is_array() || layers.empty()) fail(origin, "'layers' must be a non-empty array");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string ctx = origin + ": layer " + std::to_string(l);
    const auto& lj = layers[l];
    QuantizedLayer ql;
    ql.weights.params = params_from(member(lj, "weights", ctx), q.bits, ctx + ".weights");
    ql.bias.params = params_from(member(lj, "bias", ctx), q.bits, ctx + ".bias");
    ql.input = params_from(member(lj, "input", ctx), q.bits, ctx + ".input");
    ql.weights.codes = matrix_of<std::int64_t>(member(lj, "weight_codes", ctx), ctx + ".weight_codes", integer);
    const auto& bc = member(lj, "bias_codes", ctx);
    if (!bc.is_array()) throw DataError(ctx + ".bias_codes: expected an array");
    ql.bias.codes.resize(static_cast<Eigen::Index>(bc.size()), 1);
    for (std::size_t i = 0; i < bc.size(); ++i)
      ql.bias.codes(static_cast<Eigen::Index>(i), 0) =
          integer(bc[i], ctx + ".bias_codes[" + std::to_string(i) + "]");
    const auto& act = member(lj, "activation", ctx);
    if (!act.is_string()) throw DataError(ctx + ".activation: expected a string");
    ql.activation = parse_activation(act.get<std::string>());

    if (ql.bias.codes.rows() != ql.weights.codes.rows())
      throw DataError(ctx + ": bias length does not match weight rows");
    if (l > 0 && ql.weights.codes.cols() != q.layers.back().weights.codes.rows())
      throw DataError(ctx + ": input width does not match previous layer");
    for (const auto* t : {&ql.weights, &ql.bias}) {
      if ((t->codes.array() < t->params.qmin()).any() || (t->codes.array() > t->params.qmax()).any())
        throw DataError(ctx + ": code outside the " + std::to_string(q.bits) + "-bit range");
    }
    q.layers.push_back(std::move(ql));
  }
  return q;
}

std::string format_quantized(const QuantizedNetwork& qnet) {
  json layers = json::array();
  for (const auto& ql : qnet.layers) {
    layers.push_back(json{{"activation", std::string(to_string(ql.activation))},
                          {"weights", params_json(ql.weights.params)},
                          {"bias", params_json(ql.bias.params)},
                          {"input", params_json(ql.input)},
                          {"weight_codes", matrix_json(ql.weights.codes)},
                          {"bias_codes", vector_json(ql.bias.codes.col(0))}});
  }
  json meta = json::object();
  for (const auto& [key, value] : qnet.metadata) meta[key] = value;
  return dump(json{{"format", "adaqubo-quantized"},
                   {"version", kFormatVersion},
                   {"bits", qnet.bits},
                   {"metadata", meta},
                   {"layers", layers}});
}

QuantizedNetwork load_quantized(const std::filesystem::path& path) {
  return parse_quantized(read_file(path), path.string());
}

void save_quantized(const std::filesystem::path& path, const QuantizedNetwork& qnet) {
  write_file_atomic(path, format_quantized(qnet));
}

// ---- rounding plans --------------------------------------------------------

RoundingPlan parse_plan(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  check_header(doc, "adaqubo-plan", origin);
  RoundingPlan plan;
  const auto& method = member(doc, "method", origin);
  if (!method.is_string()) fail(origin, "method: expected a string");
  plan.method = parse_method(method.get<std::string>());

  const std::string cctx = origin + ": config";
  const auto& cfg = member(doc, "config", origin);
  plan.config.bits = static_cast<int>(integer(member(cfg, "bits", cctx), cctx + ".bits"));
  const auto& seed = member(cfg, "seed", cctx);
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) fail(cctx, "seed: expected an integer");
  plan.config.seed = seed.get<std::uint64_t>();
  plan.config.calibration_fraction =
      finite_number(member(cfg, "calibration_fraction", cctx), cctx + ".calibration_fraction");
  plan.config.restarts = static_cast<int>(integer(member(cfg, "restarts", cctx), cctx + ".restarts"));
  plan.config.sweeps = static_cast<int>(integer(member(cfg, "sweeps", cctx), cctx + ".sweeps"));
  plan.config.exact = member(cfg, "exact", cctx).get<bool>();
  plan.config.init = member(cfg, "init", cctx).get<std::string>();
  plan.config.rng = member(cfg, "rng", cctx).get<std::string>();

  const auto& layers = member(doc, "layers", origin);
  if (!layers.is_array()) fail(origin, "'layers' must be an array");
  auto bit = [](const json& v, const std::string& ctx) -> std::uint8_t {
    const auto b = integer(v, ctx);
    if (b != 0 && b != 1) throw DataError(ctx + ": expected 0 or 1");
    return static_cast<std::uint8_t>(b);
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string ctx = origin + ": layer " + std::to_string(l);
    LayerPlan lp;
    lp.weight_bits = matrix_of<std::uint8_t>(member(layers[l], "weight_bits", ctx), ctx + ".weight_bits", bit);
    const auto& bb = member(layers[l], "bias_bits", ctx);
    if (!bb.is_array() || static_cast<Eigen::Index>(bb.size()) != lp.weight_bits.rows())
      throw DataError(ctx + ".bias_bits: expected one bit per weight row");
    lp.bias_bits.resize(lp.weight_bits.rows());
    for (std::size_t i = 0; i < bb.size(); ++i)
      lp.bias_bits[static_cast<Eigen::Index>(i)] = bit(bb[i], ctx + ".bias_bits[" + std::to_string(i) + "]");
    const Eigen::VectorXd e = real_vector(member(layers[l], "energies", ctx), ctx + ".energies");
    lp.energies.assign(e.data(), e.data() + e.size());
    plan.layers.push_back(std::move(lp));
  }
  return plan;
}

std::string format_plan(const RoundingPlan& plan) {
  const auto& c = plan.config;
  json cfg{{"bits", c.bits},       {"seed", c.seed},       {"calibration_fraction", c.calibration_fraction},
           {"restarts", c.restarts}, {"sweeps", c.sweeps}, {"exact", c.exact},
           {"init", c.init},       {"rng", c.rng}};
  json layers = json::array();
  for (const auto& lp : plan.layers) {
    json energies = json::array();
    for (double e : lp.energies) energies.push_back(e);
    layers.push_back(json{{"weight_bits", matrix_json(lp.weight_bits.cast<int>())},
                          {"bias_bits", vector_json(lp.bias_bits.cast<int>())},
                          {"energies", energies}});
  }
  return dump(json{{"format", "adaqubo-plan"},
                   {"version", kFormatVersion},
                   {"method", std::string(to_string(plan.method))},
                   {"config", cfg},
                   {"layers", layers}});
}

RoundingPlan load_plan(const std::filesystem::path& path) {
  return parse_plan(read_file(path), path.string());
}

void save_plan(const std::filesystem::path& path, const RoundingPlan& plan) {
  write_file_atomic(path, format_plan(plan));
}

// ---- CSV -------------------------------------------------------------------

std::vector<Sample> parse_dataset(std::istream& in, const std::string& origin) {
  std::string line;
  std::size_t line_no = 0;
  auto split = [](std::string_view s) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      fields.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return fields;
  };
  auto strip_cr = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };

  if (!std::getline(in, line)) fail(origin, "empty dataset file");
  ++line_no;
  strip_cr(line);
  const auto header = split(line);
  if (header.size() < 2 || header[0] != "label")
    fail(origin, "line 1: header must be 'label,f0,f1,...'");
  const std::size_t width = header.size() - 1;

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string ctx = "line " + std::to_string(line_no);
    if (fields.size() != header.size())
      fail(origin, ctx + ": expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    Sample s;
    {
      const auto f = fields[0];
      long long label = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
      if (ec != std::errc() || ptr != f.data() + f.size() || label < 0)
        fail(origin, ctx + ", field 1: label must be a non-negative integer");
      s.label = static_cast<int>(label);
    }
    s.features.resize(static_cast<Eigen::Index>(width));
    for (std::size_t k = 0; k < width; ++k) {
      const auto f = fields[k + 1];
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc() || ptr != f.data() + f.size())
        fail(origin, ctx + ", field " + std::to_string(k + 2) + ": not a number");
      if (!std::isfinite(value))
        fail(origin, ctx + ", field " + std::to_string(k + 2) + ": non-finite value");
      s.features[static_cast<Eigen::Index>(k)] = value;
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty()) fail(origin, "dataset has no rows");
  return samples;
}

std::vector<Sample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  return parse_dataset(in, path.string());
}

void write_dataset(std::ostream& out, std::span<const Sample> samples) {
  if (samples.empty()) throw DataError("cannot write an empty dataset");
  out << "label";
  for (Eigen::Index j = 0; j < samples.front().features.size(); ++j) out << ",f" << j;
  out << '\n';
  for (const auto& s : samples) {
    out << s.label;
    for (Eigen::Index j = 0; j < s.features.size(); ++j) out << ',' << format_double(s.features[j]);
    out << '\n';
  }
}

void write_scatter_csv(std::ostream& out, std::span<const ScatterRow> rows) {
  out << "plan_id,method,cost,accuracy\n";
  for (const auto& r : rows)
    out << r.plan_id << ',' << to_string(r.method) << ',' << format_double(r.cost) << ','
        << format_double(r.accuracy) << '\n';
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows) {
  out << "bits,method,accuracy,qubo_cost\n";
  for (const auto& r : rows)
    out << r.bits << ',' << to_string(r.method) << ',' << format_double(r.accuracy) << ','
        << format_double(r.qubo_cost) << '\n';
}

}  // namespace adaqubo
