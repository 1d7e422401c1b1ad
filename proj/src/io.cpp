// SPDX-License-Identifier: Apache-2.0
#include "lipcap/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

std::string layer_tag(std::size_t i) { return "layer " + std::to_string(i + 1) + ": "; }

Json vec_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Vector vec_from(const Json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError(what + " must be an array");
  Vector v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(what + " must hold numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

const Json& need(const Json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(ctx + "missing field '" + key + "'");
  return j.at(key);
}

std::size_t size_from(const Json& j, const std::string& what) {
  if (!j.is_number_unsigned()) throw ConfigError(what + " must be a non-negative integer");
  return j.get<std::size_t>();
}

Json norm_json(const NormalizerCfg& n) {
  Json j;
  j["kind"] = to_string(n.tag());
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, BnStats>) {
          j["eps"] = k.eps;
          j["mu"] = vec_json(k.mu);
          j["sigma2"] = vec_json(k.sigma2);
        } else if constexpr (std::is_same_v<T, LnCfg>) {
          j["eps"] = k.eps;
        } else if constexpr (std::is_same_v<T, GnCfg>) {
          j["eps"] = k.eps;
          j["groups"] = k.groups;
        }
      },
      n.kind);
  if (n.sigma_min) j["sigma_min"] = vec_json(*n.sigma_min);
  return j;
}

NormalizerCfg norm_from(const Json& j, const std::string& ctx) {
  const std::string kind = need(j, "kind", ctx).get<std::string>();
  auto eps = [&] { return j.contains("eps") ? j.at("eps").get<double>() : kDefaultEps; };
  NormalizerCfg n;
  if (kind == "none") {
    n = NormalizerCfg::none();
  } else if (kind == "bn") {
    n = NormalizerCfg::bn({vec_from(need(j, "mu", ctx), ctx + "mu"), vec_from(need(j, "sigma2", ctx), ctx + "sigma2"), eps()});
  } else if (kind == "ln") {
    n = NormalizerCfg::ln({eps()});
  } else if (kind == "gn") {
    GnCfg g;
    g.eps = eps();
    const Json& groups = need(j, "groups", ctx);
    if (!groups.is_array()) throw ConfigError(ctx + "groups must be an array of index arrays");
    for (const auto& grp : groups) {
      std::vector<std::size_t> idx;
      for (const auto& e : grp) idx.push_back(size_from(e, ctx + "group index"));
      g.groups.push_back(std::move(idx));
    }
    n = NormalizerCfg::gn(std::move(g));
  } else {
    throw ConfigError(ctx + "unknown normalizer kind '" + kind + "' (expected none|bn|ln|gn)");
  }
  if (j.contains("sigma_min")) n.sigma_min = vec_from(j.at("sigma_min"), ctx + "sigma_min");
  return n;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
  return s.substr(b);
}

double parse_double(const std::string& field, std::size_t line) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty()) {
    throw ConfigError("csv line " + std::to_string(line) + ": cannot parse number '" + t + "'");
  }
  return v;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text, std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (!have_header) {
      for (auto& h : split(line, ',')) header.push_back(trim(h));
      have_header = true;
      continue;
    }
    rows.push_back(split(line, ','));
    if (rows.back().size() != header.size()) {
      throw ConfigError("csv line " + std::to_string(rows.size() + 1) + ": expected " + std::to_string(header.size()) +
                        " fields, got " + std::to_string(rows.back().size()));
    }
  }
  if (!have_header) throw ConfigError("csv: missing header row");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw NumericError("format_double: conversion failed");
  return std::string(buf, p);
}

Json model_to_json(const NetworkSpec& spec) {
  Json j;
  j["format"] = "lipcap-model";
  j["version"] = kModelVersion;
  j["input_dim"] = spec.input_dim;
  Json layers = Json::array();
  for (const auto& l : spec.layers) {
    Json lj;
    lj["rows"] = l.weights.rows();
    lj["cols"] = l.weights.cols();
    lj["weights"] = vec_json(l.weights.data());
    lj["activation"] = to_string(l.activation);
    lj["norm"] = norm_json(l.norm);
    if (l.s_bound) lj["s_bound"] = *l.s_bound;
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

NetworkSpec model_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ConfigError("model: top level must be an object");
    if (j.contains("version") && j.at("version") != kModelVersion) {
      throw ConfigError("model: unsupported version " + j.at("version").dump());
    }
    NetworkSpec spec;
    spec.input_dim = size_from(need(j, "input_dim", "model: "), "input_dim");
    const Json& layers = need(j, "layers", "model: ");
    if (!layers.is_array()) throw ConfigError("model: layers must be an array");
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Json& lj = layers[i];
      const std::string ctx = layer_tag(i);
      const std::size_t rows = size_from(need(lj, "rows", ctx), ctx + "rows");
      const std::size_t cols = size_from(need(lj, "cols", ctx), ctx + "cols");
      Vector w = vec_from(need(lj, "weights", ctx), ctx + "weights");
      if (w.size() != rows * cols) {
        throw ConfigError(ctx + "expected " + std::to_string(rows * cols) + " weights, got " + std::to_string(w.size()));
      }
      LayerSpec l;
      l.weights = Matrix(rows, cols, std::move(w));
      l.activation = parse_activation(need(lj, "activation", ctx).get<std::string>());
      l.norm = lj.contains("norm") ? norm_from(lj.at("norm"), ctx) : NormalizerCfg::none();
      if (lj.contains("s_bound")) l.s_bound = lj.at("s_bound").get<double>();
      spec.layers.push_back(std::move(l));
    }
    return validate_network(spec);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

std::string serialize_model(const NetworkSpec& spec) { return model_to_json(spec).dump(2) + "\n"; }

NetworkSpec parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return model_from_json(j);
}

NetworkSpec load_model(const std::string& path) { return parse_model(read_file(path)); }

void save_model(const NetworkSpec& spec, const std::string& path) { write_file(path, serialize_model(spec)); }

Dataset parse_dataset_csv(const std::string& text, std::optional<std::size_t> classes) {
  std::vector<std::string> header;
  const auto rows = csv_rows(text, header);
  std::size_t d = 0;
  while (d < header.size() && header[d] == "x" + std::to_string(d)) ++d;
  if (d == 0) throw ConfigError("dataset csv: header must start with x0");
  const std::size_t rest = header.size() - d;
  const bool scalar_label = rest == 1 && header[d] == "y";
  if (!scalar_label) {
    for (std::size_t k = 0; k < rest; ++k) {
      if (header[d + k] != "y" + std::to_string(k)) {
        throw ConfigError("dataset csv: unexpected column '" + header[d + k] + "'");
      }
    }
  }
  Dataset out;
  std::vector<std::size_t> labels;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Vector x(d);
    for (std::size_t k = 0; k < d; ++k) x[k] = parse_double(rows[r][k], r + 2);
    out.x.push_back(std::move(x));
    if (scalar_label) {
      const double v = parse_double(rows[r][d], r + 2);
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw ConfigError("csv line " + std::to_string(r + 2) + ": label must be a non-negative integer");
      }
      labels.push_back(static_cast<std::size_t>(v));
    } else {
      Vector y(rest);
      for (std::size_t k = 0; k < rest; ++k) y[k] = parse_double(rows[r][d + k], r + 2);
      out.y.push_back(std::move(y));
    }
  }
  if (scalar_label) {
    std::size_t k = classes.value_or(0);
    if (!classes) {
      for (std::size_t l : labels) k = std::max(k, l + 1);
    }
    return make_labelled(std::move(out.x), std::move(labels), k);
  }
  check_dataset(out);
  return out;
}

Dataset load_dataset(const std::string& path, std::optional<std::size_t> classes) {
  return parse_dataset_csv(read_file(path), classes);
}

std::string dataset_to_csv(const Dataset& d) {
  check_dataset(d);
  std::string s;
  for (std::size_t k = 0; k < d.dim(); ++k) s += (k ? ",x" : "x") + std::to_string(k);
  if (d.has_labels()) {
    s += ",y";
  } else {
    for (std::size_t k = 0; k < d.out_dim(); ++k) s += ",y" + std::to_string(k);
  }
  s += '\n';
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t k = 0; k < d.dim(); ++k) s += (k ? "," : "") + format_double(d.x[r][k]);
    if (d.has_labels()) {
      s += "," + std::to_string(d.labels[r]);
    } else {
      for (double v : d.y[r]) s += "," + format_double(v);
    }
    s += '\n';
  }
  return s;
}

std::string trace_to_csv(const TrainTrace& t) {
  std::string s = std::string(kTraceHeader) + "\n";
  for (const auto& r : t.rows) {
    s += std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + std::to_string(r.layer) + "," +
         format_double(r.w_norm) + "," + format_double(r.pw_product) + "," + format_double(r.var_mean) + "," +
         format_double(r.var_max) + "," + format_double(r.inv_sigma_product) + "," + format_double(r.train_acc) +
         "," + format_double(r.train_loss) + "\n";
  }
  return s;
}

TrainTrace parse_trace_csv(const std::string& text) {
  std::vector<std::string> header;
  const auto rows = csv_rows(text, header);
  std::string joined;
  for (std::size_t k = 0; k < header.size(); ++k) joined += (k ? "," : "") + header[k];
  if (joined != kTraceHeader) throw ConfigError("trace csv: unexpected header '" + joined + "'");
  TrainTrace t;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    auto num = [&](std::size_t k) { return parse_double(f[k], r + 2); };
    TraceRow row;
    row.step = static_cast<std::size_t>(num(0));
    row.epoch = static_cast<std::size_t>(num(1));
    row.layer = static_cast<std::size_t>(num(2));
    row.w_norm = num(3);
    row.pw_product = num(4);
    row.var_mean = num(5);
    row.var_max = num(6);
    row.inv_sigma_product = num(7);
    row.train_acc = num(8);
    row.train_loss = num(9);
    t.rows.push_back(row);
  }
  return t;
}

Json optimization_report_json(const OptimizationReport& r) {
  Json j;
  j["kind"] = "optimization";
  j["analytic"]["alpha"] = r.alpha;
  j["analytic"]["sigma"] = r.sigma;
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json ej;
    ej["layer"] = e.layer;
    ej["iteration_constant"] = e.iteration_constant;
    ej["evaluation_constant"] = e.evaluation_constant;
    ej["normalized_evaluation_constant"] = e.normalized_evaluation_constant;
    entries.push_back(std::move(ej));
  }
  j["analytic"]["entries"] = std::move(entries);
  j["note"] = "order constants without asymptotic prefactors";
  return j;
}

Json capacity_report_json(const CapacityReport& r) {
  Json j;
  j["kind"] = "capacity";
  Json& a = j["analytic"];
  a["weight_norms"] = r.weight_norms;
  a["pw"] = r.pw;
  a["factors"] = r.factors;
  a["certified_factors"] = r.certified_factors;
  a["global_factors"] = r.global_factors;
  a["input_lipschitz_upper"] = r.input_lipschitz_upper;
  a["certified_input_upper"] = r.certified_input_upper;
  a["global_input_upper"] = r.global_input_upper;
  Json red;
  red["bn_factor"] = r.reduction.bn_factor;
  red["ln_factor"] = r.reduction.ln_factor;
  red["combined"] = r.reduction.combined;
  red["sigma"] = r.reduction.sigma;
  red["normalized_layers"] = r.reduction.normalized_layers;
  red["coarse"] = r.reduction.coarse;
  a["reduction"] = std::move(red);
  if (r.activation_sup) {
    Json& e = j["estimated"];
    e["activation_sup"] = *r.activation_sup;
    Json wb = Json::array();
    for (std::size_t i = 0; i < r.weight_bounds.size(); ++i) {
      Json w;
      w["layer"] = i + 1;
      w["y_bound"] = r.weight_bounds[i].y_bound;
      w["w_bound"] = r.weight_bounds[i].w_bound;
      w["loss_w_bound"] = r.loss_weight_bounds[i];
      wb.push_back(std::move(w));
    }
    e["weight_bounds"] = std::move(wb);
    e["note"] = "A_i are maxima over the supplied data, so weight bounds inherit that estimate";
  }
  if (r.optimization) j["optimization"] = optimization_report_json(*r.optimization)["analytic"];
  j["note"] = "stated LN/GN factors (1 - 1/n)/sigma are not sound in the max norm; certified_* use "
              "(2(1 - 1/n) + sqrt(n - 1))/sigma";
  return j;
}

Json genbound_report_json(const GenBoundReport& r) {
  Json j;
  j["kind"] = "genbound";
  j["estimated_flag"] = r.estimated;
  Json& a = j["analytic"];
  a["g_term"] = r.g;
  a["delta"] = r.delta;
  a["C"] = r.C;
  a["m"] = r.m;
  a["n_cells"] = r.n_cells;
  a["t_size"] = r.t_size;
  Json& s = j["sampled"];
  s["f_emp"] = r.f_emp;
  s["eval_loss"] = r.eval_loss;
  s["pairs_per_label"] = r.pairs;
  Json& e = j["estimated"];
  e["local_term"] = r.local_term;
  e["total"] = r.total;
  Json cells = Json::array();
  for (const auto& c : r.cells) {
    Json cj;
    cj["index"] = c.index;
    Json box = Json::array();
    for (const auto& [lo, hi] : c.region.box) box.push_back({lo, hi});
    cj["box"] = std::move(box);
    cj["m"] = c.m;
    cj["eval_count"] = c.eval_count;
    cj["lambda"] = c.lambda;
    cj["lambda_fallback"] = c.lambda_fallback;
    cj["L"] = c.L;
    cj["distinct_labels"] = c.distinct_labels;
    cj["contribution"] = c.contribution;
    cells.push_back(std::move(cj));
  }
  e["cells"] = std::move(cells);
  j["excluded_cells"] = r.excluded;
  if (r.normalized) {
    const auto& n = *r.normalized;
    Json nj;
    nj["L_f"] = n.L_f;
    nj["pw"] = n.pw;
    nj["lambda_avg"] = n.lambda_avg;
    nj["omega"] = n.omega;
    nj["reduction"] = n.reduction;
    nj["certified_reduction"] = n.certified_reduction;
    nj["coarse_reduction"] = n.coarse_reduction;
    nj["sigma"] = n.sigma;
    nj["normalized_layers"] = n.normalized_layers;
    nj["gap_unnormalized"] = n.gap_unnormalized;
    nj["gap_normalized"] = n.gap_normalized;
    nj["gap_certified"] = n.gap_certified;
    nj["gap_coarse"] = n.gap_coarse;
    nj["gap_as_printed"] = n.gap_as_printed;
    e["normalized"] = std::move(nj);
  }
  j["notes"] = r.notes;
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArgumentError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ArgumentError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw ArgumentError("write to '" + path + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw ArgumentError("cannot move output into '" + path + "'");
  }
}

}  // namespace lipcap
