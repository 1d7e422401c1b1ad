// SPDX-License-Identifier: Apache-2.0
#include "lipcap/network.hpp"

#include <algorithm>
#include <cmath>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

std::string layer_tag(std::size_t i) { return "layer " + std::to_string(i + 1) + ": "; }

Vector apply_activation(Activation a, Vector z) {
  for (double& v : z) v = activate(a, v);
  return z;
}

BnStats batch_stats(std::span<const Vector> ys, double eps) {
  const std::size_t n = ys.front().size();
  const double m = static_cast<double>(ys.size());
  BnStats s{Vector(n, 0.0), Vector(n, 0.0), eps};
  for (const auto& y : ys)
    for (std::size_t k = 0; k < n; ++k) s.mu[k] += y[k];
  for (double& v : s.mu) v /= m;
  for (const auto& y : ys)
    for (std::size_t k = 0; k < n; ++k) s.sigma2[k] += (y[k] - s.mu[k]) * (y[k] - s.mu[k]);
  for (double& v : s.sigma2) v /= m;
  return s;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::ReLU: return "relu";
    case Activation::Identity: return "identity";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "tanh") return Activation::Tanh;
  throw ArgumentError("unknown activation '" + name + "'");
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z > 0.0 ? z : 0.0;
    case Activation::Identity: return z;
    case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::Tanh: return std::tanh(z);
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::ReLU: return z >= 0.0 ? 1.0 : 0.0;
    case Activation::Identity: return 1.0;
    case Activation::Sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 1.0;
}

std::vector<std::size_t> NetworkSpec::widths() const {
  std::vector<std::size_t> w{input_dim};
  for (const auto& l : layers) w.push_back(l.width());
  return w;
}

NetworkSpec validate_network(const NetworkSpec& spec) {
  if (spec.input_dim == 0) throw ConfigError("network: input_dim must be positive");
  if (spec.layers.empty()) throw ConfigError("network: at least one layer required");
  NetworkSpec out = spec;
  std::size_t prev = spec.input_dim;
  for (std::size_t i = 0; i < out.layers.size(); ++i) {
    auto& layer = out.layers[i];
    const Matrix& w = layer.weights;
    if (w.rows() == 0 || w.cols() == 0 || w.data().size() != w.rows() * w.cols()) {
      throw ShapeError(layer_tag(i) + "malformed weight matrix");
    }
    if (w.cols() != prev) {
      throw ShapeError(layer_tag(i) + "weights expect " + std::to_string(w.cols()) +
                       " inputs but previous width is " + std::to_string(prev));
    }
    if (!all_finite(w.data())) throw ConfigError(layer_tag(i) + "non-finite weight");
    try {
      check_normalizer(layer.norm, w.rows());
    } catch (const ConfigError& e) {
      throw ConfigError(layer_tag(i) + e.what());
    }
    const double eps = std::visit(
        [](const auto& k) -> double {
          if constexpr (requires { k.eps; }) return k.eps;
          return 1.0;
        },
        layer.norm.kind);
    if (!(eps > 0.0)) throw ConfigError(layer_tag(i) + "normalizer eps must be positive");
    if (auto* gn = std::get_if<GnCfg>(&layer.norm.kind)) {
      for (auto& g : gn->groups) std::sort(g.begin(), g.end());
      // Keep sigma_min aligned with the reordered groups.
      std::vector<std::size_t> order(gn->groups.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return gn->groups[a].front() < gn->groups[b].front(); });
      std::vector<std::vector<std::size_t>> groups;
      for (std::size_t k : order) groups.push_back(gn->groups[k]);
      if (layer.norm.sigma_min && layer.norm.sigma_min->size() == order.size()) {
        Vector s;
        for (std::size_t k : order) s.push_back((*layer.norm.sigma_min)[k]);
        layer.norm.sigma_min = s;
      }
      gn->groups = std::move(groups);
    }
    if (layer.s_bound) {
      const double s = *layer.s_bound;
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError(layer_tag(i) + "s_bound must be positive");
      const double norm = inf_norm(w);
      if (norm > s * (1.0 + 1e-12)) {
        throw ConfigError(layer_tag(i) + "weight norm " + std::to_string(norm) + " exceeds bound " +
                          std::to_string(s));
      }
    }
    prev = w.rows();
  }
  return out;
}

Vector forward_trace(const NetworkSpec& spec, std::span<const double> x, NetworkTrace& trace) {
  if (x.size() != spec.input_dim) {
    throw ShapeError("forward: input has " + std::to_string(x.size()) + " entries, network expects " +
                     std::to_string(spec.input_dim));
  }
  trace.clear();
  trace.reserve(spec.layers.size());
  Vector h(x.begin(), x.end());
  for (const auto& layer : spec.layers) {
    LayerTrace t;
    t.pre_norm = matvec(layer.weights, h);
    t.post_norm = normalize(t.pre_norm, layer.norm);
    t.output = apply_activation(layer.activation, t.post_norm);
    h = t.output;
    trace.push_back(std::move(t));
  }
  return h;
}

Vector forward(const NetworkSpec& spec, std::span<const double> x) {
  NetworkTrace trace;
  return forward_trace(spec, x, trace);
}

std::vector<NetworkTrace> forward_batch(const NetworkSpec& spec, std::span<const Vector> batch,
                                        BnMode mode) {
  if (batch.empty()) throw ArgumentError("forward_batch: empty batch");
  std::vector<NetworkTrace> traces(batch.size());
  std::vector<Vector> h(batch.begin(), batch.end());
  for (const auto& x : h) {
    if (x.size() != spec.input_dim) throw ShapeError("forward_batch: input width mismatch");
  }
  for (const auto& layer : spec.layers) {
    std::vector<Vector> ys(h.size());
    for (std::size_t b = 0; b < h.size(); ++b) ys[b] = matvec(layer.weights, h[b]);
    NormalizerCfg norm = layer.norm;
    if (mode == BnMode::Batch) {
      if (const auto* bn = std::get_if<BnStats>(&layer.norm.kind)) {
        norm.kind = batch_stats(ys, bn->eps);
      }
    }
    for (std::size_t b = 0; b < h.size(); ++b) {
      LayerTrace t;
      t.post_norm = normalize(ys[b], norm);
      t.output = apply_activation(layer.activation, t.post_norm);
      t.pre_norm = std::move(ys[b]);
      h[b] = t.output;
      traces[b].push_back(std::move(t));
    }
  }
  return traces;
}

double weight_norm_product(const NetworkSpec& spec) {
  double p = 1.0;
  for (const auto& layer : spec.layers) p *= inf_norm(layer.weights);
  return p;
}

std::vector<LayerVariance> summarize_prenorm_variance(std::span<const NetworkTrace> traces) {
  if (traces.empty()) throw ArgumentError("prenorm variance: empty batch");
  const std::size_t depth = traces.front().size();
  std::vector<LayerVariance> out(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    std::vector<Vector> ys;
    ys.reserve(traces.size());
    for (const auto& t : traces) ys.push_back(t[i].pre_norm);
    const BnStats s = batch_stats(ys, 0.0);
    out[i].per_unit = s.sigma2;
    out[i].mean = mean_of(s.sigma2);
    out[i].max = *std::max_element(s.sigma2.begin(), s.sigma2.end());
  }
  return out;
}

std::vector<LayerVariance> batch_prenorm_variance(const NetworkSpec& spec, std::span<const Vector> batch,
                                                  BnMode mode) {
  if (batch.empty()) throw ArgumentError("batch_prenorm_variance: empty batch");
  const auto traces = forward_batch(spec, batch, mode);
  return summarize_prenorm_variance(traces);
}

}  // namespace lipcap
