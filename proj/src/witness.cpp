// SPDX-License-Identifier: Apache-2.0
#include "lipcap/witness.hpp"

#include <algorithm>
#include <cmath>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

void check_widths(const WitnessCfg& cfg) {
  if (cfg.widths.size() < 2) throw ArgumentError("witness: need widths n_0..n_K with K >= 1");
  for (std::size_t w : cfg.widths) {
    if (w == 0) throw ArgumentError("witness: widths must be positive");
  }
  const std::size_t K = cfg.widths.size() - 1;
  if (cfg.a.size() != K) {
    throw ArgumentError("witness: expected " + std::to_string(K) + " scale factors, got " +
                        std::to_string(cfg.a.size()));
  }
}

void check_scale(double a, std::size_t k) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw ArgumentError("witness: a_" + std::to_string(k) + " must be finite and non-negative");
  }
}

LayerSpec scaled_trunc_pad(double a, std::size_t n_out, std::size_t n_in) {
  LayerSpec l;
  l.weights = make_trunc_pad_matrix(n_out, n_in);
  for (double& v : l.weights.data()) v *= a;
  l.activation = Activation::ReLU;
  // a = 0 gives the zero matrix; any positive bound admits it.
  l.s_bound = a > 0.0 ? a : 1.0;
  return l;
}

}  // namespace

Matrix make_trunc_pad_matrix(std::size_t n_out, std::size_t n_in) {
  if (n_out == 0 || n_in == 0) throw ArgumentError("make_trunc_pad_matrix: dimensions must be positive");
  Matrix m(n_out, n_in);
  for (std::size_t k = 0; k < std::min(n_out, n_in); ++k) m(k, k) = 1.0;
  return m;
}

InputWitness build_input_witness(const WitnessCfg& cfg) {
  check_widths(cfg);
  InputWitness w;
  w.net.input_dim = cfg.widths[0];
  w.exact_lipschitz = 1.0;
  for (std::size_t k = 1; k < cfg.widths.size(); ++k) {
    check_scale(cfg.a[k - 1], k);
    w.net.layers.push_back(scaled_trunc_pad(cfg.a[k - 1], cfg.widths[k], cfg.widths[k - 1]));
    w.exact_lipschitz *= cfg.a[k - 1];
  }
  return w;
}

Vector WeightWitness::pivot_input(std::span<const double> x) const {
  if (pivot == 1) return Vector(x.begin(), x.end());
  NetworkTrace trace;
  forward_trace(net, x, trace);
  return trace[pivot - 2].output;
}

double WeightWitness::w_lipschitz_max(std::span<const double> x) const {
  return exact_y_lipschitz * max_norm(pivot_input(x));
}

double WeightWitness::exact_w_lipschitz(std::span<const double> x) const {
  const Vector h_prev = pivot_input(x);
  const auto widths = net.widths();
  std::vector<std::size_t> tail(widths.begin() + static_cast<std::ptrdiff_t>(pivot) + 1, widths.end());
  return exact_y_lipschitz * max_norm(chain_truncate_pad(h_prev, tail));
}

WeightWitness build_weight_witness(const WitnessCfg& cfg) {
  check_widths(cfg);
  const std::size_t K = cfg.widths.size() - 1;
  const std::size_t i = cfg.pivot;
  if (i < 1 || i >= K) {
    throw ArgumentError("weight witness: pivot " + std::to_string(i) + " outside [1, " + std::to_string(K) + ")");
  }
  if (cfg.head.size() != i) {
    throw ArgumentError("weight witness: expected " + std::to_string(i) + " head matrices W_1..W_i");
  }
  WeightWitness w;
  w.pivot = i;
  w.net.input_dim = cfg.widths[0];
  for (std::size_t k = 1; k <= i; ++k) {
    const Matrix& m = cfg.head[k - 1];
    if (m.rows() != cfg.widths[k] || m.cols() != cfg.widths[k - 1]) {
      throw ShapeError("weight witness: W_" + std::to_string(k) + " shape does not match widths");
    }
    LayerSpec l;
    l.weights = m;
    l.activation = Activation::ReLU;
    w.net.layers.push_back(std::move(l));
  }
  w.exact_y_lipschitz = 1.0;
  for (std::size_t k = i + 1; k <= K; ++k) {
    check_scale(cfg.a[k - 1], k);
    w.net.layers.push_back(scaled_trunc_pad(cfg.a[k - 1], cfg.widths[k], cfg.widths[k - 1]));
    w.exact_y_lipschitz *= cfg.a[k - 1];
  }
  return w;
}

double scalar_loss(ScalarLoss f, double p, double y) {
  switch (f) {
    case ScalarLoss::Identity: return p;
    case ScalarLoss::Squared: return (p - y) * (p - y);
  }
  return p;
}

double scalar_loss_derivative(ScalarLoss f, double p, double y) {
  switch (f) {
    case ScalarLoss::Identity: return 1.0;
    case ScalarLoss::Squared: return 2.0 * (p - y);
  }
  return 1.0;
}

double GradientWitness::output(std::span<const double> x) const {
  const Vector h = forward(body.net, x);
  double u = 0.0;
  for (double v : h) u += c * v;
  return activate(g, u);
}

double GradientWitness::loss(std::span<const ScalarSample> data, ScalarLoss f) const {
  if (data.empty()) throw ArgumentError("gradient witness: empty dataset");
  double s = 0.0;
  for (const auto& d : data) s += scalar_loss(f, output(d.x), d.y);
  return s / static_cast<double>(data.size());
}

std::size_t GradientWitness::active_rows() const {
  const auto widths = body.net.widths();
  std::size_t m = widths[body.pivot];
  for (std::size_t k = body.pivot + 1; k < widths.size(); ++k) m = std::min(m, widths[k]);
  return m;
}

GradientWitness build_gradient_witness(const WitnessCfg& cfg) {
  if (cfg.g == Activation::ReLU) throw ArgumentError("gradient witness: output activation must be differentiable");
  if (!(cfg.c >= 0.0) || !std::isfinite(cfg.c)) throw ArgumentError("gradient witness: c must be non-negative");
  GradientWitness w;
  w.body = build_weight_witness(cfg);
  w.c = cfg.c;
  w.g = cfg.g;
  return w;
}

Vector analytic_gradient(const GradientWitness& w, std::span<const ScalarSample> data, ScalarLoss f,
                         std::size_t t) {
  if (data.empty()) throw ArgumentError("analytic_gradient: empty dataset");
  const std::size_t i = w.body.pivot;
  const auto& net = w.body.net;
  const std::size_t rows_i = net.layers[i - 1].width();
  if (t < 1 || t > rows_i) {
    throw ArgumentError("analytic_gradient: row " + std::to_string(t) + " outside [1, " + std::to_string(rows_i) + "]");
  }
  const std::size_t n_prev = net.layers[i - 1].weights.cols();
  Vector grad(n_prev, 0.0);
  if (t > w.active_rows()) return grad;

  const double scale = w.c * w.body.exact_y_lipschitz / static_cast<double>(data.size());
  NetworkTrace trace;
  for (const auto& d : data) {
    const Vector h = forward_trace(net, d.x, trace);
    const Vector h_prev = i == 1 ? d.x : trace[i - 2].output;
    const double y_it = trace[i - 1].pre_norm[t - 1];
    if (!(y_it >= 0.0)) continue;
    double u = 0.0;
    for (double v : h) u += w.c * v;
    const double p = activate(w.g, u);
    const double dfg = scalar_loss_derivative(f, p, d.y) * activate_derivative(w.g, u);
    for (std::size_t k = 0; k < n_prev; ++k) grad[k] += scale * dfg * h_prev[k];
  }
  return grad;
}

}  // namespace lipcap
