// SPDX-License-Identifier: Apache-2.0
#include "lipcap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

double factor_for(const NormalizerCfg& cfg, std::size_t n, FactorMode mode) {
  switch (mode) {
    case FactorMode::Stated: return norm_lipschitz(cfg, n);
    case FactorMode::Certified: return certified_norm_lipschitz(cfg, n);
    case FactorMode::Global: return global_norm_lipschitz(cfg, n);
  }
  return 1.0;
}

void check_layer_index(const NetworkSpec& spec, std::size_t i) {
  if (i < 1 || i > spec.depth()) {
    throw ArgumentError("layer index " + std::to_string(i) + " outside [1, " + std::to_string(spec.depth()) + "]");
  }
}

// Smallest sqrt(var + eps) the layer's factor was computed from.
double layer_sigma(const NormalizerCfg& cfg) {
  double best = std::numeric_limits<double>::infinity();
  if (const auto* bn = std::get_if<BnStats>(&cfg.kind)) {
    for (double v : bn->sigma2) best = std::min(best, std::sqrt(v + bn->eps));
    return best;
  }
  if (cfg.sigma_min) {
    for (double s : *cfg.sigma_min) best = std::min(best, s);
    return best;
  }
  const double eps = std::visit(
      [](const auto& k) -> double {
        if constexpr (requires { k.eps; }) return k.eps;
        return 1.0;
      },
      cfg.kind);
  return std::sqrt(eps);
}

}  // namespace

std::vector<double> layer_factors(const NetworkSpec& spec, FactorMode mode) {
  std::vector<double> out;
  out.reserve(spec.depth());
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const auto& layer = spec.layers[i];
    try {
      out.push_back(factor_for(layer.norm, layer.width(), mode));
    } catch (const ConfigError& e) {
      throw ConfigError("layer " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

double input_lipschitz_upper(const NetworkSpec& spec, FactorMode mode) {
  const auto factors = layer_factors(spec, mode);
  double p = 1.0;
  for (std::size_t k = 0; k < spec.depth(); ++k) p *= inf_norm(spec.layers[k].weights) * factors[k];
  return p;
}

Vector estimate_activation_sup(const NetworkSpec& spec, std::span<const Vector> data) {
  if (data.empty()) throw ArgumentError("estimate_activation_sup: empty data");
  Vector sup(spec.depth() + 1, 0.0);
  NetworkTrace trace;
  for (const auto& x : data) {
    forward_trace(spec, x, trace);
    sup[0] = std::max(sup[0], max_norm(x));
    for (std::size_t i = 0; i < spec.depth(); ++i) sup[i + 1] = std::max(sup[i + 1], max_norm(trace[i].output));
  }
  return sup;
}

WeightBound weight_lipschitz_upper(const NetworkSpec& spec, std::size_t i, std::span<const double> sup,
                                   FactorMode mode) {
  check_layer_index(spec, i);
  if (sup.size() < i) throw ArgumentError("weight_lipschitz_upper: missing A_{i-1}");
  const auto factors = layer_factors(spec, mode);
  const std::size_t K = spec.depth();
  WeightBound b;
  if (i == K) {
    b.y_bound = factors[K - 1];
  } else {
    double p = 1.0;
    for (std::size_t k = i + 1; k <= K; ++k) p *= inf_norm(spec.layers[k - 1].weights);
    for (std::size_t k = i; k <= K; ++k) p *= factors[k - 1];
    b.y_bound = p;
  }
  b.w_bound = sup[i - 1] * b.y_bound;
  return b;
}

double loss_weight_lipschitz_upper(const NetworkSpec& spec, std::size_t i, std::span<const double> sup,
                                   FactorMode mode) {
  return weight_lipschitz_upper(spec, i, sup, mode).w_bound;
}

ReductionFactors reduction_factors(const NetworkSpec& spec, FactorMode mode) {
  ReductionFactors r;
  r.per_layer = layer_factors(spec, mode);
  double sigma = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    const auto& norm = spec.layers[k].norm;
    const double f = r.per_layer[k];
    r.combined *= f;
    switch (norm.tag()) {
      case NormKind::None: continue;
      case NormKind::BN: r.bn_factor *= f; break;
      case NormKind::LN:
      case NormKind::GN: r.ln_factor *= f; break;
    }
    ++r.normalized_layers;
    sigma = std::min(sigma, layer_sigma(norm));
  }
  if (r.normalized_layers > 0) {
    r.sigma = sigma;
    r.coarse = std::pow(sigma, -static_cast<double>(r.normalized_layers));
  }
  return r;
}

OptimizationReport optimization_report(const NetworkSpec& spec, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("optimization_report: alpha must be positive");
  for (std::size_t k = 0; k < spec.depth(); ++k) {
    if (!spec.layers[k].s_bound) {
      throw ConfigError("layer " + std::to_string(k + 1) + ": s_bound required for optimization report");
    }
  }
  OptimizationReport rep;
  rep.alpha = alpha;
  rep.sigma = reduction_factors(spec).sigma;
  const std::size_t K = spec.depth();
  for (std::size_t i = 1; i < K; ++i) {
    double s = 1.0;
    for (std::size_t k = i + 1; k <= K; ++k) s *= *spec.layers[k - 1].s_bound;
    OptimizationEntry e;
    e.layer = i;
    e.iteration_constant = s / alpha;
    e.evaluation_constant = s / (alpha * alpha);
    const double exponent = -static_cast<double>(K) + static_cast<double>(i) - 1.0;
    e.normalized_evaluation_constant = std::pow(rep.sigma, exponent) * s / (alpha * alpha);
    rep.entries.push_back(e);
  }
  return rep;
}

NetworkSpec calibrate_sigma_min(const NetworkSpec& spec, std::span<const Vector> data) {
  if (data.empty()) throw ArgumentError("calibrate_sigma_min: empty data");
  NetworkSpec out = spec;
  std::vector<std::vector<Vector>> ys(spec.depth());
  NetworkTrace trace;
  for (const auto& x : data) {
    forward_trace(spec, x, trace);
    for (std::size_t i = 0; i < spec.depth(); ++i) ys[i].push_back(trace[i].pre_norm);
  }
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    auto& norm = out.layers[i].norm;
    if (norm.tag() == NormKind::LN || norm.tag() == NormKind::GN) {
      Vector s = sigma_min_from_samples(norm, ys[i]);
      for (double v : s) {
        if (!(v > 0.0)) throw ConfigError("layer " + std::to_string(i + 1) + ": zero variance in calibration data");
      }
      norm.sigma_min = std::move(s);
    }
  }
  return out;
}

CapacityReport capacity_report(const NetworkSpec& spec_in, std::span<const Vector> data,
                               std::optional<double> alpha) {
  NetworkSpec spec = spec_in;
  if (!data.empty()) {
    bool missing = false;
    for (const auto& l : spec.layers) {
      if ((l.norm.tag() == NormKind::LN || l.norm.tag() == NormKind::GN) && !l.norm.sigma_min) missing = true;
    }
    if (missing) spec = calibrate_sigma_min(spec, data);
  }
  CapacityReport r;
  for (const auto& l : spec.layers) r.weight_norms.push_back(inf_norm(l.weights));
  r.factors = layer_factors(spec, FactorMode::Stated);
  r.certified_factors = layer_factors(spec, FactorMode::Certified);
  r.global_factors = layer_factors(spec, FactorMode::Global);
  r.pw = weight_norm_product(spec);
  r.input_lipschitz_upper = input_lipschitz_upper(spec, FactorMode::Stated);
  r.certified_input_upper = input_lipschitz_upper(spec, FactorMode::Certified);
  r.global_input_upper = input_lipschitz_upper(spec, FactorMode::Global);
  r.reduction = reduction_factors(spec, FactorMode::Stated);
  if (!data.empty()) {
    r.activation_sup = estimate_activation_sup(spec, data);
    for (std::size_t i = 1; i <= spec.depth(); ++i) {
      r.weight_bounds.push_back(weight_lipschitz_upper(spec, i, *r.activation_sup));
      r.loss_weight_bounds.push_back(r.weight_bounds.back().w_bound);
    }
  }
  if (alpha) r.optimization = optimization_report(spec, *alpha);
  return r;
}

}  // namespace lipcap
