// SPDX-License-Identifier: Apache-2.0
//
// Bias-free feedforward networks u_i = g_i(NO_i(W_i u_{i-1})), u_0 = x.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipcap/linalg.hpp"
#include "lipcap/normalizers.hpp"

namespace lipcap {

enum class Activation { ReLU, Identity, Sigmoid, Tanh };

std::string to_string(Activation a);
/// Parses relu|identity|sigmoid|tanh; throws ArgumentError otherwise.
Activation parse_activation(const std::string& name);

double activate(Activation a, double z);
/// Derivative at z; the ReLU subgradient at 0 is 1.
double activate_derivative(Activation a, double z);

struct LayerSpec {
  Matrix weights;  // n_i x n_{i-1}
  NormalizerCfg norm;
  Activation activation = Activation::ReLU;
  std::optional<double> s_bound;

  std::size_t width() const { return weights.rows(); }
  bool operator==(const LayerSpec&) const = default;
};

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<LayerSpec> layers;

  std::size_t depth() const { return layers.size(); }
  /// n_0, n_1, ..., n_K.
  std::vector<std::size_t> widths() const;
  bool operator==(const NetworkSpec&) const = default;
};

/// How BN layers obtain their statistics: recorded (frozen) values from the
/// config, or statistics of the current batch.
enum class BnMode { Frozen, Batch };

struct LayerTrace {
  Vector pre_norm;   // y_i = W_i h_{i-1}
  Vector post_norm;  // NO_i(y_i)
  Vector output;     // h_i
};

using NetworkTrace = std::vector<LayerTrace>;

/// Checks shapes, normalizer coverage and weight-norm bounds; every
/// violation is reported with its 1-based layer index. Returns a canonical
/// copy with sorted GN groups.
NetworkSpec validate_network(const NetworkSpec& spec);

Vector forward(const NetworkSpec& spec, std::span<const double> x);
Vector forward_trace(const NetworkSpec& spec, std::span<const double> x, NetworkTrace& trace);

/// Forward pass over a batch. In Batch mode BN layers use the batch
/// mean/population variance of their inputs instead of the recorded stats.
std::vector<NetworkTrace> forward_batch(const NetworkSpec& spec, std::span<const Vector> batch,
                                        BnMode mode);

/// Product of induced infinity norms of the weight matrices.
double weight_norm_product(const NetworkSpec& spec);

struct LayerVariance {
  Vector per_unit;  // population variance of y_i across the batch
  double mean = 0.0;
  double max = 0.0;
};

/// Per-layer, per-unit variance of the pre-normalization inputs y_i.
std::vector<LayerVariance> batch_prenorm_variance(const NetworkSpec& spec,
                                                  std::span<const Vector> batch,
                                                  BnMode mode = BnMode::Frozen);

/// Summarizes per-unit variances of y_i from an already computed batch trace.
std::vector<LayerVariance> summarize_prenorm_variance(std::span<const NetworkTrace> traces);

}  // namespace lipcap
