// SPDX-License-Identifier: Apache-2.0
//
// Analytic Lipschitz upper bounds for (normalized) feedforward networks and
// the optimization-cost constants derived from them.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lipcap/network.hpp"

namespace lipcap {

/// Which per-layer normalizer factor to multiply in.
enum class FactorMode {
  Stated,     // norm_lipschitz: the usual closed-form factors
  Certified,  // certified_norm_lipschitz: sound in the max norm for LN/GN
  Global,     // LN/GN with the sqrt(eps) fallback, ignoring recorded sigma_min
};

/// Per-layer normalizer factors; errors name the failing layer.
std::vector<double> layer_factors(const NetworkSpec& spec, FactorMode mode = FactorMode::Stated);

/// prod_k |W_k| * factor_k.
double input_lipschitz_upper(const NetworkSpec& spec, FactorMode mode = FactorMode::Stated);

/// Empirical A_0..A_K: max over data of |h_i(x)| (A_0 is the input sup).
Vector estimate_activation_sup(const NetworkSpec& spec, std::span<const Vector> data);

struct WeightBound {
  double w_bound = 0.0;  // bound on |h, W_i|_Lip
  double y_bound = 0.0;  // bound on |h, y_i|_Lip
};

/// Bounds for 1-based layer i: y_bound = factor_K if i = K, otherwise
/// prod_{k>i} |W_k| * prod_{k>=i} factor_k; w_bound = A_{i-1} * y_bound.
WeightBound weight_lipschitz_upper(const NetworkSpec& spec, std::size_t i, std::span<const double> sup,
                                   FactorMode mode = FactorMode::Stated);

/// l1-loss version: the loss is 1-Lipschitz in h, so equals w_bound.
double loss_weight_lipschitz_upper(const NetworkSpec& spec, std::size_t i, std::span<const double> sup,
                                   FactorMode mode = FactorMode::Stated);

struct ReductionFactors {
  std::vector<double> per_layer;
  double bn_factor = 1.0;      // product over BN layers
  double ln_factor = 1.0;      // product over LN/GN layers
  double combined = 1.0;       // product over all layers
  double sigma = 1.0;          // min over normalized layers and units of sqrt(var + eps)
  std::size_t normalized_layers = 0;
  double coarse = 1.0;         // sigma^(-normalized_layers)
};

ReductionFactors reduction_factors(const NetworkSpec& spec, FactorMode mode = FactorMode::Stated);

struct OptimizationEntry {
  std::size_t layer = 0;                   // 1-based, < K
  double iteration_constant = 0.0;         // prod_{k>i} s_k / alpha
  double evaluation_constant = 0.0;        // prod_{k>i} s_k / alpha^2
  double normalized_evaluation_constant = 0.0;  // sigma^(-K+i-1) prod_{k>i} s_k / alpha^2
};

/// Order constants (no asymptotic prefactors) for layers 1..K-1. Requires
/// s_bound on every layer.
struct OptimizationReport {
  double alpha = 0.0;
  double sigma = 1.0;
  std::vector<OptimizationEntry> entries;
};

OptimizationReport optimization_report(const NetworkSpec& spec, double alpha);

/// Fills LN/GN sigma_min from the data: per layer, the minimum of
/// sqrt(var + eps) over the pre-normalization inputs reached by `data`.
NetworkSpec calibrate_sigma_min(const NetworkSpec& spec, std::span<const Vector> data);

struct CapacityReport {
  std::vector<double> weight_norms;
  std::vector<double> factors;            // stated
  std::vector<double> certified_factors;
  std::vector<double> global_factors;
  double pw = 0.0;
  double input_lipschitz_upper = 0.0;
  double certified_input_upper = 0.0;
  double global_input_upper = 0.0;
  ReductionFactors reduction;
  std::optional<Vector> activation_sup;
  std::vector<WeightBound> weight_bounds;      // present iff activation_sup
  std::vector<double> loss_weight_bounds;
  std::optional<OptimizationReport> optimization;
};

CapacityReport capacity_report(const NetworkSpec& spec, std::span<const Vector> data = {},
                               std::optional<double> alpha = std::nullopt);

}  // namespace lipcap
