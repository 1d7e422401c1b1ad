// SPDX-License-Identifier: Apache-2.0
//
// Explicit ReLU networks whose Lipschitz constants (in the input, in a
// layer's pre-activation, in a layer's weights) and loss gradients are known
// in closed form. Every hidden weight beyond the pivot is a_k times a
// truncation/zero-padding matrix.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lipcap/network.hpp"

namespace lipcap {

struct WitnessCfg {
  std::vector<std::size_t> widths;  // n_0..n_K
  Vector a;                         // a_1..a_K (entries before the pivot are unused by weight/gradient witnesses)
  std::size_t pivot = 1;            // 1-based layer i, 1 <= i < K
  std::vector<Matrix> head;         // W_1..W_i for weight/gradient witnesses
  double c = 1.0;                   // gradient witness output scale
  Activation g = Activation::Identity;
};

/// n_out x n_in matrix with the identity of size min(n_out, n_in) in the
/// top-left corner: M v = truncate_pad(v, n_out).
Matrix make_trunc_pad_matrix(std::size_t n_out, std::size_t n_in);

struct InputWitness {
  NetworkSpec net;
  double exact_lipschitz = 0.0;  // prod a_k
};

/// W_k = a_k * I_k with ReLU everywhere; h(x) = (prod a_k) ReLU(x^(n_1..n_K)).
InputWitness build_input_witness(const WitnessCfg& cfg);

struct WeightWitness {
  NetworkSpec net;
  std::size_t pivot = 1;
  double exact_y_lipschitz = 0.0;  // prod_{j>i} a_j

  /// (prod_{j>i} a_j) |chain_truncate_pad(h_{i-1}(x), n_{i+1..K})|.
  double exact_w_lipschitz(std::span<const double> x) const;
  /// (prod_{j>i} a_j) |h_{i-1}(x)|_inf: the constant in W_i under the induced
  /// infinity norm. A rank-one perturbation may hit any column of W_i, so this
  /// can exceed exact_w_lipschitz when n_{i-1} > min(n_{i+1..K}).
  double w_lipschitz_max(std::span<const double> x) const;
  /// h_{i-1}(x) (x itself for i = 1).
  Vector pivot_input(std::span<const double> x) const;
};

/// Layers 1..i come from cfg.head; layers k > i are a_k * I_k.
WeightWitness build_weight_witness(const WitnessCfg& cfg);

/// Differentiable scalar losses f(p, y) of the witness output p.
enum class ScalarLoss { Identity, Squared };

double scalar_loss(ScalarLoss f, double p, double y);
double scalar_loss_derivative(ScalarLoss f, double p, double y);

struct ScalarSample {
  Vector x;
  double y = 0.0;
};

/// h*(x) = g(c 1^T h_K(x)) on top of a weight witness.
struct GradientWitness {
  WeightWitness body;
  double c = 1.0;
  Activation g = Activation::Identity;

  double output(std::span<const double> x) const;
  /// Empirical loss L = (1/m) sum f(h*(x), y).
  double loss(std::span<const ScalarSample> data, ScalarLoss f) const;
  /// Rows t with t <= min(n_{i+1..K}) (and t <= n_i) can carry gradient.
  std::size_t active_rows() const;
};

/// Rejects g = ReLU (the closed-form gradient needs a differentiable g).
GradientWitness build_gradient_witness(const WitnessCfg& cfg);

/// Closed-form gradient of L with respect to row t (1-based) of W_i:
///   (c a_K..a_{i+1} / m) sum (f o g)'(u) I[W_it h_{i-1} >= 0] h_{i-1}(x)
/// for t <= active_rows(), zero otherwise.
Vector analytic_gradient(const GradientWitness& w, std::span<const ScalarSample> data, ScalarLoss f,
                         std::size_t t);

}  // namespace lipcap
