// SPDX-License-Identifier: Apache-2.0
//
// Labelled datasets, vector losses and the synthetic tasks used by the
// trainer and the generalization-bound experiments.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipcap/linalg.hpp"

namespace lipcap {

struct Dataset {
  std::vector<Vector> x;
  std::vector<Vector> y;            // targets (one-hot for classification)
  std::vector<std::size_t> labels;  // class labels; empty for vector targets

  std::size_t size() const { return x.size(); }
  std::size_t dim() const { return x.empty() ? 0 : x.front().size(); }
  std::size_t out_dim() const { return y.empty() ? 0 : y.front().size(); }
  bool has_labels() const { return !labels.empty(); }
};

/// Throws ShapeError on ragged rows or x/y count mismatch.
void check_dataset(const Dataset& d);

Vector one_hot(std::size_t label, std::size_t classes);
/// Builds a classification dataset with one-hot targets.
Dataset make_labelled(std::vector<Vector> x, std::vector<std::size_t> labels, std::size_t classes);

enum class LossKind { L1, MSE };

std::string to_string(LossKind k);
LossKind parse_loss(const std::string& name);

/// sum_k |p_k - t_k|.
double loss_l1(std::span<const double> pred, std::span<const double> target);
/// sum_k (p_k - t_k)^2.
double loss_mse(std::span<const double> pred, std::span<const double> target);
double loss_value(LossKind k, std::span<const double> pred, std::span<const double> target);
/// d loss / d pred; the l1 subgradient at 0 is 0.
Vector loss_gradient(LossKind k, std::span<const double> pred, std::span<const double> target);

/// Index of the largest entry (first on ties).
std::size_t argmax(std::span<const double> v);

/// Isotropic Gaussian blobs: class c centred at `separation` times the unit
/// vector at angle 2 pi c / classes in the first two coordinates.
Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation, double spread,
                   std::uint64_t seed);

/// Two classes in the plane: a disc of radius 1 and a ring 1.5 <= r <= 2.5.
Dataset make_annulus(std::size_t n, std::uint64_t seed);

}  // namespace lipcap
