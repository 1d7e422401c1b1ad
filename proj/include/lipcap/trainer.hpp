// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode gradients for bias-free normalized FFNs and a mini-batch
// training loop that records weight norms and pre-normalization variances
// before every update.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipcap/data.hpp"
#include "lipcap/network.hpp"

namespace lipcap {

/// Entries N(0, 2 / fan_in), deterministic in (seed, stream).
Matrix he_normal(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream);

/// ReLU hidden layers, identity output, no normalizers, He-normal weights.
NetworkSpec he_init(std::span<const std::size_t> widths, std::uint64_t seed);

/// Puts the same normalizer kind on every layer (optionally sparing the
/// output layer). BN starts from mu = 0, sigma2 = 1; GN splits each layer into
/// `gn_groups` contiguous groups.
NetworkSpec with_normalizers(NetworkSpec spec, NormKind kind, bool include_output, std::size_t gn_groups = 2,
                             double eps = kDefaultEps);

struct Gradients {
  std::vector<Matrix> dw;  // one per layer
  double loss = 0.0;       // mean batch loss
};

/// Exact gradients of the mean batch loss. Batch mode differentiates through
/// the BN batch statistics; LN/GN are always differentiated through their
/// per-sample statistics.
Gradients backward(const NetworkSpec& spec, std::span<const Vector> batch, std::span<const Vector> targets,
                   LossKind loss, BnMode mode);

/// Mean batch loss, matching `backward`.
double batch_loss(const NetworkSpec& spec, std::span<const Vector> batch, std::span<const Vector> targets,
                  LossKind loss, BnMode mode);

enum class Optimizer { SGD, Adam };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 1;
  std::size_t batch_size = 128;
  double weight_decay = 1e-4;  // added to the gradient as wd * W
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::Adam;
  LossKind loss = LossKind::L1;
  BnMode bn_mode = BnMode::Batch;
  double bn_momentum = 0.1;  // running-statistics update rate
};

/// One row per (step, layer), recorded before the update of that step.
struct TraceRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  std::size_t layer = 0;  // 1-based
  double w_norm = 0.0;
  double pw_product = 0.0;
  double var_mean = 0.0;
  double var_max = 0.0;
  double inv_sigma_product = 1.0;  // prod over layers of the batch normalizer factor
  double train_acc = 0.0;          // on the current batch
  double train_loss = 0.0;         // on the current batch
};

struct TrainTrace {
  std::vector<TraceRow> rows;
};

struct TrainResult {
  NetworkSpec spec;
  TrainTrace trace;
};

/// Sample order for one epoch (Fisher-Yates, seeded by (seed, epoch)).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch);

/// Per-layer normalizer factor computed from the statistics of one batch:
/// BN uses the batch variances, LN/GN the smallest per-sample sqrt(var + eps).
/// Layers without a normalizer contribute 1.
std::vector<double> batch_normalizer_factors(const NetworkSpec& spec, std::span<const NetworkTrace> traces);

TrainResult train(const NetworkSpec& spec, const Dataset& data, const TrainConfig& cfg);

}  // namespace lipcap
