// SPDX-License-Identifier: Apache-2.0
//
// Local-Lipschitz generalization bound on an axis-aligned grid partition:
//   F(P, h) <= F(D, h) + sum_{i in T} (m_i/m) lambda_i L_i + g(D, delta).
// lambda_i and L_i are Monte Carlo estimates, so the evaluated bound is a
// best-effort number and never a certificate.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lipcap/bounds.hpp"
#include "lipcap/data.hpp"
#include "lipcap/lipestimate.hpp"

namespace lipcap {

inline constexpr std::size_t kMaxGridDim = 6;
inline constexpr std::size_t kMaxGridCells = 1'000'000;

struct Cell {
  Region region;
  std::size_t m = 0;           // train samples
  std::size_t eval_count = 0;  // held-out samples
  bool excluded = false;
};

struct PartitionedData {
  Region bbox;  // train bounding box, expanded 1% per side
  std::size_t bins = 1;
  std::size_t m = 0;
  std::vector<Cell> cells;              // all bins^d cells, row-major with dimension 0 fastest
  std::vector<std::size_t> train_cell;  // cell index of each train sample

  std::size_t n_cells() const { return cells.size(); }
  /// Occupied, non-excluded cells (the index set T).
  std::vector<std::size_t> occupied() const;
  /// Cell containing x; points outside the box go to the nearest boundary cell.
  std::size_t cell_of(std::span<const double> x) const;
};

/// Uniform grid over the train bounding box. Refuses d > 6 (the cell count
/// grows as bins^d) and grids above kMaxGridCells.
PartitionedData grid_partition(std::span<const Vector> train, std::size_t bins_per_dim);

/// Tallies held-out points per cell.
void assign_eval(PartitionedData& p, std::span<const Vector> eval);

struct LambdaEstimate {
  double value = 0.0;
  bool fallback = false;  // no eval points in the cell: half the diameter
};

/// Mean over train points s of mean over eval points x of |x - s|_inf.
LambdaEstimate estimate_lambda(const Region& cell, std::span<const Vector> train_in_cell,
                               std::span<const Vector> eval_in_cell);

/// C(sqrt2 + 1) sqrt(|T| ln(2N/delta) / m) + 2 C |T| ln(2N/delta) / m.
double g_term(double C, std::size_t t_size, std::size_t n_cells, std::size_t m, double delta);

/// Marks cells flagged by `predicate` as a probability-zero set. Throws
/// ArgumentError if a flagged cell holds train or eval samples.
using CellPredicate = std::function<bool(std::size_t index, const Region& region)>;
PartitionedData exclude_zero_measure(const PartitionedData& p, const CellPredicate& predicate);

struct GenBoundCfg {
  std::size_t bins = 4;
  double delta = 0.1;
  double C = 1.0;
  LossKind loss = LossKind::L1;
  std::size_t pairs = 2000;  // per cell and distinct label
  std::uint64_t seed = 0;
  CellPredicate exclude;     // optional
};

struct CellReport {
  std::size_t index = 0;
  Region region;
  std::size_t m = 0;
  std::size_t eval_count = 0;
  double lambda = 0.0;
  bool lambda_fallback = false;
  double L = 0.0;
  std::size_t distinct_labels = 0;
  double contribution = 0.0;  // (m_i/m) lambda_i L_i
};

struct NormalizedGenBound {
  double L_f = 0.0;
  double pw = 0.0;
  double lambda_avg = 0.0;  // sum (m_i/m) lambda_i
  double omega = 0.0;       // L_f P_w lambda_avg
  double reduction = 1.0;   // prod of per-layer normalizer factors
  double certified_reduction = 1.0;
  double coarse_reduction = 1.0;  // sigma^(-K')
  double sigma = 1.0;
  std::size_t normalized_layers = 0;
  // Gap bounds F(P) - F(D) <= g + omega * factor.
  double gap_unnormalized = 0.0;
  double gap_normalized = 0.0;  // product of factors
  double gap_certified = 0.0;
  double gap_coarse = 0.0;
  double gap_as_printed = 0.0;  // omega * sigma^(+K'), kept for comparison
};

struct GenBoundReport {
  double f_emp = 0.0;
  double local_term = 0.0;
  double g = 0.0;
  double total = 0.0;
  double eval_loss = 0.0;  // mean held-out loss, for comparison only
  double delta = 0.0;
  double C = 0.0;
  std::size_t m = 0;
  std::size_t n_cells = 0;
  std::size_t t_size = 0;
  std::size_t pairs = 0;
  bool estimated = true;
  std::vector<CellReport> cells;  // occupied cells only
  std::vector<std::size_t> excluded;
  std::optional<NormalizedGenBound> normalized;
  std::vector<std::string> notes;
};

GenBoundReport generalization_bound(const NetworkSpec& spec, const Dataset& train, const Dataset& eval,
                                    const GenBoundCfg& cfg);

/// Lipschitz constant in the model output (max norm) of the loss: the output
/// dimension for l1. MSE has none globally; throws ConfigError.
double loss_output_lipschitz(LossKind loss, std::size_t out_dim);

/// Adds the capacity-weighted forms. The printed BN form multiplies by
/// sigma^K; the tightened product of per-layer factors is used instead and
/// the printed variant is reported alongside.
GenBoundReport normalized_gen_bound(const GenBoundReport& report, const NetworkSpec& spec, LossKind loss);

}  // namespace lipcap
