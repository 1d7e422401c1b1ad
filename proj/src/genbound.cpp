// SPDX-License-Identifier: Apache-2.0
#include "lipcap/genbound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "lipcap/error.hpp"

namespace lipcap {

std::vector<std::size_t> PartitionedData::occupied() const {
  std::vector<std::size_t> t;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].m > 0 && !cells[i].excluded) t.push_back(i);
  }
  return t;
}

std::size_t PartitionedData::cell_of(std::span<const double> x) const {
  if (x.size() != bbox.dim()) throw ShapeError("cell_of: point dimension mismatch");
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t d = 0; d < bbox.dim(); ++d) {
    const double t = (x[d] - bbox.box[d].first) / bbox.width(d) * static_cast<double>(bins);
    std::size_t b = 0;
    if (t >= static_cast<double>(bins)) {
      b = bins - 1;
    } else if (t > 0.0) {
      b = static_cast<std::size_t>(t);
    }
    idx += b * stride;
    stride *= bins;
  }
  return idx;
}

PartitionedData grid_partition(std::span<const Vector> train, std::size_t bins_per_dim) {
  if (train.empty()) throw ArgumentError("grid_partition: empty train set");
  if (bins_per_dim == 0) throw ArgumentError("grid_partition: bins must be >= 1");
  const std::size_t d = train.front().size();
  if (d == 0) throw ArgumentError("grid_partition: zero-dimensional inputs");
  if (d > kMaxGridDim) {
    throw ArgumentError("grid_partition: input dimension " + std::to_string(d) +
                        " exceeds 6; a uniform grid needs bins^d cells and the local bound degrades "
                        "with dimension (curse of dimensionality)");
  }
  double n = 1.0;
  for (std::size_t k = 0; k < d; ++k) n *= static_cast<double>(bins_per_dim);
  if (n > static_cast<double>(kMaxGridCells)) {
    throw ArgumentError("grid_partition: " + std::to_string(bins_per_dim) + "^" + std::to_string(d) +
                        " cells exceeds the limit of " + std::to_string(kMaxGridCells));
  }

  PartitionedData p;
  p.bins = bins_per_dim;
  p.m = train.size();
  p.bbox.box.assign(d, {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  for (const auto& x : train) {
    if (x.size() != d) throw ShapeError("grid_partition: ragged train inputs");
    for (std::size_t k = 0; k < d; ++k) {
      if (!std::isfinite(x[k])) throw NumericError("grid_partition: non-finite train input");
      p.bbox.box[k].first = std::min(p.bbox.box[k].first, x[k]);
      p.bbox.box[k].second = std::max(p.bbox.box[k].second, x[k]);
    }
  }
  for (auto& [lo, hi] : p.bbox.box) {
    // A flat dimension still needs a cell of positive width.
    const double pad = hi > lo ? 0.01 * (hi - lo) : 0.01 * std::max(1.0, std::abs(lo));
    lo -= pad;
    hi += pad;
  }

  const std::size_t n_cells = static_cast<std::size_t>(n);
  p.cells.resize(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    std::size_t rem = i;
    p.cells[i].region.box.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t b = rem % bins_per_dim;
      rem /= bins_per_dim;
      const auto [lo, hi] = p.bbox.box[k];
      const double w = (hi - lo) / static_cast<double>(bins_per_dim);
      p.cells[i].region.box[k] = {lo + w * static_cast<double>(b),
                                  b + 1 == bins_per_dim ? hi : lo + w * static_cast<double>(b + 1)};
    }
  }
  p.train_cell.reserve(train.size());
  for (const auto& x : train) {
    const std::size_t c = p.cell_of(x);
    p.train_cell.push_back(c);
    ++p.cells[c].m;
  }
  return p;
}

void assign_eval(PartitionedData& p, std::span<const Vector> eval) {
  for (auto& c : p.cells) c.eval_count = 0;
  for (const auto& x : eval) ++p.cells[p.cell_of(x)].eval_count;
}

LambdaEstimate estimate_lambda(const Region& cell, std::span<const Vector> train_in_cell,
                               std::span<const Vector> eval_in_cell) {
  if (train_in_cell.empty()) throw ArgumentError("estimate_lambda: cell has no train samples");
  if (eval_in_cell.empty()) return {0.5 * cell.diameter(), true};
  double total = 0.0;
  for (const auto& s : train_in_cell) {
    double inner = 0.0;
    for (const auto& x : eval_in_cell) inner += max_norm(sub(x, s));
    total += inner / static_cast<double>(eval_in_cell.size());
  }
  return {total / static_cast<double>(train_in_cell.size()), false};
}

double g_term(double C, std::size_t t_size, std::size_t n_cells, std::size_t m, double delta) {
  if (!(C >= 0.0) || !std::isfinite(C)) throw ArgumentError("g_term: C must be finite and >= 0");
  if (t_size < 1 || t_size > n_cells) throw ArgumentError("g_term: need 1 <= |T| <= N");
  if (m < 1) throw ArgumentError("g_term: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("g_term: delta must lie in (0, 1)");
  const double r = static_cast<double>(t_size) * std::log(2.0 * static_cast<double>(n_cells) / delta) /
                   static_cast<double>(m);
  return C * (std::numbers::sqrt2 + 1.0) * std::sqrt(r) + 2.0 * C * r;
}

PartitionedData exclude_zero_measure(const PartitionedData& p, const CellPredicate& predicate) {
  PartitionedData out = p;
  if (!predicate) return out;
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    auto& c = out.cells[i];
    if (!predicate(i, c.region)) continue;
    if (c.m > 0 || c.eval_count > 0) {
      throw ArgumentError("exclude_zero_measure: cell " + std::to_string(i) + " holds " + std::to_string(c.m) +
                          " train and " + std::to_string(c.eval_count) +
                          " eval samples; a populated cell cannot be assumed to have probability zero");
    }
    c.excluded = true;
  }
  return out;
}

namespace {

// Per-sample losses; aborts if any exceeds C.
Vector checked_losses(const NetworkSpec& spec, const Dataset& d, LossKind loss, double C, const char* which) {
  Vector out;
  out.reserve(d.size());
  double worst = -1.0;
  std::size_t worst_at = 0;
  for (std::size_t r = 0; r < d.size(); ++r) {
    const double v = loss_value(loss, forward(spec, d.x[r]), d.y[r]);
    if (!std::isfinite(v)) throw NumericError(std::string(which) + " sample " + std::to_string(r) + ": non-finite loss");
    if (v > worst) {
      worst = v;
      worst_at = r;
    }
    out.push_back(v);
  }
  if (worst > C) {
    throw ArgumentError(std::string(which) + " loss " + std::to_string(worst) + " at sample " +
                        std::to_string(worst_at) + " exceeds C = " + std::to_string(C));
  }
  return out;
}

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

GenBoundReport generalization_bound(const NetworkSpec& spec, const Dataset& train, const Dataset& eval,
                                    const GenBoundCfg& cfg) {
  if (train.size() == 0) throw ArgumentError("generalization_bound: empty train set");
  check_dataset(train);
  check_dataset(eval);
  if (train.dim() != spec.input_dim) throw ShapeError("generalization_bound: train dimension does not match model");
  if (eval.size() > 0 && eval.dim() != spec.input_dim) {
    throw ShapeError("generalization_bound: eval dimension does not match model");
  }
  if (cfg.pairs == 0) throw ArgumentError("generalization_bound: pairs must be positive");

  const Vector train_loss = checked_losses(spec, train, cfg.loss, cfg.C, "train");
  const Vector eval_loss = checked_losses(spec, eval, cfg.loss, cfg.C, "eval");

  PartitionedData p = grid_partition(train.x, cfg.bins);
  assign_eval(p, eval.x);
  p = exclude_zero_measure(p, cfg.exclude);

  GenBoundReport r;
  r.delta = cfg.delta;
  r.C = cfg.C;
  r.m = train.size();
  r.n_cells = p.n_cells();
  r.pairs = cfg.pairs;
  r.f_emp = mean(train_loss);
  r.eval_loss = mean(eval_loss);

  std::vector<std::vector<std::size_t>> train_idx(p.n_cells()), eval_idx(p.n_cells());
  for (std::size_t k = 0; k < train.size(); ++k) train_idx[p.train_cell[k]].push_back(k);
  for (std::size_t k = 0; k < eval.size(); ++k) eval_idx[p.cell_of(eval.x[k])].push_back(k);

  const auto T = p.occupied();
  r.t_size = T.size();
  for (std::size_t ci : T) {
    const Cell& cell = p.cells[ci];
    std::vector<Vector> tr, ev;
    for (std::size_t k : train_idx[ci]) tr.push_back(train.x[k]);
    for (std::size_t k : eval_idx[ci]) ev.push_back(eval.x[k]);

    CellReport cr;
    cr.index = ci;
    cr.region = cell.region;
    cr.m = cell.m;
    cr.eval_count = cell.eval_count;
    const LambdaEstimate lam = estimate_lambda(cell.region, tr, ev);
    cr.lambda = lam.value;
    cr.lambda_fallback = lam.fallback;

    // The label map is only known on samples: take the worst train label
    // seen in the cell.
    std::vector<Vector> labels;
    for (std::size_t k : train_idx[ci]) {
      if (std::find(labels.begin(), labels.end(), train.y[k]) == labels.end()) labels.push_back(train.y[k]);
    }
    cr.distinct_labels = labels.size();
    const std::uint64_t cell_seed = PairRng(cfg.seed, ci).next();
    for (std::size_t li = 0; li < labels.size(); ++li) {
      const Vector& y = labels[li];
      const VectorFn f = [&](const Vector& x) { return Vector{loss_value(cfg.loss, forward(spec, x), y)}; };
      const auto est = sampled_lipschitz(f, cell.region, cfg.pairs, PairRng(cell_seed, li).next());
      cr.L = std::max(cr.L, est.value);
    }
    cr.contribution = static_cast<double>(cr.m) / static_cast<double>(r.m) * cr.lambda * cr.L;
    r.local_term += cr.contribution;
    r.cells.push_back(std::move(cr));
  }
  for (std::size_t i = 0; i < p.n_cells(); ++i) {
    if (p.cells[i].excluded) r.excluded.push_back(i);
  }

  r.g = g_term(cfg.C, r.t_size, r.n_cells, r.m, cfg.delta);
  r.total = r.f_emp + r.local_term + r.g;
  r.notes.push_back("L_i are sampled lower estimates and lambda_i uses held-out points; the total is an estimate, not a certificate");
  if (!r.excluded.empty()) r.notes.push_back("excluded cells are assumed to have probability zero");
  return r;
}

double loss_output_lipschitz(LossKind loss, std::size_t out_dim) {
  if (loss == LossKind::MSE) throw ConfigError("mse loss has no global Lipschitz constant in the model output");
  return static_cast<double>(out_dim);
}

GenBoundReport normalized_gen_bound(const GenBoundReport& report, const NetworkSpec& spec, LossKind loss) {
  if (spec.depth() == 0) throw ArgumentError("normalized_gen_bound: empty network");
  GenBoundReport out = report;
  NormalizedGenBound n;
  n.L_f = loss_output_lipschitz(loss, spec.layers.back().width());
  n.pw = weight_norm_product(spec);
  for (const auto& c : report.cells) n.lambda_avg += static_cast<double>(c.m) / static_cast<double>(report.m) * c.lambda;
  n.omega = n.L_f * n.pw * n.lambda_avg;

  const ReductionFactors stated = reduction_factors(spec, FactorMode::Stated);
  const ReductionFactors cert = reduction_factors(spec, FactorMode::Certified);
  n.reduction = stated.combined;
  n.certified_reduction = cert.combined;
  n.coarse_reduction = stated.coarse;
  n.sigma = stated.sigma;
  n.normalized_layers = stated.normalized_layers;

  n.gap_unnormalized = report.g + n.omega;
  n.gap_normalized = report.g + n.omega * n.reduction;
  n.gap_certified = report.g + n.omega * n.certified_reduction;
  n.gap_coarse = report.g + n.omega * n.coarse_reduction;
  n.gap_as_printed = report.g + n.omega * std::pow(n.sigma, static_cast<double>(n.normalized_layers));
  out.normalized = n;
  out.notes.push_back("the printed BN form multiplies omega by sigma^K while the capacity results give sigma^-K; "
                      "gap_normalized uses the product of per-layer factors and gap_as_printed keeps sigma^K");
  return out;
}

}  // namespace lipcap
