// SPDX-License-Identifier: Apache-2.0
//
// Numerical oracles: finite-difference Jacobians and sampled Lipschitz
// estimates in the max norm. Sampled values are lower bounds on the true
// constant, never certificates.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lipcap/linalg.hpp"

namespace lipcap {

using VectorFn = std::function<Vector(const Vector&)>;

/// Axis-aligned box, one (lo, hi) interval per dimension.
struct Region {
  std::vector<std::pair<double, double>> box;

  std::size_t dim() const { return box.size(); }
  bool contains(std::span<const double> x) const;
  double width(std::size_t d) const { return box[d].second - box[d].first; }
  /// Max-norm diameter: the largest side length.
  double diameter() const;

  bool operator==(const Region&) const = default;
};

struct LipEstimate {
  double value = 0.0;
  std::size_t pairs_evaluated = 0;
  Vector argmax_x;
  Vector argmax_x2;
};

/// Step used by the finite-difference oracles: 1e-5 * max(1, |x|_inf).
double default_fd_step(std::span<const double> x);

/// Central-difference Jacobian of f at x (five-point stencil). Throws NumericError if f returns
/// non-finite values.
Matrix finite_diff_jacobian(const VectorFn& f, const Vector& x, double h);
Matrix finite_diff_jacobian(const VectorFn& f, const Vector& x);

/// Max over sampled pairs of |f(x) - f(x')| / |x - x'|. Even pair indices are
/// uniform in the region; odd ones are axis micro-perturbations
/// (delta = 1e-4 * side length). Pair j depends only on (seed, j), so a
/// longer run extends a shorter one.
LipEstimate sampled_lipschitz(const VectorFn& f, const Region& region, std::size_t n_pairs,
                              std::uint64_t seed);

/// |f(x + step d) - f(x)| / (step |d|).
double directional_quotient(const VectorFn& f, const Vector& x, const Vector& direction, double step);

/// Deterministic generator for pair j of a stream seeded with `seed`.
class PairRng {
public:
  PairRng(std::uint64_t seed, std::uint64_t stream);
  std::uint64_t next();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }
  /// Standard normal draw (Box-Muller, one value per call).
  double normal();

private:
  std::uint64_t state_;
};

}  // namespace lipcap
