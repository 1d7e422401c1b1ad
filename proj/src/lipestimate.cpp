// SPDX-License-Identifier: Apache-2.0
#include "lipcap/lipestimate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vector eval_checked(const VectorFn& f, const Vector& x, const char* who) {
  Vector y = f(x);
  if (!all_finite(y)) throw NumericError(std::string(who) + ": function returned a non-finite value");
  return y;
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

PairRng::PairRng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  state_ = splitmix(s) ^ (stream * 0xd1b54a32d192ed03ULL);
  splitmix(state_);
}

std::uint64_t PairRng::next() { return splitmix(state_); }

double PairRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double PairRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

bool Region::contains(std::span<const double> x) const {
  if (x.size() != box.size()) return false;
  for (std::size_t d = 0; d < box.size(); ++d) {
    if (x[d] < box[d].first || x[d] > box[d].second) return false;
  }
  return true;
}

double Region::diameter() const {
  double best = 0.0;
  for (std::size_t d = 0; d < box.size(); ++d) best = std::max(best, width(d));
  return best;
}

double default_fd_step(std::span<const double> x) {
  return 1e-5 * std::max(1.0, x.empty() ? 1.0 : max_norm(x));
}

Matrix finite_diff_jacobian(const VectorFn& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw ArgumentError("finite_diff_jacobian: step must be positive");
  const Vector f0 = eval_checked(f, x, "finite_diff_jacobian");
  Matrix j(f0.size(), x.size());
  Vector xp = x;
  // Five-point central stencil; the error term is O(h^4), which keeps
  // narrow normalizer groups (sigma ~ 1e-2) accurate at the default step.
  auto at = [&](std::size_t c, double off) {
    xp[c] = x[c] + off;
    Vector v = eval_checked(f, xp, "finite_diff_jacobian");
    xp[c] = x[c];
    if (v.size() != f0.size()) throw ShapeError("finite_diff_jacobian: output length changed");
    return v;
  };
  for (std::size_t c = 0; c < x.size(); ++c) {
    const Vector p1 = at(c, h), m1 = at(c, -h), p2 = at(c, 2.0 * h), m2 = at(c, -2.0 * h);
    for (std::size_t r = 0; r < f0.size(); ++r) {
      j(r, c) = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * h);
    }
  }
  return j;
}

Matrix finite_diff_jacobian(const VectorFn& f, const Vector& x) {
  return finite_diff_jacobian(f, x, default_fd_step(x));
}

LipEstimate sampled_lipschitz(const VectorFn& f, const Region& region, std::size_t n_pairs,
                              std::uint64_t seed) {
  if (n_pairs == 0) throw ArgumentError("sampled_lipschitz: n_pairs must be positive");
  if (region.dim() == 0) throw ArgumentError("sampled_lipschitz: empty region");
  std::vector<std::size_t> open_dims;
  for (std::size_t d = 0; d < region.dim(); ++d) {
    const auto [lo, hi] = region.box[d];
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw ArgumentError("sampled_lipschitz: invalid interval in dimension " + std::to_string(d));
    }
    if (hi > lo) open_dims.push_back(d);
  }
  if (open_dims.empty()) throw ArgumentError("sampled_lipschitz: degenerate region (zero volume in every dimension)");

  LipEstimate best;
  Vector x(region.dim()), x2(region.dim());
  for (std::size_t j = 0; j < n_pairs; ++j) {
    PairRng rng(seed, j);
    for (std::size_t d = 0; d < region.dim(); ++d) x[d] = rng.uniform(region.box[d].first, region.box[d].second);
    if (j % 2 == 0) {
      for (std::size_t d = 0; d < region.dim(); ++d)
        x2[d] = rng.uniform(region.box[d].first, region.box[d].second);
    } else {
      x2 = x;
      const std::size_t d = open_dims[rng.below(open_dims.size())];
      const double delta = 1e-4 * region.width(d);
      x2[d] = x[d] + delta <= region.box[d].second ? x[d] + delta : x[d] - delta;
    }
    const double dist = max_norm(sub(x, x2));
    if (dist == 0.0) continue;
    const Vector fx = eval_checked(f, x, "sampled_lipschitz");
    const Vector fx2 = eval_checked(f, x2, "sampled_lipschitz");
    const double q = max_norm(sub(fx, fx2)) / dist;
    ++best.pairs_evaluated;
    const bool better = q > best.value || best.argmax_x.empty() ||
                        (q == best.value && (lex_less(x, best.argmax_x) ||
                                             (x == best.argmax_x && lex_less(x2, best.argmax_x2))));
    if (better) {
      best.value = q;
      best.argmax_x = x;
      best.argmax_x2 = x2;
    }
  }
  return best;
}

double directional_quotient(const VectorFn& f, const Vector& x, const Vector& direction, double step) {
  if (!(step > 0.0)) throw ArgumentError("directional_quotient: step must be positive");
  if (direction.size() != x.size()) throw ShapeError("directional_quotient: direction length mismatch");
  const double dn = max_norm(direction);
  if (dn == 0.0) throw ArgumentError("directional_quotient: zero direction");
  Vector xs = x;
  for (std::size_t k = 0; k < x.size(); ++k) xs[k] += step * direction[k];
  const Vector f0 = eval_checked(f, x, "directional_quotient");
  const Vector f1 = eval_checked(f, xs, "directional_quotient");
  return max_norm(sub(f1, f0)) / (step * dn);
}

}  // namespace lipcap
