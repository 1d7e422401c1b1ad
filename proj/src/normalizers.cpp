// SPDX-License-Identifier: Apache-2.0
#include "lipcap/normalizers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lipcap/error.hpp"

namespace lipcap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_eps(double eps, const char* who) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw ConfigError(std::string(who) + ": eps must be finite and non-negative");
  }
}

Vector gather(std::span<const double> x, const std::vector<std::size_t>& idx) {
  Vector out(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) out[k] = x[idx[k]];
  return out;
}

// Sound constant bounding the max-norm row sums of (I - 11^T/n - t y y^T).
double certified_ln_constant(std::size_t n) {
  const double nd = static_cast<double>(n);
  return 2.0 * (1.0 - 1.0 / nd) + std::sqrt(nd - 1.0);
}

double sigma_for(const NormalizerCfg& cfg, std::size_t group, double eps, bool use_recorded) {
  if (use_recorded && cfg.sigma_min) {
    const Vector& s = *cfg.sigma_min;
    return s.size() == 1 ? s[0] : s.at(group);
  }
  if (eps <= 0.0) throw ConfigError("sigma_min required: eps = 0 leaves no global fallback");
  return std::sqrt(eps);
}

double ln_like_factor(const NormalizerCfg& cfg, std::size_t n, bool certified, bool use_recorded) {
  return std::visit(
      overloaded{
          [](const NoNorm&) { return 1.0; },
          [](const BnStats& s) { return max_norm(bn_jacobian_diag(s)); },
          [&](const LnCfg& c) {
            const double sigma = sigma_for(cfg, 0, c.eps, use_recorded);
            const double nd = static_cast<double>(n);
            const double num = certified ? certified_ln_constant(n) : 1.0 - 1.0 / nd;
            return num / sigma;
          },
          [&](const GnCfg& c) {
            double best = 0.0;
            for (std::size_t k = 0; k < c.groups.size(); ++k) {
              const std::size_t sz = c.groups[k].size();
              const double sigma = sigma_for(cfg, k, c.eps, use_recorded);
              const double num =
                  certified ? certified_ln_constant(sz) : 1.0 - 1.0 / static_cast<double>(sz);
              best = std::max(best, num / sigma);
            }
            return best;
          },
      },
      cfg.kind);
}

}  // namespace

std::string to_string(NormKind k) {
  switch (k) {
    case NormKind::None: return "none";
    case NormKind::BN: return "bn";
    case NormKind::LN: return "ln";
    case NormKind::GN: return "gn";
  }
  return "?";
}

double mean_of(std::span<const double> v) {
  if (v.empty()) throw ShapeError("mean_of: empty input");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size());
}

void check_stats(const BnStats& s) {
  check_eps(s.eps, "BnStats");
  if (s.mu.size() != s.sigma2.size()) throw ConfigError("BnStats: mu and sigma2 lengths differ");
  for (double v : s.sigma2) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("BnStats: negative or non-finite variance");
  }
  if (!all_finite(s.mu)) throw ConfigError("BnStats: non-finite mean");
}

void check_groups(const GnCfg& c, std::size_t n) {
  check_eps(c.eps, "GnCfg");
  std::vector<int> seen(n, 0);
  for (std::size_t g = 0; g < c.groups.size(); ++g) {
    const auto& grp = c.groups[g];
    if (grp.size() < 2) {
      throw ConfigError("GnCfg: group " + std::to_string(g) + " has fewer than 2 indices");
    }
    for (std::size_t i : grp) {
      if (i >= n) {
        throw ConfigError("GnCfg: index " + std::to_string(i) + " outside width " + std::to_string(n));
      }
      if (seen[i]++) throw ConfigError("GnCfg: index " + std::to_string(i) + " in two groups");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw ConfigError("GnCfg: index " + std::to_string(i) + " not covered by any group");
  }
}

void check_normalizer(const NormalizerCfg& cfg, std::size_t n) {
  std::visit(overloaded{
                 [](const NoNorm&) {},
                 [&](const BnStats& s) {
                   check_stats(s);
                   if (s.mu.size() != n) {
                     throw ConfigError("BN statistics cover " + std::to_string(s.mu.size()) +
                                       " units, layer has " + std::to_string(n));
                   }
                 },
                 [&](const LnCfg& c) {
                   check_eps(c.eps, "LnCfg");
                   if (n < 2) throw ConfigError("LN requires width >= 2");
                   if (cfg.sigma_min && cfg.sigma_min->size() != 1) {
                     throw ConfigError("LN sigma_min must hold exactly one value");
                   }
                 },
                 [&](const GnCfg& c) {
                   check_groups(c, n);
                   if (cfg.sigma_min && cfg.sigma_min->size() != 1 &&
                       cfg.sigma_min->size() != c.groups.size()) {
                     throw ConfigError("GN sigma_min must hold one value or one per group");
                   }
                 },
             },
             cfg.kind);
  if (cfg.sigma_min) {
    for (double s : *cfg.sigma_min) {
      if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("sigma_min entries must be positive");
    }
  }
}

Vector bn_apply(std::span<const double> x, const BnStats& s) {
  check_stats(s);
  if (x.size() != s.mu.size()) throw ShapeError("bn_apply: input and statistics lengths differ");
  Vector out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double denom = std::sqrt(s.sigma2[k] + s.eps);
    if (denom == 0.0) throw ArgumentError("bn_apply: zero variance with eps = 0");
    out[k] = (x[k] - s.mu[k]) / denom;
  }
  return out;
}

Vector bn_jacobian_diag(const BnStats& s) {
  check_stats(s);
  Vector d(s.sigma2.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    const double denom = std::sqrt(s.sigma2[k] + s.eps);
    if (denom == 0.0) throw ArgumentError("bn_jacobian_diag: zero variance with eps = 0");
    d[k] = 1.0 / denom;
  }
  return d;
}

Vector ln_apply(std::span<const double> x, const LnCfg& c) {
  check_eps(c.eps, "ln_apply");
  if (x.size() < 2) throw ArgumentError("ln_apply: needs at least 2 entries");
  const double mu = mean_of(x);
  Vector y(x.size());
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = x[i] - mu;
    ss += y[i] * y[i];
  }
  const double s = std::sqrt(ss / static_cast<double>(x.size()) + c.eps);
  // eps = 0 with constant input: the eps -> 0+ limit is the zero vector.
  if (s == 0.0) return Vector(x.size(), 0.0);
  for (double& v : y) v /= s;
  return y;
}

Matrix ln_jacobian(std::span<const double> x, const LnCfg& c) {
  check_eps(c.eps, "ln_jacobian");
  const std::size_t n = x.size();
  if (n < 2) throw ArgumentError("ln_jacobian: needs at least 2 entries");
  const double nd = static_cast<double>(n);
  const double mu = mean_of(x);
  Vector y(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = x[i] - mu;
    ss += y[i] * y[i];
  }
  const double s = std::sqrt(ss / nd + c.eps);
  const double denom = ss + nd * c.eps;
  if (s == 0.0 || denom == 0.0) throw ArgumentError("ln_jacobian: undefined for constant input with eps = 0");

  // (I - y y^T / denom) applied to the centring projector (I - 11^T/n).
  Matrix j(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t col = 0; col < n; ++col) {
      const double centring = (r == col ? 1.0 : 0.0) - 1.0 / nd;
      // y is centred, so y^T (I - 11^T/n) = y^T.
      j(r, col) = (centring - y[r] * y[col] / denom) / s;
    }
  }
  return j;
}

Vector gn_apply(std::span<const double> x, const GnCfg& c) {
  check_groups(c, x.size());
  Vector out(x.size());
  const LnCfg ln{c.eps};
  for (const auto& grp : c.groups) {
    const Vector part = ln_apply(gather(x, grp), ln);
    for (std::size_t k = 0; k < grp.size(); ++k) out[grp[k]] = part[k];
  }
  return out;
}

Matrix gn_jacobian(std::span<const double> x, const GnCfg& c) {
  check_groups(c, x.size());
  Matrix j(x.size(), x.size());
  const LnCfg ln{c.eps};
  for (const auto& grp : c.groups) {
    const Matrix block = ln_jacobian(gather(x, grp), ln);
    for (std::size_t r = 0; r < grp.size(); ++r)
      for (std::size_t q = 0; q < grp.size(); ++q) j(grp[r], grp[q]) = block(r, q);
  }
  return j;
}

Vector normalize(std::span<const double> x, const NormalizerCfg& cfg) {
  return std::visit(overloaded{
                        [&](const NoNorm&) { return Vector(x.begin(), x.end()); },
                        [&](const BnStats& s) { return bn_apply(x, s); },
                        [&](const LnCfg& c) { return ln_apply(x, c); },
                        [&](const GnCfg& c) { return gn_apply(x, c); },
                    },
                    cfg.kind);
}

Matrix normalizer_jacobian(std::span<const double> x, const NormalizerCfg& cfg) {
  return std::visit(overloaded{
                        [&](const NoNorm&) { return Matrix::identity(x.size()); },
                        [&](const BnStats& s) {
                          if (x.size() != s.mu.size()) throw ShapeError("BN Jacobian: length mismatch");
                          const Vector d = bn_jacobian_diag(s);
                          Matrix j(d.size(), d.size());
                          for (std::size_t k = 0; k < d.size(); ++k) j(k, k) = d[k];
                          return j;
                        },
                        [&](const LnCfg& c) { return ln_jacobian(x, c); },
                        [&](const GnCfg& c) { return gn_jacobian(x, c); },
                    },
                    cfg.kind);
}

double norm_lipschitz(const NormalizerCfg& cfg, std::size_t n) {
  check_normalizer(cfg, n);
  return ln_like_factor(cfg, n, /*certified=*/false, /*use_recorded=*/true);
}

double certified_norm_lipschitz(const NormalizerCfg& cfg, std::size_t n) {
  check_normalizer(cfg, n);
  return ln_like_factor(cfg, n, /*certified=*/true, /*use_recorded=*/true);
}

double global_norm_lipschitz(const NormalizerCfg& cfg, std::size_t n) {
  check_normalizer(cfg, n);
  return ln_like_factor(cfg, n, /*certified=*/false, /*use_recorded=*/false);
}

Vector sigma_min_from_samples(const NormalizerCfg& cfg, std::span<const Vector> inputs) {
  if (inputs.empty()) throw ArgumentError("sigma_min_from_samples: no samples");
  const double inf = std::numeric_limits<double>::infinity();
  return std::visit(
      overloaded{
          [](const NoNorm&) { return Vector{}; },
          [](const BnStats&) { return Vector{}; },
          [&](const LnCfg& c) {
            double best = inf;
            for (const auto& x : inputs) best = std::min(best, std::sqrt(variance_of(x) + c.eps));
            return Vector{best};
          },
          [&](const GnCfg& c) {
            Vector best(c.groups.size(), inf);
            for (const auto& x : inputs) {
              for (std::size_t k = 0; k < c.groups.size(); ++k) {
                const Vector part = gather(x, c.groups[k]);
                best[k] = std::min(best[k], std::sqrt(variance_of(part) + c.eps));
              }
            }
            return best;
          },
      },
      cfg.kind);
}

}  // namespace lipcap
