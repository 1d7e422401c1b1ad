// SPDX-License-Identifier: Apache-2.0
//
// Batch, layer and group normalization without affine parameters: forward
// maps, Jacobians and Lipschitz factors in the max norm.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lipcap/linalg.hpp"

namespace lipcap {

inline constexpr double kDefaultEps = 1e-5;

/// Recorded per-unit statistics for batch normalization.
struct BnStats {
  Vector mu;
  Vector sigma2;
  double eps = kDefaultEps;

  bool operator==(const BnStats&) const = default;
};

struct LnCfg {
  double eps = kDefaultEps;

  bool operator==(const LnCfg&) const = default;
};

/// Group normalization over disjoint index sets (0-based) covering [0, n).
struct GnCfg {
  std::vector<std::vector<std::size_t>> groups;
  double eps = kDefaultEps;

  bool operator==(const GnCfg&) const = default;
};

struct NoNorm {
  bool operator==(const NoNorm&) const = default;
};

enum class NormKind { None, BN, LN, GN };

/// Per-layer normalizer. `sigma_min` holds recorded minima of sqrt(var + eps):
/// one value for LN, one per group (or a single shared value) for GN. It is
/// ignored for BN, whose factor is exact from the statistics.
struct NormalizerCfg {
  std::variant<NoNorm, BnStats, LnCfg, GnCfg> kind = NoNorm{};
  std::optional<Vector> sigma_min;

  NormKind tag() const { return static_cast<NormKind>(kind.index()); }
  bool operator==(const NormalizerCfg&) const = default;

  static NormalizerCfg none() { return {}; }
  static NormalizerCfg bn(BnStats s) { return {std::move(s), std::nullopt}; }
  static NormalizerCfg ln(LnCfg c, std::optional<Vector> sigma_min = std::nullopt) {
    return {c, std::move(sigma_min)};
  }
  static NormalizerCfg gn(GnCfg c, std::optional<Vector> sigma_min = std::nullopt) {
    return {std::move(c), std::move(sigma_min)};
  }
};

std::string to_string(NormKind k);

/// Throws ConfigError if the statistics are inconsistent.
void check_stats(const BnStats& s);
/// Throws ConfigError unless the groups partition [0, n) with sizes >= 2.
void check_groups(const GnCfg& c, std::size_t n);
/// Checks kind-specific invariants against layer width n.
void check_normalizer(const NormalizerCfg& cfg, std::size_t n);

Vector bn_apply(std::span<const double> x, const BnStats& s);
/// Diagonal of the BN Jacobian, 1/sqrt(sigma_k^2 + eps); independent of x.
Vector bn_jacobian_diag(const BnStats& s);

Vector ln_apply(std::span<const double> x, const LnCfg& c);
/// (1/s)(I - y y^T / (|y|_2^2 + n eps))(I - 11^T/n) with y the centred input.
Matrix ln_jacobian(std::span<const double> x, const LnCfg& c);

Vector gn_apply(std::span<const double> x, const GnCfg& c);
/// Block-diagonal Jacobian assembled from per-group LN Jacobians.
Matrix gn_jacobian(std::span<const double> x, const GnCfg& c);

/// Dispatches on the normalizer kind; NoNorm is the identity.
Vector normalize(std::span<const double> x, const NormalizerCfg& cfg);
Matrix normalizer_jacobian(std::span<const double> x, const NormalizerCfg& cfg);

/// Lipschitz factor of a normalizer on a width-n layer in the usual
/// closed form:
///   BN -> max_k 1/sqrt(sigma_k^2 + eps)                    (exact)
///   LN -> (1 - 1/n) / sigma_min, fallback (1 - 1/n)/sqrt(eps)
///   GN -> max_k (1 - 1/|S_k|) / sigma_min_k, fallback sqrt(eps)
///   None -> 1
/// For LN/GN the stated constant is not a sound bound in the max norm; see
/// certified_norm_lipschitz.
double norm_lipschitz(const NormalizerCfg& cfg, std::size_t n);

/// Sound replacement for the LN/GN factor: the Jacobian row sums are bounded
/// by (2(1 - 1/n) + sqrt(n - 1)) / sigma. Identical to norm_lipschitz for BN
/// and None.
double certified_norm_lipschitz(const NormalizerCfg& cfg, std::size_t n);

/// Same as norm_lipschitz but always uses the global sqrt(eps) fallback for
/// LN/GN, ignoring recorded statistics.
double global_norm_lipschitz(const NormalizerCfg& cfg, std::size_t n);

/// Minimum of sqrt(var + eps) over the supplied pre-normalization inputs:
/// one entry for LN, one per group for GN. Empty for BN/None.
Vector sigma_min_from_samples(const NormalizerCfg& cfg, std::span<const Vector> inputs);

/// Population mean and variance of a span.
double mean_of(std::span<const double> v);
double variance_of(std::span<const double> v);

}  // namespace lipcap
