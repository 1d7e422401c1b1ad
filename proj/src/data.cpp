// SPDX-License-Identifier: Apache-2.0
#include "lipcap/data.hpp"

#include <cmath>
#include <numbers>

#include "lipcap/error.hpp"
#include "lipcap/lipestimate.hpp"

namespace lipcap {

void check_dataset(const Dataset& d) {
  if (d.x.size() != d.y.size()) {
    throw ShapeError("dataset: " + std::to_string(d.x.size()) + " inputs but " + std::to_string(d.y.size()) +
                     " targets");
  }
  if (!d.labels.empty() && d.labels.size() != d.x.size()) throw ShapeError("dataset: label count mismatch");
  for (std::size_t r = 0; r < d.x.size(); ++r) {
    if (d.x[r].size() != d.dim()) throw ShapeError("dataset: ragged input row " + std::to_string(r));
    if (d.y[r].size() != d.out_dim()) throw ShapeError("dataset: ragged target row " + std::to_string(r));
  }
}

Vector one_hot(std::size_t label, std::size_t classes) {
  if (label >= classes) {
    throw ArgumentError("one_hot: label " + std::to_string(label) + " >= " + std::to_string(classes) + " classes");
  }
  Vector v(classes, 0.0);
  v[label] = 1.0;
  return v;
}

Dataset make_labelled(std::vector<Vector> x, std::vector<std::size_t> labels, std::size_t classes) {
  if (x.size() != labels.size()) throw ShapeError("make_labelled: label count mismatch");
  Dataset d;
  d.y.reserve(labels.size());
  for (std::size_t l : labels) d.y.push_back(one_hot(l, classes));
  d.x = std::move(x);
  d.labels = std::move(labels);
  check_dataset(d);
  return d;
}

std::string to_string(LossKind k) { return k == LossKind::L1 ? "l1" : "mse"; }

LossKind parse_loss(const std::string& name) {
  if (name == "l1") return LossKind::L1;
  if (name == "mse") return LossKind::MSE;
  throw ArgumentError("unknown loss '" + name + "' (expected l1|mse)");
}

namespace {
void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("loss: prediction/target length mismatch");
}
}  // namespace

double loss_l1(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target);
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) s += std::abs(pred[k] - target[k]);
  return s;
}

double loss_mse(std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target);
  double s = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) s += (pred[k] - target[k]) * (pred[k] - target[k]);
  return s;
}

double loss_value(LossKind k, std::span<const double> pred, std::span<const double> target) {
  return k == LossKind::L1 ? loss_l1(pred, target) : loss_mse(pred, target);
}

Vector loss_gradient(LossKind k, std::span<const double> pred, std::span<const double> target) {
  check_pair(pred, target);
  Vector g(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    g[i] = k == LossKind::L1 ? static_cast<double>((d > 0.0) - (d < 0.0)) : 2.0 * d;
  }
  return g;
}

std::size_t argmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  return best;
}

Dataset make_blobs(std::size_t n, std::size_t dim, std::size_t classes, double separation, double spread,
                   std::uint64_t seed) {
  if (n == 0 || classes < 2 || dim < 2) throw ArgumentError("make_blobs: need n >= 1, dim >= 2, classes >= 2");
  if (!(spread > 0.0)) throw ArgumentError("make_blobs: spread must be positive");
  PairRng rng(seed, 0);
  std::vector<Vector> xs;
  std::vector<std::size_t> labels;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = r % classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    Vector x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = spread * rng.normal();
    x[0] += separation * std::cos(angle);
    x[1] += separation * std::sin(angle);
    xs.push_back(std::move(x));
    labels.push_back(c);
  }
  return make_labelled(std::move(xs), std::move(labels), classes);
}

Dataset make_annulus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ArgumentError("make_annulus: n must be positive");
  PairRng rng(seed, 0);
  std::vector<Vector> xs;
  std::vector<std::size_t> labels;
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = r % 2;
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    // Uniform in area within each band.
    const double rad = c == 0 ? std::sqrt(rng.uniform()) : std::sqrt(rng.uniform(1.5 * 1.5, 2.5 * 2.5));
    xs.push_back({rad * std::cos(angle), rad * std::sin(angle)});
    labels.push_back(c);
  }
  return make_labelled(std::move(xs), std::move(labels), 2);
}

}  // namespace lipcap
