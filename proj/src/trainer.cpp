// SPDX-License-Identifier: Apache-2.0
#include "lipcap/trainer.hpp"

#include <cmath>
#include <numeric>

#include "lipcap/error.hpp"
#include "lipcap/lipestimate.hpp"

namespace lipcap {

Matrix he_normal(std::size_t rows, std::size_t cols, std::uint64_t seed, std::uint64_t stream) {
  if (rows == 0 || cols == 0) throw ArgumentError("he_normal: dimensions must be positive");
  PairRng rng(seed, stream);
  const double sd = std::sqrt(2.0 / static_cast<double>(cols));
  Matrix m(rows, cols);
  for (double& v : m.data()) v = sd * rng.normal();
  return m;
}

NetworkSpec he_init(std::span<const std::size_t> widths, std::uint64_t seed) {
  if (widths.size() < 2) throw ArgumentError("he_init: need at least input and output widths");
  NetworkSpec s;
  s.input_dim = widths[0];
  for (std::size_t k = 1; k < widths.size(); ++k) {
    LayerSpec l;
    l.weights = he_normal(widths[k], widths[k - 1], seed, k);
    l.activation = k + 1 == widths.size() ? Activation::Identity : Activation::ReLU;
    s.layers.push_back(std::move(l));
  }
  return s;
}

NetworkSpec with_normalizers(NetworkSpec spec, NormKind kind, bool include_output, std::size_t gn_groups,
                             double eps) {
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    if (!include_output && i + 1 == spec.depth()) break;
    auto& l = spec.layers[i];
    const std::size_t n = l.width();
    switch (kind) {
      case NormKind::None: l.norm = NormalizerCfg::none(); break;
      case NormKind::BN: l.norm = NormalizerCfg::bn({Vector(n, 0.0), Vector(n, 1.0), eps}); break;
      case NormKind::LN: l.norm = NormalizerCfg::ln({eps}); break;
      case NormKind::GN: {
        if (gn_groups == 0 || n / gn_groups < 2) {
          throw ConfigError("layer " + std::to_string(i + 1) + ": width " + std::to_string(n) + " cannot hold " +
                            std::to_string(gn_groups) + " groups of size >= 2");
        }
        GnCfg g;
        g.eps = eps;
        const std::size_t base = n / gn_groups;
        std::size_t start = 0;
        for (std::size_t k = 0; k < gn_groups; ++k) {
          const std::size_t len = k + 1 == gn_groups ? n - start : base;
          std::vector<std::size_t> idx(len);
          std::iota(idx.begin(), idx.end(), start);
          g.groups.push_back(std::move(idx));
          start += len;
        }
        l.norm = NormalizerCfg::gn(std::move(g));
        break;
      }
    }
  }
  return spec;
}

namespace {

// Backward through standardization z = (y - mean) / s over one index set:
// dy = (dz - mean(dz) - z mean(dz z)) / s.
void standardize_backward(std::span<const double> z, std::span<const double> dz, double s, std::span<double> dy) {
  const double n = static_cast<double>(z.size());
  double mdz = 0.0, mdzz = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    mdz += dz[k];
    mdzz += dz[k] * z[k];
  }
  mdz /= n;
  mdzz /= n;
  for (std::size_t k = 0; k < z.size(); ++k) dy[k] = (dz[k] - mdz - z[k] * mdzz) / s;
}

double spread(std::span<const double> v, double eps) {
  const double s = std::sqrt(variance_of(v) + eps);
  if (!(s > 0.0)) throw NumericError("backward: zero variance with eps = 0");
  return s;
}

void check_batch(const NetworkSpec& spec, std::span<const Vector> batch, std::span<const Vector> targets) {
  if (batch.empty()) throw ArgumentError("backward: empty batch");
  if (batch.size() != targets.size()) throw ShapeError("backward: batch/target count mismatch");
  if (spec.depth() == 0) throw ArgumentError("backward: empty network");
  const std::size_t out = spec.layers.back().width();
  for (const auto& t : targets) {
    if (t.size() != out) throw ShapeError("backward: target width does not match output width");
  }
}

}  // namespace

double batch_loss(const NetworkSpec& spec, std::span<const Vector> batch, std::span<const Vector> targets,
                  LossKind loss, BnMode mode) {
  check_batch(spec, batch, targets);
  const auto traces = forward_batch(spec, batch, mode);
  double s = 0.0;
  for (std::size_t b = 0; b < batch.size(); ++b) s += loss_value(loss, traces[b].back().output, targets[b]);
  return s / static_cast<double>(batch.size());
}

Gradients backward(const NetworkSpec& spec, std::span<const Vector> batch, std::span<const Vector> targets,
                   LossKind loss, BnMode mode) {
  check_batch(spec, batch, targets);
  const auto traces = forward_batch(spec, batch, mode);
  const std::size_t B = batch.size();
  const std::size_t K = spec.depth();
  const double inv_b = 1.0 / static_cast<double>(B);

  Gradients g;
  g.dw.reserve(K);
  for (const auto& l : spec.layers) g.dw.emplace_back(l.weights.rows(), l.weights.cols());

  std::vector<Vector> dh(B);
  for (std::size_t b = 0; b < B; ++b) {
    const Vector& out = traces[b].back().output;
    g.loss += loss_value(loss, out, targets[b]);
    dh[b] = scale(loss_gradient(loss, out, targets[b]), inv_b);
  }
  g.loss *= inv_b;

  for (std::size_t i = K; i-- > 0;) {
    const auto& layer = spec.layers[i];
    const std::size_t n = layer.width();

    std::vector<Vector> dz(B, Vector(n));
    for (std::size_t b = 0; b < B; ++b) {
      const auto& z = traces[b][i].post_norm;
      for (std::size_t k = 0; k < n; ++k) dz[b][k] = dh[b][k] * activate_derivative(layer.activation, z[k]);
    }

    std::vector<Vector> dy(B, Vector(n));
    switch (layer.norm.tag()) {
      case NormKind::None: dy = dz; break;
      case NormKind::BN: {
        const auto& st = std::get<BnStats>(layer.norm.kind);
        if (mode == BnMode::Frozen) {
          for (std::size_t k = 0; k < n; ++k) {
            const double s = std::sqrt(st.sigma2[k] + st.eps);
            for (std::size_t b = 0; b < B; ++b) dy[b][k] = dz[b][k] / s;
          }
          break;
        }
        Vector col(B), zc(B), dzc(B), dyc(B);
        for (std::size_t k = 0; k < n; ++k) {
          for (std::size_t b = 0; b < B; ++b) {
            col[b] = traces[b][i].pre_norm[k];
            zc[b] = traces[b][i].post_norm[k];
            dzc[b] = dz[b][k];
          }
          standardize_backward(zc, dzc, spread(col, st.eps), dyc);
          for (std::size_t b = 0; b < B; ++b) dy[b][k] = dyc[b];
        }
        break;
      }
      case NormKind::LN: {
        const double eps = std::get<LnCfg>(layer.norm.kind).eps;
        for (std::size_t b = 0; b < B; ++b) {
          standardize_backward(traces[b][i].post_norm, dz[b], spread(traces[b][i].pre_norm, eps), dy[b]);
        }
        break;
      }
      case NormKind::GN: {
        const auto& gn = std::get<GnCfg>(layer.norm.kind);
        for (std::size_t b = 0; b < B; ++b) {
          for (const auto& grp : gn.groups) {
            Vector y(grp.size()), z(grp.size()), d(grp.size()), out(grp.size());
            for (std::size_t k = 0; k < grp.size(); ++k) {
              y[k] = traces[b][i].pre_norm[grp[k]];
              z[k] = traces[b][i].post_norm[grp[k]];
              d[k] = dz[b][grp[k]];
            }
            standardize_backward(z, d, spread(y, gn.eps), out);
            for (std::size_t k = 0; k < grp.size(); ++k) dy[b][grp[k]] = out[k];
          }
        }
        break;
      }
    }

    Matrix& dw = g.dw[i];
    for (std::size_t b = 0; b < B; ++b) {
      const Vector& h_prev = i == 0 ? batch[b] : traces[b][i - 1].output;
      for (std::size_t r = 0; r < n; ++r) {
        if (dy[b][r] == 0.0) continue;
        for (std::size_t c = 0; c < h_prev.size(); ++c) dw(r, c) += dy[b][r] * h_prev[c];
      }
    }
    if (i > 0) {
      const std::size_t n_prev = layer.weights.cols();
      for (std::size_t b = 0; b < B; ++b) {
        Vector d(n_prev, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
          for (std::size_t c = 0; c < n_prev; ++c) d[c] += layer.weights(r, c) * dy[b][r];
        }
        dh[b] = std::move(d);
      }
    }
  }
  return g;
}

std::string to_string(Optimizer o) { return o == Optimizer::SGD ? "sgd" : "adam"; }

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::SGD;
  if (name == "adam") return Optimizer::Adam;
  throw ArgumentError("unknown optimizer '" + name + "' (expected sgd|adam)");
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  PairRng rng(seed, 0x5eed0000ULL + epoch);
  for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
  return order;
}

std::vector<double> batch_normalizer_factors(const NetworkSpec& spec, std::span<const NetworkTrace> traces) {
  if (traces.empty()) throw ArgumentError("batch_normalizer_factors: empty batch");
  std::vector<double> out;
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    const auto& layer = spec.layers[i];
    std::vector<Vector> ys;
    ys.reserve(traces.size());
    for (const auto& t : traces) ys.push_back(t[i].pre_norm);
    NormalizerCfg cfg = layer.norm;
    switch (cfg.tag()) {
      case NormKind::None: out.push_back(1.0); continue;
      case NormKind::BN: {
        const double eps = std::get<BnStats>(cfg.kind).eps;
        BnStats s{Vector(layer.width()), Vector(layer.width()), eps};
        Vector col(ys.size());
        for (std::size_t k = 0; k < layer.width(); ++k) {
          for (std::size_t b = 0; b < ys.size(); ++b) col[b] = ys[b][k];
          s.mu[k] = mean_of(col);
          s.sigma2[k] = variance_of(col);
        }
        cfg.kind = std::move(s);
        break;
      }
      case NormKind::LN:
      case NormKind::GN: cfg.sigma_min = sigma_min_from_samples(cfg, ys); break;
    }
    out.push_back(norm_lipschitz(cfg, layer.width()));
  }
  return out;
}

namespace {

struct AdamState {
  std::vector<Matrix> m, v;
  std::size_t t = 0;
};

std::string norms_summary(const NetworkSpec& spec) {
  std::string s;
  for (std::size_t i = 0; i < spec.depth(); ++i) {
    if (i) s += ", ";
    s += "layer " + std::to_string(i + 1) + " |W| = " + std::to_string(inf_norm(spec.layers[i].weights));
  }
  return s;
}

}  // namespace

TrainResult train(const NetworkSpec& spec_in, const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw ArgumentError("train: empty dataset");
  check_dataset(data);
  if (cfg.batch_size == 0 || cfg.epochs == 0) throw ArgumentError("train: batch_size and epochs must be positive");
  if (!(cfg.learning_rate >= 0.0) || !(cfg.weight_decay >= 0.0)) {
    throw ArgumentError("train: learning rate and weight decay must be non-negative");
  }
  if (!(cfg.bn_momentum >= 0.0 && cfg.bn_momentum <= 1.0)) throw ArgumentError("train: bn_momentum must lie in [0, 1]");
  if (data.dim() != spec_in.input_dim) throw ShapeError("train: data dimension does not match model input");
  if (spec_in.depth() == 0 || data.out_dim() != spec_in.layers.back().width()) {
    throw ShapeError("train: target width does not match model output");
  }

  TrainResult res;
  res.spec = spec_in;
  NetworkSpec& spec = res.spec;
  const std::size_t K = spec.depth();

  AdamState adam;
  for (const auto& l : spec.layers) {
    adam.m.emplace_back(l.weights.rows(), l.weights.cols());
    adam.v.emplace_back(l.weights.rows(), l.weights.cols());
  }
  constexpr double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;

  std::size_t step = 0;
  std::vector<Vector> xb, tb;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(data.size(), cfg.seed, epoch);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++step) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      xb.clear();
      tb.clear();
      for (std::size_t k = start; k < end; ++k) {
        xb.push_back(data.x[order[k]]);
        tb.push_back(data.y[order[k]]);
      }

      // Instrumentation on the current weights and batch.
      const auto traces = forward_batch(spec, xb, cfg.bn_mode);
      const auto var = summarize_prenorm_variance(traces);
      const auto factors = batch_normalizer_factors(spec, traces);
      double inv_sigma = 1.0;
      for (double f : factors) inv_sigma *= f;
      double loss = 0.0;
      std::size_t correct = 0;
      for (std::size_t b = 0; b < xb.size(); ++b) {
        const Vector& out = traces[b].back().output;
        loss += loss_value(cfg.loss, out, tb[b]);
        if (argmax(out) == argmax(tb[b])) ++correct;
      }
      loss /= static_cast<double>(xb.size());
      if (!std::isfinite(loss)) {
        throw NumericError("train: non-finite loss at step " + std::to_string(step) + " (" + norms_summary(spec) + ")");
      }
      std::vector<double> norms(K);
      double pw = 1.0;
      for (std::size_t i = 0; i < K; ++i) {
        norms[i] = inf_norm(spec.layers[i].weights);
        pw *= norms[i];
      }
      for (std::size_t i = 0; i < K; ++i) {
        TraceRow row;
        row.step = step;
        row.epoch = epoch;
        row.layer = i + 1;
        row.w_norm = norms[i];
        row.pw_product = pw;
        row.var_mean = var[i].mean;
        row.var_max = var[i].max;
        row.inv_sigma_product = inv_sigma;
        row.train_acc = static_cast<double>(correct) / static_cast<double>(xb.size());
        row.train_loss = loss;
        res.trace.rows.push_back(row);
      }

      Gradients g = backward(spec, xb, tb, cfg.loss, cfg.bn_mode);
      ++adam.t;
      for (std::size_t i = 0; i < K; ++i) {
        auto& w = spec.layers[i].weights.data();
        auto& gw = g.dw[i].data();
        for (std::size_t e = 0; e < w.size(); ++e) {
          const double grad = gw[e] + cfg.weight_decay * w[e];
          if (cfg.optimizer == Optimizer::SGD) {
            w[e] -= cfg.learning_rate * grad;
            continue;
          }
          double& m = adam.m[i].data()[e];
          double& v = adam.v[i].data()[e];
          m = b1 * m + (1.0 - b1) * grad;
          v = b2 * v + (1.0 - b2) * grad * grad;
          const double mh = m / (1.0 - std::pow(b1, static_cast<double>(adam.t)));
          const double vh = v / (1.0 - std::pow(b2, static_cast<double>(adam.t)));
          w[e] -= cfg.learning_rate * mh / (std::sqrt(vh) + adam_eps);
        }
      }

      // Running BN statistics from the batch just seen.
      if (cfg.bn_mode == BnMode::Batch) {
        for (std::size_t i = 0; i < K; ++i) {
          auto* st = std::get_if<BnStats>(&spec.layers[i].norm.kind);
          if (!st) continue;
          Vector col(xb.size());
          for (std::size_t k = 0; k < st->mu.size(); ++k) {
            for (std::size_t b = 0; b < xb.size(); ++b) col[b] = traces[b][i].pre_norm[k];
            st->mu[k] = (1.0 - cfg.bn_momentum) * st->mu[k] + cfg.bn_momentum * mean_of(col);
            st->sigma2[k] = (1.0 - cfg.bn_momentum) * st->sigma2[k] + cfg.bn_momentum * variance_of(col);
          }
        }
      }
    }
  }
  return res;
}

}  // namespace lipcap
