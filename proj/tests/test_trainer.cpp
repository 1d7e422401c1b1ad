// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lipcap/error.hpp"
#include "lipcap/trainer.hpp"
#include "test_nets.hpp"

using namespace lipcap;

namespace {

NetworkSpec linear_one(Matrix w) {
  NetworkSpec s;
  s.input_dim = w.cols();
  s.layers.push_back({std::move(w), {}, Activation::Identity, {}});
  return s;
}

}  // namespace

TEST(HeInit, DeterministicAndShaped) {
  const std::vector<std::size_t> widths{3, 5, 2};
  const auto a = he_init(widths, 9), b = he_init(widths, 9), c = he_init(widths, 10);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_EQ(a.widths(), widths);
  EXPECT_EQ(a.layers[0].activation, Activation::ReLU);
  EXPECT_EQ(a.layers[1].activation, Activation::Identity);
}

TEST(HeInit, EntryVariance) {
  const Matrix m = he_normal(512, 512, 1, 1);
  double s = 0.0, s2 = 0.0;
  for (double v : m.data()) {
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(m.data().size());
  const double var = s2 / n - (s / n) * (s / n);
  EXPECT_NEAR(var, 2.0 / 512.0, 0.1 * 2.0 / 512.0);
}

TEST(Loss, L1Examples) {
  EXPECT_EQ(loss_l1(Vector{1, 2}, Vector{1, 2}), 0.0);
  EXPECT_EQ(loss_l1(Vector{0, 0}, Vector{1, 0}), 1.0);
  std::mt19937_64 g(70);
  for (int t = 0; t < 20; ++t) {
    const Vector a = test::rand_vec(g, 4), b = test::rand_vec(g, 4);
    EXPECT_EQ(loss_l1(a, b), loss_l1(b, a));
  }
  EXPECT_THROW(loss_l1(Vector{1}, Vector{1, 2}), ShapeError);
  EXPECT_EQ(loss_gradient(LossKind::L1, Vector{1, 2}, Vector{1, 0}), (Vector{0, 1}));
}

TEST(Backward, LinearMseHandDerivation) {
  const Matrix w{{0.5, -1.0}, {2.0, 0.25}};
  const auto s = linear_one(w);
  const Vector x{1.5, -2.0}, y{0.3, 1.0};
  const Vector r = sub(matvec(w, x), y);
  const auto g = backward(s, std::vector<Vector>{x}, std::vector<Vector>{y}, LossKind::MSE, BnMode::Frozen);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(g.dw[0](i, j), 2.0 * r[i] * x[j], 1e-14);
  }
}

TEST(Backward, ZeroBatchGivesZeroGradients) {
  std::mt19937_64 g(71);
  const auto s = test::random_spec(g, 3, 2, 5, test::NormChoice::None);
  const std::vector<Vector> batch(3, Vector(s.input_dim, 0.0));
  const std::vector<Vector> targets(3, Vector(s.layers.back().width(), 0.0));
  const auto gr = backward(s, batch, targets, LossKind::MSE, BnMode::Frozen);
  for (const auto& m : gr.dw) {
    for (double v : m.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Backward, FiniteDifferenceBattery) {
  std::mt19937_64 g(72);
  struct Kind {
    test::NormChoice norm;
    BnMode mode;
  };
  const Kind kinds[] = {{test::NormChoice::None, BnMode::Frozen},
                        {test::NormChoice::BN, BnMode::Batch},
                        {test::NormChoice::BN, BnMode::Frozen},
                        {test::NormChoice::LN, BnMode::Frozen},
                        {test::NormChoice::GN, BnMode::Frozen}};
  for (const auto& k : kinds) {
    for (int t = 0; t < 30; ++t) {
      const auto c = test::random_grad_case(g, k.norm, k.mode, t % 3 == 0 ? LossKind::L1 : LossKind::MSE);
      EXPECT_LE(test::grad_check_error(c), 1e-5) << "kind " << static_cast<int>(k.norm) << " trial " << t;
    }
  }
}

TEST(Train, ZeroLearningRateKeepsWeights) {
  const Dataset d = make_blobs(64, 2, 2, 3.0, 0.5, 1);
  const auto s = he_init(std::vector<std::size_t>{2, 6, 2}, 3);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.batch_size = 16;
  cfg.epochs = 2;
  const auto r = train(s, d, cfg);
  EXPECT_EQ(r.spec, s);
  for (const auto& row : r.trace.rows) EXPECT_EQ(row.pw_product, r.trace.rows.front().pw_product);
}

TEST(Train, SingleSgdStepMatchesHandComputation) {
  const Matrix w{{0.5, -1.0}, {2.0, 0.25}};
  const Vector x{1.5, -2.0}, y{0.3, 1.0};
  Dataset d;
  d.x = {x};
  d.y = {y};
  TrainConfig cfg;
  cfg.optimizer = Optimizer::SGD;
  cfg.loss = LossKind::MSE;
  cfg.learning_rate = 0.01;
  cfg.weight_decay = 0.0;
  cfg.batch_size = 1;
  const auto r = train(linear_one(w), d, cfg);
  const Vector res = sub(matvec(w, x), y);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(r.spec.layers[0].weights(i, j), w(i, j) - 0.01 * 2.0 * res[i] * x[j], 1e-15);
    }
  }
}

TEST(Train, DeterministicPerSeed) {
  const Dataset d = make_blobs(100, 2, 3, 3.0, 0.6, 2);
  auto s = with_normalizers(he_init(std::vector<std::size_t>{2, 8, 8, 3}, 4), NormKind::BN, false);
  TrainConfig cfg;
  cfg.batch_size = 32;
  cfg.epochs = 3;
  cfg.seed = 11;
  const auto a = train(s, d, cfg), b = train(s, d, cfg);
  ASSERT_EQ(a.trace.rows.size(), b.trace.rows.size());
  for (std::size_t k = 0; k < a.trace.rows.size(); ++k) {
    EXPECT_EQ(a.trace.rows[k].pw_product, b.trace.rows[k].pw_product);
    EXPECT_EQ(a.trace.rows[k].var_mean, b.trace.rows[k].var_mean);
    EXPECT_EQ(a.trace.rows[k].train_loss, b.trace.rows[k].train_loss);
  }
  EXPECT_EQ(a.spec, b.spec);
}

TEST(Train, TraceConsistencyAndInstrumentation) {
  const Dataset d = make_blobs(90, 2, 3, 3.0, 0.6, 3);
  const std::vector<std::size_t> widths{2, 6, 6, 3};
  for (NormKind kind : {NormKind::None, NormKind::BN, NormKind::LN, NormKind::GN}) {
    const auto s = with_normalizers(he_init(widths, 5), kind, false);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.epochs = 2;
    cfg.seed = 8;
    cfg.optimizer = Optimizer::SGD;
    cfg.learning_rate = 0.05;
    const auto r = train(s, d, cfg);
    const std::size_t K = s.depth();
    ASSERT_EQ(r.trace.rows.size() % K, 0u);

    // Replay: same shuffles, same updates, independent variance computation.
    NetworkSpec replay = s;
    std::size_t row = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      const auto order = epoch_order(d.size(), cfg.seed, epoch);
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        std::vector<Vector> xb, tb;
        for (std::size_t k = start; k < std::min(order.size(), start + cfg.batch_size); ++k) {
          xb.push_back(d.x[order[k]]);
          tb.push_back(d.y[order[k]]);
        }
        const auto var = batch_prenorm_variance(replay, xb, BnMode::Batch);
        double prod = 1.0;
        for (std::size_t i = 0; i < K; ++i) prod *= r.trace.rows[row + i].w_norm;
        for (std::size_t i = 0; i < K; ++i) {
          const auto& tr = r.trace.rows[row + i];
          EXPECT_LE(test::rel_diff(tr.pw_product, prod), 1e-10);
          EXPECT_LE(std::abs(tr.var_mean - var[i].mean), 1e-10 * std::max(1.0, var[i].mean));
          EXPECT_LE(std::abs(tr.var_max - var[i].max), 1e-10 * std::max(1.0, var[i].max));
        }
        const auto gr = backward(replay, xb, tb, cfg.loss, BnMode::Batch);
        for (std::size_t i = 0; i < K; ++i) {
          auto& w = replay.layers[i].weights.data();
          for (std::size_t e = 0; e < w.size(); ++e) {
            w[e] -= cfg.learning_rate * (gr.dw[i].data()[e] + cfg.weight_decay * w[e]);
          }
        }
        row += K;
      }
    }
    EXPECT_EQ(row, r.trace.rows.size());
  }
}

TEST(Train, Errors) {
  const auto s = he_init(std::vector<std::size_t>{2, 3, 2}, 1);
  EXPECT_THROW(train(s, Dataset{}, TrainConfig{}), ArgumentError);
  const Dataset d = make_blobs(10, 2, 3, 3.0, 0.5, 1);
  EXPECT_THROW(train(s, d, TrainConfig{}), ShapeError);  // 3 classes vs 2 outputs
  EXPECT_THROW(parse_optimizer("rmsprop"), ArgumentError);
}

TEST(Train, NonFiniteLossAborts) {
  auto s = he_init(std::vector<std::size_t>{2, 3, 2}, 1);
  for (double& w : s.layers[0].weights.data()) w = 1e300;
  for (double& w : s.layers[1].weights.data()) w = 1e300;
  const Dataset d = make_blobs(10, 2, 2, 3.0, 0.5, 1);
  try {
    train(s, d, TrainConfig{});
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }
}

TEST(EpochOrder, Permutation) {
  auto o = epoch_order(50, 3, 1);
  EXPECT_EQ(o, epoch_order(50, 3, 1));
  EXPECT_NE(o, epoch_order(50, 3, 2));
  std::sort(o.begin(), o.end());
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(o[k], k);
}
