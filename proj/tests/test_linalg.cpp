// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "lipcap/error.hpp"
#include "lipcap/linalg.hpp"
#include "test_util.hpp"

using namespace lipcap;

TEST(InfNorm, Examples) {
  EXPECT_EQ(inf_norm(Matrix::identity(3)), 1.0);
  EXPECT_EQ(inf_norm(Matrix{{1, -2}, {3, 4}}), 7.0);
  EXPECT_EQ(inf_norm(Matrix(2, 5)), 0.0);
}

TEST(InfNorm, MalformedMatrixIsShapeError) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST(MaxNorm, Examples) {
  EXPECT_EQ(max_norm(Vector{1, -5, 3}), 5.0);
  EXPECT_EQ(max_norm(Vector{0, 0}), 0.0);
  EXPECT_EQ(max_norm(Vector{-2}), 2.0);
  EXPECT_THROW(max_norm(Vector{}), ShapeError);
}

TEST(TruncatePad, Examples) {
  EXPECT_EQ(truncate_pad(Vector{1, 2, 3}, 2), (Vector{1, 2}));
  EXPECT_EQ(truncate_pad(Vector{1, 2, 3}, 5), (Vector{1, 2, 3, 0, 0}));
  EXPECT_EQ(truncate_pad(Vector{1, 2, 3}, 3), (Vector{1, 2, 3}));
  EXPECT_THROW(truncate_pad(Vector{1}, 0), ArgumentError);
}

TEST(ChainTruncatePad, Examples) {
  const std::vector<std::size_t> a{2, 4}, b{2, 2, 2}, c{1, 3}, none{};
  EXPECT_EQ(chain_truncate_pad(Vector{1, 2, 3}, a), (Vector{1, 2, 0, 0}));
  EXPECT_EQ(chain_truncate_pad(Vector{1, 2}, b), (Vector{1, 2}));
  EXPECT_EQ(chain_truncate_pad(Vector{5, 6, 7}, c), (Vector{5, 0, 0}));
  EXPECT_THROW(chain_truncate_pad(Vector{1}, none), ArgumentError);
}

TEST(ChainTruncatePad, SingleElementEqualsTruncatePad) {
  std::mt19937_64 g(1);
  for (int t = 0; t < 100; ++t) {
    const Vector v = test::rand_vec(g, test::rand_int(g, 1, 8));
    const std::size_t m = test::rand_int(g, 1, 10);
    const std::vector<std::size_t> ms{m};
    EXPECT_EQ(chain_truncate_pad(v, ms), truncate_pad(v, m));
  }
}

TEST(ChainTruncatePad, NondecreasingChainEqualsLast) {
  std::mt19937_64 g(2);
  for (int t = 0; t < 100; ++t) {
    const Vector v = test::rand_vec(g, test::rand_int(g, 1, 6));
    std::vector<std::size_t> ms{test::rand_int(g, v.size(), 8)};
    for (int k = 0; k < 3; ++k) ms.push_back(ms.back() + test::rand_int(g, 0, 2));
    EXPECT_EQ(chain_truncate_pad(v, ms), truncate_pad(v, ms.back()));
  }
}

TEST(TruncatePad, OneLipschitz) {
  std::mt19937_64 g(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = test::rand_int(g, 1, 8);
    const Vector u = test::rand_vec(g, n), v = test::rand_vec(g, n);
    const std::size_t m = test::rand_int(g, 1, 10);
    EXPECT_LE(max_norm(sub(truncate_pad(u, m), truncate_pad(v, m))), max_norm(sub(u, v)));
  }
}

TEST(InfNorm, Submultiplicative) {
  std::mt19937_64 g(4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t r = test::rand_int(g, 1, 6), k = test::rand_int(g, 1, 6), c = test::rand_int(g, 1, 6);
    const Matrix a = test::rand_mat(g, r, k, -3, 3), b = test::rand_mat(g, k, c, -3, 3);
    EXPECT_LE(inf_norm(matmul(a, b)), inf_norm(a) * inf_norm(b) * (1 + 1e-14));
    const Vector v = test::rand_vec(g, k, -5, 5);
    EXPECT_LE(max_norm(matvec(a, v)), inf_norm(a) * max_norm(v) * (1 + 1e-14));
  }
}

TEST(InfNorm, EqualsLipschitzOfLinearMap) {
  // sign vector of the heaviest row attains the bound exactly.
  std::mt19937_64 g(5);
  for (int t = 0; t < 50; ++t) {
    const Matrix a = test::rand_mat(g, 4, 5);
    double best = 0.0;
    for (std::size_t r = 0; r < 4; ++r) {
      Vector s(5);
      for (std::size_t c = 0; c < 5; ++c) s[c] = a(r, c) >= 0 ? 1.0 : -1.0;
      best = std::max(best, max_norm(matvec(a, s)));
    }
    EXPECT_NEAR(best, inf_norm(a), 1e-12);
  }
}

TEST(Matvec, ShapeChecks) {
  EXPECT_THROW(matvec(Matrix(2, 3), Vector{1, 2}), ShapeError);
  EXPECT_THROW(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  EXPECT_THROW(sub(Vector{1}, Vector{1, 2}), ShapeError);
}
