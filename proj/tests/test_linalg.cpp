#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "steinmed/errors.hpp"
#include "steinmed/linalg.hpp"
#include "test_support.hpp"

using namespace steinmed;
using steinmed::testing::random_matrix;
using steinmed::testing::random_vector;

TEST(Linalg, BasicProducts) {
  const Matrix a = Matrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(a.rows(), 3u);
  EXPECT_EQ(a(2, 1), 6.0);
  const Matrix at = transpose(a);
  EXPECT_EQ(at(1, 2), 6.0);
  const Matrix g = cross_product(a, a);
  EXPECT_EQ(g, Matrix::from_rows({{35, 44}, {44, 56}}));
  EXPECT_EQ(multiply(at, a), g);
  const std::vector<double> x{1, -1};
  EXPECT_EQ(multiply(a, x), (std::vector<double>{-1, -1, -1}));
  EXPECT_EQ(trace(g), 91.0);
  const std::vector<std::size_t> rows{2, 0, 2};
  EXPECT_EQ(select_rows(a, rows), Matrix::from_rows({{5, 6}, {1, 2}, {5, 6}}));
}

TEST(Linalg, FixedSolveMatchesNormalEquationsOracle) {
  const Matrix a = Matrix::from_rows({{1, 0.5, 2.0},
                                      {1, -1.2, 0.3},
                                      {1, 2.2, -0.7},
                                      {1, 0.1, 1.1},
                                      {1, -0.4, -2.0},
                                      {1, 1.7, 0.9}});
  const std::vector<double> y{1.3, -0.2, 2.9, 0.4, -1.8, 2.2};
  const auto b = HouseholderQr(a).solve(y);
  const auto oracle = steinmed::testing::normal_equations(a, y);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(b[j], static_cast<double>(oracle[j]), 1e-8);
}

TEST(Linalg, RandomSolvesMatchOracle) {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 8 + rep, p = 1 + rep % 6;
    const Matrix a = random_matrix(n, p, g);
    const auto y = random_vector(n, g);
    const auto b = HouseholderQr(a).solve(y);
    const auto oracle = steinmed::testing::normal_equations(a, y);
    for (std::size_t j = 0; j < p; ++j) EXPECT_NEAR(b[j], static_cast<double>(oracle[j]), 1e-9);
  }
}

TEST(Linalg, InverseGramMatchesOracleAndIsSymmetric) {
  std::mt19937_64 g(5);
  const Matrix a = random_matrix(30, 5, g);
  const Matrix inv = HouseholderQr(a).inverse_gram();
  const auto oracle = steinmed::testing::inverse(steinmed::testing::cross(a, a));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      EXPECT_NEAR(inv(i, j), static_cast<double>(oracle[i][j]), 1e-10);
      EXPECT_EQ(inv(i, j), inv(j, i));
    }
}

TEST(Linalg, ProjectionIsIdempotent) {
  std::mt19937_64 g(9);
  const Matrix a = random_matrix(20, 4, g);
  const auto y = random_vector(20, g);
  HouseholderQr qr(a);
  const auto p1 = qr.project(y);
  const auto p2 = qr.project(p1);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(p1[i], p2[i], 1e-10);
}

TEST(Linalg, ApplyQtThenQRoundTrips) {
  std::mt19937_64 g(1);
  const Matrix a = random_matrix(12, 3, g);
  auto y = random_vector(12, g);
  const auto original = y;
  HouseholderQr qr(a);
  qr.apply_qt(y);
  qr.apply_q(y);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(y[i], original[i], 1e-13);
}

TEST(Linalg, RankDeficiencyNamesTheDirection) {
  std::mt19937_64 g(2);
  Matrix a = random_matrix(25, 3, g);
  for (std::size_t i = 0; i < 25; ++i) a(i, 2) = 2.0 * a(i, 1);
  HouseholderQr qr(a);
  EXPECT_FALSE(qr.full_rank());
  const auto dir = qr.near_null_direction();
  ASSERT_EQ(dir.size(), 3u);
  const double s = dir[1] > 0 ? 1.0 : -1.0;
  EXPECT_NEAR(s * dir[0], 0.0, 1e-8);
  EXPECT_NEAR(s * dir[1], 2.0 / std::sqrt(5.0), 1e-8);
  EXPECT_NEAR(s * dir[2], -1.0 / std::sqrt(5.0), 1e-8);

  const std::vector<std::string> names{"a", "b", "c"};
  try {
    qr.require_full_rank(names, "test design");
    FAIL() << "expected IdentifiabilityError";
  } catch (const IdentifiabilityError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("test design"), std::string::npos);
    EXPECT_NE(msg.find("b"), std::string::npos);
    EXPECT_NE(msg.find("c"), std::string::npos);
    EXPECT_EQ(e.direction().size(), 3u);
  }
}

TEST(Linalg, IllConditionedButFullRankPasses) {
  Matrix a(50, 2, 1.0);
  for (std::size_t i = 0; i < 50; ++i) a(i, 1) = 1e6 + static_cast<double>(i);  // large offset
  HouseholderQr qr(a);
  EXPECT_TRUE(qr.full_rank());  // equilibration keeps this below the threshold
}
