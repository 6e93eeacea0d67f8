#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "steinmed/errors.hpp"
#include "steinmed/estimators.hpp"
#include "steinmed/simulate.hpp"
#include "test_support.hpp"

using namespace steinmed;
using steinmed::testing::random_matrix;
using steinmed::testing::random_trial;
using steinmed::testing::random_vector;

namespace {

FitResult fake_fit(std::vector<double> coef, std::vector<double> var_diag) {
  FitResult f;
  const std::size_t p = coef.size();
  f.coef.values = std::move(coef);
  for (std::size_t j = 0; j < p; ++j) f.coef.names.push_back("c" + std::to_string(j));
  f.cov = Matrix(p, p);
  for (std::size_t j = 0; j < p; ++j) f.cov(j, j) = var_diag[j];
  return f;
}

}  // namespace

TEST(Ols, NoiselessRecoversCoefficients) {
  std::mt19937_64 g(1);
  const Matrix v = random_matrix(40, 5, g);
  const std::vector<double> b{0.5, -1.0, 2.0, 0.0, 3.5};
  const auto y = multiply(v, b);
  const auto fit = ols_fit(y, v);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(fit.coef.values[j], b[j], 1e-10);
  EXPECT_NEAR(fit.sigma2, 0.0, 1e-20);
  EXPECT_EQ(fit.df, 35);
}

TEST(Ols, InterceptOnlyIsTheMean) {
  const std::vector<double> y{1.0, 4.0, -2.0, 7.5, 0.5};
  const auto fit = ols_fit(y, Matrix(5, 1, 1.0));
  EXPECT_NEAR(fit.coef.values[0], 11.0 / 5.0, 1e-14);
}

TEST(Ols, MatchesExtendedPrecisionOracle) {
  const Matrix v = Matrix::from_rows({{1, 0.3, -1.1},
                                      {1, 1.4, 0.2},
                                      {1, -0.8, 0.9},
                                      {1, 2.1, -0.4},
                                      {1, -1.5, 1.7},
                                      {1, 0.6, 0.0}});
  const std::vector<double> y{0.7, 2.3, -0.4, 3.1, -1.9, 1.2};
  const auto fit = ols_fit(y, v);
  const auto oracle = steinmed::testing::normal_equations(v, y);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fit.coef.values[j], static_cast<double>(oracle[j]), 1e-8);
  const double rss = static_cast<double>(steinmed::testing::rss(v, y));
  EXPECT_NEAR(fit.sigma2, rss / 3.0, 1e-10);
  const auto inv = steinmed::testing::inverse(steinmed::testing::cross(v, v));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(fit.cov(i, j), fit.sigma2 * static_cast<double>(inv[i][j]), 1e-10);
      EXPECT_EQ(fit.cov(i, j), fit.cov(j, i));
    }
}

TEST(Ols, RankDeficientDesignIsAnIdentifiabilityError) {
  std::mt19937_64 g(2);
  Matrix v = random_matrix(20, 3, g);
  for (std::size_t i = 0; i < 20; ++i) v(i, 2) = v(i, 0) - v(i, 1);
  EXPECT_THROW(ols_fit(random_vector(20, g), v, {"a", "b", "c"}), IdentifiabilityError);
  EXPECT_THROW(ols_fit(std::vector<double>(3, 1.0), Matrix(3, 3, 1.0)), DataError);
}

TEST(FirstStage, ColumnsInSpanAreReproduced) {
  std::mt19937_64 g(3);
  const Matrix z = random_matrix(15, 4, g);
  Matrix v(15, 2);
  for (std::size_t i = 0; i < 15; ++i) {
    v(i, 0) = z(i, 1);  // exact copy
    v(i, 1) = 0.5 * z(i, 0) - 2.0 * z(i, 3);
  }
  const Matrix vhat = first_stage_project(v, z);
  for (std::size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(vhat(i, 0), v(i, 0));
    EXPECT_NEAR(vhat(i, 1), v(i, 1), 1e-10);
  }
}

TEST(FirstStage, OrthogonalColumnProjectsToZero) {
  const Matrix z(4, 1, 1.0);
  const Matrix v = Matrix::from_rows({{1}, {-1}, {1}, {-1}});
  const Matrix vhat = first_stage_project(v, z);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(vhat(i, 0), 0.0, 1e-15);
}

TEST(FirstStage, MatchesExplicitProjectionAndIsIdempotent) {
  std::mt19937_64 g(4);
  const Matrix z = random_matrix(10, 6, g);
  const Matrix v = random_matrix(10, 4, g);
  const Matrix vhat = first_stage_project(v, z);
  const auto oracle = steinmed::testing::explicit_projection(z, v);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(vhat(i, j), static_cast<double>(oracle[i][j]), 1e-8);
  const Matrix twice = first_stage_project(vhat, z);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(twice(i, j), vhat(i, j), 1e-10);
}

TEST(Tsls, CollapsesToOlsWhenInstrumentsEqualRegressors) {
  std::mt19937_64 g(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = random_trial(60, 1 + rep % 4, g);
    DesignBundle b = build_designs(d);
    b.z = b.v;
    b.z_names = b.v_names;
    b.excluded_begin = b.v.cols();
    const auto o = ols_fit(d.y, b);
    const auto t = tsls_fit(d.y, b);
    for (std::size_t j = 0; j < o.coef.size(); ++j) EXPECT_NEAR(t.coef.values[j], o.coef.values[j], 1e-10);
  }
}

TEST(Tsls, JustIdentifiedMatchesDirectIvFormula) {
  std::mt19937_64 g(6);
  for (int rep = 0; rep < 10; ++rep) {
    const auto d = random_trial(50, 1, g);
    DesignBundle b = build_designs(d);  // k = 2: v and z both have 4 columns
    ASSERT_EQ(b.v.cols(), b.z.cols());
    const auto fit = tsls_fit(d.y, b);
    const auto zv = steinmed::testing::cross(b.z, b.v);
    const auto zy = steinmed::testing::cross(b.z, d.y);
    const auto iv = steinmed::testing::times(steinmed::testing::inverse(zv), zy);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(fit.coef.values[j], static_cast<double>(iv[j]), 1e-8);
  }
}

TEST(Tsls, ResidualsUseOriginalRegressors) {
  std::mt19937_64 g(7);
  const auto d = random_trial(120, 3, g);
  const auto b = build_designs(d);
  const auto fit = tsls_fit(d.y, b);
  const auto fitted = multiply(b.v, fit.coef.values);
  double rss = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) rss += (d.y[i] - fitted[i]) * (d.y[i] - fitted[i]);
  EXPECT_NEAR(fit.sigma2, rss / fit.df, 1e-12);
  EXPECT_EQ(fit.df, static_cast<int>(d.n() - b.v.cols()));
}

TEST(Tsls, CovarianceVariants) {
  std::mt19937_64 g(8);
  const auto d = random_trial(120, 2, g);
  const auto b = build_designs(d);
  const auto projected = tsls_fit(d.y, b);
  FitOptions literal_opts;
  literal_opts.tsls_covariance = TslsCovariance::Unprojected;
  const auto literal = tsls_fit(d.y, b, literal_opts);
  EXPECT_EQ(projected.coef.values, literal.coef.values);
  const Matrix vhat = first_stage_project(b.v, b.z);
  const auto inv_hat = steinmed::testing::inverse(steinmed::testing::cross(vhat, vhat));
  const auto inv_v = steinmed::testing::inverse(steinmed::testing::cross(b.v, b.v));
  for (std::size_t i = 0; i < b.v.cols(); ++i) {
    EXPECT_NEAR(projected.cov(i, i), projected.sigma2 * static_cast<double>(inv_hat[i][i]),
                1e-9 * projected.cov(i, i));
    EXPECT_NEAR(literal.cov(i, i), literal.sigma2 * static_cast<double>(inv_v[i][i]),
                1e-9 * literal.cov(i, i));
  }
}

TEST(Tsls, WeakInstrumentWarning) {
  std::mt19937_64 g(9);
  std::normal_distribution<double> z;
  std::bernoulli_distribution coin(0.5);
  const std::size_t n = 200;
  std::vector<double> y(n), r(n), m(n), x(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = coin(g) ? 1 : 0;
    x[i] = z(g);
    m[i] = z(g);  // no R*X signal at all
    y[i] = m[i] + z(g);
  }
  const auto d = make_dataset(y, r, m, {x});
  const auto fit = tsls_fit(d.y, build_designs(d));
  ASSERT_TRUE(fit.first_stage.has_value());
  if (fit.first_stage->f < kWeakInstrumentF) {
    ASSERT_FALSE(fit.warnings.empty());
    EXPECT_NE(fit.warnings[0].find("weak instruments"), std::string::npos);
  }
}

TEST(Tsls, LargeSampleConsistency) {
  ScenarioSpec spec{0.5, 0.5, 100000, {}};
  const auto d = generate_dataset(spec, 99, 0);
  const auto b = build_designs(d);
  const auto t = tsls_fit(d.y, b);
  EXPECT_NEAR(t.coef.at("M"), 0.25, 0.02);
  const auto o = ols_fit(d.y, b);
  const auto oracle = population_ols_oracle(spec);
  EXPECT_NEAR(o.coef.at("M"), oracle.at("M"), 0.01);
  EXPECT_GT(o.coef.at("M") - 0.25, 0.05);  // confounding bias is visible
}

TEST(Projection, MatrixIsIdempotentDiagonal) {
  SelectionProjection p({3, 1, 3}, 5);
  EXPECT_EQ(p.selected(), (std::vector<std::size_t>{1, 3}));
  const Matrix m = p.matrix();
  EXPECT_EQ(multiply(m, m), m);
  EXPECT_EQ(transpose(m), m);
  EXPECT_TRUE(p.contains(3));
  EXPECT_FALSE(p.contains(0));
  EXPECT_THROW(SelectionProjection({}, 3), ConfigError);
  EXPECT_THROW(SelectionProjection({3}, 3), ConfigError);
  const std::vector<std::string> coef{"a", "M", "R"}, want{"R"};
  EXPECT_EQ(SelectionProjection::from_names(want, coef).selected(), (std::vector<std::size_t>{2}));
  const std::vector<std::string> bad{"Q"};
  EXPECT_THROW(SelectionProjection::from_names(bad, coef), ConfigError);
}

TEST(ClosedFormAlpha, Endpoints) {
  const Matrix m_tsls = Matrix::from_rows({{2.0, 0.1}, {0.1, 1.0}});
  const Matrix m_ols = Matrix::from_rows({{0.5, 0.0}, {0.0, 0.7}});
  EXPECT_NEAR(closed_form_alpha(m_tsls, m_ols, m_ols), 0.0, 1e-15);   // C = M_ols: pure OLS
  EXPECT_NEAR(closed_form_alpha(m_tsls, m_tsls, m_ols), 1.0, 1e-15);  // C = M_tsls: pure TSLS
  EXPECT_THROW(closed_form_alpha(m_ols, m_ols, m_ols), DegenerateCombination);
}

TEST(ClosedFormAlpha, BeatsGridSearch) {
  std::mt19937_64 g(10);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t p = 1 + rep % 4;
    // Stacked Gram of (tsls error, ols error) draws is PSD by construction.
    const Matrix a = random_matrix(2 * p, 3 * p, g);
    Matrix gram = multiply(a, transpose(a));
    Matrix mt(p, p), mo(p, p), c(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) {
        mt(i, j) = gram(i, j);
        mo(i, j) = gram(p + i, p + j);
        c(i, j) = gram(i, p + j);
      }
    const double alpha = closed_form_alpha(mt, c, mo);
    const double best = trace_mse_objective(alpha, mt, c, mo);
    const double curvature = trace(mt) - 2 * trace(c) + trace(mo);
    for (int s = -1000; s <= 2000; ++s) {
      const double a_grid = s / 1000.0;
      EXPECT_GE(trace_mse_objective(a_grid, mt, c, mo), best - 1e-12 * (1 + std::abs(best)))
          << "rep " << rep;
    }
    EXPECT_GE(curvature, 0.0);
  }
}

TEST(EstimateAlpha, WorkedExamples) {
  const SelectionProjection p({1}, 2);
  // tau = tr_P(Var_tsls - C) = 0.3 with C = Var_ols; ||P delta||^2 = 0.4
  {
    const auto ols = fake_fit({0.0, 1.0}, {1.0, 0.2});
    const auto tsls = fake_fit({0.0, 1.0 + std::sqrt(0.4)}, {1.0, 0.5});
    const auto est = estimate_alpha(ols, tsls, p, hausman_cse(ols));
    EXPECT_NEAR(est.tau_hat, 0.3, 1e-12);
    EXPECT_NEAR(est.denom, 0.4, 1e-12);
    EXPECT_NEAR(est.alpha_hat, 0.25, 1e-12);  // OLS weight tau/denom = 0.75
    EXPECT_NEAR(est.alpha_hat, 1.0 - est.tau_hat / est.denom, 1e-12);
  }
  // no variance penalty for TSLS: pure TSLS
  {
    const auto ols = fake_fit({0.0, 1.0}, {1.0, 0.2});
    const auto tsls = fake_fit({0.0, 2.0}, {1.0, 0.2});
    const auto est = estimate_alpha(ols, tsls, p, hausman_cse(ols));
    EXPECT_NEAR(est.tau_hat, 0.0, 1e-15);
    EXPECT_NEAR(est.alpha_hat, 1.0, 1e-12);
  }
  // TSLS noise swamps the observed difference: pure OLS
  {
    const auto ols = fake_fit({0.0, 1.0}, {1.0, 0.1});
    const auto tsls = fake_fit({0.0, 1.1}, {1.0, 5.0});
    const auto est = estimate_alpha(ols, tsls, p, hausman_cse(ols));
    EXPECT_EQ(est.bias2_hat, 0.0);
    EXPECT_NEAR(est.alpha_hat, 0.0, 1e-12);
  }
  // identical fits: degenerate, resolved to TSLS
  {
    const auto ols = fake_fit({0.0, 1.0}, {1.0, 0.0});
    const auto est = estimate_alpha(ols, ols, p, hausman_cse(ols));
    EXPECT_TRUE(est.degenerate);
    EXPECT_EQ(est.alpha_hat, 1.0);
  }
}

TEST(Spsl, AffineIdentityAndEndpoints) {
  std::mt19937_64 g(11);
  for (int rep = 0; rep < 30; ++rep) {
    const auto d = random_trial(150, 2, g);
    const auto b = build_designs(d);
    const auto res = spsl_fit(d.y, b, SelectionProjection::treatment_only(b));
    for (std::size_t j = 0; j < res.coef.size(); ++j) {
      const double lhs = res.coef.values[j] - res.ols.coef.values[j];
      const double rhs = res.alpha_hat * (res.tsls.coef.values[j] - res.ols.coef.values[j]);
      EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(res.tsls.coef.values[j]) + std::abs(res.ols.coef.values[j])));
    }
    const auto bias = spsl_empirical_bias(res);
    EXPECT_NEAR(bias[b.index.r], res.coef.values[b.index.r] - res.tsls.coef.values[b.index.r], 0.0);
    EXPECT_EQ(bias[0], 0.0);
  }
  const auto d = random_trial(100, 2, g);
  const auto b = build_designs(d);
  const auto ols = ols_fit(d.y, b);
  const auto tsls = tsls_fit(d.y, b);
  const auto proj = SelectionProjection::treatment_only(b);
  EXPECT_EQ(spsl_combine_fixed(ols, tsls, proj, 1.0).coef.values, tsls.coef.values);
  EXPECT_EQ(spsl_combine_fixed(ols, tsls, proj, 0.0).coef.values, ols.coef.values);
}

TEST(Spsl, NoiselessDataIsDegenerateAndUsesTsls) {
  std::mt19937_64 g(12);
  auto d = random_trial(80, 2, g);
  const auto b = build_designs(d);
  const std::vector<double> beta{0.1, 0.2, -0.3, 0.4, 0.5};
  d.y = multiply(b.v, beta);
  const auto res = spsl_fit(d.y, build_designs(d), SelectionProjection::treatment_only(b));
  EXPECT_TRUE(res.degenerate);
  EXPECT_EQ(res.alpha_hat, 1.0);
  EXPECT_EQ(res.coef.values, res.tsls.coef.values);
  EXPECT_FALSE(res.notes.empty());
}

TEST(Spsl, HausmanTauAgreesWithBootstrapCse) {
  ScenarioSpec spec{0.5, 0.5, 500, {}};
  const auto d = generate_dataset(spec, 2024, 0);
  const auto b = build_designs(d);
  const auto proj = SelectionProjection::treatment_only(b);
  const auto ols = ols_fit(d.y, b);
  const auto tsls = tsls_fit(d.y, b);
  const auto hausman = estimate_alpha(ols, tsls, proj, hausman_cse(ols));
  CseConfig cfg{CseMode::Bootstrap, 1000, 17, 0};
  const Matrix c = bootstrap_cse(d.y, b, cfg);
  const auto boot = estimate_alpha(ols, tsls, proj, c);
  EXPECT_NEAR(boot.tau_hat, hausman.tau_hat, 0.25 * std::abs(hausman.tau_hat));
}
