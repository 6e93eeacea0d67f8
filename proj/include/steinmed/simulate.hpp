#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steinmed/effects.hpp"
#include "steinmed/model.hpp"

namespace steinmed {

struct StructuralCoefficients {
  double beta_x = 0.25;
  double beta_r = 0.25;
  double beta_m = 0.25;
  double beta_u = 0.25;
  double gamma_x = 0.25;
  double gamma_r = 0.70710678118654752;  // 1/sqrt(2)
};

/// One simulation cell. Confounding eta = Cor(M, U) sets gamma_u; instrument
/// strength kappa = Cor(M, R*X) sets gamma_rx = kappa - gamma_x.
struct ScenarioSpec {
  double eta = 0.0;
  double kappa = 0.25;
  std::size_t n = 500;
  StructuralCoefficients coef;

  double gamma_u() const noexcept { return eta; }
  double gamma_rx() const noexcept { return kappa - coef.gamma_x; }

  /// Throws ConfigError when eta or kappa is out of range or n is too small.
  void validate() const;
};

struct ErrorVariances {
  double sigma2_delta = 0.0;
  double sigma2_eps = 0.0;
};

/// Closed-form error variances that make Var(M) = Var(Y) = 1. Throws
/// InfeasibleScenario when either is not positive.
ErrorVariances error_variances(const ScenarioSpec& spec);

CausalEffects true_effects(const ScenarioSpec& spec);

/// Draws (X, R, U, delta, eps) per row, in that order, from the stream for
/// (seed, replicate). Cells sharing a replicate index share random numbers.
TrialDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                              std::uint64_t replicate);

/// Probability limit of OLS on (1, X, M, R) from the population second moments.
CoefficientVector population_ols_oracle(const ScenarioSpec& spec);

/// Trial-shaped dataset for pipeline checks: six baseline covariates (mixed
/// continuous and binary), a binary mediator driven by treatment-covariate
/// interactions, and a continuous outcome.
TrialDataset generate_trial_like(std::uint64_t seed, std::size_t n = 296);

enum class Estimand { Nde, Nie };
std::string_view to_string(Estimand e) noexcept;

struct GridRow {
  double eta = 0.0;
  double kappa = 0.0;
  std::size_t n = 0;
  EstimatorTag estimator = EstimatorTag::Ols;
  Estimand estimand = Estimand::Nde;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double mcse = 0.0;  // standard error of the mean
  std::size_t count = 0;
  std::size_t failures = 0;
};

struct ReplicateRecord {
  double eta = 0.0;
  double kappa = 0.0;
  std::size_t n = 0;
  std::size_t replicate = 0;
  EstimatorTag estimator = EstimatorTag::Ols;
  double nde = 0.0;
  double nie = 0.0;
  double alpha_hat = 0.0;  // SPSL only
};

struct GridConfig {
  std::vector<double> etas{0.0, 0.25, 0.5};
  std::vector<double> kappas{0.01, 0.25, 0.5};
  std::vector<std::size_t> ns{100, 300, 500};
  std::size_t replications = 2000;
  std::uint64_t seed = 20240101;
  std::vector<EstimatorTag> estimators{EstimatorTag::Ols, EstimatorTag::Tsls, EstimatorTag::Spsl};
  EstimatorSettings settings;
  bool keep_replicates = false;
  unsigned threads = 0;
  StructuralCoefficients coef;
};

inline constexpr std::size_t kFullFidelityReplications = 100000;

struct GridSummary {
  std::vector<GridRow> rows;
  std::vector<ReplicateRecord> replicates;
  /// Largest |spsl - (alpha*tsls + (1-alpha)*ols)| over every SPSL fit, per coefficient
  /// relative to max(1, |alpha*tsls|, |(1-alpha)*ols|).
  double max_affine_residual = 0.0;
  std::vector<std::string> warnings;

  const GridRow& find(double eta, double kappa, std::size_t n, EstimatorTag estimator,
                      Estimand estimand) const;
};

/// Runs every (eta, kappa, n) cell. Output is independent of the thread count.
GridSummary run_grid(const GridConfig& config);

}  // namespace steinmed
