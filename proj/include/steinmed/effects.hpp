#pragma once

#include <optional>
#include <string>
#include <vector>

#include "steinmed/estimators.hpp"
#include "steinmed/model.hpp"

namespace steinmed {

/// OLS fit of the total-effect model y ~ X + R (no mediator). R is
/// randomized, so theta_r is estimated by OLS whatever estimator is used for
/// the mediation model.
struct TotalEffectFit {
  CoefficientVector theta;
  double theta_r = 0.0;
  Matrix cov;
  double sigma2 = 0.0;
  int df = 0;
};

TotalEffectFit total_effect_fit(const TrialDataset& data, const FitOptions& options = {});

/// te = theta_r, nde = beta_r, nie = theta_r - beta_r. Throws DataError on
/// non-finite input.
CausalEffects natural_effects(double theta_r, double beta_r);

/// Effects from a total-effect fit and any mediation-model coefficient vector.
CausalEffects mediation_effects(const TotalEffectFit& total, const CoefficientVector& coef,
                                const DesignBundle& bundle);

/// Settings shared by every estimator path.
struct EstimatorSettings {
  /// Coefficients the SPSL shrinkage targets; empty means the treatment only.
  std::vector<std::string> projection_names;
  CseConfig cse;
  FitOptions fit;
  /// When set, SPSL uses this TSLS weight instead of estimating one.
  std::optional<double> fixed_alpha;
};

SelectionProjection resolve_projection(const EstimatorSettings& settings,
                                       const DesignBundle& bundle);

/// One estimator's mediation-model coefficients and the causal effects they imply.
struct MediationFit {
  EstimatorTag tag = EstimatorTag::Ols;
  CoefficientVector coef;
  CausalEffects effects;
  double alpha_hat = 0.0;  // SPSL only
  std::vector<std::string> warnings;
};

MediationFit fit_mediation(const TrialDataset& data, EstimatorTag tag,
                           const EstimatorSettings& settings = {});

/// All three estimators on one dataset, sharing the total-effect fit.
struct MediationAnalysis {
  DesignBundle bundle;
  TotalEffectFit total;
  SpslResult spsl;  // carries the OLS and TSLS fits
  CausalEffects ols_effects;
  CausalEffects tsls_effects;
  CausalEffects spsl_effects;

  const FitResult& ols() const noexcept { return spsl.ols; }
  const FitResult& tsls() const noexcept { return spsl.tsls; }
};

MediationAnalysis analyze(const TrialDataset& data, const EstimatorSettings& settings = {});

}  // namespace steinmed
