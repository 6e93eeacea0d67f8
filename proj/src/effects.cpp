#include "steinmed/effects.hpp"

#include <cmath>

namespace steinmed {

TotalEffectFit total_effect_fit(const TrialDataset& data, const FitOptions& options) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t k = data.k();
  Matrix design(n, k + 1);
  for (std::size_t j = 0; j < k; ++j) std::copy_n(data.x.col(j).begin(), n, design.col(j).begin());
  std::copy(data.r.begin(), data.r.end(), design.col(k).begin());

  std::vector<std::string> names = data.covariate_names;
  if (names.empty()) {
    names.emplace_back(kInterceptName);
    for (std::size_t j = 1; j < k; ++j) names.push_back("x" + std::to_string(j));
  }
  names.push_back(data.treatment_name);

  FitResult fit = ols_fit(data.y, design, std::move(names), options);
  TotalEffectFit out;
  out.theta_r = fit.coef.values[k];
  out.theta = std::move(fit.coef);
  out.cov = std::move(fit.cov);
  out.sigma2 = fit.sigma2;
  out.df = fit.df;
  return out;
}

CausalEffects natural_effects(double theta_r, double beta_r) {
  if (!std::isfinite(theta_r) || !std::isfinite(beta_r))
    throw DataError("natural_effects: non-finite total or direct effect");
  return CausalEffects{theta_r, beta_r, theta_r - beta_r};
}

CausalEffects mediation_effects(const TotalEffectFit& total, const CoefficientVector& coef,
                                const DesignBundle& bundle) {
  return natural_effects(total.theta_r, coef.values.at(bundle.index.r));
}

SelectionProjection resolve_projection(const EstimatorSettings& settings,
                                       const DesignBundle& bundle) {
  if (settings.projection_names.empty()) return SelectionProjection::treatment_only(bundle);
  return SelectionProjection::from_names(settings.projection_names, bundle.v_names);
}

namespace {

Matrix resolve_cse(const TrialDataset& data, const DesignBundle& bundle, const FitResult& ols,
                   const EstimatorSettings& settings) {
  if (settings.cse.mode == CseMode::Hausman) return hausman_cse(ols);
  return bootstrap_cse(data.y, bundle, settings.cse, settings.fit);
}

SpslResult combine(const TrialDataset& data, const DesignBundle& bundle, FitResult ols,
                   FitResult tsls, const EstimatorSettings& settings) {
  auto projection = resolve_projection(settings, bundle);
  if (settings.fixed_alpha)
    return spsl_combine_fixed(std::move(ols), std::move(tsls), std::move(projection),
                              *settings.fixed_alpha);
  const Matrix cse = resolve_cse(data, bundle, ols, settings);
  return spsl_combine(std::move(ols), std::move(tsls), std::move(projection), cse);
}

}  // namespace

MediationFit fit_mediation(const TrialDataset& data, EstimatorTag tag,
                           const EstimatorSettings& settings) {
  const DesignBundle bundle = build_designs(data);
  const TotalEffectFit total = total_effect_fit(data, settings.fit);
  MediationFit out;
  out.tag = tag;
  switch (tag) {
    case EstimatorTag::Ols: {
      FitResult fit = ols_fit(data.y, bundle, settings.fit);
      out.coef = std::move(fit.coef);
      break;
    }
    case EstimatorTag::Tsls: {
      FitResult fit = tsls_fit(data.y, bundle, settings.fit);
      out.coef = std::move(fit.coef);
      out.warnings = std::move(fit.warnings);
      break;
    }
    case EstimatorTag::Spsl: {
      FitResult ols = ols_fit(data.y, bundle, settings.fit);
      FitResult tsls = tsls_fit(data.y, bundle, settings.fit);
      SpslResult spsl = combine(data, bundle, std::move(ols), std::move(tsls), settings);
      out.coef = std::move(spsl.coef);
      out.alpha_hat = spsl.alpha_hat;
      out.warnings = std::move(spsl.tsls.warnings);
      for (auto& note : spsl.notes) out.warnings.push_back(std::move(note));
      break;
    }
  }
  out.effects = mediation_effects(total, out.coef, bundle);
  return out;
}

MediationAnalysis analyze(const TrialDataset& data, const EstimatorSettings& settings) {
  DesignBundle bundle = build_designs(data);
  TotalEffectFit total = total_effect_fit(data, settings.fit);
  FitResult ols = ols_fit(data.y, bundle, settings.fit);
  FitResult tsls = tsls_fit(data.y, bundle, settings.fit);
  SpslResult spsl = combine(data, bundle, std::move(ols), std::move(tsls), settings);
  MediationAnalysis out{.bundle = std::move(bundle),
                        .total = std::move(total),
                        .spsl = std::move(spsl),
                        .ols_effects = {},
                        .tsls_effects = {},
                        .spsl_effects = {}};
  out.ols_effects = mediation_effects(out.total, out.spsl.ols.coef, out.bundle);
  out.tsls_effects = mediation_effects(out.total, out.spsl.tsls.coef, out.bundle);
  out.spsl_effects = mediation_effects(out.total, out.spsl.coef, out.bundle);
  return out;
}

}  // namespace steinmed
