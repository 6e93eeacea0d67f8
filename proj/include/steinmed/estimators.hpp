#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steinmed/diagnostics.hpp"
#include "steinmed/errors.hpp"
#include "steinmed/linalg.hpp"
#include "steinmed/model.hpp"

namespace steinmed {

enum class EstimatorTag { Ols, Tsls, Spsl };

std::string_view to_string(EstimatorTag tag) noexcept;
EstimatorTag parse_estimator(std::string_view name);

/// Which inverse Gram matrix scales the TSLS covariance.
enum class TslsCovariance {
  Projected,     // sigma2 * (Vhat'Vhat)^{-1}, the usual IV form
  Unprojected,  // sigma2 * (V'V)^{-1}
};

struct FitOptions {
  double max_condition = kDefaultMaxCondition;
  TslsCovariance tsls_covariance = TslsCovariance::Projected;
  double weak_instrument_f = kWeakInstrumentF;
  /// Compute the first-stage F (and the weak-instrument warning) in tsls_fit.
  bool check_instrument_strength = true;
};

struct FitResult {
  CoefficientVector coef;
  double sigma2 = 0.0;
  Matrix cov;
  int df = 0;
  EstimatorTag tag = EstimatorTag::Ols;
  std::optional<FTestResult> first_stage;
  std::vector<std::string> warnings;

  std::vector<double> standard_errors() const;
};

FitResult ols_fit(std::span<const double> y, const Matrix& design,
                  std::vector<std::string> names = {}, const FitOptions& options = {});
FitResult ols_fit(std::span<const double> y, const DesignBundle& bundle,
                  const FitOptions& options = {});

/// Columnwise projection of v onto span(z). Columns of v that are bitwise
/// copies of a z column are returned unchanged.
Matrix first_stage_project(const Matrix& v, const Matrix& z,
                           double max_condition = kDefaultMaxCondition,
                           std::span<const std::string> z_names = {});

FitResult tsls_fit(std::span<const double> y, const DesignBundle& bundle,
                   const FitOptions& options = {});

/// Diagonal 0/1 selection of coefficient indices for the shrinkage objective.
class SelectionProjection {
 public:
  /// Throws ConfigError when `selected` is empty or has an index >= width.
  SelectionProjection(std::vector<std::size_t> selected, std::size_t width);

  /// The default: the treatment coefficient only.
  static SelectionProjection treatment_only(const DesignBundle& bundle);
  static SelectionProjection all(std::size_t width);
  static SelectionProjection from_names(std::span<const std::string> names,
                                        std::span<const std::string> coefficient_names);

  const std::vector<std::size_t>& selected() const noexcept { return selected_; }
  std::size_t width() const noexcept { return width_; }
  bool contains(std::size_t index) const noexcept;
  Matrix matrix() const;
  /// sum of a(j, j) over selected j
  double trace_of(const Matrix& a) const;

 private:
  std::vector<std::size_t> selected_;
  std::size_t width_;
};

enum class CseMode { Hausman, Bootstrap };

struct CseConfig {
  CseMode mode = CseMode::Hausman;
  std::size_t replicates = 200;  // bootstrap mode only
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

std::string_view to_string(CseMode mode) noexcept;

/// Cross-covariance of TSLS and OLS estimated by the Hausman identity: the
/// covariance of an efficient estimator with any consistent one is the
/// efficient estimator's variance.
Matrix hausman_cse(const FitResult& ols);

/// Cross-covariance Cov(tsls_i, ols_j) over joint case-resampling refits.
Matrix bootstrap_cse(std::span<const double> y, const DesignBundle& bundle, const CseConfig& config,
                     const FitOptions& options = {});

/// Signals a zero denominator in the trace-MSE minimizer: both estimators
/// have equal trace RMSE and the combination weight is not unique.
class DegenerateCombination : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// tr(a^2 M_tsls + 2a(1-a) C + (1-a)^2 M_ols)
double trace_mse_objective(double alpha, const Matrix& m_tsls, const Matrix& cse,
                           const Matrix& m_ols);

/// Minimizer over alpha of trace_mse_objective, i.e. the weight on TSLS in
/// alpha*TSLS + (1-alpha)*OLS:
///   tr(M_ols - C) / tr(M_ols - 2C + M_tsls)
/// Throws DegenerateCombination on a zero denominator.
double closed_form_alpha(const Matrix& m_tsls, const Matrix& cse, const Matrix& m_ols);

/// The same minimizer from the three traces.
double alpha_from_traces(double tr_m_tsls, double tr_cse, double tr_m_ols);

struct AlphaEstimate {
  double alpha_hat = 1.0;
  /// tr_P(Var_tsls - CSE)
  double tau_hat = 0.0;
  /// ||P(b_ols - b_tsls)||^2
  double denom = 0.0;
  /// max(0, denom - tr_P(Var_ols - 2 CSE + Var_tsls)): squared OLS bias.
  double bias2_hat = 0.0;
  bool degenerate = false;
};

/// Plug-in estimate of the trace-MSE-optimal TSLS weight. TSLS is treated as
/// unbiased, so MSE(TSLS) ~ Var_tsls, and MSE(OLS) ~ Var_ols + bias2_hat.
/// With the Hausman CSE this reduces to max(0, 1 - tau_hat / denom).
AlphaEstimate estimate_alpha(const FitResult& ols, const FitResult& tsls,
                             const SelectionProjection& projection, const Matrix& cse);

struct SpslResult {
  CoefficientVector coef;
  double alpha_hat = 1.0;
  double tau_hat = 0.0;
  double denom = 0.0;
  double bias2_hat = 0.0;
  bool degenerate = false;
  FitResult ols;
  FitResult tsls;
  SelectionProjection projection;
  std::vector<std::string> notes;
};

/// alpha * tsls + (1 - alpha) * ols, elementwise.
std::vector<double> affine_combination(double alpha, std::span<const double> tsls,
                                       std::span<const double> ols);

SpslResult spsl_combine(FitResult ols, FitResult tsls, SelectionProjection projection,
                        const Matrix& cse);
/// Combination at a caller-chosen alpha (used to freeze alpha in the bootstrap).
SpslResult spsl_combine_fixed(FitResult ols, FitResult tsls, SelectionProjection projection,
                              double alpha);

SpslResult spsl_fit(std::span<const double> y, const DesignBundle& bundle,
                    SelectionProjection projection, const CseConfig& cse = {},
                    const FitOptions& options = {});

/// P(b_spsl - b_tsls): the plug-in bias of the projected combination, using
/// TSLS in place of the true coefficients. Diagnostic only.
std::vector<double> spsl_empirical_bias(const SpslResult& result);

}  // namespace steinmed
