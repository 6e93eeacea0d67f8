#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "steinmed/linalg.hpp"

namespace steinmed {

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Randomized-trial data: outcome, 0/1 treatment offer, mediator and baseline
/// covariates. The first covariate column is the intercept. The latent
/// confounder `u` is only populated by the simulator and never enters a design.
struct TrialDataset {
  std::vector<double> y;
  std::vector<double> r;
  std::vector<double> m;
  Matrix x;
  std::optional<std::vector<double>> u;

  /// Optional user-supplied instruments, appended to Z after the R*X block.
  Matrix extra_instruments;

  std::string outcome_name = "Y";
  std::string treatment_name = "R";
  std::string mediator_name = "M";
  std::vector<std::string> covariate_names;  // size x.cols(), [0] = intercept
  std::vector<std::string> instrument_names;  // size extra_instruments.cols()

  std::size_t n() const noexcept { return y.size(); }
  /// Covariate width including the intercept.
  std::size_t k() const noexcept { return x.cols(); }

  /// Throws DataError on any broken invariant.
  void validate() const;
};

/// Builds a validated dataset from raw columns, prepending the intercept to
/// `covariates` (which must not already contain one).
TrialDataset make_dataset(std::vector<double> y, std::vector<double> r, std::vector<double> m,
                          const std::vector<std::vector<double>>& covariates,
                          std::vector<std::string> covariate_names = {});

/// Column positions of the second-stage regressors V = (X', M, R)'.
struct IndexMap {
  std::size_t x_begin = 0;
  std::size_t x_end = 0;  // one past the last covariate
  std::size_t m = 0;
  std::size_t r = 0;
};

/// Second-stage regressors and instruments for one dataset.
///
/// v columns: X..., M, R            (width k + 2)
/// z columns: X..., R, R*X[1:]..., extra instruments   (width 2k + extra)
///
/// R times the intercept equals R itself and is left out of z.
struct DesignBundle {
  Matrix v;
  Matrix z;
  std::vector<std::string> v_names;
  std::vector<std::string> z_names;
  IndexMap index;
  std::size_t k = 0;
  /// First z column of the excluded-instrument block (the R*X interactions
  /// and any extra instruments); everything before it also appears in v.
  std::size_t excluded_begin = 0;

  std::size_t n() const noexcept { return v.rows(); }
  std::size_t excluded_count() const noexcept { return z.cols() - excluded_begin; }
};

DesignBundle build_designs(const TrialDataset& data);

/// Row subset (with repetition) of every column, names preserved.
TrialDataset select_rows(const TrialDataset& data, std::span<const std::size_t> rows);

struct CoefficientVector {
  std::vector<double> values;
  std::vector<std::string> names;

  std::size_t size() const noexcept { return values.size(); }
  /// Throws DataError when `name` is unknown.
  double at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
};

struct CausalEffects {
  double te = 0.0;
  double nde = 0.0;
  double nie = 0.0;
};

std::string interaction_name(std::string_view treatment, std::string_view covariate);

}  // namespace steinmed
