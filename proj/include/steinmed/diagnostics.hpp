#pragma once

#include <cstddef>
#include <span>

#include "steinmed/linalg.hpp"
#include "steinmed/model.hpp"

namespace steinmed {

/// Conventional rule-of-thumb cut-off for weak excluded instruments.
inline constexpr double kWeakInstrumentF = 10.0;

struct FTestResult {
  double f = 0.0;
  int df1 = 0;
  int df2 = 0;
  double p = 1.0;
  /// R^2 of the unrestricted regression.
  double r2_full = 0.0;
};

/// P(F > f) for an F(df1, df2) variate.
double f_upper_tail(double f, int df1, int df2);

/// F-test for dropping columns [restricted_cols, full.cols()) from a
/// regression of `response` on `full`.
FTestResult nested_f_test(std::span<const double> response, const Matrix& full,
                          std::size_t restricted_cols, double max_condition = kDefaultMaxCondition);

/// First-stage strength of the excluded instruments: regress the mediator on
/// all of Z and on (X, R) alone, and test the difference.
FTestResult first_stage_f(const DesignBundle& bundle, double max_condition = kDefaultMaxCondition);
FTestResult first_stage_f(const TrialDataset& data, const DesignBundle& bundle);

}  // namespace steinmed
