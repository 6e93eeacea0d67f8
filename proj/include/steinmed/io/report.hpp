#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "steinmed/diagnostics.hpp"
#include "steinmed/io/config.hpp"
#include "steinmed/simulate.hpp"

namespace steinmed::io {

struct EstimateCell {
  double estimate = 0.0;
  double se = 0.0;  // NaN when unavailable
};

/// One row of the results table; cells are indexed by EstimatorTag.
struct ReportRow {
  std::string name;
  std::array<EstimateCell, 3> cells;

  const EstimateCell& at(EstimatorTag t) const { return cells[static_cast<std::size_t>(t)]; }
  EstimateCell& at(EstimatorTag t) { return cells[static_cast<std::size_t>(t)]; }
};

struct ReportTable {
  std::vector<EstimatorTag> estimators;  // displayed columns
  std::vector<ReportRow> coefficients;
  ReportRow te{"TE", {}};
  ReportRow nde{"NDE", {}};
  ReportRow nie{"NIE", {}};
  /// Weight on TSLS in the SPSL combination.
  double alpha_hat = 0.0;
  FTestResult first_stage;
  std::size_t n = 0;
  std::size_t dropped = 0;
  std::size_t bootstrap_replicates = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

/// Fits all three estimators (plus bootstrap SEs for the displayed ones when
/// config.bootstrap > 0; analytic SEs for OLS/TSLS coefficients otherwise).
ReportTable build_report(const TrialDataset& data, const RunConfig& config, std::size_t dropped = 0);

struct CollinearityCheck {
  bool passed = true;
  /// Largest gap between the displayed SPSL value and the affine combination
  /// of the displayed OLS/TSLS values, in excess of the rounding allowance.
  double max_excess = 0.0;
  std::string worst_row;
};

/// Verifies on the 2-decimal display that every SPSL row lies on the line
/// through its OLS and TSLS rows at alpha_hat.
CollinearityCheck check_collinearity(const ReportTable& table, int decimals = 2);

std::string format_table(const ReportTable& table);
std::string report_json(const ReportTable& table);
std::string report_csv(const ReportTable& table);

std::string grid_csv(const GridSummary& summary);
std::string grid_json(const GridSummary& summary, std::uint64_t seed);
std::string replicates_csv(const GridSummary& summary);

std::string ftest_json(const FTestResult& f);
std::string format_ftest(const FTestResult& f);

/// Fixed-decimal display, locale independent ("NA" for NaN).
std::string fixed(double v, int decimals = 2);

}  // namespace steinmed::io
