#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "steinmed/effects.hpp"
#include "steinmed/model.hpp"

namespace steinmed {

struct BootstrapConfig {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  EstimatorTag estimator = EstimatorTag::Spsl;
  EstimatorSettings settings;
  /// Reuse the full-sample alpha in every replicate instead of re-estimating it.
  bool freeze_alpha = false;
  bool keep_replicates = false;
  /// 0 = hardware concurrency
  unsigned threads = 0;
};

/// Case-resampling standard errors for every coefficient of one estimator
/// plus TE, NDE and NIE (in that order after the coefficients).
struct BootstrapSummary {
  std::vector<std::string> names;
  std::vector<double> se;
  std::size_t n_failed = 0;
  std::size_t successful = 0;
  /// successful x names.size(), in replicate order, when requested.
  std::optional<Matrix> replicate_estimates;
  std::vector<std::string> warnings;

  double se_of(std::string_view name) const;
};

/// Resampled row indices for replicate r: a pure function of (seed, r, n).
std::vector<std::size_t> bootstrap_rows(std::uint64_t seed, std::size_t replicate, std::size_t n);

/// Statistic evaluated on resample `replicate` (row indices into the original
/// data). Throwing NumericalError or DataError marks the replicate as failed.
using ResampleStatistic =
    std::function<std::vector<double>(std::size_t replicate, std::span<const std::size_t> rows)>;

/// Generic case-resampling standard errors of a vector statistic of fixed
/// length `names.size()`.
BootstrapSummary resample_se(std::size_t n, std::vector<std::string> names,
                             const ResampleStatistic& statistic, std::size_t replicates,
                             std::uint64_t seed, unsigned threads = 0,
                             bool keep_replicates = false);

BootstrapSummary bootstrap_se(const TrialDataset& data, const BootstrapConfig& config);

}  // namespace steinmed
