#include "steinmed/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "steinmed/errors.hpp"
#include "steinmed/parallel.hpp"
#include "steinmed/rng.hpp"

namespace steinmed {

double BootstrapSummary::se_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("bootstrap summary has no quantity '" + std::string(name) + "'");
  return se[static_cast<std::size_t>(it - names.begin())];
}

std::vector<std::size_t> bootstrap_rows(std::uint64_t seed, std::size_t replicate, std::size_t n) {
  auto engine = rng::make_stream(seed, rng::Domain::Bootstrap, replicate);
  std::vector<std::size_t> rows(n);
  for (auto& i : rows) i = rng::uniform_index(engine, n);
  return rows;
}

BootstrapSummary resample_se(std::size_t n, std::vector<std::string> names,
                             const ResampleStatistic& statistic, std::size_t replicates,
                             std::uint64_t seed, unsigned threads, bool keep_replicates) {
  if (replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
  if (n == 0) throw DataError("bootstrap of an empty dataset");
  BootstrapSummary summary;
  summary.names = std::move(names);
  const std::size_t q = summary.names.size();
  const std::size_t b = replicates;

  std::vector<std::vector<double>> draws(b);
  parallel_for(b, threads, [&](std::size_t r) {
    const auto rows = bootstrap_rows(seed, r, n);
    try {
      std::vector<double> row = statistic(r, rows);
      if (row.size() != q) throw std::logic_error("bootstrap statistic changed length");
      draws[r] = std::move(row);
    } catch (const NumericalError&) {
    } catch (const DataError&) {
    }
  });

  std::vector<double> mean(q, 0.0);
  for (const auto& row : draws) {
    if (row.empty() && q > 0) continue;
    ++summary.successful;
    for (std::size_t j = 0; j < q; ++j) mean[j] += row[j];
  }
  summary.n_failed = b - summary.successful;
  if (summary.successful == 0)
    throw NumericalError("bootstrap: all " + std::to_string(b) + " replicates failed");
  for (double& m : mean) m /= static_cast<double>(summary.successful);

  summary.se.assign(q, 0.0);
  if (keep_replicates) summary.replicate_estimates = Matrix(summary.successful, q);
  std::size_t row_index = 0;
  for (const auto& row : draws) {
    if (row.empty() && q > 0) continue;
    for (std::size_t j = 0; j < q; ++j) {
      const double d = row[j] - mean[j];
      summary.se[j] += d * d;
      if (summary.replicate_estimates) (*summary.replicate_estimates)(row_index, j) = row[j];
    }
    ++row_index;
  }
  if (summary.successful >= 2) {
    for (double& s : summary.se) s = std::sqrt(s / static_cast<double>(summary.successful - 1));
  } else {
    std::fill(summary.se.begin(), summary.se.end(), 0.0);
    summary.warnings.emplace_back("bootstrap: only one successful replicate; standard errors set to 0");
  }

  if (summary.n_failed * 100 > b) {
    std::ostringstream w;
    w << "bootstrap: " << summary.n_failed << " of " << b
      << " replicates had rank-deficient designs and were dropped";
    summary.warnings.push_back(w.str());
  }
  return summary;
}

BootstrapSummary bootstrap_se(const TrialDataset& data, const BootstrapConfig& config) {
  if (config.replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
  data.validate();

  EstimatorSettings settings = config.settings;
  if (config.estimator == EstimatorTag::Spsl && config.freeze_alpha && !settings.fixed_alpha)
    settings.fixed_alpha = fit_mediation(data, EstimatorTag::Spsl, settings).alpha_hat;

  const MediationFit reference = fit_mediation(data, config.estimator, settings);
  std::vector<std::string> names = reference.coef.names;
  names.insert(names.end(), {"TE", "NDE", "NIE"});

  auto statistic = [&](std::size_t r, std::span<const std::size_t> rows) {
    const TrialDataset resample = select_rows(data, rows);
    EstimatorSettings local = settings;
    // nested CSE resampling gets its own stream per outer replicate
    local.cse.seed = rng::stream_key(settings.cse.seed, rng::Domain::CseBootstrap, r);
    local.cse.threads = 1;
    const MediationFit fit = fit_mediation(resample, config.estimator, local);
    std::vector<double> row = fit.coef.values;
    row.insert(row.end(), {fit.effects.te, fit.effects.nde, fit.effects.nie});
    return row;
  };
  return resample_se(data.n(), std::move(names), statistic, config.replicates, config.seed,
                     config.threads, config.keep_replicates);
}

}  // namespace steinmed
