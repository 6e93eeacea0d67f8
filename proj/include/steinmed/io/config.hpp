#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "steinmed/bootstrap.hpp"
#include "steinmed/effects.hpp"
#include "steinmed/io/csv.hpp"
#include "steinmed/simulate.hpp"

namespace steinmed::io {

enum class OutputFormat { Table, Csv, Json };

std::string_view to_string(OutputFormat f) noexcept;
OutputFormat parse_format(std::string_view s);
CseMode parse_cse_mode(std::string_view s);
TslsCovariance parse_tsls_covariance(std::string_view s);
std::string_view to_string(TslsCovariance c) noexcept;

/// Everything a CLI run depends on. Defaults are complete: a resolved config
/// echoed back reproduces the run.
struct RunConfig {
  std::string input;
  ColumnRoles roles;
  std::vector<EstimatorTag> estimators{EstimatorTag::Ols, EstimatorTag::Tsls, EstimatorTag::Spsl};
  /// Coefficients targeted by the SPSL projection; empty = treatment only.
  std::vector<std::string> projection;
  CseMode cse_mode = CseMode::Hausman;
  std::size_t cse_replicates = 200;
  TslsCovariance tsls_covariance = TslsCovariance::Projected;
  std::size_t bootstrap = 1000;
  bool freeze_alpha = false;
  std::uint64_t seed = 20240101;
  OutputFormat format = OutputFormat::Table;
  /// Machine-readable output path (JSON or CSV by `format`, JSON for table).
  std::string output;
  unsigned threads = 0;

  std::vector<double> etas{0.0, 0.25, 0.5};
  std::vector<double> kappas{0.01, 0.25, 0.5};
  std::vector<std::size_t> ns{100, 300, 500};
  std::size_t replications = 2000;
  bool full_fidelity = false;
  std::string replicates_output;
};

/// Overlays the keys of a JSON object onto `base`. Unknown keys and wrong
/// types are ConfigErrors.
RunConfig merge_json(const std::string& json_text, RunConfig base);
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// The resolved configuration as one JSON line, every field present.
std::string echo_config(const RunConfig& config);

EstimatorSettings estimator_settings(const RunConfig& config);
BootstrapConfig bootstrap_config(const RunConfig& config, EstimatorTag estimator);
GridConfig grid_config(const RunConfig& config);

}  // namespace steinmed::io
