#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "steinmed/model.hpp"

namespace steinmed::io {

struct ColumnRoles {
  std::string outcome;
  std::string treatment;
  std::string mediator;
  std::vector<std::string> covariates;
  /// Optional extra instruments appended after the R*X block.
  std::vector<std::string> instruments;

  /// Throws ConfigError when a role is missing or two roles share a column.
  void validate() const;
};

struct LoadResult {
  TrialDataset data;
  std::size_t rows_read = 0;
  /// Rows dropped because a used cell was empty or non-numeric.
  std::size_t dropped = 0;
};

/// Comma-separated, header row first, '.' decimal point. Complete cases only;
/// the intercept column is prepended.
LoadResult read_csv(std::istream& in, const ColumnRoles& roles);
LoadResult load_csv(const std::filesystem::path& path, const ColumnRoles& roles);

/// Writes y, treatment, mediator, covariates (no intercept) and any extra
/// instruments with round-trip precision.
void write_csv(std::ostream& out, const TrialDataset& data);
void save_csv(const std::filesystem::path& path, const TrialDataset& data);

/// The roles that read back a file produced by write_csv.
ColumnRoles roles_of(const TrialDataset& data);

/// One CSV record split on commas, honouring double quotes.
std::vector<std::string> split_record(const std::string& line);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace steinmed::io
