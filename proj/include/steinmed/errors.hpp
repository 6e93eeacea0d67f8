#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace steinmed {

/// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
  Config = 2,
  Data = 3,
  Numerical = 4,
};

std::string_view category_name(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::Config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::Data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorCategory::Numerical, what) {}
};

// A design (or population Gram matrix) without full column rank. `direction`
// holds unit-norm coefficients of the near-null combination of columns, in
// column order, when one could be computed.
class IdentifiabilityError : public NumericalError {
 public:
  IdentifiabilityError(const std::string& what, std::vector<double> direction,
                       double condition)
      : NumericalError(what), direction_(std::move(direction)), condition_(condition) {}

  const std::vector<double>& direction() const noexcept { return direction_; }
  double condition() const noexcept { return condition_; }

 private:
  std::vector<double> direction_;
  double condition_;
};

// Simulation scenario whose closed-form error variances are not positive.
class InfeasibleScenario : public ConfigError {
 public:
  explicit InfeasibleScenario(const std::string& what) : ConfigError(what) {}
};

}  // namespace steinmed
