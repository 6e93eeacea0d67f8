#include "steinmed/errors.hpp"

namespace steinmed {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Config: return "config";
    case ErrorCategory::Data: return "data";
    case ErrorCategory::Numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace steinmed
