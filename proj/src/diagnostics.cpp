#include "steinmed/diagnostics.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "steinmed/errors.hpp"
#include "steinmed/kernels.hpp"

namespace steinmed {

double f_upper_tail(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw DataError("f_upper_tail: degrees of freedom must be >= 1");
  if (std::isnan(f) || f < 0.0) throw DataError("f_upper_tail: statistic must be >= 0");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double a = 0.5 * df1;
  const double b = 0.5 * df2;
  // P(F > f) = I_{d2/(d2 + d1 f)}(b, a)
  const double x = df2 / (df2 + df1 * f);
  return boost::math::ibeta(b, a, x);
}

namespace {

double residual_ss(std::span<const double> y, const Matrix& design, double max_condition,
                   std::string_view context) {
  HouseholderQr qr(design, max_condition);
  qr.require_full_rank({}, context);
  std::vector<double> work(y.begin(), y.end());
  qr.apply_qt(work);
  const std::size_t p = design.cols();
  return kernels::dot(work.data() + p, work.data() + p, work.size() - p);
}

Matrix leading_columns(const Matrix& a, std::size_t count) {
  Matrix out(a.rows(), count);
  for (std::size_t j = 0; j < count; ++j) std::copy_n(a.col(j).begin(), a.rows(), out.col(j).begin());
  return out;
}

}  // namespace

FTestResult nested_f_test(std::span<const double> response, const Matrix& full,
                          std::size_t restricted_cols, double max_condition) {
  const std::size_t n = full.rows();
  const std::size_t p = full.cols();
  if (response.size() != n) throw DataError("F-test: response length does not match design");
  if (restricted_cols >= p) throw DataError("F-test: no excluded columns to test (q = 0)");
  if (n <= p) throw DataError("F-test: needs more observations than columns");

  const double rss_full = residual_ss(response, full, max_condition, "F-test (unrestricted model)");
  const double rss_restricted =
      residual_ss(response, leading_columns(full, restricted_cols), max_condition,
                  "F-test (restricted model)");

  FTestResult out;
  out.df1 = static_cast<int>(p - restricted_cols);
  out.df2 = static_cast<int>(n - p);
  const double gain = std::max(0.0, rss_restricted - rss_full);
  if (rss_full <= 0.0) {
    out.f = gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    out.f = (gain / out.df1) / (rss_full / out.df2);
  }
  out.p = f_upper_tail(out.f, out.df1, out.df2);

  const double mean = kernels::sum(response.data(), n) / static_cast<double>(n);
  double tss = 0.0;
  for (double v : response) tss += (v - mean) * (v - mean);
  out.r2_full = tss > 0.0 ? 1.0 - rss_full / tss : 0.0;
  return out;
}

FTestResult first_stage_f(const DesignBundle& bundle, double max_condition) {
  if (bundle.excluded_count() == 0) throw DataError("first-stage F: no excluded instruments");
  return nested_f_test(bundle.v.col(bundle.index.m), bundle.z, bundle.excluded_begin, max_condition);
}

FTestResult first_stage_f(const TrialDataset& data, const DesignBundle& bundle) {
  if (data.n() != bundle.n()) throw DataError("first-stage F: dataset and design differ in size");
  return first_stage_f(bundle);
}

}  // namespace steinmed
