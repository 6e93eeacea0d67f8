#include "steinmed/model.hpp"

#include <algorithm>
#include <cmath>

#include "steinmed/errors.hpp"

namespace steinmed {

std::string interaction_name(std::string_view treatment, std::string_view covariate) {
  std::string s(treatment);
  s += ':';
  s += covariate;
  return s;
}

void TrialDataset::validate() const {
  const std::size_t n = y.size();
  if (n == 0) throw DataError("dataset is empty");
  if (r.size() != n || m.size() != n || x.rows() != n)
    throw DataError("column lengths differ (y=" + std::to_string(n) + ", r=" +
                    std::to_string(r.size()) + ", m=" + std::to_string(m.size()) +
                    ", x=" + std::to_string(x.rows()) + ")");
  if (u && u->size() != n) throw DataError("latent confounder column has the wrong length");
  if (!extra_instruments.empty() && extra_instruments.rows() != n)
    throw DataError("instrument columns have the wrong length");
  if (x.cols() == 0) throw DataError("covariate matrix needs an intercept column");
  for (double v : x.col(0))
    if (v != 1.0) throw DataError("first covariate column must be the all-ones intercept");
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] != 0.0 && r[i] != 1.0)
      throw DataError("treatment not binary (row " + std::to_string(i) + ")");
    if (!std::isfinite(y[i]) || !std::isfinite(m[i]))
      throw DataError("non-finite outcome or mediator (row " + std::to_string(i) + ")");
  }
  for (double v : x.data())
    if (!std::isfinite(v)) throw DataError("non-finite covariate value");
  if (!covariate_names.empty() && covariate_names.size() != x.cols())
    throw DataError("covariate_names does not match covariate width");
}

TrialDataset make_dataset(std::vector<double> y, std::vector<double> r, std::vector<double> m,
                          const std::vector<std::vector<double>>& covariates,
                          std::vector<std::string> covariate_names) {
  TrialDataset d;
  const std::size_t n = y.size();
  d.y = std::move(y);
  d.r = std::move(r);
  d.m = std::move(m);
  d.x = Matrix(n, covariates.size() + 1, 1.0);
  for (std::size_t j = 0; j < covariates.size(); ++j) {
    if (covariates[j].size() != n) throw DataError("covariate column has the wrong length");
    std::copy(covariates[j].begin(), covariates[j].end(), d.x.col(j + 1).begin());
  }
  if (covariate_names.empty()) {
    for (std::size_t j = 0; j < covariates.size(); ++j)
      covariate_names.push_back("x" + std::to_string(j + 1));
  }
  if (covariate_names.size() != covariates.size())
    throw DataError("covariate_names does not match the number of covariates");
  d.covariate_names.reserve(covariates.size() + 1);
  d.covariate_names.emplace_back(kInterceptName);
  for (auto& s : covariate_names) d.covariate_names.push_back(std::move(s));
  d.validate();
  return d;
}

DesignBundle build_designs(const TrialDataset& data) {
  data.validate();
  const std::size_t n = data.n();
  const std::size_t k = data.k();
  const std::size_t extra = data.extra_instruments.empty() ? 0 : data.extra_instruments.cols();
  if (n <= 2 * k + 1 + extra)
    throw DataError("insufficient observations: n=" + std::to_string(n) + " but the instrument " +
                    "design needs n > " + std::to_string(2 * k + 1 + extra));

  std::vector<std::string> xnames = data.covariate_names;
  if (xnames.empty()) {
    xnames.emplace_back(kInterceptName);
    for (std::size_t j = 1; j < k; ++j) xnames.push_back("x" + std::to_string(j));
  }

  DesignBundle b;
  b.k = k;
  b.v = Matrix(n, k + 2);
  for (std::size_t j = 0; j < k; ++j) std::copy_n(data.x.col(j).begin(), n, b.v.col(j).begin());
  std::copy(data.m.begin(), data.m.end(), b.v.col(k).begin());
  std::copy(data.r.begin(), data.r.end(), b.v.col(k + 1).begin());
  b.v_names = xnames;
  b.v_names.push_back(data.mediator_name);
  b.v_names.push_back(data.treatment_name);
  b.index = IndexMap{0, k, k, k + 1};

  b.z = Matrix(n, 2 * k + extra);
  for (std::size_t j = 0; j < k; ++j) std::copy_n(data.x.col(j).begin(), n, b.z.col(j).begin());
  std::copy(data.r.begin(), data.r.end(), b.z.col(k).begin());
  b.z_names = xnames;
  b.z_names.push_back(data.treatment_name);
  for (std::size_t j = 1; j < k; ++j) {
    auto dst = b.z.col(k + j);
    auto src = data.x.col(j);
    for (std::size_t i = 0; i < n; ++i) dst[i] = data.r[i] * src[i];
    b.z_names.push_back(interaction_name(data.treatment_name, xnames[j]));
  }
  for (std::size_t j = 0; j < extra; ++j) {
    std::copy_n(data.extra_instruments.col(j).begin(), n, b.z.col(2 * k + j).begin());
    b.z_names.push_back(j < data.instrument_names.size() ? data.instrument_names[j]
                                                         : "iv" + std::to_string(j + 1));
  }
  b.excluded_begin = k + 1;
  return b;
}

TrialDataset select_rows(const TrialDataset& data, std::span<const std::size_t> rows) {
  TrialDataset out;
  out.y = select_rows(data.y, rows);
  out.r = select_rows(data.r, rows);
  out.m = select_rows(data.m, rows);
  out.x = select_rows(data.x, rows);
  if (data.u) out.u = select_rows(*data.u, rows);
  if (!data.extra_instruments.empty()) out.extra_instruments = select_rows(data.extra_instruments, rows);
  out.outcome_name = data.outcome_name;
  out.treatment_name = data.treatment_name;
  out.mediator_name = data.mediator_name;
  out.covariate_names = data.covariate_names;
  out.instrument_names = data.instrument_names;
  return out;
}

std::size_t CoefficientVector::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("unknown coefficient '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

double CoefficientVector::at(std::string_view name) const { return values[index_of(name)]; }

}  // namespace steinmed
