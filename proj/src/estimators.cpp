#include "steinmed/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "steinmed/kernels.hpp"
#include "steinmed/parallel.hpp"
#include "steinmed/rng.hpp"

namespace steinmed {

std::string_view to_string(EstimatorTag tag) noexcept {
  switch (tag) {
    case EstimatorTag::Ols: return "OLS";
    case EstimatorTag::Tsls: return "TSLS";
    case EstimatorTag::Spsl: return "SPSL";
  }
  return "?";
}

EstimatorTag parse_estimator(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::toupper(c); });
  if (s == "OLS") return EstimatorTag::Ols;
  if (s == "TSLS") return EstimatorTag::Tsls;
  if (s == "SPSL") return EstimatorTag::Spsl;
  throw ConfigError("unknown estimator '" + std::string(name) + "' (expected OLS, TSLS or SPSL)");
}

std::string_view to_string(CseMode mode) noexcept {
  return mode == CseMode::Hausman ? "hausman" : "bootstrap";
}

std::vector<double> FitResult::standard_errors() const {
  std::vector<double> se(cov.rows());
  for (std::size_t i = 0; i < se.size(); ++i) se[i] = std::sqrt(std::max(0.0, cov(i, i)));
  return se;
}

namespace {

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) names.push_back("b" + std::to_string(j));
  return names;
}

std::vector<double> residuals(std::span<const double> y, const Matrix& design,
                              std::span<const double> coef) {
  std::vector<double> fitted = multiply(design, coef);
  std::vector<double> res(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) res[i] = y[i] - fitted[i];
  return res;
}

Matrix scaled(const Matrix& a, double s) {
  Matrix out = a;
  kernels::scale(s, out.data().data(), out.data().size());
  return out;
}

}  // namespace

FitResult ols_fit(std::span<const double> y, const Matrix& design, std::vector<std::string> names,
                  const FitOptions& options) {
  const std::size_t n = design.rows();
  const std::size_t p = design.cols();
  if (y.size() != n) throw DataError("OLS: outcome length does not match design rows");
  if (n <= p)
    throw DataError("OLS: insufficient degrees of freedom (n=" + std::to_string(n) +
                    ", columns=" + std::to_string(p) + ")");
  if (names.empty()) names = default_names(p);

  HouseholderQr qr(design, options.max_condition);
  qr.require_full_rank(names, "OLS (OLS-4: E[VV'] must be of full rank)");

  FitResult fit;
  fit.tag = EstimatorTag::Ols;
  fit.coef.values = qr.solve(y);
  fit.coef.names = std::move(names);
  fit.df = static_cast<int>(n - p);

  // RSS from the trailing entries of Q'y
  std::vector<double> work(y.begin(), y.end());
  qr.apply_qt(work);
  const double rss = kernels::dot(work.data() + p, work.data() + p, n - p);
  fit.sigma2 = rss / fit.df;
  fit.cov = scaled(qr.inverse_gram(), fit.sigma2);
  return fit;
}

FitResult ols_fit(std::span<const double> y, const DesignBundle& bundle, const FitOptions& options) {
  return ols_fit(y, bundle.v, bundle.v_names, options);
}

Matrix first_stage_project(const Matrix& v, const Matrix& z, double max_condition,
                           std::span<const std::string> z_names) {
  if (v.rows() != z.rows()) throw DataError("first stage: v and z differ in row count");
  if (z.rows() <= z.cols()) throw DataError("first stage: needs more rows than instruments");
  HouseholderQr qr(z, max_condition);
  qr.require_full_rank(z_names, "TSLS (TSLS-3: E[ZZ'] must be of full rank)");

  Matrix vhat(v.rows(), v.cols());
  for (std::size_t j = 0; j < v.cols(); ++j) {
    auto src = v.col(j);
    bool copied = false;
    for (std::size_t c = 0; c < z.cols() && !copied; ++c) {
      auto zc = z.col(c);
      if (std::equal(src.begin(), src.end(), zc.begin())) {
        std::copy(src.begin(), src.end(), vhat.col(j).begin());
        copied = true;
      }
    }
    if (!copied) {
      auto proj = qr.project(src);
      std::copy(proj.begin(), proj.end(), vhat.col(j).begin());
    }
  }
  return vhat;
}

FitResult tsls_fit(std::span<const double> y, const DesignBundle& bundle, const FitOptions& options) {
  const Matrix& v = bundle.v;
  const std::size_t n = v.rows();
  const std::size_t p = v.cols();
  if (y.size() != n) throw DataError("TSLS: outcome length does not match design rows");
  if (n <= p) throw DataError("TSLS: insufficient degrees of freedom");

  const Matrix vhat = first_stage_project(v, bundle.z, options.max_condition, bundle.z_names);
  HouseholderQr qr(vhat, options.max_condition);
  qr.require_full_rank(bundle.v_names,
                       "TSLS (TSLS-3: E[ZV'] must be of full rank; projected regressors are collinear)");

  FitResult fit;
  fit.tag = EstimatorTag::Tsls;
  fit.coef.values = qr.solve(y);
  fit.coef.names = bundle.v_names;
  fit.df = static_cast<int>(n - p);

  const auto res = residuals(y, v, fit.coef.values);
  fit.sigma2 = sum_of_squares(res) / fit.df;
  if (options.tsls_covariance == TslsCovariance::Projected) {
    fit.cov = scaled(qr.inverse_gram(), fit.sigma2);
  } else {
    HouseholderQr qv(v, options.max_condition);
    qv.require_full_rank(bundle.v_names, "TSLS covariance (V'V)");
    fit.cov = scaled(qv.inverse_gram(), fit.sigma2);
  }

  if (options.check_instrument_strength && bundle.excluded_count() > 0) {
    fit.first_stage = first_stage_f(bundle, options.max_condition);
    if (fit.first_stage->f < options.weak_instrument_f) {
      std::ostringstream w;
      w << "weak instruments: first-stage F = " << fit.first_stage->f << " < "
        << options.weak_instrument_f;
      fit.warnings.push_back(w.str());
    }
  }
  return fit;
}

// ---------------------------------------------------------------------------

SelectionProjection::SelectionProjection(std::vector<std::size_t> selected, std::size_t width)
    : selected_(std::move(selected)), width_(width) {
  std::sort(selected_.begin(), selected_.end());
  selected_.erase(std::unique(selected_.begin(), selected_.end()), selected_.end());
  if (selected_.empty()) throw ConfigError("projection must select at least one coefficient");
  if (selected_.back() >= width_)
    throw ConfigError("projection index " + std::to_string(selected_.back()) +
                      " out of range for " + std::to_string(width_) + " coefficients");
}

SelectionProjection SelectionProjection::treatment_only(const DesignBundle& bundle) {
  return SelectionProjection({bundle.index.r}, bundle.v.cols());
}

SelectionProjection SelectionProjection::all(std::size_t width) {
  std::vector<std::size_t> idx(width);
  for (std::size_t j = 0; j < width; ++j) idx[j] = j;
  return SelectionProjection(std::move(idx), width);
}

SelectionProjection SelectionProjection::from_names(std::span<const std::string> names,
                                                    std::span<const std::string> coefficient_names) {
  std::vector<std::size_t> idx;
  for (const auto& name : names) {
    auto it = std::find(coefficient_names.begin(), coefficient_names.end(), name);
    if (it == coefficient_names.end())
      throw ConfigError("projection names unknown coefficient '" + name + "'");
    idx.push_back(static_cast<std::size_t>(it - coefficient_names.begin()));
  }
  return SelectionProjection(std::move(idx), coefficient_names.size());
}

bool SelectionProjection::contains(std::size_t index) const noexcept {
  return std::binary_search(selected_.begin(), selected_.end(), index);
}

Matrix SelectionProjection::matrix() const {
  Matrix p(width_, width_);
  for (std::size_t j : selected_) p(j, j) = 1.0;
  return p;
}

double SelectionProjection::trace_of(const Matrix& a) const {
  double t = 0.0;
  for (std::size_t j : selected_) t += a(j, j);
  return t;
}

// ---------------------------------------------------------------------------

Matrix hausman_cse(const FitResult& ols) { return ols.cov; }

Matrix bootstrap_cse(std::span<const double> y, const DesignBundle& bundle, const CseConfig& config,
                     const FitOptions& options) {
  const std::size_t n = bundle.n();
  const std::size_t p = bundle.v.cols();
  const std::size_t b = config.replicates;
  if (b < 2) throw ConfigError("bootstrap CSE needs at least 2 replicates");

  FitOptions inner = options;
  inner.check_instrument_strength = false;

  std::vector<std::vector<double>> tsls_draws(b), ols_draws(b);
  std::vector<char> ok(b, 0);
  parallel_for(b, config.threads, [&](std::size_t r) {
    auto engine = rng::make_stream(config.seed, rng::Domain::CseBootstrap, r);
    std::vector<std::size_t> rows(n);
    for (auto& i : rows) i = rng::uniform_index(engine, n);
    DesignBundle rb = bundle;
    rb.v = select_rows(bundle.v, rows);
    rb.z = select_rows(bundle.z, rows);
    const auto ry = select_rows(y, rows);
    try {
      ols_draws[r] = ols_fit(ry, rb, inner).coef.values;
      tsls_draws[r] = tsls_fit(ry, rb, inner).coef.values;
      ok[r] = 1;
    } catch (const NumericalError&) {
    }
  });

  std::vector<double> mean_t(p, 0.0), mean_o(p, 0.0);
  std::size_t count = 0;
  for (std::size_t r = 0; r < b; ++r) {
    if (!ok[r]) continue;
    ++count;
    for (std::size_t j = 0; j < p; ++j) {
      mean_t[j] += tsls_draws[r][j];
      mean_o[j] += ols_draws[r][j];
    }
  }
  if (count < 2) throw NumericalError("bootstrap CSE: fewer than 2 successful replicates");
  for (std::size_t j = 0; j < p; ++j) {
    mean_t[j] /= static_cast<double>(count);
    mean_o[j] /= static_cast<double>(count);
  }
  Matrix c(p, p);
  for (std::size_t r = 0; r < b; ++r) {
    if (!ok[r]) continue;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j)
        c(i, j) += (tsls_draws[r][i] - mean_t[i]) * (ols_draws[r][j] - mean_o[j]);
  }
  const double scale = 1.0 / static_cast<double>(count - 1);
  for (double& x : c.data()) x *= scale;
  return c;
}

// ---------------------------------------------------------------------------

double trace_mse_objective(double alpha, const Matrix& m_tsls, const Matrix& cse, const Matrix& m_ols) {
  return alpha * alpha * trace(m_tsls) + 2.0 * alpha * (1.0 - alpha) * trace(cse) +
         (1.0 - alpha) * (1.0 - alpha) * trace(m_ols);
}

double alpha_from_traces(double tr_m_tsls, double tr_cse, double tr_m_ols) {
  const double num = tr_m_ols - tr_cse;
  const double den = tr_m_ols - 2.0 * tr_cse + tr_m_tsls;
  const double scale = std::abs(tr_m_ols) + 2.0 * std::abs(tr_cse) + std::abs(tr_m_tsls);
  if (!(std::abs(den) > 1e-14 * scale) || den == 0.0)
    throw DegenerateCombination(
        "trace-MSE minimizer undefined: tr(M_ols - 2C + M_tsls) = 0 (equal trace RMSEs)");
  return num / den;
}

double closed_form_alpha(const Matrix& m_tsls, const Matrix& cse, const Matrix& m_ols) {
  const std::size_t p = m_tsls.rows();
  if (m_tsls.cols() != p || cse.rows() != p || cse.cols() != p || m_ols.rows() != p ||
      m_ols.cols() != p)
    throw DataError("closed_form_alpha: matrices must be square and of equal size");
  return alpha_from_traces(trace(m_tsls), trace(cse), trace(m_ols));
}

AlphaEstimate estimate_alpha(const FitResult& ols, const FitResult& tsls,
                             const SelectionProjection& projection, const Matrix& cse) {
  const std::size_t p = ols.coef.size();
  if (tsls.coef.size() != p || projection.width() != p || cse.rows() != p || cse.cols() != p)
    throw DataError("estimate_alpha: OLS, TSLS, CSE and projection widths differ");
  if (ols.coef.names != tsls.coef.names)
    throw DataError("estimate_alpha: OLS and TSLS were fitted on different designs");

  AlphaEstimate est;
  const double tr_tsls = projection.trace_of(tsls.cov);
  const double tr_ols = projection.trace_of(ols.cov);
  const double tr_cse = projection.trace_of(cse);
  est.tau_hat = tr_tsls - tr_cse;
  for (std::size_t j : projection.selected()) {
    const double d = ols.coef.values[j] - tsls.coef.values[j];
    est.denom += d * d;
  }
  const double var_difference = tr_ols - 2.0 * tr_cse + tr_tsls;
  est.bias2_hat = std::max(0.0, est.denom - var_difference);

  double tsls_norm2 = 0.0;
  for (double b : tsls.coef.values) tsls_norm2 += b * b;
  const double tol = 1e-12 * (1.0 + tsls_norm2);
  const double objective_curvature = var_difference + est.bias2_hat;
  if (!(objective_curvature > tol)) {
    est.degenerate = true;
    est.alpha_hat = 1.0;
    return est;
  }
  est.alpha_hat = alpha_from_traces(tr_tsls, tr_cse, tr_ols + est.bias2_hat);
  return est;
}

std::vector<double> affine_combination(double alpha, std::span<const double> tsls,
                                       std::span<const double> ols) {
  if (tsls.size() != ols.size()) throw DataError("affine_combination: lengths differ");
  std::vector<double> out(tsls.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = alpha * tsls[j] + (1.0 - alpha) * ols[j];
  return out;
}

SpslResult spsl_combine_fixed(FitResult ols, FitResult tsls, SelectionProjection projection,
                              double alpha) {
  SpslResult out{.coef = {},
                 .alpha_hat = alpha,
                 .tau_hat = 0.0,
                 .denom = 0.0,
                 .bias2_hat = 0.0,
                 .degenerate = false,
                 .ols = std::move(ols),
                 .tsls = std::move(tsls),
                 .projection = std::move(projection),
                 .notes = {}};
  out.coef.values = affine_combination(alpha, out.tsls.coef.values, out.ols.coef.values);
  out.coef.names = out.tsls.coef.names;
  return out;
}

SpslResult spsl_combine(FitResult ols, FitResult tsls, SelectionProjection projection,
                        const Matrix& cse) {
  const AlphaEstimate est = estimate_alpha(ols, tsls, projection, cse);
  SpslResult out = spsl_combine_fixed(std::move(ols), std::move(tsls), std::move(projection),
                                      est.alpha_hat);
  out.tau_hat = est.tau_hat;
  out.denom = est.denom;
  out.bias2_hat = est.bias2_hat;
  out.degenerate = est.degenerate;
  if (est.degenerate)
    out.notes.emplace_back(
        "degenerate shrinkage denominator: OLS and TSLS coincide on the projection; using TSLS");
  return out;
}

SpslResult spsl_fit(std::span<const double> y, const DesignBundle& bundle,
                    SelectionProjection projection, const CseConfig& cse,
                    const FitOptions& options) {
  FitResult ols = ols_fit(y, bundle, options);
  FitResult tsls = tsls_fit(y, bundle, options);
  const Matrix c = cse.mode == CseMode::Hausman ? hausman_cse(ols)
                                                : bootstrap_cse(y, bundle, cse, options);
  return spsl_combine(std::move(ols), std::move(tsls), std::move(projection), c);
}

std::vector<double> spsl_empirical_bias(const SpslResult& result) {
  std::vector<double> bias(result.coef.size(), 0.0);
  for (std::size_t j : result.projection.selected())
    bias[j] = result.coef.values[j] - result.tsls.coef.values[j];
  return bias;
}

}  // namespace steinmed
