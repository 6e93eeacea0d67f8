#include "steinmed/io/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "steinmed/bootstrap.hpp"
#include "steinmed/effects.hpp"
#include "steinmed/errors.hpp"

namespace steinmed::io {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::array<EstimatorTag, 3> kAll{EstimatorTag::Ols, EstimatorTag::Tsls, EstimatorTag::Spsl};

bool shown(const ReportTable& t, EstimatorTag tag) {
  return std::find(t.estimators.begin(), t.estimators.end(), tag) != t.estimators.end();
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s << std::fixed << std::setprecision(decimals) << v;
  std::string out = s.str();
  // avoid "-0.00"
  if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

ReportTable build_report(const TrialDataset& data, const RunConfig& config, std::size_t dropped) {
  if (config.estimators.empty()) throw ConfigError("no estimator selected");
  const EstimatorSettings settings = estimator_settings(config);
  const MediationAnalysis a = analyze(data, settings);

  ReportTable t;
  t.estimators = config.estimators;
  t.n = data.n();
  t.dropped = dropped;
  t.seed = config.seed;
  t.alpha_hat = a.spsl.alpha_hat;
  t.first_stage = first_stage_f(a.bundle, settings.fit.max_condition);
  t.bootstrap_replicates = config.bootstrap;

  const auto& names = a.bundle.v_names;
  const FitResult* fits[2] = {&a.ols(), &a.tsls()};
  const std::vector<double> analytic_se[2] = {a.ols().standard_errors(), a.tsls().standard_errors()};
  for (std::size_t j = 0; j < names.size(); ++j) {
    ReportRow row{names[j], {}};
    for (int e = 0; e < 2; ++e) row.cells[e] = {fits[e]->coef.values[j], analytic_se[e][j]};
    row.at(EstimatorTag::Spsl) = {a.spsl.coef.values[j], kNaN};
    t.coefficients.push_back(row);
  }
  const CausalEffects effects[3] = {a.ols_effects, a.tsls_effects, a.spsl_effects};
  for (std::size_t e = 0; e < 3; ++e) {
    t.te.cells[e] = {effects[e].te, kNaN};
    t.nde.cells[e] = {effects[e].nde, kNaN};
    t.nie.cells[e] = {effects[e].nie, kNaN};
  }
  for (auto& w : a.tsls().warnings) t.warnings.push_back(w);
  for (auto& w : a.spsl.notes) t.warnings.push_back(w);

  if (config.bootstrap > 0) {
    for (EstimatorTag tag : config.estimators) {
      const BootstrapSummary b = bootstrap_se(data, bootstrap_config(config, tag));
      for (auto& row : t.coefficients) row.at(tag).se = b.se_of(row.name);
      t.te.at(tag).se = b.se_of("TE");
      t.nde.at(tag).se = b.se_of("NDE");
      t.nie.at(tag).se = b.se_of("NIE");
      for (const auto& w : b.warnings) t.warnings.push_back(std::string(to_string(tag)) + " " + w);
    }
  }
  return t;
}

CollinearityCheck check_collinearity(const ReportTable& table, int decimals) {
  CollinearityCheck out;
  const double a = table.alpha_hat;
  const double scale = std::pow(10.0, decimals);
  auto shown_value = [&](double v) { return std::round(v * scale) / scale; };
  const double allowance = 0.5 / scale * (1.0 + std::abs(a) + std::abs(1.0 - a)) + 1e-9;

  auto check = [&](const ReportRow& row) {
    const double o = shown_value(row.at(EstimatorTag::Ols).estimate);
    const double t = shown_value(row.at(EstimatorTag::Tsls).estimate);
    const double s = shown_value(row.at(EstimatorTag::Spsl).estimate);
    const double gap = std::abs(s - (a * t + (1.0 - a) * o));
    if (!std::isfinite(gap)) {
      out.passed = false;
      out.worst_row = row.name;
      out.max_excess = std::numeric_limits<double>::infinity();
      return;
    }
    const double excess = gap - allowance;
    if (excess > out.max_excess || (out.worst_row.empty() && excess > 0.0)) {
      out.max_excess = excess;
      out.worst_row = row.name;
    }
    if (excess > 0.0) out.passed = false;
  };
  for (const auto& row : table.coefficients) check(row);
  check(table.nde);
  check(table.nie);
  return out;
}

std::string format_table(const ReportTable& t) {
  std::size_t name_width = 12;
  for (const auto& r : t.coefficients) name_width = std::max(name_width, r.name.size() + 2);
  constexpr std::size_t cell_width = 18;

  std::ostringstream s;
  s << std::string(name_width, ' ');
  for (EstimatorTag tag : kAll)
    if (shown(t, tag)) s << pad(std::string(to_string(tag)) + " Est. (SE)", cell_width);
  s << '\n';
  auto emit = [&](const ReportRow& row) {
    std::string label = row.name;
    label.resize(name_width, ' ');
    s << label;
    for (EstimatorTag tag : kAll) {
      if (!shown(t, tag)) continue;
      const auto& c = row.at(tag);
      std::string cell = fixed(c.estimate);
      if (!std::isnan(c.se)) cell += " (" + fixed(c.se) + ")";
      s << pad(cell, cell_width);
    }
    s << '\n';
  };
  for (const auto& row : t.coefficients) emit(row);
  s << "Causal effects\n";
  emit(t.nde);
  emit(t.nie);
  s << "Shrinkage\n";
  std::string label = "alpha (TSLS weight)";
  s << label << "  " << fixed(t.alpha_hat) << '\n';
  s << '\n' << format_ftest(t.first_stage) << '\n';
  s << "n = " << t.n << " complete cases (" << t.dropped << " dropped)";
  if (t.bootstrap_replicates > 0)
    s << "; SEs from " << t.bootstrap_replicates << " bootstrap replicates, seed " << t.seed;
  else
    s << "; analytic SEs";
  s << '\n';
  const CollinearityCheck check = check_collinearity(t);
  s << "SPSL collinearity check: " << (check.passed ? "passed" : "FAILED at " + check.worst_row)
    << '\n';
  for (const auto& w : t.warnings) s << "warning: " << w << '\n';
  return s.str();
}

std::string report_json(const ReportTable& t) {
  json j;
  j["seed"] = t.seed;
  j["n"] = t.n;
  j["dropped"] = t.dropped;
  j["bootstrap"] = t.bootstrap_replicates;
  j["alpha_hat"] = number(t.alpha_hat);
  j["first_stage"] = {{"f", number(t.first_stage.f)},
                      {"df1", t.first_stage.df1},
                      {"df2", t.first_stage.df2},
                      {"p", number(t.first_stage.p)}};
  json estimates = json::array();
  json effects = json::array();
  for (EstimatorTag tag : kAll) {
    if (!shown(t, tag)) continue;
    const std::string name(to_string(tag));
    for (const auto& row : t.coefficients)
      estimates.push_back({{"estimator", name},
                           {"coefficient", row.name},
                           {"estimate", number(row.at(tag).estimate)},
                           {"se", number(row.at(tag).se)}});
    effects.push_back({{"estimator", name},
                       {"te", number(t.te.at(tag).estimate)},
                       {"nde", number(t.nde.at(tag).estimate)},
                       {"nie", number(t.nie.at(tag).estimate)},
                       {"se_te", number(t.te.at(tag).se)},
                       {"se_nde", number(t.nde.at(tag).se)},
                       {"se_nie", number(t.nie.at(tag).se)}});
  }
  j["estimates"] = estimates;
  j["effects"] = effects;
  const CollinearityCheck check = check_collinearity(t);
  j["collinearity_check"] = {{"passed", check.passed}, {"worst_row", check.worst_row}};
  j["warnings"] = t.warnings;
  return j.dump(2) + "\n";
}

std::string report_csv(const ReportTable& t) {
  std::ostringstream s;
  s << "estimator,coefficient,estimate,se\n";
  auto field = [](double v) { return std::isfinite(v) ? format_double(v) : std::string(); };
  for (EstimatorTag tag : kAll) {
    if (!shown(t, tag)) continue;
    const std::string name(to_string(tag));
    for (const auto& row : t.coefficients)
      s << name << ',' << row.name << ',' << field(row.at(tag).estimate) << ','
        << field(row.at(tag).se) << '\n';
    for (const ReportRow* row : {&t.te, &t.nde, &t.nie})
      s << name << ',' << row->name << ',' << field(row->at(tag).estimate) << ','
        << field(row->at(tag).se) << '\n';
  }
  if (shown(t, EstimatorTag::Spsl)) s << "SPSL,alpha_hat," << field(t.alpha_hat) << ",\n";
  return s.str();
}

std::string grid_csv(const GridSummary& g) {
  std::ostringstream s;
  s << "eta,kappa,n,estimator,estimand,truth,mean,bias,rmse,mcse,count,failures\n";
  for (const auto& r : g.rows)
    s << format_double(r.eta) << ',' << format_double(r.kappa) << ',' << r.n << ','
      << to_string(r.estimator) << ',' << to_string(r.estimand) << ',' << format_double(r.truth)
      << ',' << format_double(r.mean) << ',' << format_double(r.bias) << ','
      << format_double(r.rmse) << ',' << format_double(r.mcse) << ',' << r.count << ','
      << r.failures << '\n';
  return s.str();
}

std::string grid_json(const GridSummary& g, std::uint64_t seed) {
  json rows = json::array();
  for (const auto& r : g.rows)
    rows.push_back({{"scenario", {{"eta", r.eta}, {"kappa", r.kappa}, {"n", r.n}}},
                    {"estimator", std::string(to_string(r.estimator))},
                    {"estimand", std::string(to_string(r.estimand))},
                    {"truth", r.truth},
                    {"mean", number(r.mean)},
                    {"bias", number(r.bias)},
                    {"rmse", number(r.rmse)},
                    {"mcse", number(r.mcse)},
                    {"count", r.count},
                    {"failures", r.failures}});
  json j;
  j["seed"] = seed;
  j["rows"] = rows;
  j["max_affine_residual"] = g.max_affine_residual;
  j["warnings"] = g.warnings;
  return j.dump(2) + "\n";
}

std::string replicates_csv(const GridSummary& g) {
  std::ostringstream s;
  s << "eta,kappa,n,replicate,estimator,nde,nie,alpha_hat\n";
  for (const auto& r : g.replicates)
    s << format_double(r.eta) << ',' << format_double(r.kappa) << ',' << r.n << ','
      << r.replicate << ',' << to_string(r.estimator) << ',' << format_double(r.nde) << ','
      << format_double(r.nie) << ',' << format_double(r.alpha_hat) << '\n';
  return s.str();
}

std::string ftest_json(const FTestResult& f) {
  json j{{"f", number(f.f)}, {"df1", f.df1}, {"df2", f.df2}, {"p", number(f.p)},
         {"r2_full", number(f.r2_full)}};
  return j.dump(2) + "\n";
}

std::string format_ftest(const FTestResult& f) {
  std::ostringstream s;
  s << "First-stage F = " << fixed(f.f) << " on (" << f.df1 << ", " << f.df2 << ") df, ";
  if (f.p < 0.001)
    s << "p < 0.001";
  else
    s << "p = " << fixed(f.p, 3);
  s << "; R^2 = " << fixed(f.r2_full);
  if (f.f < kWeakInstrumentF) s << " (weak instruments: F < " << fixed(kWeakInstrumentF, 0) << ")";
  return s.str();
}

}  // namespace steinmed::io
