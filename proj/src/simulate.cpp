#include "steinmed/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "steinmed/errors.hpp"
#include "steinmed/linalg.hpp"
#include "steinmed/parallel.hpp"
#include "steinmed/rng.hpp"

namespace steinmed {

void ScenarioSpec::validate() const {
  if (!(eta >= 0.0 && eta <= 0.5))
    throw ConfigError("eta must lie in [0, 0.5], got " + std::to_string(eta));
  if (!(kappa > 0.0 && kappa <= 0.5))
    throw ConfigError("kappa must lie in (0, 0.5], got " + std::to_string(kappa) +
                      " (kappa = 0 leaves TSLS unidentified)");
  if (n < 6) throw ConfigError("simulated n must be at least 6, got " + std::to_string(n));
}

ErrorVariances error_variances(const ScenarioSpec& spec) {
  spec.validate();
  const auto& c = spec.coef;
  const double gu = spec.gamma_u();
  const double grx = spec.gamma_rx();
  ErrorVariances out;
  out.sigma2_delta = 1.0 - (2.0 * c.gamma_x * c.gamma_x + 0.25 * c.gamma_r * c.gamma_r +
                            grx * grx + gu * gu + 2.0 * grx * c.gamma_x);
  const double cross = 2.0 * c.beta_x * c.beta_m * (2.0 * c.gamma_x + grx) +
                       c.beta_r * c.beta_m * c.gamma_r / 2.0 + 2.0 * c.beta_m * c.beta_u * gu;
  out.sigma2_eps = 1.0 - (2.0 * c.beta_x * c.beta_x + 0.25 * c.beta_r * c.beta_r +
                          c.beta_m * c.beta_m + c.beta_u * c.beta_u + cross);
  if (!(out.sigma2_delta > 0.0)) {
    std::ostringstream s;
    s << "infeasible scenario (eta=" << spec.eta << ", kappa=" << spec.kappa
      << "): mediator error variance " << out.sigma2_delta
      << " <= 0; the coefficients need gamma_U <= 1/2 and gamma_X + gamma_RX <= 1/2";
    throw InfeasibleScenario(s.str());
  }
  if (!(out.sigma2_eps > 0.0)) {
    std::ostringstream s;
    s << "infeasible scenario (eta=" << spec.eta << ", kappa=" << spec.kappa
      << "): outcome error variance " << out.sigma2_eps
      << " <= 0; the coefficients need gamma_U <= 1/2 and gamma_X + gamma_RX <= 1/2";
    throw InfeasibleScenario(s.str());
  }
  return out;
}

CausalEffects true_effects(const ScenarioSpec& spec) {
  const double nie = spec.coef.beta_m * spec.coef.gamma_r;
  return CausalEffects{spec.coef.beta_r + nie, spec.coef.beta_r, nie};
}

TrialDataset generate_dataset(const ScenarioSpec& spec, std::uint64_t seed,
                              std::uint64_t replicate) {
  const ErrorVariances var = error_variances(spec);
  const auto& c = spec.coef;
  const double gu = spec.gamma_u();
  const double grx = spec.gamma_rx();
  const std::size_t n = spec.n;

  auto engine = rng::make_stream(seed, rng::Domain::Simulation, replicate);
  std::normal_distribution<double> x_dist(0.0, std::sqrt(2.0));
  std::bernoulli_distribution r_dist(0.5);
  std::normal_distribution<double> u_dist(0.0, 1.0);
  std::normal_distribution<double> delta_dist(0.0, std::sqrt(var.sigma2_delta));
  std::normal_distribution<double> eps_dist(0.0, std::sqrt(var.sigma2_eps));

  TrialDataset d;
  d.y.resize(n);
  d.r.resize(n);
  d.m.resize(n);
  d.u = std::vector<double>(n);
  d.x = Matrix(n, 2, 1.0);
  auto x = d.x.col(1);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x_dist(engine);
    const double ri = r_dist(engine) ? 1.0 : 0.0;
    const double ui = u_dist(engine);
    const double delta = delta_dist(engine);
    const double eps = eps_dist(engine);
    const double mi = c.gamma_x * xi + c.gamma_r * ri + grx * ri * xi + gu * ui + delta;
    x[i] = xi;
    d.r[i] = ri;
    (*d.u)[i] = ui;
    d.m[i] = mi;
    d.y[i] = c.beta_x * xi + c.beta_r * ri + c.beta_m * mi + c.beta_u * ui + eps;
  }
  d.covariate_names = {std::string(kInterceptName), "X"};
  return d;
}

CoefficientVector population_ols_oracle(const ScenarioSpec& spec) {
  const ErrorVariances var = error_variances(spec);
  const auto& c = spec.coef;
  const double gu = spec.gamma_u();
  const double grx = spec.gamma_rx();

  // order (1, X, M, R); E[X] = 0, E[X^2] = 2, E[R] = E[R^2] = 1/2, E[R X^2] = 1
  const double em = c.gamma_r / 2.0;
  const double exm = 2.0 * c.gamma_x + grx;
  const double emr = c.gamma_r / 2.0;
  const double emm = 2.0 * c.gamma_x * c.gamma_x + c.gamma_r * c.gamma_r / 2.0 + grx * grx +
                     2.0 * c.gamma_x * grx + gu * gu + var.sigma2_delta;
  const Matrix gram = Matrix::from_rows({
      {1.0, 0.0, em, 0.5},
      {0.0, 2.0, exm, 0.0},
      {em, exm, emm, emr},
      {0.5, 0.0, emr, 0.5},
  });
  const std::vector<double> b{0.0, c.beta_x, c.beta_m, c.beta_r};
  std::vector<double> rhs = multiply(gram, b);
  rhs[2] += c.beta_u * gu;  // E[M U] = gamma_u

  CoefficientVector out;
  out.names = {std::string(kInterceptName), "X", "M", "R"};
  HouseholderQr qr(gram);
  qr.require_full_rank(out.names, "population Gram matrix");
  out.values = qr.solve(rhs);
  return out;
}

static double logistic(double p) { return std::log(p / (1.0 - p)); }

TrialDataset generate_trial_like(std::uint64_t seed, std::size_t n) {
  auto engine = rng::make_stream(seed, rng::Domain::Fixture, n);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution minority(0.3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<std::vector<double>> cov(6, std::vector<double>(n));
  std::vector<double> y(n), r(n), m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double age = z(engine);
    const double female = minority(engine) ? 0.0 : 1.0;
    const double education = z(engine);
    const double depression = z(engine);
    const double anxiety = 0.5 * depression + std::sqrt(0.75) * z(engine);
    const double cognition = z(engine);
    const double ri = coin(engine) ? 1.0 : 0.0;
    const double u = z(engine);
    const double latent = -0.3 + 0.4 * ri + 0.9 * ri * depression - 0.6 * ri * age +
                          0.5 * ri * anxiety + 0.3 * depression + 0.6 * u + logistic(unit(engine));
    const double mi = latent > 0.0 ? 1.0 : 0.0;
    cov[0][i] = age;
    cov[1][i] = female;
    cov[2][i] = education;
    cov[3][i] = depression;
    cov[4][i] = anxiety;
    cov[5][i] = cognition;
    r[i] = ri;
    m[i] = mi;
    y[i] = 0.1 * age + 0.2 * female - 0.1 * education + 0.6 * depression + 0.2 * anxiety -
           0.1 * cognition - 0.3 * ri - 0.8 * mi + 0.5 * u + z(engine);
  }
  TrialDataset d = make_dataset(std::move(y), std::move(r), std::move(m), cov,
                                {"age", "female", "education", "depression", "anxiety",
                                 "cognition"});
  d.outcome_name = "depression_followup";
  d.treatment_name = "intervention";
  d.mediator_name = "antidepressant";
  return d;
}

std::string_view to_string(Estimand e) noexcept { return e == Estimand::Nde ? "NDE" : "NIE"; }

const GridRow& GridSummary::find(double eta, double kappa, std::size_t n, EstimatorTag estimator,
                                 Estimand estimand) const {
  for (const auto& row : rows)
    if (row.eta == eta && row.kappa == kappa && row.n == n && row.estimator == estimator &&
        row.estimand == estimand)
      return row;
  throw ConfigError("grid summary has no such cell");
}

namespace {

// Per-replicate outcome for the three estimators, in OLS, TSLS, SPSL order.
struct ReplicateOutcome {
  std::optional<CausalEffects> effects[3];
  double alpha_hat = 0.0;
  double affine_residual = 0.0;
};

std::size_t slot(EstimatorTag tag) { return static_cast<std::size_t>(tag); }

ReplicateOutcome run_replicate(const ScenarioSpec& spec, const GridConfig& config,
                               std::size_t replicate) {
  const TrialDataset data = generate_dataset(spec, config.seed, replicate);
  ReplicateOutcome out;
  EstimatorSettings settings = config.settings;
  settings.cse.seed = rng::stream_key(config.settings.cse.seed, rng::Domain::CseBootstrap, replicate);
  settings.cse.threads = 1;
  try {
    const MediationAnalysis a = analyze(data, settings);
    out.effects[slot(EstimatorTag::Ols)] = a.ols_effects;
    out.effects[slot(EstimatorTag::Tsls)] = a.tsls_effects;
    out.effects[slot(EstimatorTag::Spsl)] = a.spsl_effects;
    out.alpha_hat = a.spsl.alpha_hat;
    const auto expected =
        affine_combination(a.spsl.alpha_hat, a.tsls().coef.values, a.ols().coef.values);
    const double alpha = a.spsl.alpha_hat;
    for (std::size_t j = 0; j < expected.size(); ++j) {
      const double scale = std::max({1.0, std::abs(alpha * a.tsls().coef.values[j]),
                                     std::abs((1 - alpha) * a.ols().coef.values[j])});
      out.affine_residual =
          std::max(out.affine_residual, std::abs(a.spsl.coef.values[j] - expected[j]) / scale);
    }
  } catch (const NumericalError&) {
    // TSLS (and so SPSL) can fail on its own; OLS may still be usable.
    try {
      out.effects[slot(EstimatorTag::Ols)] =
          fit_mediation(data, EstimatorTag::Ols, settings).effects;
    } catch (const NumericalError&) {
    }
  }
  return out;
}

GridRow summarize(const ScenarioSpec& spec, EstimatorTag tag, Estimand estimand,
                  const std::vector<ReplicateOutcome>& outcomes) {
  GridRow row;
  row.eta = spec.eta;
  row.kappa = spec.kappa;
  row.n = spec.n;
  row.estimator = tag;
  row.estimand = estimand;
  const CausalEffects truth = true_effects(spec);
  row.truth = estimand == Estimand::Nde ? truth.nde : truth.nie;

  double sum = 0.0, sq_err = 0.0;
  for (const auto& o : outcomes) {
    const auto& e = o.effects[slot(tag)];
    if (!e) {
      ++row.failures;
      continue;
    }
    const double v = estimand == Estimand::Nde ? e->nde : e->nie;
    sum += v;
    sq_err += (v - row.truth) * (v - row.truth);
    ++row.count;
  }
  if (row.count == 0) {
    row.mean = row.bias = row.rmse = row.mcse = std::nan("");
    return row;
  }
  const double count = static_cast<double>(row.count);
  row.mean = sum / count;
  row.bias = row.mean - row.truth;
  row.rmse = std::sqrt(sq_err / count);
  if (row.count > 1) {
    double ss = 0.0;
    for (const auto& o : outcomes) {
      const auto& e = o.effects[slot(tag)];
      if (!e) continue;
      const double d = (estimand == Estimand::Nde ? e->nde : e->nie) - row.mean;
      ss += d * d;
    }
    row.mcse = std::sqrt(ss / (count - 1.0) / count);
  }
  return row;
}

}  // namespace

GridSummary run_grid(const GridConfig& config) {
  if (config.replications < 1) throw ConfigError("replications must be at least 1");
  if (config.etas.empty() || config.kappas.empty() || config.ns.empty() ||
      config.estimators.empty())
    throw ConfigError("simulation grid has an empty axis");

  std::vector<ScenarioSpec> cells;
  for (double eta : config.etas)
    for (double kappa : config.kappas)
      for (std::size_t n : config.ns) {
        ScenarioSpec spec{eta, kappa, n, config.coef};
        error_variances(spec);  // reject infeasible cells before any work
        cells.push_back(spec);
      }

  GridSummary summary;
  if (config.replications >= kFullFidelityReplications)
    summary.warnings.push_back("running " + std::to_string(config.replications) + " replicates in each of " +
                               std::to_string(cells.size()) +
                               " cells; expect hours of runtime");

  const std::size_t reps = config.replications;
  for (const auto& spec : cells) {
    std::vector<ReplicateOutcome> outcomes(reps);
    parallel_for(reps, config.threads,
                 [&](std::size_t r) { outcomes[r] = run_replicate(spec, config, r); });

    for (const auto& o : outcomes)
      summary.max_affine_residual = std::max(summary.max_affine_residual, o.affine_residual);
    for (EstimatorTag tag : config.estimators)
      for (Estimand estimand : {Estimand::Nde, Estimand::Nie}) {
        GridRow row = summarize(spec, tag, estimand, outcomes);
        if (row.failures * 100 > reps)
          summary.warnings.push_back(std::string(to_string(tag)) + " failed in " +
                                     std::to_string(row.failures) + " replicates at eta=" +
                                     std::to_string(spec.eta) + " kappa=" +
                                     std::to_string(spec.kappa) + " n=" + std::to_string(spec.n));
        summary.rows.push_back(row);
      }
    if (config.keep_replicates) {
      for (std::size_t r = 0; r < reps; ++r)
        for (EstimatorTag tag : config.estimators) {
          const auto& e = outcomes[r].effects[slot(tag)];
          if (!e) continue;
          summary.replicates.push_back(ReplicateRecord{
              spec.eta, spec.kappa, spec.n, r, tag, e->nde, e->nie,
              tag == EstimatorTag::Spsl ? outcomes[r].alpha_hat : 0.0});
        }
    }
  }
  return summary;
}

}  // namespace steinmed
