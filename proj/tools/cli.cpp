#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include "CLI11.hpp"
#include "steinmed/diagnostics.hpp"
#include "steinmed/errors.hpp"
#include "steinmed/io/config.hpp"
#include "steinmed/io/csv.hpp"
#include "steinmed/io/report.hpp"
#include "steinmed/kernels.hpp"
#include "steinmed/simulate.hpp"

namespace steinmed::cli {
namespace {

// Flag values; unset flags leave the config-file (or default) value alone.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> input, outcome, treatment, mediator;
  std::optional<std::vector<std::string>> covariates, instruments, estimators, projection;
  std::optional<std::string> cse_mode, tsls_cov, format, output, replicates_output;
  std::optional<std::size_t> cse_replicates, bootstrap, replications;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::vector<double>> etas, kappas;
  std::optional<std::vector<std::size_t>> ns;
  bool freeze_alpha = false;
  bool full_fidelity = false;
};

void add_common(CLI::App& app, Overrides& o) {
  app.add_option("--config", o.config_path, "JSON run configuration; flags override it");
  app.add_option("--seed", o.seed, "Random seed");
  app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
  app.add_option("--format", o.format, "Output format: table, csv or json");
  app.add_option("-o,--output", o.output, "Also write machine-readable output to this file");
}

void add_roles(CLI::App& app, Overrides& o) {
  app.add_option("-i,--input", o.input, "Input CSV");
  app.add_option("--outcome", o.outcome, "Outcome column");
  app.add_option("--treatment", o.treatment, "Randomized treatment column (0/1)");
  app.add_option("--mediator", o.mediator, "Mediator column");
  app.add_option("--covariates", o.covariates, "Baseline covariate columns")->delimiter(',');
  app.add_option("--instruments", o.instruments, "Extra instrument columns")->delimiter(',');
}

io::RunConfig resolve(const Overrides& o) {
  io::RunConfig c;
  if (o.config_path) c = io::load_config(*o.config_path);
  if (o.input) c.input = *o.input;
  if (o.outcome) c.roles.outcome = *o.outcome;
  if (o.treatment) c.roles.treatment = *o.treatment;
  if (o.mediator) c.roles.mediator = *o.mediator;
  if (o.covariates) c.roles.covariates = *o.covariates;
  if (o.instruments) c.roles.instruments = *o.instruments;
  if (o.estimators) {
    c.estimators.clear();
    for (const auto& s : *o.estimators) c.estimators.push_back(parse_estimator(s));
  }
  if (o.projection) c.projection = *o.projection;
  if (o.cse_mode) c.cse_mode = io::parse_cse_mode(*o.cse_mode);
  if (o.cse_replicates) c.cse_replicates = *o.cse_replicates;
  if (o.tsls_cov) c.tsls_covariance = io::parse_tsls_covariance(*o.tsls_cov);
  if (o.bootstrap) c.bootstrap = *o.bootstrap;
  if (o.freeze_alpha) c.freeze_alpha = true;
  if (o.seed) c.seed = *o.seed;
  if (o.format) c.format = io::parse_format(*o.format);
  if (o.output) c.output = *o.output;
  if (o.threads) c.threads = *o.threads;
  if (o.etas) c.etas = *o.etas;
  if (o.kappas) c.kappas = *o.kappas;
  if (o.ns) c.ns = *o.ns;
  if (o.replications) c.replications = *o.replications;
  if (o.full_fidelity) c.full_fidelity = true;
  if (o.replicates_output) c.replicates_output = *o.replicates_output;
  return c;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file '" + path + "'");
  f << text;
  if (!f) throw DataError("write to '" + path + "' failed");
}

void echo(const io::RunConfig& c, std::ostream& err) {
  err << "seed: " << c.seed << '\n' << "config: " << io::echo_config(c) << '\n';
}

io::LoadResult load_input(const io::RunConfig& c, std::ostream& err) {
  if (c.input.empty()) throw ConfigError("no input file given (--input)");
  io::LoadResult loaded = io::load_csv(c.input, c.roles);
  err << "read " << loaded.rows_read << " rows; dropped " << loaded.dropped
      << " incomplete; n = " << loaded.data.n() << '\n';
  return loaded;
}

int cmd_fit(const io::RunConfig& c, std::ostream& out, std::ostream& err) {
  echo(c, err);
  const io::LoadResult loaded = load_input(c, err);
  const io::ReportTable table = io::build_report(loaded.data, c, loaded.dropped);
  switch (c.format) {
    case io::OutputFormat::Table: out << io::format_table(table); break;
    case io::OutputFormat::Csv: out << io::report_csv(table); break;
    case io::OutputFormat::Json: out << io::report_json(table); break;
  }
  if (!c.output.empty())
    write_file(c.output, c.format == io::OutputFormat::Csv ? io::report_csv(table)
                                                           : io::report_json(table));
  return 0;
}

int cmd_diagnose(const io::RunConfig& c, std::ostream& out, std::ostream& err) {
  echo(c, err);
  const io::LoadResult loaded = load_input(c, err);
  const DesignBundle bundle = build_designs(loaded.data);
  const FTestResult f = first_stage_f(loaded.data, bundle);
  if (c.format == io::OutputFormat::Json)
    out << io::ftest_json(f);
  else
    out << io::format_ftest(f) << '\n';
  if (!c.output.empty()) write_file(c.output, io::ftest_json(f));
  return 0;
}

int cmd_simulate(const io::RunConfig& c, std::ostream& out, std::ostream& err) {
  echo(c, err);
  const GridConfig grid = io::grid_config(c);
  if (c.full_fidelity)
    err << "warning: full-fidelity run with " << grid.replications
        << " replicates per cell; this takes hours\n";
  const GridSummary summary = run_grid(grid);
  for (const auto& w : summary.warnings) err << "warning: " << w << '\n';
  const std::string text =
      c.format == io::OutputFormat::Json ? io::grid_json(summary, c.seed) : io::grid_csv(summary);
  out << text;
  if (!c.output.empty()) write_file(c.output, text);
  if (!c.replicates_output.empty()) write_file(c.replicates_output, io::replicates_csv(summary));
  return 0;
}

struct GenerateOptions {
  double eta = 0.0;
  double kappa = 0.25;
  std::optional<std::size_t> n;
  std::uint64_t replicate = 0;
  bool trial_like = false;
};

int cmd_generate(const io::RunConfig& c, const GenerateOptions& g, std::ostream& out,
                 std::ostream& err) {
  echo(c, err);
  TrialDataset data;
  if (g.trial_like) {
    data = generate_trial_like(c.seed, g.n.value_or(296));
  } else {
    ScenarioSpec spec{g.eta, g.kappa, g.n.value_or(500), {}};
    data = generate_dataset(spec, c.seed, g.replicate);
  }
  if (c.output.empty()) {
    io::write_csv(out, data);
  } else {
    io::save_csv(c.output, data);
    err << "wrote " << data.n() << " rows to " << c.output << '\n';
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mediation analysis with OLS, TSLS and Stein-like combined estimators", "steinmed"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "steinmed 0.1 (kernels: " +
                                        std::string(kernels::active().name) + ")");

  Overrides o;
  GenerateOptions gen;

  auto* fit = app.add_subcommand("fit", "Fit OLS, TSLS and SPSL and print a results table");
  add_common(*fit, o);
  add_roles(*fit, o);
  fit->add_option("--estimators", o.estimators, "Estimators to report")->delimiter(',');
  fit->add_option("--projection", o.projection, "Coefficients targeted by the SPSL shrinkage")
      ->delimiter(',');
  fit->add_option("--cse-mode", o.cse_mode, "Cross-covariance estimate: hausman or bootstrap");
  fit->add_option("--cse-replicates", o.cse_replicates, "Replicates for the bootstrap CSE");
  fit->add_option("--tsls-cov", o.tsls_cov, "TSLS covariance: projected or unprojected");
  fit->add_option("--bootstrap", o.bootstrap, "Bootstrap replicates for SEs (0 = analytic)");
  fit->add_flag("--freeze-alpha", o.freeze_alpha, "Keep the full-sample alpha in every replicate");

  auto* diagnose = app.add_subcommand("diagnose", "First-stage F test of the excluded instruments");
  add_common(*diagnose, o);
  add_roles(*diagnose, o);

  auto* simulate = app.add_subcommand("simulate", "Run the Monte Carlo scenario grid");
  add_common(*simulate, o);
  simulate->add_option("--etas", o.etas, "Confounding levels")->delimiter(',');
  simulate->add_option("--kappas", o.kappas, "Instrument strengths")->delimiter(',');
  simulate->add_option("--ns", o.ns, "Sample sizes")->delimiter(',');
  simulate->add_option("--replications", o.replications, "Replicates per cell");
  simulate->add_option("--estimators", o.estimators, "Estimators to summarize")->delimiter(',');
  simulate->add_flag("--full-fidelity", o.full_fidelity, "Use 100000 replicates per cell");
  simulate->add_option("--replicates-output", o.replicates_output,
                       "Write per-replicate estimates to this CSV");

  auto* generate = app.add_subcommand("generate", "Write a simulated dataset as CSV");
  add_common(*generate, o);
  generate->add_option("--eta", gen.eta, "Confounding");
  generate->add_option("--kappa", gen.kappa, "Instrument strength");
  generate->add_option("-n,--n", gen.n, "Rows (default 500, or 296 with --trial-like)");
  generate->add_option("--replicate", gen.replicate, "Replicate index");
  generate->add_flag("--trial-like", gen.trial_like,
                     "Six covariates and a binary mediator instead of the scenario model");

  std::vector<std::string> rest(args.rbegin(), args.rend() - 1);
  try {
    app.parse(std::move(rest));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error[config]: " << e.what() << '\n';
    return static_cast<int>(ErrorCategory::Config);
  }

  try {
    const io::RunConfig config = resolve(o);
    if (*fit) return cmd_fit(config, out, err);
    if (*diagnose) return cmd_diagnose(config, out, err);
    if (*simulate) return cmd_simulate(config, out, err);
    return cmd_generate(config, gen, out, err);
  } catch (const Error& e) {
    err << "error[" << category_name(e.category()) << "]: " << e.what() << '\n';
    return static_cast<int>(e.category());
  }
}

}  // namespace steinmed::cli
