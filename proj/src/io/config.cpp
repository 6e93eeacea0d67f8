#include "steinmed/io/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "steinmed/errors.hpp"

namespace steinmed::io {

using nlohmann::json;

std::string_view to_string(OutputFormat f) noexcept {
  switch (f) {
    case OutputFormat::Table: return "table";
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Json: return "json";
  }
  return "table";
}

OutputFormat parse_format(std::string_view s) {
  if (s == "table") return OutputFormat::Table;
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("unknown output format '" + std::string(s) + "' (table, csv, json)");
}

CseMode parse_cse_mode(std::string_view s) {
  if (s == "hausman") return CseMode::Hausman;
  if (s == "bootstrap") return CseMode::Bootstrap;
  throw ConfigError("unknown cse mode '" + std::string(s) + "' (hausman, bootstrap)");
}

std::string_view to_string(TslsCovariance c) noexcept {
  return c == TslsCovariance::Projected ? "projected" : "unprojected";
}

TslsCovariance parse_tsls_covariance(std::string_view s) {
  if (s == "projected") return TslsCovariance::Projected;
  if (s == "unprojected") return TslsCovariance::Unprojected;
  throw ConfigError("unknown TSLS covariance '" + std::string(s) + "' (projected, unprojected)");
}

namespace {

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

RunConfig merge_json(const std::string& json_text, RunConfig c) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");

  for (const auto& [key, v] : doc.items()) {
    const char* k = key.c_str();
    if (key == "input") c.input = get<std::string>(v, k);
    else if (key == "outcome") c.roles.outcome = get<std::string>(v, k);
    else if (key == "treatment") c.roles.treatment = get<std::string>(v, k);
    else if (key == "mediator") c.roles.mediator = get<std::string>(v, k);
    else if (key == "covariates") c.roles.covariates = get<std::vector<std::string>>(v, k);
    else if (key == "instruments") c.roles.instruments = get<std::vector<std::string>>(v, k);
    else if (key == "estimators") {
      c.estimators.clear();
      for (const auto& s : get<std::vector<std::string>>(v, k)) c.estimators.push_back(parse_estimator(s));
    } else if (key == "projection") c.projection = get<std::vector<std::string>>(v, k);
    else if (key == "cse_mode") c.cse_mode = parse_cse_mode(get<std::string>(v, k));
    else if (key == "cse_replicates") c.cse_replicates = get<std::size_t>(v, k);
    else if (key == "tsls_covariance") c.tsls_covariance = parse_tsls_covariance(get<std::string>(v, k));
    else if (key == "bootstrap") c.bootstrap = get<std::size_t>(v, k);
    else if (key == "freeze_alpha") c.freeze_alpha = get<bool>(v, k);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, k);
    else if (key == "format") c.format = parse_format(get<std::string>(v, k));
    else if (key == "output") c.output = get<std::string>(v, k);
    else if (key == "threads") c.threads = get<unsigned>(v, k);
    else if (key == "etas") c.etas = get<std::vector<double>>(v, k);
    else if (key == "kappas") c.kappas = get<std::vector<double>>(v, k);
    else if (key == "ns") c.ns = get<std::vector<std::size_t>>(v, k);
    else if (key == "replications") c.replications = get<std::size_t>(v, k);
    else if (key == "full_fidelity") c.full_fidelity = get<bool>(v, k);
    else if (key == "replicates_output") c.replicates_output = get<std::string>(v, k);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return merge_json(text.str(), std::move(base));
}

std::string echo_config(const RunConfig& c) {
  json j;
  j["input"] = c.input;
  j["outcome"] = c.roles.outcome;
  j["treatment"] = c.roles.treatment;
  j["mediator"] = c.roles.mediator;
  j["covariates"] = c.roles.covariates;
  j["instruments"] = c.roles.instruments;
  std::vector<std::string> est;
  for (auto t : c.estimators) est.emplace_back(to_string(t));
  j["estimators"] = est;
  j["projection"] = c.projection;
  j["cse_mode"] = std::string(to_string(c.cse_mode));
  j["cse_replicates"] = c.cse_replicates;
  j["tsls_covariance"] = std::string(to_string(c.tsls_covariance));
  j["bootstrap"] = c.bootstrap;
  j["freeze_alpha"] = c.freeze_alpha;
  j["seed"] = c.seed;
  j["format"] = std::string(to_string(c.format));
  j["output"] = c.output;
  j["threads"] = c.threads;
  j["etas"] = c.etas;
  j["kappas"] = c.kappas;
  j["ns"] = c.ns;
  j["replications"] = c.replications;
  j["full_fidelity"] = c.full_fidelity;
  j["replicates_output"] = c.replicates_output;
  return j.dump();
}

EstimatorSettings estimator_settings(const RunConfig& c) {
  EstimatorSettings s;
  s.projection_names = c.projection;
  s.cse.mode = c.cse_mode;
  s.cse.replicates = c.cse_replicates;
  s.cse.seed = c.seed;
  s.cse.threads = c.threads;
  s.fit.tsls_covariance = c.tsls_covariance;
  return s;
}

BootstrapConfig bootstrap_config(const RunConfig& c, EstimatorTag estimator) {
  BootstrapConfig b;
  b.replicates = c.bootstrap;
  b.seed = c.seed;
  b.estimator = estimator;
  b.settings = estimator_settings(c);
  b.freeze_alpha = c.freeze_alpha;
  b.threads = c.threads;
  return b;
}

GridConfig grid_config(const RunConfig& c) {
  GridConfig g;
  g.etas = c.etas;
  g.kappas = c.kappas;
  g.ns = c.ns;
  g.replications = c.full_fidelity ? kFullFidelityReplications : c.replications;
  g.seed = c.seed;
  g.estimators = c.estimators;
  g.settings = estimator_settings(c);
  g.keep_replicates = !c.replicates_output.empty();
  g.threads = c.threads;
  return g;
}

}  // namespace steinmed::io
