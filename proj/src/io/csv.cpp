#include "steinmed/io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <unordered_map>

#include "steinmed/errors.hpp"

namespace steinmed::io {

void ColumnRoles::validate() const {
  if (outcome.empty()) throw ConfigError("no outcome column given");
  if (treatment.empty()) throw ConfigError("no treatment column given");
  if (mediator.empty()) throw ConfigError("no mediator column given");
  std::set<std::string> seen;
  auto claim = [&](const std::string& name, const char* role) {
    if (name.empty()) throw ConfigError(std::string("empty column name in role ") + role);
    if (!seen.insert(name).second)
      throw ConfigError("column '" + name + "' is assigned to more than one role");
  };
  claim(outcome, "outcome");
  claim(treatment, "treatment");
  claim(mediator, "mediator");
  for (const auto& c : covariates) claim(c, "covariate");
  for (const auto& c : instruments) claim(c, "instrument");
}

std::vector<std::string> split_record(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return c != ' ' && c != '\t' && c != '\r'; };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::optional<double> parse_number(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  const char* first = cell.data();
  const char* last = first + cell.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

LoadResult read_csv(std::istream& in, const ColumnRoles& roles) {
  roles.validate();
  std::string line;
  if (!std::getline(in, line)) throw DataError("input has no header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_record(line);
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) position.emplace(trim(header[j]), j);

  auto locate = [&](const std::string& name) {
    auto it = position.find(name);
    if (it == position.end()) throw DataError("missing column '" + name + "'");
    return it->second;
  };
  const std::size_t iy = locate(roles.outcome);
  const std::size_t ir = locate(roles.treatment);
  const std::size_t im = locate(roles.mediator);
  std::vector<std::size_t> ix, iz;
  for (const auto& c : roles.covariates) ix.push_back(locate(c));
  for (const auto& c : roles.instruments) iz.push_back(locate(c));

  LoadResult out;
  std::vector<double> y, r, m;
  std::vector<std::vector<double>> xs(ix.size()), zs(iz.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++out.rows_read;
    const auto fields = split_record(line);
    auto cell = [&](std::size_t j) -> std::optional<double> {
      if (j >= fields.size()) return std::nullopt;
      return parse_number(trim(fields[j]));
    };
    const auto vy = cell(iy), vr = cell(ir), vm = cell(im);
    bool complete = vy && vr && vm;
    std::vector<double> row_x, row_z;
    for (std::size_t j : ix) {
      auto v = cell(j);
      if (!v) complete = false;
      row_x.push_back(v.value_or(0.0));
    }
    for (std::size_t j : iz) {
      auto v = cell(j);
      if (!v) complete = false;
      row_z.push_back(v.value_or(0.0));
    }
    if (!complete) {
      ++out.dropped;
      continue;
    }
    if (*vr != 0.0 && *vr != 1.0)
      throw DataError("treatment not binary: column '" + roles.treatment + "' has value " +
                      format_double(*vr) + " on line " + std::to_string(line_no));
    y.push_back(*vy);
    r.push_back(*vr);
    m.push_back(*vm);
    for (std::size_t j = 0; j < ix.size(); ++j) xs[j].push_back(row_x[j]);
    for (std::size_t j = 0; j < iz.size(); ++j) zs[j].push_back(row_z[j]);
  }
  if (y.empty())
    throw DataError("no complete cases (" + std::to_string(out.rows_read) + " rows read, all dropped)");

  out.data = make_dataset(std::move(y), std::move(r), std::move(m), xs, roles.covariates);
  if (!zs.empty()) {
    out.data.extra_instruments = Matrix::from_columns(zs);
    out.data.instrument_names = roles.instruments;
  }
  out.data.outcome_name = roles.outcome;
  out.data.treatment_name = roles.treatment;
  out.data.mediator_name = roles.mediator;
  return out;
}

LoadResult load_csv(const std::filesystem::path& path, const ColumnRoles& roles) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return read_csv(in, roles);
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

ColumnRoles roles_of(const TrialDataset& data) {
  ColumnRoles roles;
  roles.outcome = data.outcome_name;
  roles.treatment = data.treatment_name;
  roles.mediator = data.mediator_name;
  for (std::size_t j = 1; j < data.k(); ++j)
    roles.covariates.push_back(j < data.covariate_names.size() ? data.covariate_names[j]
                                                               : "x" + std::to_string(j));
  const std::size_t extra = data.extra_instruments.empty() ? 0 : data.extra_instruments.cols();
  for (std::size_t j = 0; j < extra; ++j)
    roles.instruments.push_back(j < data.instrument_names.size() ? data.instrument_names[j]
                                                                 : "iv" + std::to_string(j + 1));
  return roles;
}

void write_csv(std::ostream& out, const TrialDataset& data) {
  const ColumnRoles roles = roles_of(data);
  out << roles.outcome << ',' << roles.treatment << ',' << roles.mediator;
  for (const auto& c : roles.covariates) out << ',' << c;
  for (const auto& c : roles.instruments) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]) << ',' << format_double(data.r[i]) << ','
        << format_double(data.m[i]);
    for (std::size_t j = 1; j < data.k(); ++j) out << ',' << format_double(data.x(i, j));
    for (std::size_t j = 0; j < roles.instruments.size(); ++j)
      out << ',' << format_double(data.extra_instruments(i, j));
    out << '\n';
  }
}

void save_csv(const std::filesystem::path& path, const TrialDataset& data) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(out, data);
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

}  // namespace steinmed::io
