#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "steinmed/errors.hpp"
#include "steinmed/io/config.hpp"
#include "steinmed/io/csv.hpp"
#include "steinmed/io/report.hpp"
#include "steinmed/simulate.hpp"

using namespace steinmed;
using namespace steinmed::io;

namespace {

ColumnRoles basic_roles() {
  ColumnRoles r;
  r.outcome = "y";
  r.treatment = "r";
  r.mediator = "m";
  r.covariates = {"age"};
  return r;
}

}  // namespace

TEST(Csv, CompleteCaseFiltering) {
  std::istringstream in(
      "y,r,m,age\n"
      "1.0,1,0.5,30\n"
      "2.0,0,,41\n"
      "3.0,1,1.5,25\n"
      "4.0,0,0.1,52\n"
      "5.0,1,2.0,33\n");
  const auto res = read_csv(in, basic_roles());
  EXPECT_EQ(res.rows_read, 5u);
  EXPECT_EQ(res.dropped, 1u);
  EXPECT_EQ(res.data.n(), 4u);
  EXPECT_EQ(res.data.k(), 2u);
  EXPECT_EQ(res.data.x(1, 0), 1.0);
  EXPECT_EQ(res.data.x(1, 1), 25.0);
  EXPECT_EQ(res.data.covariate_names, (std::vector<std::string>{"(Intercept)", "age"}));
}

TEST(Csv, NonNumericCellsAreIncompleteAndUnusedColumnsIgnored) {
  std::istringstream in(
      "id,y,r,m,age,notes\r\n"
      "a,1.0,1,0.5,30,\"free, text\"\r\n"
      "b,2.0,0,NA,41,x\r\n"
      "c,+3.0,1,1.5e0,25,\r\n");
  const auto res = read_csv(in, basic_roles());
  EXPECT_EQ(res.dropped, 1u);
  EXPECT_EQ(res.data.n(), 2u);
  EXPECT_EQ(res.data.y[1], 3.0);
}

TEST(Csv, TreatmentMustBeBinary) {
  std::istringstream in("y,r,m,age\n1,1,0,3\n2,2,1,4\n");
  try {
    read_csv(in, basic_roles());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("treatment not binary"), std::string::npos);
  }
}

TEST(Csv, Errors) {
  std::istringstream missing("y,r,m\n1,0,1\n");
  EXPECT_THROW(read_csv(missing, basic_roles()), DataError);
  std::istringstream none("y,r,m,age\n,0,1,2\n");
  EXPECT_THROW(read_csv(none, basic_roles()), DataError);
  std::istringstream empty("");
  EXPECT_THROW(read_csv(empty, basic_roles()), DataError);
  ColumnRoles clash = basic_roles();
  clash.covariates = {"m"};
  std::istringstream any("y,r,m\n1,0,1\n");
  EXPECT_THROW(read_csv(any, clash), ConfigError);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", basic_roles()), DataError);
}

TEST(Csv, SplitRecordHandlesQuotes) {
  EXPECT_EQ(split_record("a,\"b,c\",\"d\"\"e\","),
            (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
}

TEST(Csv, RoundTripGivesIdenticalDesigns) {
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const ScenarioSpec spec{0.25 * (rep % 3), 0.5, 30 + rep, {}};
    const auto d = generate_dataset(spec, 1234, rep);
    std::stringstream buf;
    write_csv(buf, d);
    const auto back = read_csv(buf, roles_of(d)).data;
    const auto a = build_designs(d);
    const auto b = build_designs(back);
    ASSERT_EQ(a.v, b.v) << rep;
    ASSERT_EQ(a.z, b.z) << rep;
    ASSERT_EQ(d.y, back.y) << rep;
  }
}

TEST(Csv, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

TEST(Config, MergeAndEcho) {
  RunConfig c = merge_json(R"({"outcome":"y","covariates":["a","b"],"seed":9,"cse_mode":"bootstrap",
                              "estimators":["ols","spsl"],"ns":[50]})",
                           {});
  EXPECT_EQ(c.roles.outcome, "y");
  EXPECT_EQ(c.roles.covariates.size(), 2u);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.cse_mode, CseMode::Bootstrap);
  EXPECT_EQ(c.estimators, (std::vector<EstimatorTag>{EstimatorTag::Ols, EstimatorTag::Spsl}));
  const auto echoed = nlohmann::json::parse(echo_config(c));
  EXPECT_EQ(echoed["seed"], 9);
  EXPECT_EQ(echoed["bootstrap"], 1000);  // defaults are echoed too
  EXPECT_EQ(echoed["cse_mode"], "bootstrap");
  const RunConfig again = merge_json(echo_config(c), {});
  EXPECT_EQ(echo_config(again), echo_config(c));

  EXPECT_THROW(merge_json(R"({"sed": 1})", {}), ConfigError);
  EXPECT_THROW(merge_json(R"({"seed": "x"})", {}), ConfigError);
  EXPECT_THROW(merge_json("[1,2]", {}), ConfigError);
  EXPECT_THROW(merge_json("{", {}), ConfigError);
  EXPECT_THROW(merge_json(R"({"format":"xml"})", {}), ConfigError);
}

TEST(Report, FixedDisplay) {
  EXPECT_EQ(fixed(-2.664), "-2.66");
  EXPECT_EQ(fixed(-0.001), "0.00");
  EXPECT_EQ(fixed(0.925, 3), "0.925");
  EXPECT_EQ(fixed(std::nan("")), "NA");
}

TEST(Report, TableOnUnconfoundedSimulation) {
  const auto d = generate_dataset({0.0, 0.5, 400, {}}, 5, 0);
  RunConfig c;
  c.bootstrap = 100;
  c.seed = 3;
  const ReportTable t = build_report(d, c);
  EXPECT_EQ(t.coefficients.size(), 4u);
  EXPECT_TRUE(check_collinearity(t).passed);
  for (const auto& row : t.coefficients)
    for (const auto& cell : row.cells) EXPECT_GE(cell.se, 0.0);
  const std::string text = format_table(t);
  EXPECT_NE(text.find("NDE"), std::string::npos);
  EXPECT_NE(text.find("alpha"), std::string::npos);
  EXPECT_NE(text.find("collinearity check: passed"), std::string::npos);

  const auto j = nlohmann::json::parse(report_json(t));
  for (const char* key : {"seed", "alpha_hat", "first_stage", "estimates", "effects"})
    EXPECT_TRUE(j.contains(key)) << key;
  for (const char* key : {"estimator", "coefficient", "estimate", "se"})
    EXPECT_TRUE(j["estimates"][0].contains(key)) << key;
  for (const char* key : {"nde", "nie", "te"}) EXPECT_TRUE(j["effects"][0].contains(key)) << key;
  for (const char* key : {"f", "df1", "df2", "p"}) EXPECT_TRUE(j["first_stage"].contains(key)) << key;
  EXPECT_EQ(j["estimates"].size(), 12u);

  ReportTable broken = t;
  broken.coefficients[0].at(EstimatorTag::Spsl).estimate += 0.05;
  const auto check = check_collinearity(broken);
  EXPECT_FALSE(check.passed);
  EXPECT_EQ(check.worst_row, "(Intercept)");
}

TEST(Report, GridSerialization) {
  GridConfig g;
  g.etas = {0.0};
  g.kappas = {0.5};
  g.ns = {100};
  g.replications = 5;
  g.keep_replicates = true;
  const auto s = run_grid(g);
  const std::string csv = grid_csv(s);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 6);
  const auto j = nlohmann::json::parse(grid_json(s, 42));
  EXPECT_EQ(j["seed"], 42);
  EXPECT_EQ(j["rows"].size(), 6u);
  EXPECT_EQ(j["rows"][0]["scenario"]["n"], 100);
  EXPECT_TRUE(j["rows"][0]["scenario"].contains("kappa"));
  const std::string reps = replicates_csv(s);
  EXPECT_EQ(std::count(reps.begin(), reps.end(), '\n'), 1 + 15);
}
