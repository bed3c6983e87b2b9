#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "sfm/cli.hpp"
#include "test_support.hpp"

using namespace sfm;
using sfm::cli::run_command;

namespace {

nlohmann::ordered_json parse(const std::string& s) { return nlohmann::ordered_json::parse(s); }

void expect_failure(const cli::CommandOutcome& o, int code) {
    EXPECT_EQ(o.exit_code, code) << o.err;
    EXPECT_TRUE(o.out.empty());
    EXPECT_FALSE(o.err.empty());
}

}  // namespace

TEST(Cli, MomentsJson) {
    const auto o = run_command({"moments", "--data", test::bundled_data});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const auto j = parse(o.out);
    for (const char* key : {"mu_x", "sigma2_x", "mu_r", "sigma2_r", "rho", "mean_x", "mean_re", "mean_rf", "n_obs",
                            "convention", "gap"})
        EXPECT_TRUE(j.contains(key)) << key;
    EXPECT_EQ(j["n_obs"], 89);
    EXPECT_EQ(j["convention"], "sample");
    EXPECT_NEAR(j["gap"].get<double>(), -8.5853496241922e-06, 1e-15);

    const auto p = parse(run_command({"moments", "--data", test::bundled_data, "--variance", "population"}).out);
    EXPECT_EQ(p["convention"], "population");
}

TEST(Cli, SolveJsonSchema) {
    const auto o = run_command({"solve", "--data", test::bundled_data, "--format", "json"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const auto j = parse(o.out);
    const std::vector<std::string> keys{"params", "residuals", "rank", "singular_values", "gap", "converged",
                                        "iterations"};
    std::vector<std::string> got;
    for (auto it = j.begin(); it != j.end(); ++it) got.push_back(it.key());
    EXPECT_EQ(got, keys);
    for (const char* k : {"beta", "omega", "delta", "tau"}) EXPECT_TRUE(j["params"].contains(k));
    for (const char* k : {"r2", "r3", "r4", "r5", "norm"}) EXPECT_TRUE(j["residuals"].contains(k));
    EXPECT_EQ(j["singular_values"].size(), 4u);
    EXPECT_LE(j["rank"].get<int>(), 3);
}

TEST(Cli, JsonRoundTripsByteIdentical) {
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"solve", "--data", test::bundled_data, "--format", "json"},
          std::vector<std::string>{"moments", "--data", test::bundled_data},
          std::vector<std::string>{"manifold", "--data", test::bundled_data, "--tau-min", "1", "--tau-max", "2",
                                   "--steps", "10", "--format", "json"},
          std::vector<std::string>{"classify", "--data", test::bundled_data, "--year", "1977", "--beta", "0.9581",
                                   "--tau", "1.0319", "--sfom-equity", "1.0013", "--sfom-riskfree", "1.0657",
                                   "--format", "json"}}) {
        const auto o = run_command(args);
        ASSERT_EQ(o.exit_code, 0) << o.err;
        EXPECT_EQ(dump_json(parse(o.out)), o.out);
    }
}

TEST(Cli, SolveIsDeterministic) {
    const std::vector<std::string> args{"solve", "--data", test::bundled_data, "--format", "json", "--tau0", "3"};
    EXPECT_EQ(run_command(args).out, run_command(args).out);
}

TEST(Cli, SolveTableAgreesWithJson) {
    const auto j = parse(run_command({"solve", "--data", test::bundled_data, "--format", "json"}).out);
    const auto t = run_command({"solve", "--data", test::bundled_data}).out;
    std::istringstream in(t);
    std::string header;
    std::getline(in, header);
    double beta, omega, delta, tau;
    in >> beta >> omega >> delta >> tau;
    EXPECT_NEAR(beta, j["params"]["beta"].get<double>(), 5e-5);
    EXPECT_NEAR(omega, j["params"]["omega"].get<double>(), 5e-5);
    EXPECT_NEAR(delta, j["params"]["delta"].get<double>(), 5e-5);
    EXPECT_NEAR(tau, j["params"]["tau"].get<double>(), 5e-5);
    const auto norm_at = t.find("norm");
    ASSERT_NE(norm_at, std::string::npos);
    const double norm = std::stod(t.substr(norm_at + 4));
    const double want = j["residuals"]["norm"].get<double>();
    EXPECT_NEAR(norm, want, 5e-7 * std::abs(want));
}

TEST(Cli, SolveSwitches) {
    const auto o = run_command({"solve", "--data", test::bundled_data, "--eq3", "rederived", "--lnex", "lognormal",
                                "--variance", "population", "--beta0", "0.97", "--omega0", "1.01", "--delta0", "0.99",
                                "--tau0", "2.5", "--format", "json"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const auto j = parse(o.out);
    EXPECT_EQ(j["gap"].get<double>(), 0.0);
    EXPECT_LE(j["residuals"]["norm"].get<double>(), 1e-10);
}

TEST(Cli, MissingFileIsDataError) {
    expect_failure(run_command({"solve", "--data", "missing.csv"}), cli::data_error);
}

TEST(Cli, InvalidDataIsDataError) {
    const auto path = test::write_temp("bad.csv", "year,consumption,equity_return,riskfree_return\n1900,1,1,1\n"
                                                  "1901,-5,1,1\n1902,1,1,1\n");
    const auto o = run_command({"moments", "--data", path});
    expect_failure(o, cli::data_error);
    EXPECT_NE(o.err.find("line 3"), std::string::npos);
}

TEST(Cli, UsageErrors) {
    expect_failure(run_command({"solve", "--data", test::bundled_data, "--bogus"}), cli::usage_error);
    expect_failure(run_command({}), cli::usage_error);
    expect_failure(run_command({"frobnicate"}), cli::usage_error);
    expect_failure(run_command({"solve", "--data", test::bundled_data, "--eq3", "other"}), cli::usage_error);
    expect_failure(run_command({"solve", "--data", test::bundled_data, "--beta0", "-1"}), cli::usage_error);
    expect_failure(run_command({"solve", "--data", test::bundled_data, "--format", "xml"}), cli::usage_error);
}

TEST(Cli, NonFiniteSolveIsNumericalFailure) {
    expect_failure(run_command({"solve", "--data", test::bundled_data, "--tau0", "1e200"}), cli::numerical_failure);
}

TEST(Cli, ManifoldSingularGridIsNumericalFailure) {
    const auto o = run_command({"manifold", "--data", test::bundled_data, "--tau-min", "-1", "--tau-max", "1",
                                "--steps", "2"});
    expect_failure(o, cli::numerical_failure);
    EXPECT_NE(o.err.find("tau = 0"), std::string::npos) << o.err;
}

TEST(Cli, ManifoldJson) {
    const auto o = run_command({"manifold", "--data", test::bundled_data, "--tau-min", "0.5", "--tau-max", "5",
                                "--steps", "450", "--format", "json"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const auto j = parse(o.out);
    ASSERT_EQ(j.size(), 451u);
    EXPECT_NEAR(j[0]["tau"].get<double>(), 0.5, 1e-15);
    EXPECT_NEAR(j[450]["tau"].get<double>(), 5.0, 1e-15);
    EXPECT_LE(std::abs(j[10]["residuals"]["r3"].get<double>()), 1e-10);
}

TEST(Cli, ClassifyTableShowsPublishedLayout) {
    const auto o = run_command({"classify", "--data", test::bundled_data, "--year", "1977", "--beta", "0.9581",
                                "--tau", "1.0319", "--sfom-equity", "1.0013", "--sfom-riskfree", "1.0657",
                                "--format", "table"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    EXPECT_NE(o.out.find("STDF    SFOM    CRRA    Certain Utility  Uncertain Utility  Type of investor Year 1977"),
              std::string::npos);
    EXPECT_NE(o.out.find("0.9581  1.0013  1.0319  7.14871804"), std::string::npos) << o.out;
    EXPECT_NE(o.out.find("0.9581  1.0657  1.0319  7.14871804"), std::string::npos) << o.out;
    std::size_t labels = 0;
    for (auto at = o.out.find("Insufficient risk-loving"); at != std::string::npos;
         at = o.out.find("Insufficient risk-loving", at + 1))
        ++labels;
    EXPECT_EQ(labels, 2u) << o.out;
}

TEST(Cli, ClassifyJsonAndScenarioSwitch) {
    const auto base = std::vector<std::string>{"classify", "--data", test::bundled_data, "--year", "1977", "--beta",
                                               "0.9581", "--tau", "1.0319", "--sfom-equity", "1.0013",
                                               "--sfom-riskfree", "1.0657", "--format", "json"};
    const auto r = parse(run_command(base).out);
    auto growth_args = base;
    growth_args.insert(growth_args.end(), {"--scenarios", "growth"});
    const auto g = parse(run_command(growth_args).out);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0]["investor"], "equity");
    EXPECT_EQ(r[1]["investor"], "risk-free");
    EXPECT_EQ(r[0]["label"], "insufficient risk-loving");
    EXPECT_NEAR(r[0]["uncertain_utility"].get<double>(), 6.889655828057888, 1e-10);
    EXPECT_NEAR(g[0]["uncertain_utility"].get<double>(), 6.86212955811879, 1e-10);
    EXPECT_EQ(g[0]["uncertain_utility"], g[1]["uncertain_utility"]);
}

TEST(Cli, ClassifyYearOutsideSeries) {
    expect_failure(run_command({"classify", "--data", test::bundled_data, "--year", "1800", "--beta", "0.9581",
                                "--tau", "1.0319", "--sfom-equity", "1.0013", "--sfom-riskfree", "1.0657"}),
                   cli::data_error);
}

TEST(Cli, ValidateSmallRun) {
    const auto o = run_command({"validate", "--draws", "20000", "--seed", "3", "--format", "json"});
    ASSERT_EQ(o.exit_code, 0) << o.err;
    const auto j = parse(o.out);
    EXPECT_TRUE(j["all_pass"].get<bool>());
    EXPECT_EQ(j["cases"].size(), 9u);
    expect_failure(run_command({"validate", "--draws", "10"}), cli::usage_error);
}

TEST(Cli, HelpExitsZero) {
    const auto o = run_command({"--help"});
    EXPECT_EQ(o.exit_code, 0);
    EXPECT_NE(o.out.find("solve"), std::string::npos);
}
