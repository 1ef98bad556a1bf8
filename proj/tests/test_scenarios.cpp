#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include <spslab/scenarios.hpp>

using namespace spslab;

namespace {

ScenarioConfig config(std::string scenario, Json params, std::string out = "")
{
    auto c = ScenarioConfig::from_json(std::move(scenario), params);
    c.out_dir = std::move(out);
    return c;
}

std::string slurp(std::filesystem::path const& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST(ScenarioConfigTest, ReadsCommonKeys)
{
    auto const c = ScenarioConfig::from_json("energy", Json{{"seed", 9}, {"workers", 3}, {"p", 2.7}});
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.workers, 3u);
    EXPECT_THROW(ScenarioConfig::from_json("energy", Json::array()), Error);
    EXPECT_THROW(ScenarioConfig::from_json("energy", Json{{"workers", 0}}), Error);
}

TEST(ScenarioConfigTest, EmptyParameterGridIsAnError)
{
    try {
        run(config("energy", Json{{"p", Json::array()}}));
        FAIL() << "expected an error";
    } catch (Error const& e) {
        EXPECT_NE(std::string(e.what()).find("empty parameter grid"), std::string::npos);
    }
}

TEST(ScenarioConfigTest, UnknownScenario)
{
    EXPECT_THROW(run(config("no-such-thing", Json::object())), Error);
    EXPECT_EQ(scenario_names().size(), 13u);
}

TEST(ScenarioReportTest, ExitCodes)
{
    ScenarioReport r;
    EXPECT_EQ(r.exit_code(), 0);
    r.add("a", true, "");
    EXPECT_EQ(r.exit_code(), 0);
    r.verdicts.push_back({"b", "inconclusive", ""});
    EXPECT_EQ(r.exit_code(), 3);
    r.add("c", false, "");
    EXPECT_EQ(r.exit_code(), 2);
}

TEST(RowsCsv, UnionOfColumnsInFirstSeenOrder)
{
    std::ostringstream os;
    write_rows_csv({Json{{"a", 1}, {"b", "x"}}, Json{{"c", 2.5}, {"a", 3}}}, os);
    EXPECT_EQ(os.str(), "a,b,c\n1,x,\n3,,2.5\n");
}

TEST(RowsCsv, QuotesStrings)
{
    std::ostringstream os;
    write_rows_csv({Json{{"s", "a,b"}}}, os);
    EXPECT_EQ(os.str(), "s\n\"a,b\"\n");
}

TEST(Scenarios, EnergyWritesOutputs)
{
    auto const dir = std::filesystem::temp_directory_path() / "spslab_energy_test";
    std::filesystem::remove_all(dir);
    auto const rep = run(config("energy", Json{{"p", {2.6, 2.8}}, {"lambda", 0.5}, {"radial", {{"n", 257}, {"r_max", 8.0}}}},
                                dir.string()));
    EXPECT_EQ(rep.exit_code(), 0);
    EXPECT_EQ(rep.rows.size(), 2u);
    EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
    EXPECT_TRUE(std::filesystem::exists(dir / "rows.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "fields" / "input.csv"));
    auto const report = Json::parse(slurp(dir / "report.json"));
    EXPECT_EQ(report["scenario"], "energy");
    EXPECT_TRUE(report["environment"].contains("compiler"));
    EXPECT_EQ(slurp(dir / "rows.csv").find("seconds"), std::string::npos);
}

TEST(Scenarios, RowsRecomputeFromStoredFields)
{
    auto const dir = std::filesystem::temp_directory_path() / "spslab_recompute_test";
    std::filesystem::remove_all(dir);
    auto const rep = run(config("minimize-radial",
                                Json{{"p", 2.8}, {"lambda", 1e-3}, {"radial", {{"n", 257}, {"r_max", 40.0}}},
                                     {"profile", {{"type", "gaussian"}, {"amplitude", 20.0}, {"width", 4.0}}}},
                                dir.string()));
    std::ifstream is(dir / "fields" / "minimizer-0.csv");
    auto const u = read_radial_csv(is);
    auto const e = eval_I(u, Params{2.8, 1e-3, 1.0});
    double const stored = rep.rows.at(0).at("total").get<double>();
    EXPECT_NEAR(e.total, stored, 1e-12 * std::abs(stored));
}

TEST(Scenarios, ReproducibleAtOneWorker)
{
    Json const p{{"lambda", 0.2}, {"restarts", 4}, {"radial", {{"n", 129}, {"r_max", 10.0}}}, {"seed", 17}};
    auto const a = run(config("lambda-positivity", p)), b = run(config("lambda-positivity", p));
    std::ostringstream sa, sb;
    write_rows_csv(a.rows, sa);
    write_rows_csv(b.rows, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Scenarios, WorkerCountDoesNotChangeRows)
{
    Json p{{"lambda", 0.2}, {"restarts", 6}, {"radial", {{"n", 129}, {"r_max", 10.0}}}, {"seed", 3}};
    auto const a = run(config("lambda-positivity", p));
    p["workers"] = 3;
    auto const b = run(config("lambda-positivity", p));
    std::ostringstream sa, sb;
    write_rows_csv(a.rows, sa);
    write_rows_csv(b.rows, sb);
    EXPECT_EQ(sa.str(), sb.str());
}

TEST(Scenarios, SweepLambdaRejectsSubcriticalP)
{
    EXPECT_THROW(run(config("sweep-lambda", Json{{"p", 2.5}})), Error);
    EXPECT_THROW(run(config("sweep-lambda", Json{{"p", 3.0}})), Error);
}

TEST(Scenarios, ThresholdBracket)
{
    auto const rep = run(config("threshold-lambda0", Json{{"p", 2.8}}));
    EXPECT_EQ(rep.exit_code(), 0);
    double const lo = rep.summary.at("lambda_lo (p=2.8)").get<double>(), hi = rep.summary.at("lambda_hi (p=2.8)").get<double>();
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(lo, hi);
    EXPECT_LE(hi - lo, 1e-3);
}

TEST(Scenarios, TentSweepPasses)
{
    EXPECT_EQ(run(config("tent-sweep", Json::object())).exit_code(), 0);
}

TEST(Scenarios, DyadicAndHlsPass)
{
    EXPECT_EQ(run(config("dyadic-lemma", Json::object())).exit_code(), 0);
    EXPECT_EQ(run(config("hls-check", Json{{"random_profiles", 10}})).exit_code(), 0);
}

TEST(Scenarios, BumpSweepsPass)
{
    EXPECT_EQ(run(config("bump-sweep", Json::object())).exit_code(), 0);
    EXPECT_EQ(run(config("dilated-bump-sweep", Json::object())).exit_code(), 0);
}

TEST(Scenarios, LowerBoundProbePartPasses)
{
    auto const rep = run(config("lower-bound-sweep", Json{{"counterexample", nullptr}}));
    EXPECT_EQ(rep.exit_code(), 0);
}

TEST(Scenarios, BallSymmetryTrivialRegionIsInconclusive)
{
    auto const rep = run(config("ball-symmetry", Json{{"lambda", 0.5}, {"R", 1.0}}));
    EXPECT_EQ(rep.exit_code(), 3);
}
