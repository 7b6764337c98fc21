#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "commands.hpp"

using namespace hcalc::cli;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "market": {
    "s0": 1, "x0": 1, "mu_star": 0.08,
    "sigma": [0.2], "a": [1.0],
    "exit_law": {"kind": "exponential", "rate": 0.6931471805599453}
  }
})";

std::vector<std::string> problems_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool mentions(const std::vector<std::string>& ps, const std::string& needle) {
    for (const auto& p : ps)
        if (p.find(needle) != std::string::npos) return true;
    return false;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string s;
    std::getline(in, s);
    return s;
}

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("hcalc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunContext context(const std::string& sub, const std::string& leaf, RunConfig rc = {}) {
        RunContext ctx;
        ctx.subcommand = sub;
        ctx.out_dir = dir_ / leaf;
        ctx.config = std::move(rc);
        fs::create_directories(ctx.out_dir);
        return ctx;
    }

    fs::path dir_;
};

}  // namespace

TEST(ParseConfig, MinimalConfigGetsDefaults) {
    const RunConfig rc = parse_config_text(kMinimal);
    EXPECT_EQ(rc.simulation.paths, 10000u);
    EXPECT_EQ(rc.simulation.steps, 4096u);
    EXPECT_EQ(rc.simulation.seed, 0u);
    EXPECT_EQ(rc.b, 1.0);
    EXPECT_EQ(rc.exit_law.kind, "exponential");
    const auto m = to_market(rc);
    EXPECT_NEAR(m.exit_law.cdf(1.0), 0.5, 1e-15);
}

TEST(ParseConfig, NegativeSigmaNamesTheKey) {
    std::string text = kMinimal;
    text.replace(text.find("[0.2]"), 5, "[-0.2]");
    const auto ps = problems_of(text);
    ASSERT_FALSE(ps.empty());
    EXPECT_TRUE(mentions(ps, "market.sigma[0]"));
}

TEST(ParseConfig, NonIncreasingPeriodEnds) {
    std::string text = kMinimal;
    text.replace(text.find("[0.2]"), 5, "[0.2, 0.3]");
    text.replace(text.find("[1.0]"), 5, "[1.0, 1.0]");
    EXPECT_TRUE(mentions(problems_of(text), "market.a[1]"));
}

TEST(ParseConfig, ProblemsAreListedExhaustively) {
    const auto ps = problems_of(R"({
      "market": {"s0": 1, "mu_star": "x", "sigma": [0.2], "a": [1], "colour": 3,
                 "exit_law": {"kind": "exponential"}},
      "simulation": {"paths": -4},
      "extra": {}
    })");
    EXPECT_TRUE(mentions(ps, "market.x0: missing"));
    EXPECT_TRUE(mentions(ps, "market.mu_star"));
    EXPECT_TRUE(mentions(ps, "unknown key 'colour'"));
    EXPECT_TRUE(mentions(ps, "market.exit_law.rate: missing"));
    EXPECT_TRUE(mentions(ps, "simulation.paths"));
    EXPECT_TRUE(mentions(ps, "unknown key 'extra'"));
    EXPECT_GE(ps.size(), 6u);
}

TEST(ParseConfig, ExitLawKinds) {
    auto with_law = [](const std::string& law) {
        std::string text = kMinimal;
        const auto at = text.find("{\"kind\"");
        text.replace(at, text.find('}', at) + 1 - at, law);
        return parse_config_text(text);
    };
    EXPECT_EQ(to_market(with_law(R"({"kind": "none"})")).exit_law.cdf(5.0), 0.0);
    EXPECT_NEAR(to_market(with_law(R"({"kind": "uniform", "lo": 0, "hi": 2})")).exit_law.cdf(1.0), 0.5, 1e-15);
    EXPECT_NEAR(to_market(with_law(R"({"kind": "weibull", "shape": 1, "scale": 1})")).exit_law.cdf(1.0),
                1 - std::exp(-1.0), 1e-15);
    const auto t = to_market(with_law(R"({"kind": "table", "points": [[0, 0], [1, 0.5], [2, 1]]})"));
    EXPECT_NEAR(t.exit_law.cdf(0.5), 0.25, 1e-15);
    EXPECT_NEAR(t.exit_law.cdf(1.5), 0.75, 1e-15);
    EXPECT_EQ(t.exit_law.cdf(3.0), 1.0);
    EXPECT_THROW(with_law(R"({"kind": "table", "points": [[1, 0.5], [0.5, 0.6]]})"), ConfigError);
    EXPECT_THROW(with_law(R"({"kind": "gamma"})"), ConfigError);
}

TEST(ParseConfig, NotJsonIsAConfigError) {
    EXPECT_THROW(parse_config_text("market = 1"), ConfigError);
    EXPECT_THROW(parse_config("/nonexistent/horizon.json"), ConfigError);
}

TEST(ParseConfig, CanonicalFormRoundTrips) {
    const RunConfig rc = parse_config_text(kMinimal);
    const RunConfig again = parse_config_text(to_json(rc).dump());
    EXPECT_EQ(to_json(rc).dump(), to_json(again).dump());
    EXPECT_EQ(fnv1a(to_json(rc).dump()), fnv1a(to_json(again).dump()));
}

TEST_F(TempDir, VerifyIsDeterministic) {
    RunConfig rc;
    rc.verify.seed = 7;
    rc.verify.n_scenarios = 40;
    std::ostringstream log;
    auto a = context("verify", "a", rc);
    auto b = context("verify", "b", rc);
    EXPECT_EQ(run_verify(a, log), kExitPass);
    EXPECT_EQ(run_verify(b, log), kExitPass);
    EXPECT_EQ(first_line(a.out_dir / "verify.csv"), "law,max_residual,tolerance,pass");
    EXPECT_EQ(slurp(a.out_dir / "verify.csv"), slurp(b.out_dir / "verify.csv"));
    EXPECT_TRUE(fs::exists(a.out_dir / "manifest.json"));
}

TEST_F(TempDir, SimulateWritesSchemasAndManifest) {
    RunConfig rc;
    rc.simulation.paths = 5;
    rc.simulation.steps = 16;
    rc.a = {1.0, 2.0};
    rc.sigma = {0.2, 0.25};
    std::ostringstream log;
    auto ctx = context("simulate", "sim", rc);
    EXPECT_EQ(run_simulate(ctx, log), kExitPass);
    EXPECT_EQ(first_line(ctx.out_dir / "stock.csv"), "path_id,node,time,price,in_set");
    EXPECT_EQ(first_line(ctx.out_dir / "wealth.csv"), "path_id,node,time,wealth,fraction");
    std::ifstream in(ctx.out_dir / "stock.csv");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 1 + 5 * 33u);
    const json m = json::parse(slurp(ctx.out_dir / "manifest.json"));
    EXPECT_EQ(m.at("subcommand"), "simulate");
    EXPECT_EQ(m.at("grid").at("n_steps"), 32);
    EXPECT_EQ(m.at("outputs").size(), 3u);
    for (const char* key : {"config_digest", "engine_version", "seed", "paths", "timestamp", "config"})
        EXPECT_TRUE(m.contains(key)) << key;
}

TEST_F(TempDir, OptimizeRowHasClosedFormAndOracle) {
    RunConfig rc;
    rc.simulation.paths = 4000;
    rc.simulation.steps = 64;
    std::ostringstream log;
    auto ctx = context("optimize", "opt", rc);
    EXPECT_EQ(run_optimize(ctx, log), kExitPass);
    std::ifstream in(ctx.out_dir / "optimize.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "period,closed_form_w,oracle_w,elu_at_closed_form,elu_at_oracle,stderr");
    std::vector<double> cells;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(std::stod(c));
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(cells[0], 1.0);
    EXPECT_NEAR(cells[1], 2.0, 1e-12);
    EXPECT_NEAR(cells[2], 2.0, 0.3);
    EXPECT_GE(cells[4], cells[3] - 1e-15);
}

TEST_F(TempDir, GalleryPasses) {
    std::ostringstream log;
    auto ctx = context("gallery", "gal");
    EXPECT_EQ(run_gallery(ctx, log), kExitPass);
    EXPECT_EQ(first_line(ctx.out_dir / "gallery.csv"), "item,probe,value,expected,pass");
}

TEST(Fmt, SeventeenDigitsRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 2.0, -1e-300, 1.9999999999999996}) EXPECT_EQ(std::stod(fmt(v)), v);
}
