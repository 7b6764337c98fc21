#include <gtest/gtest.h>

#include <cmath>

#include "horizon_calc/calculus.hpp"
#include "horizon_calc/laws.hpp"

using namespace hcalc;

namespace {

SmoothFunction linear2(double a, double b) {
    return SmoothFunction::make(
        2, [=](const auto& x) { return a * x[0] + b * x[1]; },
        [=](const auto&) { return std::vector<double>{a, b}; },
        [](const auto&) { return std::vector<std::vector<double>>{{0, 0}, {0, 0}}; });
}

SmoothFunction square() {
    return SmoothFunction::make(
        1, [](const auto& x) { return x[0] * x[0]; }, [](const auto& x) { return std::vector<double>{2 * x[0]}; },
        [](const auto&) { return std::vector<std::vector<double>>{{2.0}}; });
}

SmoothFunction exponential() {
    return SmoothFunction::make(
        1, [](const auto& x) { return std::exp(x[0]); }, [](const auto& x) { return std::vector<double>{std::exp(x[0])}; },
        [](const auto& x) { return std::vector<std::vector<double>>{{std::exp(x[0])}}; });
}

/// X = (mu - sigma^2/2) t + sigma W with continuous labels. W is sampled
/// on n_steps * coarsen steps and observed every coarsen steps, so
/// different coarsenings share one Brownian path.
BProcess log_diffusion(std::size_t n_steps, std::size_t paths, std::uint64_t seed, double mu, double sigma,
                       std::size_t coarsen = 1) {
    const TimeGrid g(1.0, n_steps);
    const auto b = IntervalTypeSet::full(g, paths);
    const auto w = sample_brownian(TimeGrid(1.0, n_steps * coarsen), ScenarioBatch(paths, seed));
    Decomposition d = Decomposition::zeros(b);
    d.diffusion = Sections(paths, std::vector<double>(g.n_nodes(), sigma));
    for (std::size_t i = 0; i < paths; ++i)
        for (std::size_t k = 1; k <= n_steps; ++k) {
            d.cont[i][k] = sigma * (w[i][k * coarsen] - w[i][(k - 1) * coarsen]);
            d.fv[i][k] = (mu - 0.5 * sigma * sigma) * g.dt();
        }
    return BProcess::from_decomposition(b, std::move(d), true);
}

}  // namespace

TEST(SmoothFunction, RejectsWrongDerivatives) {
    EXPECT_THROW(SmoothFunction::make(
                     1, [](const auto& x) { return x[0] * x[0]; },
                     [](const auto& x) { return std::vector<double>{x[0]}; },
                     [](const auto&) { return std::vector<std::vector<double>>{{2.0}}; }),
                 ValidationError);
    EXPECT_THROW(SmoothFunction::make(
                     1, [](const auto& x) { return x[0] * x[0]; },
                     [](const auto& x) { return std::vector<double>{2 * x[0]}; },
                     [](const auto&) { return std::vector<std::vector<double>>{{1.0}}; }),
                 ValidationError);
    EXPECT_NO_THROW(square());
}

TEST(Ito, AffineFunctionHasZeroEtaAndResidual) {
    const TimeGrid g(1.0, 16);
    RandomInstances gen(g, 50, 1);
    const auto b = gen.random_set();
    const ItoResult r = ito_residual(linear2(1.5, -2.0), {gen.decomposed(b), gen.decomposed(b)});
    EXPECT_LE(r.report.relative_sup, 1e-12);
    for (const auto& s : r.terms.eta)
        for (double v : s) EXPECT_LE(std::abs(v), 1e-12);
}

TEST(Ito, SquareOnPureJumpIsExact) {
    const TimeGrid g(1.0, 16);
    RandomInstances gen(g, 50, 2);
    const auto b = gen.random_set();
    const ItoResult r = ito_residual(square(), {gen.pure_jump(b)});
    EXPECT_LE(r.report.relative_sup, 1e-12);
}

TEST(Ito, EtaVanishesWithoutJumps) {
    const BProcess x = log_diffusion(64, 20, 3, 0.05, 0.2);
    const ItoResult r = ito_residual(exponential(), {x});
    for (const auto& s : r.terms.eta)
        for (double v : s) EXPECT_EQ(v, 0.0);
    EXPECT_GT(r.report.sup, 0.0);
}

TEST(Ito, ExpResidualShrinksLinearlyInStep) {
    const ItoResult coarse = ito_residual(exponential(), {log_diffusion(256, 100, 4, 0.05, 0.2, 2)});
    const ItoResult fine = ito_residual(exponential(), {log_diffusion(512, 100, 4, 0.05, 0.2, 1)});
    const double ratio = fine.report.mean_of_sup / coarse.report.mean_of_sup;
    EXPECT_GT(ratio, 0.3);
    EXPECT_LT(ratio, 0.7);
}

TEST(Ito, AnalyticModeNeedsCoefficientsAndPreconditions) {
    const TimeGrid g(1.0, 8);
    RandomInstances gen(g, 5, 6);
    const auto b = gen.random_set();
    const BProcess x = gen.decomposed(b);
    EXPECT_THROW(ito_residual(square(), {x}, BracketConvention::analytic), PreconditionError);
    EXPECT_THROW(ito_residual(square(), {x.without_decomposition()}), PreconditionError);
    EXPECT_THROW(ito_residual(square(), {x, x}), ValidationError);
    const BProcess y = BProcess(b, x.sections(), x.decomposition(), false);
    EXPECT_THROW(ito_residual(square(), {y}), PreconditionError);
}

TEST(Ito, TermsAreReported) {
    const BProcess x = log_diffusion(32, 3, 7, 0.05, 0.2);
    const ItoResult r = ito_residual(exponential(), {x});
    ASSERT_EQ(r.terms.lhs.size(), 3u);
    EXPECT_EQ(r.terms.initial[0][5], 1.0);
    EXPECT_NE(r.terms.first_order[0][5], 0.0);
    EXPECT_GT(r.terms.second_order[0][5], 0.0);
    EXPECT_EQ(r.report.n_steps, 32u);
}

TEST(Ibp, ConstantsGiveSquareOfInitialValue) {
    const auto b = IntervalTypeSet::full(TimeGrid(1.0, 4), 1);
    const BProcess c = BProcess::from_fn(b, [](std::size_t, std::size_t) { return 3.0; });
    EXPECT_EQ(ibp_residual(c, c).sup, 0.0);
}

TEST(Ibp, RandomJumpPathsAreExact) {
    const TimeGrid g(1.0, 16);
    RandomInstances gen(g, 200, 8);
    for (int rep = 0; rep < 5; ++rep) {
        const auto b = gen.random_set();
        const BProcess x = restrict(gen.jump_paths(), b), y = restrict(gen.jump_paths(), b);
        EXPECT_LE(ibp_residual(x, y).relative_sup, 1e-12);
        EXPECT_LE(ibp_residual(x, x).relative_sup, 1e-12);
    }
}

// Telescoping oracle written independently of the library integrals.
TEST(Ibp, MatchesHandTelescoping) {
    const TimeGrid g(1.0, 5);
    const std::vector<double> x{1, 3, -2, 4, 4, 0}, y{2, 2, 5, -1, 3, 1};
    const auto b = IntervalTypeSet::full(g, 1);
    const BProcess px = restrict({SamplePath(g, x)}, b), py = restrict({SamplePath(g, y)}, b);
    double s = 0.0;
    for (std::size_t k = 1; k <= 5; ++k) {
        const double dx = x[k] - x[k - 1], dy = y[k] - y[k - 1];
        s += x[k - 1] * dy + y[k - 1] * dx + dx * dy;
        EXPECT_DOUBLE_EQ(x[k] * y[k] - x[0] * y[0], s);
    }
    EXPECT_EQ(ibp_residual(px, py).sup, 0.0);
}

TEST(IdentitySuite, DefaultRunPasses) {
    const SuiteReport r = identity_suite(0);
    EXPECT_TRUE(r.all_pass());
    EXPECT_GE(r.laws.size(), 20u);
    for (const auto& l : r.laws) EXPECT_TRUE(l.pass) << l.law << " " << l.max_residual;
}

TEST(IdentitySuite, DegenerateSetsPass) {
    SuiteSizes s;
    s.degenerate_sets = true;
    const SuiteReport r = identity_suite(3, s);
    for (const auto& l : r.laws) EXPECT_TRUE(l.pass) << l.law << " " << l.max_residual;
}

TEST(IdentitySuite, SeededRerunIsIdentical) {
    const SuiteReport a = identity_suite(7), b = identity_suite(7);
    ASSERT_EQ(a.laws.size(), b.laws.size());
    for (std::size_t i = 0; i < a.laws.size(); ++i) {
        EXPECT_EQ(a.laws[i].law, b.laws[i].law);
        EXPECT_EQ(a.laws[i].max_residual, b.laws[i].max_residual);
    }
}
