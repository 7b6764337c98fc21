#include <gtest/gtest.h>

#include "horizon_calc/bprocess.hpp"
#include "horizon_calc/laws.hpp"

using namespace hcalc;

namespace {
constexpr std::size_t kInf = StoppingTime::kInfinity;
const TimeGrid g4(1.0, 4);

SamplePath path(std::vector<double> v) { return SamplePath(g4, std::move(v)); }

IntervalTypeSet set1(std::size_t debut, bool open) { return make_interval_set(g4, StoppingTime({debut}), {open}); }

CoupledLevel level(std::size_t t, std::vector<double> v) { return {StoppingTime({t}), {path(std::move(v))}}; }
}  // namespace

TEST(BProcess, EvaluationOutsideSetIsAnError) {
    const auto b = set1(3, true);
    const BProcess x = restrict({path({0, 1, 2, 3, 4})}, b);
    EXPECT_EQ(x.at(0, 2), 2.0);
    try {
        x.at(0, 3);
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_EQ(e.node(), 3u);
        EXPECT_EQ(e.scenario(), 0u);
    }
}

TEST(BProcess, RejectsInconsistentDecomposition) {
    const auto b = set1(kInf, false);
    Decomposition d = Decomposition::zeros(b);
    d.cont[0][2] = 1.0;
    EXPECT_THROW(BProcess(b, {{0, 0, 0, 0, 0}}, d), ValidationError);
    EXPECT_NO_THROW(BProcess(b, {{0, 0, 1, 1, 1}}, d));
}

TEST(ValidateFcs, SingleLevelAtDebutIsValid) {
    CoupledSequence cs;
    cs.push_back(level(3, {1, 2, 3, 4, 5}));
    EXPECT_TRUE(validate_fcs(set1(3, true), cs).valid());
}

TEST(ValidateFcs, DisagreementInsideIsReportedAtTheNode) {
    CoupledSequence cs;
    cs.push_back(level(2, {1, 2, 3, 0, 0}));
    cs.push_back(level(4, {1, 2, 9, 4, 5}));
    const auto rep = validate_fcs(set1(kInf, false), cs);
    ASSERT_EQ(rep.violations.size(), 1u);
    const auto& v = rep.violations[0];
    EXPECT_EQ(v.kind, FcsViolation::Kind::consistency);
    EXPECT_EQ(v.node, 2u);
    EXPECT_EQ(v.k, 1u);
    EXPECT_EQ(v.l, 2u);
    EXPECT_THROW(glue(set1(kInf, false), cs), FcsError);
}

TEST(ValidateFcs, DisagreementOutsideSetIsIgnored) {
    // B = [0, 2[ : nodes 0, 1. Levels differ at node 2 only.
    CoupledSequence cs;
    cs.push_back(level(2, {1, 2, 3, 0, 0}));
    cs.push_back(level(2, {1, 2, 7, 8, 9}));
    EXPECT_TRUE(validate_fcs(set1(2, true), cs).valid());
}

TEST(ValidateFcs, ExhaustionOrderingAndDebut) {
    CoupledSequence short_ladder;
    short_ladder.push_back(level(1, {0, 0, 0, 0, 0}));
    auto rep = validate_fcs(set1(kInf, false), short_ladder);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.violations[0].kind, FcsViolation::Kind::exhaustion);

    CoupledSequence beyond;
    beyond.push_back(level(4, {0, 0, 0, 0, 0}));
    rep = validate_fcs(set1(2, false), beyond);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.violations[0].kind, FcsViolation::Kind::beyond_debut);

    CoupledSequence down;
    down.push_back(level(3, {0, 0, 0, 0, 0}));
    down.push_back(level(2, {0, 0, 0, 0, 0}));
    down.push_back(level(4, {0, 0, 0, 0, 0}));
    rep = validate_fcs(set1(kInf, false), down);
    ASSERT_FALSE(rep.valid());
    EXPECT_EQ(rep.violations[0].kind, FcsViolation::Kind::ordering);
    EXPECT_FALSE(rep.summary().empty());

    EXPECT_FALSE(validate_fcs(set1(kInf, false), CoupledSequence{}).valid());
}

TEST(Glue, OneLevelIsRestriction) {
    CoupledSequence cs;
    cs.push_back(level(3, {1, 2, 3, 4, 5}));
    const BProcess x = glue(set1(3, true), cs);
    EXPECT_EQ(x.sections(), (Sections{{1, 2, 3}}));
}

TEST(Glue, PicksLeastLevelCoveringTheNode) {
    CoupledSequence cs;
    cs.push_back(level(1, {1, 2, 0, 0, 0}));
    cs.push_back(level(3, {1, 2, 3, 4, 0}));
    cs.push_back(level(kInf, {1, 2, 3, 4, 5}));
    const BProcess x = glue(set1(kInf, false), cs);
    EXPECT_EQ(x.sections(), (Sections{{1, 2, 3, 4, 5}}));
    // re-extracting on [0, T_2] gives level 2
    for (std::size_t k = 0; k <= 3; ++k) EXPECT_EQ(x.at(0, k), cs[1].paths[0][k]);
}

TEST(Restrict, FullSetIsIdentityAndComposes) {
    const TimeGrid g(1.0, 6);
    RandomInstances gen(g, 30, 2);
    const auto paths = gen.jump_paths();
    const auto full = IntervalTypeSet::full(g, 30);
    const auto b1 = gen.random_set();
    const auto b2 = intersect_stop(b1, gen.inner_time(b1));
    const BProcess x = restrict(paths, full);
    for (std::size_t w = 0; w < 30; ++w)
        for (std::size_t k = 0; k <= 6; ++k) EXPECT_EQ(x.at(w, k), paths[w][k]);
    const BProcess a = restrict(restrict(x, b1), b2);
    const BProcess b = restrict(x, b2);
    EXPECT_EQ(a.sections(), b.sections());
    EXPECT_EQ(bjump(restrict(x, b1)).sections(), restrict(bjump(x), b1).sections());
}

TEST(Restrict, NotContainedIsPrecondition) {
    const BProcess x = restrict({path({0, 1, 2, 3, 4})}, set1(2, false));
    EXPECT_THROW(restrict(x, set1(3, false)), PreconditionError);
}

TEST(Stop, AtDebutOfClosedSetIsIdentity) {
    const BProcess x = restrict({path({0, 1, 5, 2, 4})}, set1(3, false));
    EXPECT_EQ(stop(x, StoppingTime({3})).sections(), x.sections());
}

TEST(Stop, FreezesAndRejectsNonInner) {
    const BProcess x = restrict({path({0, 1, 5, 2, 4})}, set1(kInf, false));
    EXPECT_EQ(stop(x, StoppingTime({1})).sections(), (Sections{{0, 1, 1, 1, 1}}));
    EXPECT_THROW(stop(restrict({path({0, 1, 5, 2, 4})}, set1(3, true)), StoppingTime({3})), PreconditionError);
}

TEST(Stop, CommutesAndJumpIsIndicated) {
    const TimeGrid g(1.0, 10);
    RandomInstances gen(g, 40, 7);
    for (int rep = 0; rep < 5; ++rep) {
        const auto b = gen.random_set();
        const BProcess x = restrict(gen.jump_paths(), b);
        const StoppingTime t = gen.inner_time(b), s = gen.inner_time(b);
        EXPECT_EQ(stop(stop(x, t), s).sections(), stop(x, meet(t, s)).sections());
        EXPECT_EQ(stop(stop(x, s), t).sections(), stop(x, meet(t, s)).sections());
        EXPECT_EQ(bjump(stop(x, t)).sections(), indicator_up_to(bjump(x), t).sections());
    }
}

TEST(StopMinus, Examples) {
    EXPECT_EQ(stop_minus(path({0, 0, 5, 5, 5}), 2), path({0, 0, 0, 0, 0}));
    const SamplePath c = SamplePath::constant(g4, 2.0);
    EXPECT_EQ(stop_minus(c, 2), stop_path(c, 2));
    EXPECT_EQ(stop_minus(path({3, 1, 2, 3, 4}), 0), SamplePath::constant(g4, 3.0));
    EXPECT_EQ(stop_minus(path({3, 1, 2, 3, 4}), kInf), path({3, 1, 2, 3, 4}));
}

TEST(StopMinus, JumpIsIndicatedOnOpenInterval) {
    const SamplePath p = path({1, 4, 2, 8, 5});
    for (std::size_t t = 0; t <= 4; ++t) {
        const SamplePath s = stop_minus(p, t);
        for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(jump(s, k), k < t ? jump(p, k) : 0.0);
    }
}

TEST(BJump, ConstantIsZeroAndLinear) {
    const auto b = set1(kInf, false);
    const BProcess c = restrict({SamplePath::constant(g4, 3.0)}, b);
    EXPECT_EQ(bjump(c).sections(), (Sections{{0, 0, 0, 0, 0}}));
    const BProcess x = restrict({path({0, 0, 1, 1, 1})}, b);
    EXPECT_EQ(bjump(x).sections(), (Sections{{0, 0, 1, 0, 0}}));
    const BProcess y = restrict({path({2, -1, 3, 3, 0})}, b);
    const BProcess lhs = bjump(lincomb(2.0, x, -3.0, y));
    const BProcess rhs = lincomb(2.0, bjump(x), -3.0, bjump(y));
    for (std::size_t k = 0; k <= 4; ++k) EXPECT_DOUBLE_EQ(lhs.at(0, k), rhs.at(0, k));
}

TEST(BSummation, Examples) {
    const auto b = set1(kInf, false);
    EXPECT_EQ(bsummation(BProcess::zero(b)).sections(), (Sections{{0, 0, 0, 0, 0}}));
    const BProcess x = restrict({path({2, 3, 1, 6, 6})}, b);
    const BProcess s = bsummation(bjump(x));
    for (std::size_t k = 0; k <= 4; ++k) EXPECT_EQ(s.at(0, k), x.at(0, k) - x.at(0, 0));
    const StoppingTime tau({2});
    EXPECT_EQ(bsummation(indicator_up_to(x, tau)).sections(), stop(bsummation(x), tau).sections());
}

TEST(MergeFcsTimes, IdenticalLaddersUnchanged) {
    CoupledSequence cs;
    cs.push_back(level(2, {1, 2, 3, 0, 0}));
    cs.push_back(level(4, {1, 2, 3, 4, 5}));
    const auto [a, b] = merge_fcs_times(set1(kInf, false), cs, cs);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].time.indices(), cs[0].time.indices());
    EXPECT_EQ(b[1].time.indices(), cs[1].time.indices());
}

TEST(MergeFcsTimes, PointwiseMinAndGlueUnchanged) {
    const auto set = set1(kInf, false);
    CoupledSequence c1, c2;
    c1.push_back(level(2, {1, 2, 3, 0, 0}));
    c1.push_back(level(4, {1, 2, 3, 4, 5}));
    c2.push_back(level(3, {1, 2, 3, 4, -1}));
    c2.push_back(level(4, {1, 2, 3, 4, 5}));
    const auto [a, b] = merge_fcs_times(set, c1, c2);
    EXPECT_EQ(a[0].time[0], 2u);
    EXPECT_EQ(a[1].time[0], 4u);
    EXPECT_EQ(b[0].time[0], 2u);
    EXPECT_TRUE(validate_fcs(set, a).valid());
    EXPECT_TRUE(validate_fcs(set, b).valid());
    EXPECT_EQ(glue(set, a).sections(), glue(set, c1).sections());
    EXPECT_EQ(glue(set, b).sections(), glue(set, c2).sections());
}

TEST(MergeFcsTimes, RejectsInvalidInput) {
    CoupledSequence bad;
    bad.push_back(level(1, {0, 0, 0, 0, 0}));
    EXPECT_THROW(merge_fcs_times(set1(kInf, false), bad, bad), FcsError);
}

TEST(Glue, IndependentOfLadderOnRandomInstances) {
    const TimeGrid g(1.0, 12);
    RandomInstances gen(g, 50, 21);
    for (int rep = 0; rep < 10; ++rep) {
        const auto b = gen.random_set();
        const auto base = gen.jump_paths();
        const auto c1 = gen.random_fcs(b, base, 3);
        const auto c2 = gen.random_fcs(b, base, 5);
        ASSERT_TRUE(validate_fcs(b, c1).valid()) << validate_fcs(b, c1).summary();
        ASSERT_TRUE(validate_fcs(b, c2).valid());
        EXPECT_EQ(glue(b, c1).sections(), glue(b, c2).sections());
        EXPECT_EQ(glue(b, c1).sections(), restrict(base, b).sections());
    }
}
