#include <gtest/gtest.h>

#include "horizon_calc/interval_sets.hpp"

using namespace hcalc;

namespace {
constexpr std::size_t kInf = StoppingTime::kInfinity;
const TimeGrid g8(1.0, 8);

IntervalTypeSet one(std::size_t debut, bool open) { return make_interval_set(g8, StoppingTime({debut}), {open}); }
}  // namespace

TEST(IntervalTypeSet, InfiniteDebutIsFullGrid) {
    for (bool open : {true, false}) {
        const auto s = one(kInf, open);
        EXPECT_TRUE(s.is_full(0));
        for (std::size_t k = 0; k <= 8; ++k) EXPECT_TRUE(membership(s, 0, k));
    }
}

TEST(IntervalTypeSet, OpenAtThree) {
    const auto s = one(3, true);
    EXPECT_EQ(s.last_member(0), 2u);
    EXPECT_TRUE(membership(s, 0, 2));
    EXPECT_FALSE(membership(s, 0, 3));
}

TEST(IntervalTypeSet, ClosedAtThree) {
    const auto s = one(3, false);
    EXPECT_TRUE(membership(s, 0, 3));
    EXPECT_FALSE(membership(s, 0, 4));
}

TEST(IntervalTypeSet, OpenAtZeroIsRejectedWithScenarioList) {
    try {
        make_interval_set(g8, StoppingTime({2, 0, 5, 0}), {true, true, false, true});
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("1,3"), std::string::npos);
    }
    EXPECT_NO_THROW(one(0, false));
}

TEST(IntervalTypeSet, DebutRoundTripsAndNodeZeroAlwaysMember) {
    const StoppingTime t({1, 4, kInf, 0});
    const auto s = make_interval_set(g8, t, {true, false, true, false});
    EXPECT_EQ(s.debut().indices(), t.indices());
    for (std::size_t w = 0; w < 4; ++w) EXPECT_TRUE(membership(s, w, 0));
}

TEST(IntervalTypeSet, MembershipIsDownSet) {
    const auto s = make_interval_set(g8, StoppingTime({1, 4, kInf, 0, 8}), {true, false, true, false, true});
    for (std::size_t w = 0; w < 5; ++w)
        for (std::size_t k = 1; k <= 8; ++k)
            if (membership(s, w, k)) EXPECT_TRUE(membership(s, w, k - 1));
}

TEST(IntervalTypeSet, IndexErrors) {
    const auto s = one(3, false);
    EXPECT_THROW(membership(s, 1, 0), std::out_of_range);
    EXPECT_THROW(membership(s, 0, 9), std::out_of_range);
    EXPECT_THROW(one(9, false), ValidationError);
}

TEST(PredictableFromFs, ConstantLadderIsClosed) {
    const FundamentalSequence fs({StoppingTime({5}), StoppingTime({5}), StoppingTime({5})});
    const auto s = predictable_from_fs(g8, fs);
    EXPECT_FALSE(s.is_open(0));
    EXPECT_EQ(s.last_member(0), 5u);
    EXPECT_EQ(s.set_class(), SetClass::predictable);
}

TEST(PredictableFromFs, LadderReachingEndIsFull) {
    std::vector<StoppingTime> ladder;
    for (std::size_t n = 1; n <= 10; ++n) ladder.push_back(StoppingTime({std::min<std::size_t>(n, 8)}));
    EXPECT_TRUE(predictable_from_fs(g8, FundamentalSequence(ladder)).is_full(0));
}

TEST(FundamentalSequence, RejectsEmptyAndDecreasing) {
    EXPECT_THROW(FundamentalSequence({}), ValidationError);
    EXPECT_THROW(FundamentalSequence({StoppingTime({3}), StoppingTime({2})}), ValidationError);
}

TEST(IntersectStop, Examples) {
    const auto open5 = one(5, true);
    const auto a = intersect_stop(open5, StoppingTime({3}));
    EXPECT_FALSE(a.is_open(0));
    EXPECT_EQ(a.last_member(0), 3u);
    const auto b = intersect_stop(one(3, false), StoppingTime({5}));
    EXPECT_EQ(b.last_member(0), 3u);
    EXPECT_FALSE(b.is_open(0));
    const auto c = intersect_stop(open5, StoppingTime({kInf}));
    EXPECT_TRUE(c.same_sections(open5));
    EXPECT_TRUE(c.is_open(0));
}

TEST(IntersectStop, Composes) {
    const auto s = make_interval_set(g8, StoppingTime({6, kInf, 2}), {true, false, false});
    const StoppingTime a({4, 7, 1}), b({5, 3, 0});
    EXPECT_TRUE(intersect_stop(intersect_stop(s, a), b).same_sections(intersect_stop(s, meet(a, b))));
}

TEST(InnerStoppingTime, Examples) {
    EXPECT_TRUE(is_inner_stopping_time(one(3, true), StoppingTime({0})));
    EXPECT_FALSE(is_inner_stopping_time(one(3, true), StoppingTime({3})));
    EXPECT_TRUE(is_inner_stopping_time(one(3, true), StoppingTime({2})));
    EXPECT_TRUE(is_inner_stopping_time(one(3, false), StoppingTime({3})));
    EXPECT_FALSE(is_inner_stopping_time(one(3, false), StoppingTime({kInf})));
    EXPECT_TRUE(is_inner_stopping_time(one(kInf, true), StoppingTime({kInf})));
}

TEST(StoppingTime, MeetIsPointwiseMin) {
    const auto m = meet(StoppingTime({2, kInf, 5}), StoppingTime({3, 4, kInf}));
    EXPECT_EQ(m.indices(), (std::vector<std::size_t>{2, 4, 5}));
}
