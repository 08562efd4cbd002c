#include <gtest/gtest.h>

#include <limits>

#include "lknn/classify.hpp"
#include "oracles.hpp"

using namespace lknn;

namespace {

DensityFn constant_density(double v) {
    return [v](ConstVec) { return v; };
}

}  // namespace

TEST(VoteFraction, Examples) {
    const std::vector<Label> ones{1, 1, 1}, balanced{0, 1}, third{1, 0, 0};
    EXPECT_EQ(vote_fraction(ones, 3), 1.0);
    EXPECT_EQ(vote_fraction(balanced, 2), 0.5);
    EXPECT_DOUBLE_EQ(vote_fraction(third, 3), 1.0 / 3.0);
}

TEST(VoteFraction, KOutOfRange) {
    const std::vector<Label> ys{1, 0};
    EXPECT_THROW(vote_fraction(ys, 0), Error);
    EXPECT_THROW(vote_fraction(ys, 3), Error);
}

TEST(ResolveK, PracticalAtTheMode) {
    const auto rule = KRule::practical(1.0, constant_density(2.5), 2.5);
    const Vector x{0.0};
    // max[1, min(floor(100^{4/5}), 50)] = 39
    EXPECT_EQ(resolve_k(rule, x, 100, 1), 39u);
}

TEST(ResolveK, PracticalZeroDensityClampsToOne) {
    const auto rule = KRule::practical(1.0, constant_density(0.0), 1.0);
    const Vector x{0.0};
    EXPECT_EQ(resolve_k(rule, x, 100, 1), 1u);
}

TEST(ResolveK, PracticalUpperClampIsHalfN) {
    const auto rule = KRule::practical(1e6, constant_density(1.0), 1.0);
    const Vector x{0.0};
    EXPECT_EQ(resolve_k(rule, x, 101, 1), 50u);
    EXPECT_EQ(resolve_k(rule, x, 2, 1), 1u);
}

TEST(ResolveK, TheoreticalExample) {
    const auto rule = KRule::theoretical(1.0, 0.25, constant_density(1.0));
    const Vector x{0.0, 0.0, 0.0, 0.0};
    // max[ceil(256^{1/4}), min(floor(256^{1/2}), floor(256^{3/4}))] = max[4, min(16, 64)]
    EXPECT_EQ(resolve_k(rule, x, 257, 4), 16u);
}

TEST(ResolveK, TheoreticalClamps) {
    const Vector x{0.0, 0.0, 0.0, 0.0};
    EXPECT_EQ(resolve_k(KRule::theoretical(1.0, 0.25, constant_density(0.0)), x, 257, 4), 4u);
    EXPECT_EQ(resolve_k(KRule::theoretical(1e9, 0.25, constant_density(1.0)), x, 257, 4), 64u);
}

TEST(ResolveK, ConstantClampsToN) {
    const Vector x{0.0};
    EXPECT_EQ(resolve_k(KRule::constant(500), x, 20, 1), 20u);
    EXPECT_EQ(resolve_k(KRule::constant(3), x, 20, 1), 3u);
}

TEST(ResolveK, Errors) {
    const Vector x{0.0};
    const auto nan_rule = KRule::practical(1.0, constant_density(std::numeric_limits<double>::quiet_NaN()), 1.0);
    const auto inf_rule = KRule::practical(1.0, constant_density(std::numeric_limits<double>::infinity()), 1.0);
    try {
        resolve_k(nan_rule, x, 10, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NonFinite);
    }
    EXPECT_THROW(resolve_k(inf_rule, x, 10, 1), Error);
    EXPECT_THROW(resolve_k(KRule::constant(1), x, 1, 1), Error);
    EXPECT_THROW(KRule::theoretical(1.0, 0.5, constant_density(1.0)), Error);
    EXPECT_THROW(KRule::practical(1.0, constant_density(1.0), 0.0), Error);
    EXPECT_THROW(KRule::constant(0), Error);
}

TEST(ResolveKProperty, RangesAndMonotonicity) {
    RngStream rng = derive_stream(31, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 2 + rng.below(5000), d = 1 + rng.below(6);
        const Vector x(d, 0.0);
        const double f = 3.0 * rng.uniform(), sup = 0.1 + 2.0 * rng.uniform();
        const double B = 0.01 + 5.0 * rng.uniform(), beta = 0.01 + 0.48 * rng.uniform();

        const std::size_t kp = resolve_k(KRule::practical(B, constant_density(f), sup), x, n, d);
        EXPECT_GE(kp, 1u);
        EXPECT_LE(kp, std::max<std::size_t>(1, n / 2));

        const std::size_t kt = resolve_k(KRule::theoretical(B, beta, constant_density(f)), x, n, d);
        const double lo = std::ceil(std::pow(n - 1.0, beta) - 1e-9), hi = std::floor(std::pow(n - 1.0, 1 - beta) + 1e-9);
        EXPECT_GE(static_cast<double>(kt), lo);
        EXPECT_LE(static_cast<double>(kt), std::max(lo, hi));

        const std::size_t kp_more_f = resolve_k(KRule::practical(B, constant_density(f * 1.5), sup), x, n, d);
        const std::size_t kp_more_B = resolve_k(KRule::practical(B * 1.5, constant_density(f), sup), x, n, d);
        EXPECT_GE(kp_more_f, kp);
        EXPECT_GE(kp_more_B, kp);
    }
}

TEST(Classify, SingleSample) {
    const Dataset ds = build_dataset({{0.3}}, {0});
    const Vector q{9.0};
    const auto r = classify(ds, q, KRule::constant(1));
    EXPECT_EQ(r.label, 0);
    EXPECT_EQ(r.k_used, 1u);
}

TEST(Classify, ExactTieGoesToClassOne) {
    const Dataset ds = build_dataset({{-1.0}, {1.0}}, {0, 1});
    const Vector q{0.0};
    const auto r = classify(ds, q, KRule::constant(2));
    EXPECT_EQ(r.score, 0.5);
    EXPECT_EQ(r.label, 1);
}

TEST(Classify, MatchesMajorityVoteOracle) {
    RngStream rng = derive_stream(32, 0);
    const Dataset ds = oracle::random_dataset(200, 2, rng);
    for (int q = 0; q < 50; ++q) {
        const Vector x = oracle::random_point(2, rng);
        EXPECT_EQ(classify(ds, x, KRule::constant(5)).label, oracle::majority_vote(ds, x, 5));
    }
}

TEST(ClassifyProperty, ScoreMatchesCountAndLabelRule) {
    RngStream rng = derive_stream(33, 0);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 2 + rng.below(60), d = 1 + rng.below(3);
        const Dataset ds = oracle::random_dataset(n, d, rng);
        const Vector x = oracle::random_point(d, rng);
        const auto r = classify(ds, x, KRule::constant(1 + rng.below(n)));
        const auto ord = k_nearest(ds, x, r.k_used);
        std::size_t ones = 0;
        for (std::size_t i : ord.indices) ones += ds.label(i) == 1;
        EXPECT_EQ(r.score, static_cast<double>(ones) / static_cast<double>(r.k_used));
        EXPECT_EQ(r.label, r.score >= 0.5 ? 1 : 0);
    }
}

TEST(ClassifyProperty, PermutationInvarianceWithDistinctDistances) {
    RngStream rng = derive_stream(34, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 + rng.below(60), d = 1 + rng.below(3);
        const Dataset ds = oracle::random_dataset(n, d, rng);
        const Vector x = oracle::random_point(d, rng);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        const Dataset shuffled = ds.subset(perm);
        const auto rule = KRule::constant(1 + rng.below(n));
        EXPECT_EQ(classify(ds, x, rule).label, classify(shuffled, x, rule).label);
        EXPECT_EQ(classify(ds, x, rule).score, classify(shuffled, x, rule).score);
    }
}

TEST(ClassifyProperty, ConstantEqualsTheoreticalWhenClampsForceK) {
    // With (n-1)^beta and (n-1)^{1-beta} bracketing to one value, the local rule is a constant rule.
    RngStream rng = derive_stream(35, 0);
    const Dataset ds = oracle::random_dataset(101, 2, rng);  // n-1 = 100
    const auto theo = KRule::theoretical(1.0, 0.4999, constant_density(0.5));
    const Vector probe{0.0, 0.0};
    const std::size_t k = resolve_k(theo, probe, 101, 2);
    EXPECT_EQ(k, 10u);
    for (int q = 0; q < 40; ++q) {
        const Vector x = oracle::random_point(2, rng);
        const auto a = classify(ds, x, theo), b = classify(ds, x, KRule::constant(k));
        EXPECT_EQ(a.label, b.label);
        EXPECT_EQ(a.k_used, b.k_used);
    }
}

TEST(Classify, Errors) {
    const Dataset ds = build_dataset({{0.0, 1.0}, {1.0, 0.0}}, {0, 1});
    const Vector bad{0.0};
    EXPECT_THROW(classify(ds, bad, KRule::constant(1)), Error);
    EXPECT_THROW(classify(Dataset{}, bad, KRule::constant(1)), Error);
}
