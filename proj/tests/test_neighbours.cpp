#include <gtest/gtest.h>

#include "lknn/neighbours.hpp"
#include "oracles.hpp"

using namespace lknn;

TEST(FullOrdering, EquidistantPointsBreakTiesByIndex) {
    const Dataset ds = build_dataset({{0.0}, {2.0}, {5.0}}, {0, 1, 0});
    const Vector q{1.0};
    const auto ord = full_ordering(ds, q);
    EXPECT_EQ(ord.indices, (std::vector<std::size_t>{0, 1, 2}));
    EXPECT_EQ(ord.distances, (std::vector<double>{1.0, 1.0, 4.0}));
}

TEST(FullOrdering, Singleton) {
    const Dataset ds = build_dataset({{3.0, 4.0}}, {1});
    const Vector q{0.0, 0.0};
    const auto ord = full_ordering(ds, q);
    ASSERT_EQ(ord.size(), 1u);
    EXPECT_EQ(ord.indices[0], 0u);
    EXPECT_DOUBLE_EQ(ord.distances[0], 5.0);
}

TEST(FullOrdering, MatchesBruteForceOn20Points) {
    RngStream rng = derive_stream(20, 0);
    const Dataset ds = oracle::random_dataset(20, 2, rng);
    const Vector q = oracle::random_point(2, rng);
    EXPECT_EQ(full_ordering(ds, q).indices, oracle::brute_order(ds.points(), q));
}

TEST(FullOrdering, DimensionMismatch) {
    const Dataset ds = build_dataset({{0.0, 1.0}}, {1});
    const Vector q{0.0};
    try {
        full_ordering(ds, q);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(KNearest, QueryOnTrainingPoint) {
    const Dataset ds = build_dataset({{0.0, 0.0}, {1.0, 1.0}, {2.0, 0.5}}, {0, 1, 0});
    const Vector q{1.0, 1.0};
    const auto ord = k_nearest(ds, q, 1);
    EXPECT_EQ(ord.indices, (std::vector<std::size_t>{1}));
    EXPECT_EQ(ord.distances[0], 0.0);
}

TEST(KNearest, KEqualsNIsFullOrdering) {
    RngStream rng = derive_stream(21, 0);
    const Dataset ds = oracle::random_dataset(30, 3, rng);
    const Vector q = oracle::random_point(3, rng);
    const auto a = k_nearest(ds, q, 30), b = full_ordering(ds, q);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(a.distances, b.distances);
}

TEST(KNearest, PrefixOfBruteForceOn50Points) {
    RngStream rng = derive_stream(22, 0);
    const Dataset ds = oracle::random_dataset(50, 2, rng);
    const Vector q = oracle::random_point(2, rng);
    const auto ord = k_nearest(ds, q, 7);
    const auto brute = oracle::brute_order(ds.points(), q);
    EXPECT_EQ(ord.indices, std::vector<std::size_t>(brute.begin(), brute.begin() + 7));
}

TEST(KNearest, KOutOfRange) {
    const Dataset ds = build_dataset({{0.0}, {1.0}}, {0, 1});
    const Vector q{0.5};
    EXPECT_THROW(k_nearest(ds, q, 0), Error);
    EXPECT_THROW(k_nearest(ds, q, 3), Error);
}

TEST(KNearestProperty, PrefixOfNextK) {
    RngStream rng = derive_stream(23, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const bool lattice = trial % 2 == 0;
        const std::size_t n = 2 + rng.below(40), d = 1 + rng.below(4);
        const Dataset ds = oracle::random_dataset(n, d, rng, lattice);
        const Vector q = oracle::random_point(d, rng, lattice);
        for (std::size_t k = 1; k < n; ++k) {
            const auto a = k_nearest(ds, q, k), b = k_nearest(ds, q, k + 1);
            ASSERT_TRUE(std::equal(a.indices.begin(), a.indices.end(), b.indices.begin()));
        }
    }
}

TEST(KNearestProperty, OracleEquivalenceIncludingTies) {
    RngStream rng = derive_stream(24, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const bool lattice = trial % 3 == 0;
        const std::size_t n = 1 + rng.below(100), d = 1 + rng.below(5);
        const Dataset ds = oracle::random_dataset(n, d, rng, lattice);
        const Vector q = oracle::random_point(d, rng, lattice);
        const std::size_t k = 1 + rng.below(n);
        const auto brute = oracle::brute_order(ds.points(), q);
        ASSERT_EQ(full_ordering(ds, q).indices, brute);
        ASSERT_EQ(k_nearest(ds, q, k).indices, std::vector<std::size_t>(brute.begin(), brute.begin() + k));
    }
}

TEST(KNearestProperty, TranslationInvariance) {
    // Dyadic coordinates and integer shifts keep every distance exact, so the
    // orderings must agree index for index, ties included.
    RngStream rng = derive_stream(25, 0);
    auto dyadic = [&] { return static_cast<double>(rng.below(64)) / 16.0 - 2.0; };
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(50), d = 1 + rng.below(4);
        Vector flat(n * d), q(d), shift(d);
        for (double& v : flat) v = dyadic();
        for (double& v : q) v = dyadic();
        for (double& s : shift) s = static_cast<double>(rng.below(17)) - 8.0;
        std::vector<Label> ys(n, 0);
        const Dataset ds(PointSet(d, flat), ys);
        for (std::size_t i = 0; i < flat.size(); ++i) flat[i] += shift[i % d];
        for (std::size_t j = 0; j < d; ++j) q[j] += shift[j];
        const Dataset moved(PointSet(d, flat), ys);
        Vector q0(q);
        for (std::size_t j = 0; j < d; ++j) q0[j] -= shift[j];
        ASSERT_EQ(full_ordering(ds, q0).indices, full_ordering(moved, q).indices);
    }
}

TEST(OrderedLabels, FollowsNeighbourOrder) {
    const Dataset ds = build_dataset({{0.0}, {10.0}, {1.0}}, {0, 1, 1});
    const Vector q{0.2};
    EXPECT_EQ(ordered_labels(ds, full_ordering(ds, q)), (std::vector<Label>{0, 1, 1}));
}
