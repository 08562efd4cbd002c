#include <gtest/gtest.h>

#include "lknn/density.hpp"
#include "lknn/distributions.hpp"
#include "oracles.hpp"

using namespace lknn;

namespace {

PointSet random_points(std::size_t m, std::size_t d, RngStream& rng) {
    Vector flat(m * d);
    for (double& v : flat) v = rng.normal();
    return PointSet(d, std::move(flat));
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST(Kernel, ConstantMatchesRadialQuadrature) {
    for (std::size_t d = 1; d <= 6; ++d) {
        EXPECT_LT(rel_diff(Kernel(d).normalizing_constant(), oracle::truncated_normal_constant(d, 3.0)), 1e-10) << d;
        EXPECT_LT(rel_diff(Kernel(d, 1.5).normalizing_constant(), oracle::truncated_normal_constant(d, 1.5)), 1e-10) << d;
    }
}

TEST(Kernel, IntegratesToOneWithZeroMean) {
    for (std::size_t d : {1u, 2u}) {
        const Kernel K(d);
        const Lattice lat{Vector(d, -3.2), Vector(d, 3.2), d == 1 ? 20001u : 801u};
        EXPECT_NEAR(lat.integrate([&](ConstVec u) { return K(u); }), 1.0, 2e-3) << d;
        EXPECT_NEAR(lat.integrate([&](ConstVec u) { return u[0] * K(u); }), 0.0, 1e-5) << d;
    }
}

TEST(Kernel, ZeroOutsideRadius) {
    const Kernel K(2);
    const Vector in{2.0, 2.0}, out{2.2, 2.2};
    EXPECT_GT(K(in), 0.0);
    EXPECT_EQ(K(out), 0.0);
}

TEST(Kde, SinglePointPeak) {
    const KdeModel model(PointSet(1, {0.0}), {0.5});
    const Vector x{0.0};
    EXPECT_LT(rel_diff(kde_evaluate(model, x), oracle::truncated_normal_constant(1, 3.0) / 0.5), 1e-10);
}

TEST(Kde, SymmetricSampleGivesSymmetricEstimate) {
    const KdeModel model(PointSet(1, {-1.0, 1.0}), {0.3});
    for (double t : {0.0, 0.2, 0.7, 1.1, 2.0}) {
        const Vector a{t}, b{-t};
        EXPECT_EQ(kde_evaluate(model, a), kde_evaluate(model, b));
    }
}

TEST(KdeProperty, MatchesDirectSumOracle) {
    RngStream rng = derive_stream(41, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m = 1 + rng.below(200), d = 1 + rng.below(4);
        const PointSet pts = random_points(m, d, rng);
        Vector h(d);
        for (double& v : h) v = 0.05 + 1.5 * rng.uniform();
        const KdeModel model(pts, h);
        const Vector x = oracle::random_point(d, rng);
        const double got = kde_evaluate(model, x), want = oracle::kde_direct(pts, h, x);
        if (want == 0.0)
            EXPECT_EQ(got, 0.0);
        else
            EXPECT_LT(rel_diff(got, want), 1e-12) << "trial " << trial;
    }
}

TEST(KdeProperty, NonNegativeAndLinearInTheSample) {
    RngStream rng = derive_stream(42, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m = 1 + rng.below(50), d = 1 + rng.below(3);
        const PointSet a = random_points(m, d, rng), b = random_points(m, d, rng);
        Vector both_flat(a.flat().begin(), a.flat().end());
        both_flat.insert(both_flat.end(), b.flat().begin(), b.flat().end());
        const Vector h(d, 0.8);
        const KdeModel fa(a, h), fb(b, h), fab(PointSet(d, both_flat), h);
        const Vector x = oracle::random_point(d, rng);
        EXPECT_GE(fa.evaluate(x), 0.0);
        EXPECT_NEAR(fab.evaluate(x), 0.5 * (fa.evaluate(x) + fb.evaluate(x)), 1e-12);
    }
}

TEST(Kde, IntegratesToOne) {
    RngStream rng = derive_stream(43, 0);
    for (std::size_t d : {1u, 2u}) {
        const PointSet pts = random_points(400, d, rng);
        const KdeModel model(pts, bandwidth_reference(pts));
        const Lattice lat = support_lattice(model, d == 1 ? 4001u : 301u);
        EXPECT_NEAR(lat.integrate([&](ConstVec x) { return model.evaluate(x); }), 1.0, 1e-2) << d;
    }
}

TEST(Kde, Errors) {
    EXPECT_THROW(KdeModel(PointSet(1, {}), {1.0}), Error);
    EXPECT_THROW(KdeModel(PointSet(1, {0.0}), {0.0}), Error);
    EXPECT_THROW(KdeModel(PointSet(2, {0.0, 0.0}), {1.0}), Error);
    const KdeModel model(PointSet(1, {0.0}), {1.0});
    const Vector bad{0.0, 0.0};
    EXPECT_THROW(kde_evaluate(model, bad), Error);
}

TEST(Bandwidth, TheoreticalExample) {
    EXPECT_NEAR(bandwidth_theoretical(2.0, 1024, 2, 2.0), std::pow(2.0, -2.0 / 3.0), 1e-14);
    EXPECT_NEAR(bandwidth_theoretical(1.0, 1, 3, 1.0), 1.0, 0.0);
    EXPECT_THROW(bandwidth_theoretical(0.0, 10, 1, 1.0), Error);
    EXPECT_THROW(bandwidth_theoretical(1.0, 10, 1, 2.5), Error);
    EXPECT_THROW(bandwidth_theoretical(1.0, 0, 1, 1.0), Error);
}

TEST(Bandwidth, ReferenceFormula) {
    // sd of {0, 2} is sqrt(2); factor (4 / (3 * 2))^{1/5}
    const Vector h = bandwidth_reference(PointSet(1, {0.0, 2.0}));
    EXPECT_NEAR(h[0], std::sqrt(2.0) * std::pow(4.0 / 6.0, 0.2), 1e-14);
}

TEST(Bandwidth, ReferenceIsScaleEquivariantPerCoordinate) {
    RngStream rng = derive_stream(44, 0);
    const PointSet pts = random_points(100, 3, rng);
    Vector scaled(pts.flat().begin(), pts.flat().end());
    const double c[3] = {2.0, 0.5, 7.0};
    for (std::size_t i = 0; i < scaled.size(); ++i) scaled[i] = scaled[i] * c[i % 3] + 3.0;
    const Vector h = bandwidth_reference(pts), hs = bandwidth_reference(PointSet(3, scaled));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(hs[j], c[j] * h[j], 1e-12 * hs[j]);
}

TEST(Bandwidth, ReferenceDegenerate) {
    try {
        bandwidth_reference(PointSet(2, {1.0, 0.0, 1.0, 3.0, 1.0, 5.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Degenerate);
    }
    EXPECT_THROW(bandwidth_reference(PointSet(1, {1.0})), Error);
}

TEST(Sup, EstimateIsGridMaximum) {
    const PointSet grid(1, {-1.0, 0.0, 0.5, 2.0});
    EXPECT_EQ(sup_estimate([](ConstVec x) { return -(x[0] - 0.4) * (x[0] - 0.4); }, grid), -(0.5 - 0.4) * (0.5 - 0.4));
    EXPECT_THROW(sup_estimate([](ConstVec) { return 0.0; }, PointSet(1, {})), Error);
}

TEST(Sup, EstimateOfKdeAtItsOwnPoints) {
    const KdeModel model(PointSet(1, {0.0}), {1.0});
    EXPECT_EQ(sup_estimate(model, PointSet(1, {-1.0, 0.0, 1.0})), model.evaluate(Vector{0.0}));
}

TEST(Sup, ErrorAgainstItselfIsZero) {
    RngStream rng = derive_stream(45, 0);
    const PointSet pts = random_points(50, 2, rng);
    const KdeModel model(pts, {0.4, 0.4});
    const DensityFn truth = [&](ConstVec x) { return model.evaluate(x); };
    EXPECT_EQ(sup_error(truth, model, bounding_lattice(pts, 20).points()), 0.0);
}

TEST(Sup, ErrorShrinksWithMoreData) {
    const auto spec = DistributionSpec::setting1(1);
    const PointSet grid = Lattice{{-3.0}, {4.0}, 281}.points();
    const DensityFn truth = [&](ConstVec x) { return marginal(spec, x); };
    double err[2];
    const std::size_t ms[2] = {1000, 10000};
    for (int i = 0; i < 2; ++i) {
        RngStream rng = derive_stream(46, static_cast<std::uint64_t>(i));
        const PointSet unl = sample_unlabelled(spec, ms[i], rng);
        err[i] = sup_error(truth, KdeModel(unl, bandwidth_reference(unl)), grid);
    }
    EXPECT_LT(err[1], err[0]);
}

TEST(Lattice, TrapezoidIsExactForLinearFunctions) {
    const Lattice lat{{0.0, -1.0}, {2.0, 3.0}, 5};
    EXPECT_EQ(lat.points().size(), 25u);
    EXPECT_NEAR(lat.integrate([](ConstVec x) { return 1.0 + x[0] + 2.0 * x[1]; }), 8.0 * (1.0 + 1.0 + 2.0), 1e-12);
}

TEST(Memoize, AgreesWithTheFunction) {
    int calls = 0;
    const DensityFn f = [&](ConstVec x) {
        ++calls;
        return x[0] * x[0];
    };
    const PointSet pts(1, {1.0, 2.0, 3.0});
    const DensityFn g = memoize_density(f, pts);
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(g(Vector{2.0}), 4.0);
    EXPECT_EQ(calls, 3);
    EXPECT_EQ(g(Vector{5.0}), 25.0);
    EXPECT_EQ(calls, 4);
}
