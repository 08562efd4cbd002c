#pragma once

// Kernel density estimation over the unlabelled sample.
//
//   f_m(x) = 1 / (m prod_j h_j) * sum_i K((x - X_i) / h)
//
// with K the standard normal density truncated to a ball of radius R and
// renormalised: c_d = 1 / ((2 pi)^{d/2} P(d/2, R^2/2)), P the regularised
// lower incomplete gamma function.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

#include "lknn/classify.hpp"
#include "lknn/core.hpp"

namespace lknn {

class Kernel {
public:
    static constexpr double default_truncation = 3.0;

    explicit Kernel(std::size_t dim, double truncation_radius = default_truncation)
        : dim_(dim), radius_(truncation_radius) {
        if (dim_ == 0) throw Error(ErrorCode::InvalidArgument, "kernel dimension must be >= 1");
        if (!(radius_ > 0.0)) throw Error(ErrorCode::InvalidArgument, "truncation radius must be positive");
        const double half_d = 0.5 * static_cast<double>(dim_);
        const double mass = boost::math::gamma_p(half_d, 0.5 * radius_ * radius_);
        constant_ = 1.0 / (std::pow(2.0 * std::numbers::pi, half_d) * mass);
    }

    std::size_t dim() const noexcept { return dim_; }
    double truncation_radius() const noexcept { return radius_; }
    double normalizing_constant() const noexcept { return constant_; }

    /// Kernel value at squared norm r2.
    double at_squared_norm(double r2) const noexcept {
        return r2 <= radius_ * radius_ ? constant_ * std::exp(-0.5 * r2) : 0.0;
    }

    double operator()(ConstVec u) const {
        double r2 = 0.0;
        for (double t : u) r2 += t * t;
        return at_squared_norm(r2);
    }

private:
    std::size_t dim_;
    double radius_;
    double constant_;
};

class KdeModel {
public:
    KdeModel(PointSet points, Vector bandwidths, Kernel kernel)
        : points_(std::move(points)), bandwidths_(std::move(bandwidths)), kernel_(kernel) {
        if (points_.empty()) throw Error(ErrorCode::EmptyInput, "KDE needs at least one point");
        if (bandwidths_.size() != points_.dim())
            throw Error(ErrorCode::DimensionMismatch, "bandwidth vector length differs from dimension");
        if (kernel_.dim() != points_.dim())
            throw Error(ErrorCode::DimensionMismatch, "kernel dimension differs from data");
        for (double h : bandwidths_)
            if (!(h > 0.0) || !std::isfinite(h))
                throw Error(ErrorCode::InvalidArgument, "bandwidths must be positive and finite");
        inv_h_.resize(bandwidths_.size());
        double prod = 1.0;
        for (std::size_t j = 0; j < bandwidths_.size(); ++j) {
            inv_h_[j] = 1.0 / bandwidths_[j];
            prod *= bandwidths_[j];
        }
        scale_ = 1.0 / (static_cast<double>(points_.size()) * prod);
    }

    KdeModel(PointSet points, Vector bandwidths)
        : KdeModel(std::move(points), std::move(bandwidths), Kernel(bandwidths.size())) {}

    const PointSet& points() const noexcept { return points_; }
    const Vector& bandwidths() const noexcept { return bandwidths_; }
    const Kernel& kernel() const noexcept { return kernel_; }
    std::size_t dim() const noexcept { return points_.dim(); }

    double evaluate(ConstVec x) const {
        require_dim(x, dim(), "kde_evaluate");
        const double r2_max = kernel_.truncation_radius() * kernel_.truncation_radius();
        const std::size_t d = dim();
        const double* p = points_.flat().data();
        double sum = 0.0;
        for (std::size_t i = 0; i < points_.size(); ++i, p += d) {
            double r2 = 0.0;
            std::size_t j = 0;
            for (; j < d; ++j) {
                const double u = (x[j] - p[j]) * inv_h_[j];
                r2 += u * u;
                if (r2 > r2_max) break;
            }
            if (j == d) sum += std::exp(-0.5 * r2);
        }
        return sum * kernel_.normalizing_constant() * scale_;
    }

private:
    PointSet points_;
    Vector bandwidths_;
    Vector inv_h_;
    Kernel kernel_;
    double scale_ = 0.0;
};

inline double kde_evaluate(const KdeModel& model, ConstVec x) { return model.evaluate(x); }

/// h = A m^{-1/(d + 2 gamma)}.
inline double bandwidth_theoretical(double A, std::size_t m, std::size_t d, double gamma) {
    if (!(A > 0.0)) throw Error(ErrorCode::InvalidArgument, "A must be positive");
    if (m < 1) throw Error(ErrorCode::OutOfRange, "m must be >= 1");
    if (d < 1) throw Error(ErrorCode::OutOfRange, "d must be >= 1");
    if (!(gamma > 0.0 && gamma <= 2.0)) throw Error(ErrorCode::OutOfRange, "gamma must lie in (0, 2]");
    return A * std::pow(static_cast<double>(m), -1.0 / (static_cast<double>(d) + 2.0 * gamma));
}

/// Normal-scale diagonal rule h_j = sd_j * (4 / ((d + 2) m))^{1/(d+4)}.
inline Vector bandwidth_reference(const PointSet& points) {
    const std::size_t m = points.size();
    const std::size_t d = points.dim();
    if (m < 2) throw Error(ErrorCode::OutOfRange, "reference bandwidth needs m >= 2");
    const double factor =
        std::pow(4.0 / ((static_cast<double>(d) + 2.0) * static_cast<double>(m)), 1.0 / (static_cast<double>(d) + 4.0));
    Vector h(d);
    for (std::size_t j = 0; j < d; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += points[i][j];
        mean /= static_cast<double>(m);
        double ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double t = points[i][j] - mean;
            ss += t * t;
        }
        const double sd = std::sqrt(ss / static_cast<double>(m - 1));
        if (!(sd > 0.0) || !std::isfinite(sd))
            throw Error(ErrorCode::Degenerate, "coordinate " + std::to_string(j) + " has zero variance");
        h[j] = sd * factor;
    }
    return h;
}

/// Largest value of `f` over `eval_points`.
inline double sup_estimate(const DensityFn& f, const PointSet& eval_points) {
    if (eval_points.empty()) throw Error(ErrorCode::EmptyInput, "empty evaluation set");
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < eval_points.size(); ++i) best = std::max(best, f(eval_points[i]));
    return best;
}

inline double sup_estimate(const KdeModel& model, const PointSet& eval_points) {
    return sup_estimate([&](ConstVec x) { return model.evaluate(x); }, eval_points);
}

/// max over grid of |f_m - truth|; a grid proxy for the sup-norm error.
inline double sup_error(const DensityFn& truth, const KdeModel& model, const PointSet& grid) {
    if (grid.empty()) throw Error(ErrorCode::EmptyInput, "empty grid");
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i)
        worst = std::max(worst, std::fabs(model.evaluate(grid[i]) - truth(grid[i])));
    return worst;
}

/// Axis-aligned box with `per_axis` equally spaced nodes per coordinate.
struct Lattice {
    Vector lower;
    Vector upper;
    std::size_t per_axis = 0;

    std::size_t dim() const noexcept { return lower.size(); }
    double spacing(std::size_t j) const { return (upper[j] - lower[j]) / static_cast<double>(per_axis - 1); }

    PointSet points() const {
        const std::size_t d = dim();
        std::size_t total = 1;
        for (std::size_t j = 0; j < d; ++j) total *= per_axis;
        Vector flat;
        flat.reserve(total * d);
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t t = 0; t < total; ++t) {
            for (std::size_t j = 0; j < d; ++j)
                flat.push_back(lower[j] + spacing(j) * static_cast<double>(idx[j]));
            for (std::size_t j = 0; j < d; ++j) {
                if (++idx[j] < per_axis) break;
                idx[j] = 0;
            }
        }
        return PointSet(d, std::move(flat));
    }

    /// Product trapezoid rule of `f` over the box.
    double integrate(const DensityFn& f) const {
        const PointSet pts = points();
        const std::size_t d = dim();
        double cell = 1.0;
        for (std::size_t j = 0; j < d; ++j) cell *= spacing(j);
        double sum = 0.0;
        std::vector<std::size_t> idx(d, 0);
        for (std::size_t t = 0; t < pts.size(); ++t) {
            double w = cell;
            for (std::size_t j = 0; j < d; ++j)
                if (idx[j] == 0 || idx[j] + 1 == per_axis) w *= 0.5;
            sum += w * f(pts[t]);
            for (std::size_t j = 0; j < d; ++j) {
                if (++idx[j] < per_axis) break;
                idx[j] = 0;
            }
        }
        return sum;
    }
};

/// Bounding box of `points`, widened by `pad` on every side.
inline Lattice bounding_lattice(const PointSet& points, std::size_t per_axis, double pad = 0.0) {
    if (points.empty()) throw Error(ErrorCode::EmptyInput, "no points for lattice");
    if (per_axis < 2) throw Error(ErrorCode::OutOfRange, "lattice needs >= 2 nodes per axis");
    const std::size_t d = points.dim();
    Lattice lat{Vector(d, std::numeric_limits<double>::infinity()),
                Vector(d, -std::numeric_limits<double>::infinity()), per_axis};
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            lat.lower[j] = std::min(lat.lower[j], points[i][j]);
            lat.upper[j] = std::max(lat.upper[j], points[i][j]);
        }
    for (std::size_t j = 0; j < d; ++j) {
        lat.lower[j] -= pad;
        lat.upper[j] += pad;
    }
    return lat;
}

/// Support box of the model: data range plus the kernel radius in each coordinate.
inline Lattice support_lattice(const KdeModel& model, std::size_t per_axis) {
    Lattice lat = bounding_lattice(model.points(), per_axis);
    const double R = model.kernel().truncation_radius();
    for (std::size_t j = 0; j < model.dim(); ++j) {
        lat.lower[j] -= R * model.bandwidths()[j];
        lat.upper[j] += R * model.bandwidths()[j];
    }
    return lat;
}

namespace detail {

struct PointKeyHash {
    std::size_t operator()(const Vector& v) const noexcept {
        std::uint64_t h = 0x84222325CBF29CE4ULL;
        for (double x : v) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            h = mix64(h ^ bits);
        }
        return static_cast<std::size_t>(h);
    }
};

}  // namespace detail

/// Evaluator that answers from a table precomputed at `points` and falls
/// back to `f` elsewhere. The table is read-only after construction.
inline DensityFn memoize_density(const DensityFn& f, const PointSet& points) {
    auto table = std::make_shared<std::unordered_map<Vector, double, detail::PointKeyHash>>();
    table->reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        auto p = points[i];
        Vector key(p.begin(), p.end());
        if (!table->contains(key)) table->emplace(std::move(key), f(p));
    }
    return [f, table](ConstVec x) {
        auto it = table->find(Vector(x.begin(), x.end()));
        return it != table->end() ? it->second : f(x);
    };
}

}  // namespace lknn
