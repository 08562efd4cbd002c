#pragma once

// Asymptotic excess-risk constants as surface integrals over the Bayes
// boundary S = {eta = 1/2}:
//
//   B1 = int_S fbar / (4 |grad eta|)
//   B2 = int_S fbar^{1-4/d} a^2 / |grad eta|
//   B3 = int_S fbar^{d/(d+4)} / |grad eta| * (1/(4B) + B^{4/d} a^2)
//   a(x) = sum_j (eta_j fbar_j + eta_jj fbar / 2) / ((d+2) a_d^{2/d} fbar)
//
// S is parametrised explicitly for example1 (sphere of radius 2^{-1/2}) and
// example2 (the line x1 = 1/2).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "lknn/core.hpp"
#include "lknn/distributions.hpp"

namespace lknn {

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
inline std::pair<Vector, Vector> gauss_legendre(std::size_t n) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "gauss_legendre needs n >= 1");
    Vector x(n), w(n);
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kd = static_cast<double>(k);
                const double p2 = ((2.0 * kd - 1.0) * z * p1 - (kd - 1.0) * p0) / kd;
                p0 = p1;
                p1 = p2;
            }
            dp = nd * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return {x, w};
}

/// Volume of the unit ball in R^d.
inline double a_d_constant(std::size_t d) {
    if (d < 1) throw Error(ErrorCode::OutOfRange, "d must be >= 1");
    const double dd = static_cast<double>(d);
    return 2.0 * std::pow(std::numbers::pi, dd / 2.0) / (dd * std::tgamma(dd / 2.0));
}

struct SurfaceQuadrature {
    PointSet nodes;
    Vector weights;
    std::string description;

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

struct ExpansionConstants {
    double B1 = 0.0;
    double B2 = 0.0;
    std::optional<double> B3;
    double quadrature_estimate_error = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

inline double a_value(const DistributionSpec& spec, ConstVec x) {
    const std::size_t d = spec.dim();
    const Derivatives der = derivatives(spec, x);
    const double f = der.fbar_value;
    if (!(f > 0.0)) throw Error(ErrorCode::Degenerate, "a(x) needs fbar(x) > 0");
    double num = 0.0;
    for (std::size_t j = 0; j < d; ++j) num += der.eta_grad[j] * der.fbar_grad[j] + 0.5 * der.eta_hess_diag[j] * f;
    const double dd = static_cast<double>(d);
    return num / ((dd + 2.0) * std::pow(a_d_constant(d), 2.0 / dd) * f);
}

namespace detail {

inline constexpr double example2_truncation = 40.0;

inline SurfaceQuadrature sphere_quadrature(std::size_t d, double radius, std::size_t node_count) {
    SurfaceQuadrature q;
    q.description = "sphere |x| = 2^{-1/2} in R^" + std::to_string(d);
    if (d == 1) {
        // S is two points; the zero-dimensional volume form counts them.
        q.nodes = PointSet(1, {-radius, radius});
        q.weights = {1.0, 1.0};
        return q;
    }
    if (d == 2) {
        Vector flat;
        flat.reserve(2 * node_count);
        const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(node_count);
        for (std::size_t i = 0; i < node_count; ++i) {
            const double t = dtheta * static_cast<double>(i);
            flat.push_back(radius * std::cos(t));
            flat.push_back(radius * std::sin(t));
        }
        q.nodes = PointSet(2, std::move(flat));
        q.weights.assign(node_count, radius * dtheta);
        return q;
    }
    // Hyperspherical angles: d-2 polar angles on [0, pi] and one azimuth on
    // [0, 2 pi) (equal spacing); node budget split evenly. Polar angle i
    // carries sin^k, k = d-2-i >= 1. In t = cos(theta) the Jacobian becomes
    // (1 - t^2)^{(k-1)/2}: a polynomial for odd k (Gauss-Legendre), and
    // sqrt(1 - t^2) times a polynomial for even k (Gauss-Chebyshev, second kind).
    const std::size_t polar = d - 2;
    auto per_angle = static_cast<std::size_t>(
        std::floor(std::pow(static_cast<double>(node_count) / 2.0, 1.0 / static_cast<double>(d - 1))));
    per_angle = std::max<std::size_t>(per_angle, 4);
    const std::size_t azimuth = 2 * per_angle;
    const auto [gx, gw] = gauss_legendre(per_angle);
    std::vector<Vector> polar_angle(polar, Vector(per_angle)), polar_weight(polar, Vector(per_angle));
    for (std::size_t i = 0; i < polar; ++i) {
        const std::size_t k = d - 2 - i;
        for (std::size_t j = 0; j < per_angle; ++j) {
            if (k % 2 == 1) {
                polar_angle[i][j] = std::acos(-gx[j]);
                polar_weight[i][j] = gw[j] * std::pow(1.0 - gx[j] * gx[j], static_cast<double>((k - 1) / 2));
            } else {
                const double theta = std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(per_angle + 1);
                const double s2 = std::sin(theta) * std::sin(theta);
                polar_angle[i][j] = theta;
                polar_weight[i][j] = std::numbers::pi / static_cast<double>(per_angle + 1) * s2 *
                                     std::pow(s2, static_cast<double>((k - 2) / 2));
            }
        }
    }

    std::size_t total = azimuth;
    for (std::size_t i = 0; i < polar; ++i) total *= per_angle;
    Vector flat;
    flat.reserve(total * d);
    q.weights.reserve(total);
    std::vector<std::size_t> idx(polar, 0);
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(azimuth);
    const double jac_scale = std::pow(radius, static_cast<double>(d - 1));
    for (std::size_t t = 0; t < total / azimuth; ++t) {
        Vector angles(polar);
        double w = jac_scale * dphi;
        for (std::size_t i = 0; i < polar; ++i) {
            angles[i] = polar_angle[i][idx[i]];
            w *= polar_weight[i][idx[i]];
        }
        for (std::size_t a = 0; a < azimuth; ++a) {
            const double phi = dphi * static_cast<double>(a);
            double sin_prod = radius;
            for (std::size_t i = 0; i < polar; ++i) {
                flat.push_back(sin_prod * std::cos(angles[i]));
                sin_prod *= std::sin(angles[i]);
            }
            flat.push_back(sin_prod * std::cos(phi));
            flat.push_back(sin_prod * std::sin(phi));
            q.weights.push_back(w);
        }
        for (std::size_t i = 0; i < polar; ++i) {
            if (++idx[i] < per_angle) break;
            idx[i] = 0;
        }
    }
    q.nodes = PointSet(d, std::move(flat));
    return q;
}

inline SurfaceQuadrature line_quadrature(std::size_t node_count) {
    // f2 is only C^2 at |t| = 1, so integrate three smooth panels separately.
    SurfaceQuadrature q;
    q.description = "line x1 = 1/2, |x2| <= 40";
    const double T = example2_truncation;
    const std::size_t outer = std::max<std::size_t>(node_count / 4, 4);
    const std::size_t inner = std::max<std::size_t>(node_count - 2 * outer, 4);
    Vector flat;
    auto panel = [&](double a, double b, std::size_t n) {
        const auto [gx, gw] = gauss_legendre(n);
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < n; ++i) {
            flat.push_back(0.5);
            flat.push_back(mid + half * gx[i]);
            q.weights.push_back(half * gw[i]);
        }
    };
    panel(-T, -1.0, outer);
    panel(-1.0, 1.0, inner);
    panel(1.0, T, outer);
    q.nodes = PointSet(2, std::move(flat));
    return q;
}

inline double grad_norm(const Vector& g) {
    double s = 0.0;
    for (double t : g) s += t * t;
    return std::sqrt(s);
}

// Sum of w_i * term(x_i), compensated so the result does not depend on node grouping.
template <class Term>
double surface_sum(const SurfaceQuadrature& quad, Term&& term) {
    double sum = 0.0, carry = 0.0;
    for (std::size_t i = 0; i < quad.weights.size(); ++i) {
        const double y = quad.weights[i] * term(quad.nodes[i]) - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum;
}

}  // namespace detail

inline SurfaceQuadrature boundary_quadrature(const DistributionSpec& spec, std::size_t node_count) {
    if (node_count < 16) throw Error(ErrorCode::OutOfRange, "boundary quadrature needs >= 16 nodes");
    if (std::holds_alternative<Example1Model>(spec.variant()))
        return detail::sphere_quadrature(spec.dim(), std::sqrt(0.5), node_count);
    if (std::holds_alternative<Example2Model>(spec.variant())) return detail::line_quadrature(node_count);
    throw Error(ErrorCode::Unsupported, "no boundary parametrisation for '" + spec.name() + "'");
}

inline double constant_B1(const DistributionSpec& spec, const SurfaceQuadrature& quad) {
    return detail::surface_sum(quad, [&](ConstVec x) {
        const Derivatives der = derivatives(spec, x);
        const double g = detail::grad_norm(der.eta_grad);
        if (!(g > 0.0)) throw Error(ErrorCode::Degenerate, "grad eta vanishes on the boundary");
        return der.fbar_value / (4.0 * g);
    });
}

/// Diverges for example2: fbar = f2(x2) decays along the line, so fbar^{-1}
/// (d = 2) grows like e^{|x2|}.
inline double constant_B2(const DistributionSpec& spec, const SurfaceQuadrature& quad) {
    if (std::holds_alternative<Example2Model>(spec.variant()))
        throw Error(ErrorCode::Degenerate, "B2 diverges for example2: fbar^{-1} is unbounded along the boundary");
    const double d = static_cast<double>(spec.dim());
    return detail::surface_sum(quad, [&](ConstVec x) {
        const Derivatives der = derivatives(spec, x);
        const double g = detail::grad_norm(der.eta_grad);
        if (!(g > 0.0)) throw Error(ErrorCode::Degenerate, "grad eta vanishes on the boundary");
        if (!(der.fbar_value > 0.0)) throw Error(ErrorCode::Degenerate, "B2 needs fbar > 0 on the boundary");
        const double a = a_value(spec, x);
        return std::pow(der.fbar_value, 1.0 - 4.0 / d) * a * a / g;
    });
}

inline double constant_B3(const DistributionSpec& spec, const SurfaceQuadrature& quad, double B) {
    if (!(B > 0.0)) throw Error(ErrorCode::InvalidArgument, "B must be positive");
    const double d = static_cast<double>(spec.dim());
    return detail::surface_sum(quad, [&](ConstVec x) {
        const Derivatives der = derivatives(spec, x);
        const double g = detail::grad_norm(der.eta_grad);
        if (!(g > 0.0)) throw Error(ErrorCode::Degenerate, "grad eta vanishes on the boundary");
        if (!(der.fbar_value > 0.0)) return 0.0;
        const double a = a_value(spec, x);
        return std::pow(der.fbar_value, d / (d + 4.0)) / g * (1.0 / (4.0 * B) + std::pow(B, 4.0 / d) * a * a);
    });
}

/// B1, B2 (and B3 when B is given) with the B1 change under node doubling as error estimate.
inline ExpansionConstants expansion_constants(const DistributionSpec& spec, std::size_t node_count,
                                              std::optional<double> B = std::nullopt) {
    const SurfaceQuadrature quad = boundary_quadrature(spec, node_count);
    const SurfaceQuadrature fine = boundary_quadrature(spec, 2 * node_count);
    ExpansionConstants out;
    out.B1 = constant_B1(spec, quad);
    out.B2 = std::holds_alternative<Example2Model>(spec.variant()) ? std::numeric_limits<double>::infinity()
                                                                   : constant_B2(spec, quad);
    if (B) out.B3 = constant_B3(spec, quad, *B);
    out.quadrature_estimate_error = std::fabs(constant_B1(spec, fine) - out.B1);
    out.a_min = std::numeric_limits<double>::infinity();
    out.a_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < quad.nodes.size(); ++i) {
        const double a = a_value(spec, quad.nodes[i]);
        out.a_min = std::min(out.a_min, a);
        out.a_max = std::max(out.a_max, a);
    }
    return out;
}

/// Leading-order excess risk of the standard k-nn classifier: B1/k + B2 (k/n)^{4/d}.
inline double predicted_excess(double B1, double B2, double k, double n, std::size_t d) {
    if (!(k >= 1.0) || !(n > k)) throw Error(ErrorCode::OutOfRange, "predicted_excess needs 1 <= k < n");
    return B1 / k + B2 * std::pow(k / n, 4.0 / static_cast<double>(d));
}

/// Minimiser of predicted_excess over real k: (d B1 n^{4/d} / (4 B2))^{d/(d+4)}.
inline double predicted_optimal_k(double B1, double B2, double n, std::size_t d) {
    const double dd = static_cast<double>(d);
    return std::pow(dd * B1 * std::pow(n, 4.0 / dd) / (4.0 * B2), dd / (dd + 4.0));
}

/// Ordinary least squares of log(regret) on log(n).
inline RateFit rate_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw Error(ErrorCode::OutOfRange, "rate_slope needs >= 3 points");
    Vector lx, ly;
    for (const auto& [n, r] : points) {
        if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "regret must be positive");
        if (!(n > 0.0)) throw Error(ErrorCode::InvalidArgument, "n must be positive");
        lx.push_back(std::log(n));
        ly.push_back(std::log(r));
    }
    // Centre relative to the first point so identical inputs give exactly zero deviations.
    const std::size_t k = lx.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        mx += lx[i] - lx[0];
        my += ly[i] - ly[0];
    }
    mx = lx[0] + mx / static_cast<double>(k);
    my = ly[0] + my / static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double dx = lx[i] - mx, dy = ly[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw Error(ErrorCode::Degenerate, "rate_slope needs distinct n values");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    return fit;
}

}  // namespace lknn
