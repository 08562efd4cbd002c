#pragma once

// Vote statistic and the local-k policies.
//
// Constant(k)             k clamped to [1, n]
// TheoreticalLocal(B, b)  max[ceil((n-1)^b), min{floor(B (f(x)(n-1))^{4/(d+4)}), floor((n-1)^{1-b})}]
// PracticalLocal(B, sup)  max[1, min{floor(B (f(x) n / sup)^{4/(d+4)}), floor(n/2)}]

#include <algorithm>
#include <cmath>
#include <functional>
#include <variant>

#include "lknn/core.hpp"
#include "lknn/neighbours.hpp"

namespace lknn {

/// Density evaluator x -> f(x). Must be safe to call concurrently.
using DensityFn = std::function<double(ConstVec)>;

struct ConstantK {
    std::size_t k = 1;
};

struct TheoreticalLocalK {
    double B = 1.0;
    double beta = 0.25;
    DensityFn density;
};

struct PracticalLocalK {
    double B = 1.0;
    DensityFn density;
    double density_sup = 1.0;
};

class KRule {
public:
    using Variant = std::variant<ConstantK, TheoreticalLocalK, PracticalLocalK>;

    static KRule constant(std::size_t k) {
        if (k < 1) throw Error(ErrorCode::OutOfRange, "constant k must be >= 1");
        return KRule(ConstantK{k});
    }

    static KRule theoretical(double B, double beta, DensityFn density) {
        if (!(B > 0.0)) throw Error(ErrorCode::InvalidArgument, "B must be positive");
        if (!(beta > 0.0 && beta < 0.5)) throw Error(ErrorCode::OutOfRange, "beta must lie in (0, 1/2)");
        if (!density) throw Error(ErrorCode::InvalidArgument, "missing density evaluator");
        return KRule(TheoreticalLocalK{B, beta, std::move(density)});
    }

    static KRule practical(double B, DensityFn density, double density_sup) {
        if (!(B > 0.0)) throw Error(ErrorCode::InvalidArgument, "B must be positive");
        if (!(density_sup > 0.0) || !std::isfinite(density_sup))
            throw Error(ErrorCode::InvalidArgument, "density_sup must be positive and finite");
        if (!density) throw Error(ErrorCode::InvalidArgument, "missing density evaluator");
        return KRule(PracticalLocalK{B, std::move(density), density_sup});
    }

    const Variant& variant() const noexcept { return v_; }

private:
    explicit KRule(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

struct VoteResult {
    double score = 0.0;
    std::size_t k_used = 0;
    Label label = 0;
};

namespace detail {

// floor/ceil that forgive the last-ulp error of pow, so 256^(1/2) never floors to 15.
inline double safe_floor(double v) { return std::floor(v + 1e-12 * std::max(1.0, std::fabs(v))); }
inline double safe_ceil(double v) { return std::ceil(v - 1e-12 * std::max(1.0, std::fabs(v))); }

inline double checked_density(const DensityFn& f, ConstVec x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "density evaluator returned a non-finite value");
    if (v < 0.0) throw Error(ErrorCode::InvalidArgument, "density evaluator returned a negative value");
    return v;
}

inline VoteResult vote_from_count(std::size_t ones, std::size_t k) {
    return {static_cast<double>(ones) / static_cast<double>(k), k, 2 * ones >= k ? 1 : 0};
}

}  // namespace detail

/// Fraction of label-1 entries among the first k.
inline double vote_fraction(std::span<const Label> ordered_labels, std::size_t k) {
    if (k < 1 || k > ordered_labels.size())
        throw Error(ErrorCode::OutOfRange, "vote_fraction: k outside [1, len]");
    std::size_t ones = 0;
    for (std::size_t i = 0; i < k; ++i) ones += ordered_labels[i] == 1;
    return static_cast<double>(ones) / static_cast<double>(k);
}

inline std::size_t resolve_k(const KRule& rule, ConstVec x, std::size_t n, std::size_t d) {
    if (n < 2) throw Error(ErrorCode::OutOfRange, "resolve_k needs n >= 2");
    const double nd = static_cast<double>(n);
    const double expo = 4.0 / (static_cast<double>(d) + 4.0);
    return std::visit(
        [&](const auto& r) -> std::size_t {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, ConstantK>) {
                return std::clamp<std::size_t>(r.k, 1, n);
            } else if constexpr (std::is_same_v<T, TheoreticalLocalK>) {
                const double f = detail::checked_density(r.density, x);
                const double lo = detail::safe_ceil(std::pow(nd - 1.0, r.beta));
                const double hi = detail::safe_floor(std::pow(nd - 1.0, 1.0 - r.beta));
                const double mid = detail::safe_floor(r.B * std::pow(f * (nd - 1.0), expo));
                return static_cast<std::size_t>(std::max(lo, std::min(mid, hi)));
            } else {
                const double f = detail::checked_density(r.density, x);
                const double hi = std::floor(nd / 2.0);
                const double mid = detail::safe_floor(r.B * std::pow(f * nd / r.density_sup, expo));
                return static_cast<std::size_t>(std::max(1.0, std::min(mid, hi)));
            }
        },
        rule.variant());
}

/// Vote over the first k labels of an ordering already computed by the caller.
inline VoteResult vote_prefix(std::span<const Label> ordered_labels, std::size_t k) {
    if (k < 1 || k > ordered_labels.size()) throw Error(ErrorCode::OutOfRange, "vote_prefix: k outside [1, len]");
    std::size_t ones = 0;
    for (std::size_t i = 0; i < k; ++i) ones += ordered_labels[i] == 1;
    return detail::vote_from_count(ones, k);
}

inline VoteResult classify(const Dataset& train, ConstVec query, const KRule& rule) {
    if (train.empty()) throw Error(ErrorCode::EmptyInput, "empty training set");
    require_dim(query, train.dim(), "classify query");
    // A single sample admits only k = 1; resolve_k is defined for n >= 2.
    const std::size_t k = train.size() == 1 ? 1 : resolve_k(rule, query, train.size(), train.dim());
    const auto ord = k_nearest(train, query, k);
    const auto ys = ordered_labels(train, ord);
    return vote_prefix(ys, k);
}

}  // namespace lknn
