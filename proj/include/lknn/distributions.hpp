#pragma once

// Benchmark generative models.
//
//   setting1  P1 = N(0,1)^d,  P0 = N(1, 1/4)^d
//   setting2  P1 = t5^d,      P0 = t5^{floor(d/2)} x N(1,1)^{d - floor(d/2)}
//   setting3  P1 = Cauchy^d,  P0 = Cauchy^{floor(d/2)} x N(0,1)^{d - floor(d/2)}
//   example1  fbar = G(3+d/2)/(2 pi^{d/2}) (1-|x|^2)^2 on the unit ball, eta = min(|x|^2, 1)
//   example2  fbar = 2 x1 f2(x2) on (0,1) x R, eta = x1
//
// Settings use equal class priors.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <variant>

#include "lknn/core.hpp"

namespace lknn {

struct Derivatives {
    Vector eta_grad;
    Vector eta_hess_diag;
    Vector fbar_grad;
    double fbar_value = 0.0;
};

/// One coordinate of a product density.
struct Component {
    enum class Family { Normal, StudentT5, Cauchy };
    Family family = Family::Normal;
    double mean = 0.0;
    double sd = 1.0;

    static Component normal(double mean, double sd) { return {Family::Normal, mean, sd}; }
    static Component t5() { return {Family::StudentT5, 0.0, 1.0}; }
    static Component cauchy() { return {Family::Cauchy, 0.0, 1.0}; }

    double mode() const noexcept { return family == Family::Normal ? mean : 0.0; }

    double log_pdf(double x) const {
        switch (family) {
            case Family::Normal: {
                const double z = (x - mean) / sd;
                return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
            }
            case Family::StudentT5: {
                static const double log_c = std::lgamma(3.0) - std::lgamma(2.5) - 0.5 * std::log(5.0 * std::numbers::pi);
                return log_c - 3.0 * std::log1p(x * x / 5.0);
            }
            case Family::Cauchy: return -std::log(std::numbers::pi) - std::log1p(x * x);
        }
        return 0.0;
    }

    double dlog(double x) const {
        switch (family) {
            case Family::Normal: return -(x - mean) / (sd * sd);
            case Family::StudentT5: return -6.0 * x / (5.0 + x * x);
            case Family::Cauchy: return -2.0 * x / (1.0 + x * x);
        }
        return 0.0;
    }

    double d2log(double x) const {
        switch (family) {
            case Family::Normal: return -1.0 / (sd * sd);
            case Family::StudentT5: {
                const double q = 5.0 + x * x;
                return -6.0 * (5.0 - x * x) / (q * q);
            }
            case Family::Cauchy: {
                const double q = 1.0 + x * x;
                return -2.0 * (1.0 - x * x) / (q * q);
            }
        }
        return 0.0;
    }

    double sample(RngStream& rng) const {
        switch (family) {
            case Family::Normal: return mean + sd * rng.normal();
            case Family::StudentT5: {
                // Z / sqrt(V / 5) with V a chi-square(5) built from five squared normals.
                const double z = rng.normal();
                double v = 0.0;
                for (int i = 0; i < 5; ++i) {
                    const double g = rng.normal();
                    v += g * g;
                }
                return z / std::sqrt(v / 5.0);
            }
            case Family::Cauchy: return std::tan(std::numbers::pi * (rng.uniform() - 0.5));
        }
        return 0.0;
    }
};

struct SettingModel {
    int id = 1;
    std::vector<Component> class0;
    std::vector<Component> class1;

    double log_f(const std::vector<Component>& c, ConstVec x) const {
        double s = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) s += c[j].log_pdf(x[j]);
        return s;
    }
};

/// Even sextic a0 + a2 t^2 + a4 t^4 + a6 t^6 joining the Laplace tails of f2
/// with C^2 contact at |t| = 1 and unit total mass.
struct BridgeCoefficients {
    double a0 = 0.0, a2 = 0.0, a4 = 0.0, a6 = 0.0;

    static BridgeCoefficients solve() {
        const double e = std::exp(-1.0) / 2.0;
        // rows: p(1), p'(1), p''(1), int_{-1}^{1} p
        std::array<std::array<double, 5>, 4> m{{
            {1.0, 1.0, 1.0, 1.0, e},
            {0.0, 2.0, 4.0, 6.0, -e},
            {0.0, 2.0, 12.0, 30.0, e},
            {2.0, 2.0 / 3.0, 2.0 / 5.0, 2.0 / 7.0, 1.0 - std::exp(-1.0)},
        }};
        for (std::size_t col = 0; col < 4; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < 4; ++r)
                if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
            std::swap(m[col], m[piv]);
            for (std::size_t r = 0; r < 4; ++r) {
                if (r == col) continue;
                const double f = m[r][col] / m[col][col];
                for (std::size_t c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
            }
        }
        return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]};
    }

    double value(double t) const {
        const double s = t * t;
        return a0 + s * (a2 + s * (a4 + s * a6));
    }
    double first(double t) const {
        const double s = t * t;
        return t * (2.0 * a2 + s * (4.0 * a4 + s * 6.0 * a6));
    }
    double second(double t) const {
        const double s = t * t;
        return 2.0 * a2 + s * (12.0 * a4 + s * 30.0 * a6);
    }
};

struct Example1Model {
    std::size_t d = 2;
    double normalizer = 0.0;  // G(3+d/2) / (2 pi^{d/2})
};

struct Example2Model {
    BridgeCoefficients bridge;

    double f2(double t) const { return std::fabs(t) > 1.0 ? 0.5 * std::exp(-std::fabs(t)) : bridge.value(t); }
    double f2_first(double t) const {
        if (t > 1.0) return -0.5 * std::exp(-t);
        if (t < -1.0) return 0.5 * std::exp(t);
        return bridge.first(t);
    }
    double f2_second(double t) const { return std::fabs(t) > 1.0 ? 0.5 * std::exp(-std::fabs(t)) : bridge.second(t); }
};

/// Test double: any model given by callables.
struct CustomModel {
    std::string name = "custom";
    std::size_t d = 1;
    std::function<double(ConstVec)> eta;
    std::function<double(ConstVec)> marginal;
    std::function<Derivatives(ConstVec)> derivatives;
    std::function<Sample(RngStream&)> sample;
    std::optional<double> marginal_sup;
};

class DistributionSpec {
public:
    using Variant = std::variant<SettingModel, Example1Model, Example2Model, CustomModel>;

    static DistributionSpec setting1(std::size_t d) {
        check_dim(d);
        SettingModel s{1, std::vector<Component>(d, Component::normal(1.0, 0.5)),
                       std::vector<Component>(d, Component::normal(0.0, 1.0))};
        return DistributionSpec(std::move(s), d);
    }

    static DistributionSpec setting2(std::size_t d) {
        check_dim(d);
        SettingModel s{2, {}, std::vector<Component>(d, Component::t5())};
        for (std::size_t j = 0; j < d; ++j)
            s.class0.push_back(j < d / 2 ? Component::t5() : Component::normal(1.0, 1.0));
        return DistributionSpec(std::move(s), d);
    }

    static DistributionSpec setting3(std::size_t d) {
        check_dim(d);
        SettingModel s{3, {}, std::vector<Component>(d, Component::cauchy())};
        for (std::size_t j = 0; j < d; ++j)
            s.class0.push_back(j < d / 2 ? Component::cauchy() : Component::normal(0.0, 1.0));
        return DistributionSpec(std::move(s), d);
    }

    static DistributionSpec example1(std::size_t d) {
        check_dim(d);
        const double dd = static_cast<double>(d);
        return DistributionSpec(Example1Model{d, std::tgamma(3.0 + dd / 2.0) / (2.0 * std::pow(std::numbers::pi, dd / 2.0))}, d);
    }

    static DistributionSpec example2() { return DistributionSpec(Example2Model{BridgeCoefficients::solve()}, 2); }

    static DistributionSpec custom(CustomModel m) {
        check_dim(m.d);
        const std::size_t d = m.d;
        return DistributionSpec(std::move(m), d);
    }

    /// CLI names: setting1, setting2, setting3, example1, example2.
    static DistributionSpec from_name(const std::string& name, std::size_t d) {
        if (name == "setting1") return setting1(d);
        if (name == "setting2") return setting2(d);
        if (name == "setting3") return setting3(d);
        if (name == "example1") return example1(d);
        if (name == "example2") {
            if (d != 2) throw Error(ErrorCode::InvalidArgument, "example2 is two-dimensional");
            return example2();
        }
        throw Error(ErrorCode::Unsupported, "unknown distribution '" + name + "'");
    }

    std::string name() const {
        return std::visit(
            [](const auto& m) -> std::string {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, SettingModel>) return "setting" + std::to_string(m.id);
                else if constexpr (std::is_same_v<T, Example1Model>) return "example1";
                else if constexpr (std::is_same_v<T, Example2Model>) return "example2";
                else return m.name;
            },
            v_);
    }

    std::size_t dim() const noexcept { return d_; }
    const Variant& variant() const noexcept { return v_; }

private:
    DistributionSpec(Variant v, std::size_t d) : v_(std::move(v)), d_(d) {}
    static void check_dim(std::size_t d) {
        if (d < 1) throw Error(ErrorCode::OutOfRange, "dimension must be >= 1");
    }

    Variant v_;
    std::size_t d_;
};

namespace detail {

template <class... F>
struct overloaded : F... {
    using F::operator()...;
};
template <class... F>
overloaded(F...) -> overloaded<F...>;

inline double squared_norm(ConstVec x) {
    double s = 0.0;
    for (double t : x) s += t * t;
    return s;
}

}  // namespace detail

inline double eta(const DistributionSpec& spec, ConstVec x) {
    require_dim(x, spec.dim(), "eta");
    return std::visit(
        detail::overloaded{
            [&](const SettingModel& s) {
                const double diff = s.log_f(s.class0, x) - s.log_f(s.class1, x);
                return 1.0 / (1.0 + std::exp(diff));
            },
            [&](const Example1Model&) { return std::min(detail::squared_norm(x), 1.0); },
            [&](const Example2Model&) { return std::clamp(x[0], 0.0, 1.0); },
            [&](const CustomModel& c) { return c.eta(x); },
        },
        spec.variant());
}

inline double marginal(const DistributionSpec& spec, ConstVec x) {
    require_dim(x, spec.dim(), "marginal");
    return std::visit(
        detail::overloaded{
            [&](const SettingModel& s) {
                return 0.5 * (std::exp(s.log_f(s.class0, x)) + std::exp(s.log_f(s.class1, x)));
            },
            [&](const Example1Model& e) {
                const double r2 = detail::squared_norm(x);
                return r2 < 1.0 ? e.normalizer * (1.0 - r2) * (1.0 - r2) : 0.0;
            },
            [&](const Example2Model& e) { return x[0] > 0.0 && x[0] < 1.0 ? 2.0 * x[0] * e.f2(x[1]) : 0.0; },
            [&](const CustomModel& c) { return c.marginal(x); },
        },
        spec.variant());
}

inline Label bayes_label(const DistributionSpec& spec, ConstVec x) { return eta(spec, x) >= 0.5 ? 1 : 0; }

/// First derivatives of eta and fbar, and the diagonal of eta's Hessian.
inline Derivatives derivatives(const DistributionSpec& spec, ConstVec x) {
    require_dim(x, spec.dim(), "derivatives");
    const std::size_t d = spec.dim();
    return std::visit(
        detail::overloaded{
            [&](const SettingModel& s) {
                Derivatives out{Vector(d), Vector(d), Vector(d), 0.0};
                const double f0 = std::exp(s.log_f(s.class0, x));
                const double f1 = std::exp(s.log_f(s.class1, x));
                const double e = 1.0 / (1.0 + std::exp(s.log_f(s.class0, x) - s.log_f(s.class1, x)));
                const double v = e * (1.0 - e);
                for (std::size_t j = 0; j < d; ++j) {
                    const double g0 = s.class0[j].dlog(x[j]), g1 = s.class1[j].dlog(x[j]);
                    const double g = g1 - g0;
                    out.eta_grad[j] = v * g;
                    out.eta_hess_diag[j] = v * (1.0 - 2.0 * e) * g * g + v * (s.class1[j].d2log(x[j]) - s.class0[j].d2log(x[j]));
                    out.fbar_grad[j] = 0.5 * (f0 * g0 + f1 * g1);
                }
                out.fbar_value = 0.5 * (f0 + f1);
                return out;
            },
            [&](const Example1Model& e) {
                const double r2 = detail::squared_norm(x);
                if (!(r2 < 1.0)) throw Error(ErrorCode::OutOfRange, "example1 derivatives need |x| < 1");
                Derivatives out{Vector(d), Vector(d, 2.0), Vector(d), e.normalizer * (1.0 - r2) * (1.0 - r2)};
                for (std::size_t j = 0; j < d; ++j) {
                    out.eta_grad[j] = 2.0 * x[j];
                    out.fbar_grad[j] = -4.0 * e.normalizer * (1.0 - r2) * x[j];
                }
                return out;
            },
            [&](const Example2Model& e) {
                if (!(x[0] > 0.0 && x[0] < 1.0))
                    throw Error(ErrorCode::OutOfRange, "example2 derivatives need 0 < x1 < 1");
                const double f2 = e.f2(x[1]);
                return Derivatives{{1.0, 0.0}, {0.0, 0.0}, {2.0 * f2, 2.0 * x[0] * e.f2_first(x[1])}, 2.0 * x[0] * f2};
            },
            [&](const CustomModel& c) {
                if (!c.derivatives) throw Error(ErrorCode::Unsupported, "custom model has no derivatives");
                return c.derivatives(x);
            },
        },
        spec.variant());
}

inline Sample sample_pair(const DistributionSpec& spec, RngStream& rng) {
    const std::size_t d = spec.dim();
    return std::visit(
        detail::overloaded{
            [&](const SettingModel& s) {
                Sample out{Vector(d), rng.bernoulli(0.5) ? 1 : 0};
                const auto& comps = out.label == 1 ? s.class1 : s.class0;
                for (std::size_t j = 0; j < d; ++j) out.features[j] = comps[j].sample(rng);
                return out;
            },
            [&](const Example1Model&) {
                // Uniform point in the ball, accepted with probability (1 - |x|^2)^2.
                Vector x(d);
                for (;;) {
                    double norm2 = 0.0;
                    for (double& t : x) {
                        t = rng.normal();
                        norm2 += t * t;
                    }
                    const double radius = std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
                    const double scale = radius / std::sqrt(norm2);
                    for (double& t : x) t *= scale;
                    const double w = 1.0 - radius * radius;
                    if (rng.uniform() < w * w) break;
                }
                const double e = std::min(detail::squared_norm(x), 1.0);
                return Sample{x, rng.bernoulli(e) ? 1 : 0};
            },
            [&](const Example2Model& m) {
                // Density 2 x1 on (0,1) by inverse CDF; x2 from f2 as bridge/tail mixture.
                double x1;
                do x1 = std::sqrt(rng.uniform());
                while (x1 <= 0.0);
                double x2;
                if (rng.uniform() < 1.0 - std::exp(-1.0)) {
                    const double cap = m.bridge.a0;  // the bridge peaks at t = 0
                    do x2 = 2.0 * rng.uniform() - 1.0;
                    while (rng.uniform() * cap >= m.bridge.value(x2));
                } else {
                    const double tail = 1.0 - std::log(rng.uniform_open0());
                    x2 = rng.bernoulli(0.5) ? tail : -tail;
                }
                return Sample{{x1, x2}, rng.bernoulli(x1) ? 1 : 0};
            },
            [&](const CustomModel& c) {
                if (!c.sample) throw Error(ErrorCode::Unsupported, "custom model has no sampler");
                return c.sample(rng);
            },
        },
        spec.variant());
}

inline Dataset sample_dataset(const DistributionSpec& spec, std::size_t n, RngStream& rng) {
    Vector flat;
    flat.reserve(n * spec.dim());
    std::vector<Label> ys;
    ys.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Sample s = sample_pair(spec, rng);
        flat.insert(flat.end(), s.features.begin(), s.features.end());
        ys.push_back(s.label);
    }
    return Dataset(PointSet(spec.dim(), std::move(flat)), std::move(ys));
}

inline PointSet sample_unlabelled(const DistributionSpec& spec, std::size_t m, RngStream& rng) {
    if (m < 1) throw Error(ErrorCode::OutOfRange, "m must be >= 1");
    return sample_dataset(spec, m, rng).points();
}

struct MonteCarloEstimate {
    double estimate = 0.0;
    double se = 0.0;
};

/// E[min(eta(X), 1 - eta(X))] over N marginal draws.
inline MonteCarloEstimate bayes_risk_mc(const DistributionSpec& spec, std::size_t N, RngStream& rng) {
    if (N < 100) throw Error(ErrorCode::OutOfRange, "bayes_risk_mc needs N >= 100");
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const Sample s = sample_pair(spec, rng);
        const double e = eta(spec, s.features);
        const double v = std::min(e, 1.0 - e);
        const double delta = v - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (v - mean);
    }
    const double var = m2 / static_cast<double>(N - 1);
    return {mean, std::sqrt(var / static_cast<double>(N))};
}

namespace detail {

// Gradient ascent on log fbar with backtracking, from one start point.
inline double ascend_marginal(const DistributionSpec& spec, Vector x) {
    double f = marginal(spec, x);
    for (int iter = 0; iter < 100000; ++iter) {
        const Derivatives der = derivatives(spec, x);
        Vector g(der.fbar_grad);
        double gnorm = 0.0;
        for (double& t : g) {
            t /= f;
            gnorm += t * t;
        }
        if (std::sqrt(gnorm) < 1e-13) break;
        double step = 1.0;
        bool moved = false;
        while (step > 1e-18) {
            Vector y(x);
            for (std::size_t j = 0; j < y.size(); ++j) y[j] += step * g[j];
            const double fy = marginal(spec, y);
            if (fy > f) {
                moved = fy > f * (1.0 + 1e-16);
                x = std::move(y);
                f = fy;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
    }
    return f;
}

}  // namespace detail

/// sup_x fbar(x). Closed form for the examples; multi-start ascent from the
/// class modes for the settings.
inline double marginal_sup(const DistributionSpec& spec) {
    return std::visit(
        detail::overloaded{
            [&](const SettingModel& s) {
                double best = 0.0;
                for (const auto* comps : {&s.class0, &s.class1}) {
                    Vector start(comps->size());
                    for (std::size_t j = 0; j < start.size(); ++j) start[j] = (*comps)[j].mode();
                    best = std::max(best, detail::ascend_marginal(spec, start));
                }
                return best;
            },
            [&](const Example1Model& e) { return e.normalizer; },
            [&](const Example2Model& e) {
                // fbar -> 2 f2(x2) as x1 -> 1; f2 on the bridge is maximised on [-1, 1].
                double best = 0.0;
                for (int i = 0; i <= 20000; ++i) best = std::max(best, e.f2(-1.0 + i / 10000.0));
                return 2.0 * best;
            },
            [&](const CustomModel& c) {
                if (!c.marginal_sup) throw Error(ErrorCode::Unsupported, "custom model has no marginal sup");
                return *c.marginal_sup;
            },
        },
        spec.variant());
}

}  // namespace lknn
