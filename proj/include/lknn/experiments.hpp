#pragma once

// Monte Carlo benchmark harness: per-repetition training, cross-validation
// and test evaluation of the standard, oracle-local and semi-supervised-local
// classifiers, aggregation into risks and regret ratios, rate experiments and
// result persistence.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "lknn/classify.hpp"
#include "lknn/core.hpp"
#include "lknn/density.hpp"
#include "lknn/distributions.hpp"
#include "lknn/select.hpp"
#include "lknn/theory.hpp"

namespace lknn {

enum class Method { Knn, Oracle, SemiSupervised };

inline std::string to_string(Method m) {
    switch (m) {
        case Method::Knn: return "knn";
        case Method::Oracle: return "oracle";
        case Method::SemiSupervised: return "ss";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "knn") return Method::Knn;
    if (s == "oracle") return Method::Oracle;
    if (s == "ss") return Method::SemiSupervised;
    throw Error(ErrorCode::InvalidArgument, "unknown method '" + s + "' (expected knn, oracle or ss)");
}

struct BandwidthPolicy {
    enum class Kind { Reference, Theoretical };
    Kind kind = Kind::Reference;
    double A = 1.0;
    double gamma = 2.0;

    friend bool operator==(const BandwidthPolicy&, const BandwidthPolicy&) = default;
};

/// "reference" or "theoretical:A,GAMMA".
inline BandwidthPolicy parse_bandwidth(const std::string& s) {
    if (s == "reference") return {};
    const std::string prefix = "theoretical:";
    if (s.rfind(prefix, 0) == 0) {
        const std::string rest = s.substr(prefix.size());
        const auto comma = rest.find(',');
        if (comma == std::string::npos) throw Error(ErrorCode::InvalidArgument, "expected theoretical:A,GAMMA");
        try {
            return {BandwidthPolicy::Kind::Theoretical, std::stod(rest.substr(0, comma)), std::stod(rest.substr(comma + 1))};
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::InvalidArgument, "cannot parse bandwidth '" + s + "'");
        }
    }
    throw Error(ErrorCode::InvalidArgument, "unknown bandwidth policy '" + s + "'");
}

inline std::string to_string(const BandwidthPolicy& b) {
    if (b.kind == BandwidthPolicy::Kind::Reference) return "reference";
    std::ostringstream os;
    os.precision(17);
    os << "theoretical:" << b.A << "," << b.gamma;
    return os.str();
}

struct ExperimentConfig {
    std::string spec = "setting1";
    std::size_t d = 1;
    std::size_t n = 200;
    std::size_t m = 1000;
    std::size_t test_size = 1000;
    std::size_t reps = 200;
    std::vector<Method> methods{Method::Knn, Method::Oracle, Method::SemiSupervised};
    std::uint64_t seed = 1;
    BandwidthPolicy bandwidth;
    std::size_t bayes_mc = 1'000'000;
    std::size_t folds = 5;
    std::optional<double> fixed_B;  // skip B cross-validation for the local methods
    std::size_t threads = 0;        // 0: hardware concurrency; never affects results

    bool has(Method m) const { return std::find(methods.begin(), methods.end(), m) != methods.end(); }

    void validate() const {
        if (test_size < 1) throw Error(ErrorCode::OutOfRange, "test_size must be >= 1");
        if (reps < 2) throw Error(ErrorCode::OutOfRange, "reps must be >= 2");
        if (methods.empty()) throw Error(ErrorCode::EmptyInput, "no methods selected");
        if (n < folds) throw Error(ErrorCode::OutOfRange, "n must be at least the number of folds");
        if (has(Method::Knn) && n < 8) throw Error(ErrorCode::OutOfRange, "knn needs n >= 8 for its k grid");
        if (has(Method::SemiSupervised) && m < 2) throw Error(ErrorCode::OutOfRange, "ss needs m >= 2");
        if (fixed_B && !(*fixed_B > 0.0)) throw Error(ErrorCode::InvalidArgument, "fixed B must be positive");
        (void)DistributionSpec::from_name(spec, d);
    }

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct TrialOutcome {
    std::size_t rep_index = 0;
    std::map<Method, double> error_rate;
    std::map<Method, double> chosen;  // selected k (knn) or B (local methods)

    friend bool operator==(const TrialOutcome&, const TrialOutcome&) = default;
};

struct MethodSummary {
    Method method = Method::Knn;
    double mean_risk = 0.0;
    double se = 0.0;
    std::optional<double> regret_ratio;
    std::optional<double> ratio_se;

    friend bool operator==(const MethodSummary&, const MethodSummary&) = default;
};

struct ExperimentResult {
    ExperimentConfig config;
    double bayes_risk = 0.0;
    double bayes_se = 0.0;
    std::size_t reps = 0;
    std::vector<MethodSummary> methods;
    std::vector<TrialOutcome> trials;

    const MethodSummary& summary(Method m) const {
        for (const auto& s : methods)
            if (s.method == m) return s;
        throw Error(ErrorCode::InvalidArgument, "method " + to_string(m) + " was not run");
    }

    friend bool operator==(const ExperimentResult&, const ExperimentResult&) = default;
};

/// Stream layout: repetition r uses derive_stream(seed, r) and splits it by purpose.
namespace streams {
inline constexpr std::uint64_t train = 0;
inline constexpr std::uint64_t unlabelled = 1;
inline constexpr std::uint64_t test = 2;
inline constexpr std::uint64_t cv = 3;
inline constexpr std::uint64_t bayes_index = ~std::uint64_t{0};
}  // namespace streams

/// (mean_m - bayes) / (mean_knn - bayes).
inline double regret_ratio(double mean_m, double mean_knn, double bayes) {
    const double denom = mean_knn - bayes;
    if (!(denom > 0.0)) throw Error(ErrorCode::Degenerate, "knn risk does not exceed the Bayes risk");
    return (mean_m - bayes) / denom;
}

/// Delta-method standard error of the regret ratio from paired per-repetition errors (e_M, e_knn).
inline double delta_se(const std::vector<std::pair<double, double>>& pairs, double bayes) {
    const std::size_t r = pairs.size();
    if (r < 2) throw Error(ErrorCode::OutOfRange, "delta_se needs >= 2 pairs");
    double ma = 0.0, mb = 0.0;
    for (const auto& [a, b] : pairs) {
        ma += a;
        mb += b;
    }
    ma /= static_cast<double>(r);
    mb /= static_cast<double>(r);
    const double denom = mb - bayes;
    if (!(denom > 0.0)) throw Error(ErrorCode::Degenerate, "mean knn error does not exceed the Bayes risk");
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (const auto& [a, b] : pairs) {
        saa += (a - ma) * (a - ma);
        sbb += (b - mb) * (b - mb);
        sab += (a - ma) * (b - mb);
    }
    const double scale = 1.0 / static_cast<double>(r - 1);
    saa *= scale;
    sbb *= scale;
    sab *= scale;
    const double ratio = (ma - bayes) / denom;
    const double ga = 1.0 / denom, gb = -ratio / denom;
    const double var = ga * ga * saa + 2.0 * ga * gb * sab + gb * gb * sbb;
    return std::sqrt(std::max(0.0, var) / static_cast<double>(r));
}

/// Per-experiment constants shared read-only by every repetition.
struct TrialContext {
    ExperimentConfig config;
    DistributionSpec spec;
    double fbar_sup = 0.0;

    explicit TrialContext(const ExperimentConfig& c)
        : config(c), spec(DistributionSpec::from_name(c.spec, c.d)) {
        config.validate();
        if (config.has(Method::Oracle)) fbar_sup = marginal_sup(spec);
    }
};

namespace detail {

inline Vector kde_bandwidths(const BandwidthPolicy& policy, const PointSet& unl) {
    if (policy.kind == BandwidthPolicy::Kind::Reference) return bandwidth_reference(unl);
    return Vector(unl.dim(), bandwidth_theoretical(policy.A, unl.size(), unl.dim(), policy.gamma));
}

inline PointSet concat(const PointSet& a, const PointSet& b) {
    Vector flat(a.flat());
    flat.insert(flat.end(), b.flat().begin(), b.flat().end());
    return PointSet(a.dim(), std::move(flat));
}

inline TrialOutcome run_trial_impl(const TrialContext& ctx, std::size_t rep) {
    const ExperimentConfig& cfg = ctx.config;
    const RngStream root = derive_stream(cfg.seed, rep);
    RngStream train_rng = root.split(streams::train);
    RngStream test_rng = root.split(streams::test);
    const Dataset train = sample_dataset(ctx.spec, cfg.n, train_rng);
    const Dataset test = sample_dataset(ctx.spec, cfg.test_size, test_rng);

    TrialOutcome out;
    out.rep_index = rep;
    std::vector<std::pair<Method, KRule>> rules;

    auto choose_B = [&](Method method, const DensityFn& density, double sup) {
        if (cfg.fixed_B) {
            out.chosen[method] = *cfg.fixed_B;
            return KRule::practical(*cfg.fixed_B, density, sup);
        }
        RngStream cv_rng = root.split(streams::cv);
        const auto cv = cv_select(train, B_grid(cfg.n, cfg.d),
                                  [&](double B) { return KRule::practical(B, density, sup); }, cfg.folds, cv_rng);
        out.chosen[method] = cv.best;
        return KRule::practical(cv.best, density, sup);
    };

    for (Method method : cfg.methods) {
        switch (method) {
            case Method::Knn: {
                RngStream cv_rng = root.split(streams::cv);
                const auto cv = cv_select(train, k_grid(cfg.n), [](std::size_t k) { return KRule::constant(k); },
                                          cfg.folds, cv_rng);
                out.chosen[method] = static_cast<double>(cv.best);
                rules.emplace_back(method, KRule::constant(cv.best));
                break;
            }
            case Method::Oracle: {
                const DistributionSpec* spec = &ctx.spec;
                DensityFn truth = [spec](ConstVec x) { return marginal(*spec, x); };
                rules.emplace_back(method, choose_B(method, truth, ctx.fbar_sup));
                break;
            }
            case Method::SemiSupervised: {
                RngStream unl_rng = root.split(streams::unlabelled);
                const PointSet unl = sample_unlabelled(ctx.spec, cfg.m, unl_rng);
                auto kde = std::make_shared<const KdeModel>(unl, kde_bandwidths(cfg.bandwidth, unl));
                const double sup = sup_estimate(*kde, unl);
                const DensityFn raw = [kde](ConstVec x) { return kde->evaluate(x); };
                const DensityFn cached = memoize_density(raw, concat(train.points(), test.points()));
                rules.emplace_back(method, choose_B(method, cached, sup));
                break;
            }
        }
    }

    std::vector<std::size_t> wrong(rules.size(), 0), ks(rules.size());
    std::vector<std::size_t> ones;
    for (std::size_t t = 0; t < test.size(); ++t) {
        const ConstVec x = test.features(t);
        std::size_t k_max = 1;
        for (std::size_t r = 0; r < rules.size(); ++r) {
            ks[r] = train.size() == 1 ? 1 : resolve_k(rules[r].second, x, train.size(), train.dim());
            k_max = std::max(k_max, ks[r]);
        }
        const auto ord = k_nearest(train, x, k_max);
        ones.assign(k_max + 1, 0);
        for (std::size_t j = 0; j < k_max; ++j) ones[j + 1] = ones[j] + (train.label(ord.indices[j]) == 1);
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const Label predicted = 2 * ones[ks[r]] >= ks[r] ? 1 : 0;
            wrong[r] += predicted != test.label(t);
        }
    }
    for (std::size_t r = 0; r < rules.size(); ++r)
        out.error_rate[rules[r].first] = static_cast<double>(wrong[r]) / static_cast<double>(test.size());
    return out;
}

}  // namespace detail

inline TrialOutcome run_trial(const TrialContext& ctx, std::size_t rep_index) {
    try {
        return detail::run_trial_impl(ctx, rep_index);
    } catch (const Error& e) {
        throw Error(e.code(), "repetition " + std::to_string(rep_index) + ": " + e.what());
    }
}

inline TrialOutcome run_trial(const ExperimentConfig& config, std::size_t rep_index) {
    return run_trial(TrialContext(config), rep_index);
}

/// Means, standard errors and regret ratios from per-repetition outcomes.
inline ExperimentResult aggregate(const ExperimentConfig& config, std::vector<TrialOutcome> trials, double bayes_risk,
                                  double bayes_se = 0.0) {
    if (trials.size() < 2) throw Error(ErrorCode::OutOfRange, "aggregation needs >= 2 repetitions");
    ExperimentResult res;
    res.config = config;
    res.bayes_risk = bayes_risk;
    res.bayes_se = bayes_se;
    res.reps = trials.size();
    const double r = static_cast<double>(trials.size());
    for (Method m : config.methods) {
        MethodSummary s;
        s.method = m;
        double mean = 0.0;
        for (const auto& t : trials) mean += t.error_rate.at(m);
        mean /= r;
        double ss = 0.0;
        for (const auto& t : trials) ss += (t.error_rate.at(m) - mean) * (t.error_rate.at(m) - mean);
        s.mean_risk = mean;
        s.se = std::sqrt(ss / (r - 1.0) / r);
        res.methods.push_back(s);
    }
    if (config.has(Method::Knn)) {
        const double knn_mean = res.summary(Method::Knn).mean_risk;
        if (knn_mean > bayes_risk) {
            for (auto& s : res.methods) {
                if (s.method == Method::Knn) continue;
                std::vector<std::pair<double, double>> pairs;
                for (const auto& t : trials) pairs.emplace_back(t.error_rate.at(s.method), t.error_rate.at(Method::Knn));
                s.regret_ratio = regret_ratio(s.mean_risk, knn_mean, bayes_risk);
                s.ratio_se = delta_se(pairs, bayes_risk);
            }
        }
    }
    res.trials = std::move(trials);
    return res;
}

/// Runs every repetition, optionally on several threads; results do not depend on scheduling.
inline std::vector<TrialOutcome> run_trials(const TrialContext& ctx) {
    const std::size_t reps = ctx.config.reps;
    std::vector<TrialOutcome> out(reps);
    std::size_t threads = ctx.config.threads ? ctx.config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, reps);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::size_t failed_rep = reps;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t rep; (rep = next.fetch_add(1)) < reps;) {
            try {
                out[rep] = run_trial(ctx, rep);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (rep < failed_rep) {
                    failed_rep = rep;
                    failure = std::current_exception();
                }
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

inline MonteCarloEstimate experiment_bayes_risk(const ExperimentConfig& config, const DistributionSpec& spec) {
    RngStream rng = derive_stream(config.seed, streams::bayes_index);
    return bayes_risk_mc(spec, config.bayes_mc, rng);
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    const TrialContext ctx(config);
    auto trials = run_trials(ctx);
    const auto bayes = experiment_bayes_risk(config, ctx.spec);
    return aggregate(config, std::move(trials), bayes.estimate, bayes.se);
}

struct RatePoint {
    std::size_t n = 0;
    double mean_risk = 0.0;
    double se = 0.0;
    double regret = 0.0;
    bool dropped = false;
};

struct RateResult {
    Method method = Method::Oracle;
    double bayes_risk = 0.0;
    std::vector<RatePoint> points;
    RateFit fit;
    bool warning = false;  // some n had nonpositive regret and was left out of the fit
};

/// Fits the log-log slope over points with positive regret; others are flagged and dropped.
inline RateResult fit_rate_points(std::vector<RatePoint> points) {
    RateResult out;
    std::vector<std::pair<double, double>> usable;
    for (auto& p : points) {
        p.dropped = !(p.regret > 0.0);
        if (p.dropped) out.warning = true;
        else usable.emplace_back(static_cast<double>(p.n), p.regret);
    }
    if (usable.size() < 3) throw Error(ErrorCode::Degenerate, "fewer than 3 sample sizes with positive regret");
    out.fit = rate_slope(usable);
    out.points = std::move(points);
    return out;
}

inline RateResult run_rate_experiment(ExperimentConfig config, const std::vector<std::size_t>& n_grid,
                                      std::optional<double> fixed_B = std::nullopt) {
    if (n_grid.size() < 3) throw Error(ErrorCode::OutOfRange, "rate experiment needs >= 3 sample sizes");
    for (std::size_t i = 1; i < n_grid.size(); ++i)
        if (n_grid[i] <= n_grid[i - 1]) throw Error(ErrorCode::InvalidArgument, "n grid must be strictly increasing");
    if (config.methods.size() != 1) throw Error(ErrorCode::InvalidArgument, "rate experiment takes exactly one method");
    if (fixed_B) {
        if (config.methods.front() == Method::Knn)
            throw Error(ErrorCode::InvalidArgument, "fixed B applies to the local methods only");
        config.fixed_B = fixed_B;
    }
    std::vector<RatePoint> points;
    double bayes = 0.0;
    for (std::size_t n : n_grid) {
        config.n = n;
        const auto res = run_experiment(config);
        const auto& s = res.methods.front();
        bayes = res.bayes_risk;
        points.push_back({n, s.mean_risk, s.se, s.mean_risk - res.bayes_risk, false});
    }
    RateResult out = fit_rate_points(std::move(points));
    out.method = config.methods.front();
    out.bayes_risk = bayes;
    return out;
}

// ---- persistence ----

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json methods = nlohmann::json::array();
    for (Method m : c.methods) methods.push_back(to_string(m));
    nlohmann::json j{{"spec", c.spec},          {"d", c.d},
                     {"n", c.n},                {"m", c.m},
                     {"test_size", c.test_size}, {"reps", c.reps},
                     {"methods", methods},      {"seed", c.seed},
                     {"bandwidth", to_string(c.bandwidth)},
                     {"bayes_mc", c.bayes_mc},  {"folds", c.folds}};
    j["fixed_B"] = c.fixed_B ? nlohmann::json(*c.fixed_B) : nlohmann::json(nullptr);
    return j;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    c.spec = j.at("spec").get<std::string>();
    c.d = j.at("d").get<std::size_t>();
    c.n = j.at("n").get<std::size_t>();
    c.m = j.at("m").get<std::size_t>();
    c.test_size = j.at("test_size").get<std::size_t>();
    c.reps = j.at("reps").get<std::size_t>();
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.bandwidth = parse_bandwidth(j.at("bandwidth").get<std::string>());
    c.bayes_mc = j.at("bayes_mc").get<std::size_t>();
    c.folds = j.at("folds").get<std::size_t>();
    if (j.contains("fixed_B") && !j.at("fixed_B").is_null()) c.fixed_B = j.at("fixed_B").get<double>();
    return c;
}

inline nlohmann::json to_json(const ExperimentResult& r) {
    nlohmann::json methods = nlohmann::json::array();
    for (const auto& s : r.methods) {
        nlohmann::json m{{"method", to_string(s.method)}, {"mean_risk", s.mean_risk}, {"se", s.se}};
        m["regret_ratio"] = s.regret_ratio ? nlohmann::json(*s.regret_ratio) : nlohmann::json(nullptr);
        m["ratio_se"] = s.ratio_se ? nlohmann::json(*s.ratio_se) : nlohmann::json(nullptr);
        methods.push_back(m);
    }
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& t : r.trials) {
        nlohmann::json err, chosen;
        for (const auto& [m, v] : t.error_rate) err[to_string(m)] = v;
        for (const auto& [m, v] : t.chosen) chosen[to_string(m)] = v;
        trials.push_back({{"rep_index", t.rep_index}, {"error_rate", err}, {"chosen", chosen}});
    }
    return {{"config", to_json(r.config)}, {"bayes_risk", r.bayes_risk}, {"bayes_se", r.bayes_se},
            {"reps", r.reps},              {"methods", methods},        {"trials", trials}};
}

inline ExperimentResult result_from_json(const nlohmann::json& j) {
    ExperimentResult r;
    r.config = config_from_json(j.at("config"));
    r.bayes_risk = j.at("bayes_risk").get<double>();
    r.bayes_se = j.at("bayes_se").get<double>();
    r.reps = j.at("reps").get<std::size_t>();
    for (const auto& m : j.at("methods")) {
        MethodSummary s;
        s.method = parse_method(m.at("method").get<std::string>());
        s.mean_risk = m.at("mean_risk").get<double>();
        s.se = m.at("se").get<double>();
        if (!m.at("regret_ratio").is_null()) s.regret_ratio = m.at("regret_ratio").get<double>();
        if (!m.at("ratio_se").is_null()) s.ratio_se = m.at("ratio_se").get<double>();
        r.methods.push_back(s);
    }
    for (const auto& t : j.at("trials")) {
        TrialOutcome o;
        o.rep_index = t.at("rep_index").get<std::size_t>();
        for (const auto& [k, v] : t.at("error_rate").items()) o.error_rate[parse_method(k)] = v.get<double>();
        for (const auto& [k, v] : t.at("chosen").items()) o.chosen[parse_method(k)] = v.get<double>();
        r.trials.push_back(std::move(o));
    }
    return r;
}

namespace detail {

inline std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string fmt6(const std::optional<double>& v) { return v ? fmt6(*v) : std::string(); }

}  // namespace detail

inline const char* csv_header =
    "spec,d,n,m,test_size,reps,method,mean_risk,se,bayes_risk,regret_ratio,ratio_se,seed";

/// One row per method; numeric fields with 6 significant digits.
inline std::string results_csv(const ExperimentResult& r) {
    std::ostringstream os;
    os << csv_header << '\n';
    const auto& c = r.config;
    for (const auto& s : r.methods) {
        os << c.spec << ',' << c.d << ',' << c.n << ',' << c.m << ',' << c.test_size << ',' << r.reps << ','
           << to_string(s.method) << ',' << detail::fmt6(s.mean_risk) << ',' << detail::fmt6(s.se) << ','
           << detail::fmt6(r.bayes_risk) << ',' << detail::fmt6(s.regret_ratio) << ',' << detail::fmt6(s.ratio_se)
           << ',' << c.seed << '\n';
    }
    return os.str();
}

enum class OutputFormat { Csv, Json };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    throw Error(ErrorCode::InvalidArgument, "unknown format '" + s + "' (expected csv or json)");
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

inline void write_results(const ExperimentResult& r, const std::string& path, OutputFormat format) {
    write_text(path, format == OutputFormat::Csv ? results_csv(r) : to_json(r).dump(2) + "\n");
}

inline ExperimentResult read_results_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
    try {
        return result_from_json(nlohmann::json::parse(f));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, "malformed results file '" + path + "': " + e.what());
    }
}

inline nlohmann::json to_json(const RateResult& r) {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : r.points)
        pts.push_back({{"n", p.n}, {"mean_risk", p.mean_risk}, {"se", p.se}, {"regret", p.regret}, {"dropped", p.dropped}});
    return {{"method", to_string(r.method)},
            {"bayes_risk", r.bayes_risk},
            {"points", pts},
            {"slope", r.fit.slope},
            {"intercept", r.fit.intercept},
            {"r_squared", r.fit.r_squared},
            {"warning", r.warning}};
}

inline std::string rate_csv(const RateResult& r) {
    std::ostringstream os;
    os << "method,n,mean_risk,se,bayes_risk,regret,dropped\n";
    for (const auto& p : r.points)
        os << to_string(r.method) << ',' << p.n << ',' << detail::fmt6(p.mean_risk) << ',' << detail::fmt6(p.se) << ','
           << detail::fmt6(r.bayes_risk) << ',' << detail::fmt6(p.regret) << ',' << (p.dropped ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace lknn
