// Command-line front end: simulate, bayes-risk, constants, rate, kde-check.
//
// Exit codes: 0 success, 1 usage error, 2 runtime or numerical error.
// `--config FILE` reads a JSON object whose keys name long options
// (underscores or dashes); flags given on the command line win.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lknn/lknn.hpp"

using namespace lknn;
using nlohmann::json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        std::ostringstream os;
        os.precision(17);
        os << v.get<double>();
        return os.str();
    }
    throw UsageError("config values must be strings, numbers, booleans or arrays of those");
}

// Splices the keys of a JSON config file into argv wherever the flag is absent.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
            path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");

    if ((args.empty() || args.front().rfind("-", 0) == 0) && cfg.contains("command"))
        args.insert(args.begin(), cfg.at("command").get<std::string>());
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command") continue;
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (has_flag(args, flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + scalar_text(v);
            args.push_back(flag);
            args.push_back(joined);
        } else if (!value.is_null()) {
            args.push_back(flag);
            args.push_back(scalar_text(value));
        }
    }
    return args;
}

json nullable(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct ExperimentFlags {
    std::string spec = "setting1";
    std::size_t d = 1;
    std::size_t m = 1000;
    std::size_t test_size = 1000;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    std::string bandwidth = "reference";
    std::size_t bayes_mc = 1'000'000;
    std::size_t threads = 0;

    void add_to(CLI::App* app) {
        app->add_option("--spec", spec, "setting1|setting2|setting3|example1|example2")->capture_default_str();
        app->add_option("--dim", d, "dimension")->capture_default_str();
        app->add_option("--m", m, "unlabelled sample size")->capture_default_str();
        app->add_option("--test-size", test_size)->capture_default_str();
        app->add_option("--reps", reps)->capture_default_str();
        app->add_option("--seed", seed)->capture_default_str();
        app->add_option("--bandwidth", bandwidth, "reference | theoretical:A,GAMMA")->capture_default_str();
        app->add_option("--bayes-mc", bayes_mc, "Monte Carlo draws for the Bayes risk")->capture_default_str();
        app->add_option("--threads", threads, "worker threads, 0 for all cores")->capture_default_str();
    }

    ExperimentConfig to_config() const {
        ExperimentConfig c;
        c.spec = spec;
        c.d = d;
        c.m = m;
        c.test_size = test_size;
        c.reps = reps;
        c.seed = seed;
        c.bandwidth = parse_bandwidth(bandwidth);
        c.bayes_mc = bayes_mc;
        c.threads = threads;
        if (c.bandwidth.kind == BandwidthPolicy::Kind::Theoretical)
            (void)bandwidth_theoretical(c.bandwidth.A, std::max<std::size_t>(c.m, 1), c.d, c.bandwidth.gamma);
        if (c.bayes_mc < 100) throw Error(ErrorCode::OutOfRange, "--bayes-mc must be >= 100");
        return c;
    }
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
    std::vector<Method> out;
    for (const auto& s : names) {
        const Method m = parse_method(s);
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    return out;
}

void print_summary(const ExperimentResult& r) {
    std::printf("bayes_risk %.6g (se %.2g)\n", r.bayes_risk, r.bayes_se);
    for (const auto& s : r.methods) {
        std::printf("%-7s mean_risk %.6g se %.3g", to_string(s.method).c_str(), s.mean_risk, s.se);
        if (s.regret_ratio) std::printf(" regret_ratio %.4g (se %.3g)", *s.regret_ratio, *s.ratio_se);
        std::printf("\n");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local-k nearest neighbour classification experiments"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");
    std::function<void()> run;

    // simulate
    ExperimentFlags sim;
    std::size_t sim_n = 200;
    std::vector<std::string> sim_methods{"knn", "oracle", "ss"};
    std::string sim_out, sim_format = "csv";
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo comparison of knn, oracle and ss classifiers");
    sim.add_to(simulate);
    simulate->add_option("--n", sim_n, "labelled sample size")->capture_default_str();
    simulate->add_option("--methods", sim_methods)->delimiter(',')->capture_default_str();
    simulate->add_option("--out", sim_out, "output file")->required();
    simulate->add_option("--format", sim_format, "csv|json")->capture_default_str();
    simulate->callback([&] {
        ExperimentConfig c = sim.to_config();
        c.n = sim_n;
        c.methods = parse_methods(sim_methods);
        c.validate();
        const OutputFormat fmt = parse_format(sim_format);
        run = [c, fmt, &sim_out] {
            const auto result = run_experiment(c);
            write_results(result, sim_out, fmt);
            print_summary(result);
        };
    });

    // bayes-risk
    std::string br_spec = "setting1";
    std::size_t br_d = 1, br_mc = 1'000'000;
    std::uint64_t br_seed = 1;
    auto* bayes = app.add_subcommand("bayes-risk", "Monte Carlo Bayes risk of a distribution");
    bayes->add_option("--spec", br_spec)->capture_default_str();
    bayes->add_option("--dim", br_d)->capture_default_str();
    bayes->add_option("--mc", br_mc, "number of draws")->capture_default_str();
    bayes->add_option("--seed", br_seed)->capture_default_str();
    bayes->callback([&] {
        const auto spec = DistributionSpec::from_name(br_spec, br_d);
        if (br_mc < 100) throw Error(ErrorCode::OutOfRange, "--mc must be >= 100");
        run = [spec, &br_mc, &br_seed, &br_spec, &br_d] {
            RngStream rng = derive_stream(br_seed, streams::bayes_index);
            const auto est = bayes_risk_mc(spec, br_mc, rng);
            std::cout << json{{"spec", br_spec}, {"d", br_d},        {"mc", br_mc},
                              {"seed", br_seed}, {"bayes_risk", est.estimate}, {"se", est.se}}
                             .dump(2)
                      << "\n";
        };
    });

    // constants
    std::string c_spec = "example1";
    std::size_t c_d = 2, c_nodes = 1024;
    std::optional<double> c_B;
    auto* constants = app.add_subcommand("constants", "Expansion constants B1, B2, B3 by boundary quadrature");
    constants->add_option("--spec", c_spec, "example1|example2")->capture_default_str();
    constants->add_option("--dim", c_d)->capture_default_str();
    constants->add_option("--B", c_B, "evaluate B3 at this B");
    constants->add_option("--nodes", c_nodes, "quadrature nodes")->capture_default_str();
    constants->callback([&] {
        if (c_spec != "example1" && c_spec != "example2")
            throw Error(ErrorCode::InvalidArgument, "constants supports example1 and example2 only");
        const auto spec = DistributionSpec::from_name(c_spec, c_d);
        if (c_nodes < 16) throw Error(ErrorCode::OutOfRange, "--nodes must be >= 16");
        if (c_B && !(*c_B > 0.0)) throw Error(ErrorCode::InvalidArgument, "--B must be positive");
        run = [spec, &c_spec, &c_d, &c_nodes, &c_B] {
            const auto k = expansion_constants(spec, c_nodes, c_B);
            json out{{"spec", c_spec},
                     {"d", c_d},
                     {"nodes", c_nodes},
                     {"B1", k.B1},
                     {"B2", nullable(k.B2)},
                     {"B2_finite", std::isfinite(k.B2)},
                     {"B", c_B ? json(*c_B) : json(nullptr)},
                     {"B3", k.B3 ? nullable(*k.B3) : json(nullptr)},
                     {"a_min", k.a_min},
                     {"a_max", k.a_max},
                     {"quadrature_estimate_error", k.quadrature_estimate_error}};
            std::cout << out.dump(2) << "\n";
        };
    });

    // rate
    ExperimentFlags rt;
    std::string rt_method = "oracle", rt_out, rt_format = "json";
    std::vector<std::size_t> rt_grid{250, 500, 1000, 2000};
    std::optional<double> rt_B;
    auto* rate = app.add_subcommand("rate", "Regret against n and its log-log slope");
    rt.add_to(rate);
    rate->add_option("--method", rt_method, "oracle|ss|knn")->capture_default_str();
    rate->add_option("--n-grid", rt_grid)->delimiter(',')->capture_default_str();
    rate->add_option("--fixed-B", rt_B, "skip B cross-validation and use this B");
    rate->add_option("--out", rt_out, "output file")->required();
    rate->add_option("--format", rt_format, "csv|json")->capture_default_str();
    rate->callback([&] {
        ExperimentConfig c = rt.to_config();
        c.methods = {parse_method(rt_method)};
        if (rt_grid.size() < 3) throw Error(ErrorCode::OutOfRange, "--n-grid needs >= 3 values");
        if (!std::is_sorted(rt_grid.begin(), rt_grid.end()) ||
            std::adjacent_find(rt_grid.begin(), rt_grid.end()) != rt_grid.end())
            throw Error(ErrorCode::InvalidArgument, "--n-grid must be strictly increasing");
        if (rt_B && c.methods.front() == Method::Knn)
            throw Error(ErrorCode::InvalidArgument, "--fixed-B applies to oracle and ss only");
        c.n = rt_grid.front();
        c.fixed_B = rt_B;
        c.validate();
        const OutputFormat fmt = parse_format(rt_format);
        run = [c, fmt, &rt_grid, &rt_B, &rt_out] {
            const auto r = run_rate_experiment(c, rt_grid, rt_B);
            write_text(rt_out, fmt == OutputFormat::Csv ? rate_csv(r) : to_json(r).dump(2) + "\n");
            for (const auto& p : r.points)
                std::printf("n %-6zu mean_risk %.6g regret %.4g%s\n", p.n, p.mean_risk, p.regret,
                            p.dropped ? " (dropped)" : "");
            std::printf("slope %.4g r_squared %.4g%s\n", r.fit.slope, r.fit.r_squared,
                        r.warning ? " [warning: nonpositive regret dropped]" : "");
        };
    });

    // kde-check
    std::string kc_spec = "setting1", kc_bandwidth = "reference";
    std::size_t kc_d = 1, kc_m = 1000, kc_grid = 201;
    std::uint64_t kc_seed = 1;
    auto* kde = app.add_subcommand("kde-check", "Grid integral and sup error of the density estimate");
    kde->add_option("--spec", kc_spec)->capture_default_str();
    kde->add_option("--dim", kc_d)->capture_default_str();
    kde->add_option("--m", kc_m)->capture_default_str();
    kde->add_option("--grid-points", kc_grid, "nodes per axis")->capture_default_str();
    kde->add_option("--seed", kc_seed)->capture_default_str();
    kde->add_option("--bandwidth", kc_bandwidth, "reference | theoretical:A,GAMMA")->capture_default_str();
    kde->callback([&] {
        const auto spec = DistributionSpec::from_name(kc_spec, kc_d);
        if (kc_m < 2) throw Error(ErrorCode::OutOfRange, "--m must be >= 2");
        if (kc_grid < 2) throw Error(ErrorCode::OutOfRange, "--grid-points must be >= 2");
        if (std::pow(static_cast<double>(kc_grid), static_cast<double>(kc_d)) > 5e7)
            throw Error(ErrorCode::OutOfRange, "grid-points^dim exceeds 5e7 nodes");
        const BandwidthPolicy policy = parse_bandwidth(kc_bandwidth);
        if (policy.kind == BandwidthPolicy::Kind::Theoretical)
            (void)bandwidth_theoretical(policy.A, kc_m, kc_d, policy.gamma);
        run = [spec, policy, &kc_spec, &kc_d, &kc_m, &kc_grid, &kc_seed] {
            RngStream rng = derive_stream(kc_seed, 0).split(streams::unlabelled);
            const PointSet unl = sample_unlabelled(spec, kc_m, rng);
            const Vector h = policy.kind == BandwidthPolicy::Kind::Reference
                                 ? bandwidth_reference(unl)
                                 : Vector(kc_d, bandwidth_theoretical(policy.A, kc_m, kc_d, policy.gamma));
            const KdeModel model(unl, h);
            const Lattice lat = support_lattice(model, kc_grid);
            const double integral = lat.integrate([&](ConstVec x) { return model.evaluate(x); });
            const double err = sup_error([&](ConstVec x) { return marginal(spec, x); }, model, lat.points());
            std::cout << json{{"spec", kc_spec}, {"d", kc_d},         {"m", kc_m},
                              {"grid_points", kc_grid}, {"seed", kc_seed}, {"bandwidths", h},
                              {"integral", integral},    {"sup_error", err}}
                             .dump(2)
                      << "\n";
        };
    });

    try {
        std::vector<std::string> args = merge_config(std::vector<std::string>(argv + 1, argv + argc));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (run) run();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
