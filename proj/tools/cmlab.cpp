#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cmlab/cmlab.hpp"

namespace {

using namespace cmlab;

/// Accepts a full experiment config or a bare sequence spec.
ExperimentConfig load_any(const std::string& path) {
    const json j = read_json_file(path);
    if (j.contains("sequence")) return parse_config(j);
    ExperimentConfig c;
    c.sequence = parse_sequence(j);
    return c;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::string out;
    std::optional<int> threads;
    bool force = false;

    void attach(CLI::App* app, bool experiment) {
        app->add_option("--config", config, "Config JSON")->required()->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "Master seed");
        app->add_option("--out", out, experiment ? "Output directory" : "Output file");
        if (experiment) {
            app->add_option("--replicas", replicas, "Number of replicas")->check(CLI::PositiveNumber);
            app->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
            app->add_flag("--force", force, "Run even if the regime does not match lambda");
        }
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = load_any(config);
        if (seed) c.seed = *seed;
        if (replicas) c.replicas = *replicas;
        if (threads) c.threads = *threads;
        if (!out.empty()) c.out_dir = out;
        c.force = c.force || force;
        return c;
    }
};

json theory_report(const ExperimentConfig& cfg, double n) {
    const DegreeDistribution law = cfg.sequence.law();
    json out;
    out["inputs"] = {{"sequence", cfg.sequence.to_json()}, {"n", n}};
    const double mu1 = factorial_moment(law, 1), mu2 = factorial_moment(law, 2), mu3 = factorial_moment(law, 3);
    const double lambda = mu2 / mu1;
    out["moments"] = {{"mu1", mu1}, {"mu2", mu2}, {"mu3", mu3}, {"lambda", lambda}, {"epsilon", lambda - 1.0},
                      {"v0", size_biased(law).v0}};
    const SurvivalSolution s = solve_survival(law);
    out["survival"] = {{"z", s.z}, {"rho", s.rho}, {"rho_star", s.rho_star}, {"supercritical", s.supercritical}};
    json warnings = json::array();
    if (cfg.sequence.kind == SequenceSpec::Kind::counts && !cfg.sequence.counts.satisfies_spread()) {
        warnings.push_back("fewer than 5% of vertices have degree outside {0, 2}");
    }
    auto attempt = [&](const char* key, auto&& fn) {
        try {
            out[key] = fn();
        } catch (const std::exception& e) {
            out[key] = nullptr;
            warnings.push_back(std::string(key) + ": " + e.what());
        }
    };
    if (lambda > 1.0) {
        attempt("asymptotic_rho", [&] {
            const RhoApprox a = asymptotic_rho(law);
            return json{{"rho", a.rho}, {"rho_star", a.rho_star}};
        });
        attempt("supercritical", [&] { return to_json(supercritical_prediction(law, n)); });
    } else if (lambda < 1.0) {
        attempt("subcritical", [&] { return to_json(subcritical_prediction(law, n)); });
    }
    attempt("critical_limit", [&] { return to_json(params_from_sequence(law, n)); });
    if (cfg.sequence.kind == SequenceSpec::Kind::rregular && cfg.sequence.r >= 3) {
        const RRegularClosedForm c = rregular_closed_form(cfg.sequence.r, lambda - 1.0, n);
        out["rregular"] = {{"r", c.r}, {"p", cfg.sequence.p}, {"rho0", c.rho0}, {"sigma2", c.sigma2},
                           {"delta", c.delta}, {"alpha0", c.alpha0}, {"alpha2", c.alpha2}, {"beta", c.beta}};
    }
    out["warnings"] = warnings;
    return out;
}

void print_tests(const MCReport& rep) {
    for (const auto& t : rep.tests) {
        std::cout << (t.pass ? "PASS " : "FAIL ") << (t.gating ? "" : "(reported) ") << t.name
                  << " statistic=" << t.statistic;
        if (t.p_value >= 0.0) std::cout << " p=" << t.p_value;
        std::cout << "  " << t.note << '\n';
    }
    std::cout << "verdict: " << (rep.verdict() ? "pass" : "fail") << "  wall " << rep.wall_seconds << " s\n";
}

template <class Out>
void with_output(const std::string& path, Out&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    fn(f);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Configuration-model component experiments"};
    app.require_subcommand(1);

    Common theory_opts;
    std::optional<double> theory_n;
    auto* theory = app.add_subcommand("theory", "Print closed-form predictions as JSON");
    theory_opts.attach(theory, false);
    theory->add_option("--n", theory_n, "Number of vertices (default: from the config)");

    Common gen_opts;
    bool simple = false;
    int max_attempts = 1000;
    auto* generate = app.add_subcommand("generate", "Sample one graph and write its edge list");
    gen_opts.attach(generate, false);
    generate->add_flag("--simple", simple, "Reject until the multigraph is simple");
    generate->add_option("--max-attempts", max_attempts, "Rejection budget for --simple");

    Common exp_opts;
    std::int64_t every = 1;
    std::optional<std::int64_t> steps;
    std::string order = "fifo";
    std::string components_out;
    auto* explore_cmd = app.add_subcommand("explore", "Run the exploration process and dump the walk");
    exp_opts.attach(explore_cmd, false);
    explore_cmd->add_option("--every", every, "Write every k-th step")->check(CLI::PositiveNumber);
    explore_cmd->add_option("--steps", steps, "Stop after T steps");
    explore_cmd->add_option("--order", order, "Active stub order")->check(CLI::IsMember({"fifo", "lifo"}));
    explore_cmd->add_option("--components", components_out, "CSV of explored components");

    Common run_opts[3];
    const char* run_names[3] = {"run-super", "run-sub", "run-critical"};
    const char* run_help[3] = {"Supercritical battery: giant component CLT", "Subcritical battery: largest component window",
                               "Critical window battery against the limit process"};
    const Regime run_regimes[3] = {Regime::supercritical, Regime::subcritical, Regime::critical};
    CLI::App* runs[3];
    for (int i = 0; i < 3; ++i) {
        runs[i] = app.add_subcommand(run_names[i], run_help[i]);
        run_opts[i].attach(runs[i], true);
    }

    LimitParams lp;
    std::string limit_config;
    std::uint64_t limit_seed = 1;
    std::size_t limit_count = 100;
    std::string limit_out;
    int limit_threads = 1;
    double limit_n = 0.0;
    auto* limit = app.add_subcommand("limit-sim", "Simulate the critical limit process");
    limit->add_option("--config", limit_config, "Derive parameters from a sequence config")->check(CLI::ExistingFile);
    limit->add_option("--n", limit_n, "Vertices for alpha1 when using --config");
    limit->add_option("--alpha0", lp.alpha0);
    limit->add_option("--alpha1", lp.alpha1);
    limit->add_option("--alpha2", lp.alpha2);
    limit->add_option("--beta", lp.beta);
    limit->add_option("--ds", lp.ds, "Grid step (default 1e-4 s_max)");
    limit->add_option("--s-max", lp.s_max, "Horizon (default from the drift)");
    limit->add_option("--replicas,--runs", limit_count, "Number of runs");
    limit->add_option("--seed", limit_seed);
    limit->add_option("--out", limit_out, "CSV output (default stdout)");
    limit->add_option("--threads", limit_threads)->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (theory->parsed()) {
            const ExperimentConfig cfg = theory_opts.resolve();
            const double n = theory_n ? *theory_n : static_cast<double>(cfg.n());
            with_output(theory_opts.out, [&](std::ostream& os) { os << theory_report(cfg, n).dump(2) << '\n'; });
        } else if (generate->parsed()) {
            const ExperimentConfig cfg = gen_opts.resolve();
            Xoshiro256 rng = derive_stream(cfg.seed, 0);
            Multigraph g;
            if (simple) {
                const SimpleSample s = generate_simple(cfg.sequence.realized(), rng, max_attempts);
                std::cerr << "simple after " << s.attempts << " attempts\n";
                g = s.graph;
            } else {
                g = cfg.sequence.sample(rng);
            }
            with_output(gen_opts.out, [&](std::ostream& os) { write_edge_list(os, g); });
        } else if (explore_cmd->parsed()) {
            const ExperimentConfig cfg = exp_opts.resolve();
            Xoshiro256 rng = derive_stream(cfg.seed, 0);
            ExploreOptions opts;
            opts.until_steps = steps;
            opts.order = order == "lifo" ? ActiveOrder::lifo : ActiveOrder::fifo;
            const ExplorationTrace tr = explore(cfg.sequence.realized(), rng, opts);
            with_output(exp_opts.out, [&](std::ostream& os) { write_walk_csv(os, tr, every); });
            if (!components_out.empty()) {
                with_output(components_out, [&](std::ostream& os) {
                    os << "rank,size,nullity,start,end\n";
                    const auto ranked = tr.ranked_components();
                    for (std::size_t i = 0; i < ranked.size(); ++i) {
                        os << i + 1 << ',' << ranked[i].size << ',' << ranked[i].nullity << ',' << ranked[i].start << ','
                           << ranked[i].end << '\n';
                    }
                });
            }
        } else if (limit->parsed()) {
            if (!limit_config.empty()) {
                const ExperimentConfig cfg = load_any(limit_config);
                const double n = limit_n > 0.0 ? limit_n : static_cast<double>(cfg.n());
                const LimitParams derived = params_from_sequence(cfg.sequence.law(), n);
                lp.alpha0 = derived.alpha0;
                lp.alpha1 = derived.alpha1;
                lp.alpha2 = derived.alpha2;
                lp.beta = derived.beta;
            }
            lp.with_defaults();
            if (lp.horizon_short()) std::cerr << "warning: horizon short for the drift\n";
            const auto samples = run_limit(lp, limit_seed, limit_count, limit_threads, static_cast<std::size_t>(-1));
            with_output(limit_out, [&](std::ostream& os) {
                os << "run,rank,length,marks\n";
                os.precision(10);
                for (std::size_t k = 0; k < samples.size(); ++k) write_excursion_rows(os, k, samples[k]);
            });
        } else {
            for (int i = 0; i < 3; ++i) {
                if (!runs[i]->parsed()) continue;
                ExperimentConfig cfg = run_opts[i].resolve();
                cfg.regime = run_regimes[i];
                if (cfg.out_dir.empty()) throw std::invalid_argument("--out is required (or 'out' in the config)");
                const MCReport rep = run_experiment(cfg);
                const ReportPaths paths = emit_report(rep, cfg.out_dir);
                print_tests(rep);
                std::cout << "wrote " << paths.replicas_csv.string() << ", " << paths.summary_json.string() << '\n';
                return rep.verdict() ? 0 : 2;
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
