#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cmlab/components.hpp"
#include "cmlab/config.hpp"
#include "cmlab/critical.hpp"
#include "cmlab/exploration.hpp"
#include "cmlab/generator.hpp"
#include "cmlab/stats.hpp"
#include "cmlab/theory.hpp"

namespace cmlab {

/// Runs fn(k) for k = 0..count-1 on `threads` workers pulling from a shared
/// counter. The first exception thrown by any task is rethrown after the join.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2) {
        for (std::size_t k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= count) return;
                try {
                    fn(k);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

enum class ExploreCheck { skipped, agree, disagree };

struct ReplicaRow {
    std::uint64_t replica = 0;
    std::vector<std::int64_t> sizes;      ///< top components, largest first
    std::vector<std::int64_t> nullities;
    std::int64_t components = 0;
    std::int64_t edges = 0;
    std::vector<std::int64_t> L1_by_degree;
    ExploreCheck explore = ExploreCheck::skipped;
    double seconds = 0.0;

    std::int64_t L(std::size_t i) const { return i < sizes.size() ? sizes[i] : 0; }
    std::int64_t N(std::size_t i) const { return i < nullities.size() ? nullities[i] : 0; }
};

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = -1.0;  ///< negative when the check has no p-value
    bool pass = false;
    bool gating = true;
    std::string note;
};

struct MCReport {
    Regime regime = Regime::supercritical;
    ExperimentConfig config;
    json prediction = json::object();
    std::vector<ReplicaRow> rows;
    json statistics = json::object();
    std::vector<TestResult> tests;
    std::string plot_reference;
    std::vector<std::pair<double, double>> plot;  ///< (sample quantile, reference quantile)
    std::vector<ExcursionSample> limit_runs;
    json limit_params = json::object();
    double wall_seconds = 0.0;

    bool verdict() const {
        for (const auto& t : tests) {
            if (t.gating && !t.pass) return false;
        }
        return true;
    }

    const TestResult* find_test(const std::string& name) const {
        for (const auto& t : tests) {
            if (t.name == name) return &t;
        }
        return nullptr;
    }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::size_t explore_stride(double fraction) {
    if (fraction <= 0.0) return 0;
    return static_cast<std::size_t>(std::max(1.0, std::round(1.0 / fraction)));
}

constexpr std::uint64_t explore_tag = 1;
constexpr std::uint64_t limit_tag = 2;

inline ReplicaRow run_replica(const ExperimentConfig& cfg, std::size_t k, std::size_t top, bool check) {
    const auto t0 = std::chrono::steady_clock::now();
    Xoshiro256 rng = derive_stream(cfg.seed, k);
    const Multigraph g = cfg.sequence.sample(rng);
    const ComponentStats st = component_stats(g);

    ReplicaRow row;
    row.replica = k;
    for (std::size_t i = 0; i < std::min(top, st.count()); ++i) {
        row.sizes.push_back(st.components[i].size);
        row.nullities.push_back(st.components[i].nullity);
    }
    row.components = static_cast<std::int64_t>(st.count());
    row.edges = static_cast<std::int64_t>(g.edge_count());
    const auto profile = largest_component_degree_profile(g, st);
    int dmax = 0;
    for (const auto& [d, c] : profile) dmax = std::max(dmax, d);
    row.L1_by_degree.assign(static_cast<std::size_t>(std::max(dmax, cfg.sequence.law().dmax())) + 1, 0);
    for (const auto& [d, c] : profile) row.L1_by_degree[static_cast<std::size_t>(d)] = c;

    if (check) {
        Xoshiro256 erng = derive_stream(cfg.seed, k, explore_tag);
        const ExplorationTrace tr = replay_on_pairing(pairing_of(g), erng);
        row.explore = tr.size_nullity_multiset() == st.size_nullity_multiset() ? ExploreCheck::agree
                                                                                 : ExploreCheck::disagree;
    }
    row.seconds = seconds_since(t0);
    return row;
}

inline std::vector<ReplicaRow> run_replicas(const ExperimentConfig& cfg, std::size_t top) {
    std::vector<ReplicaRow> rows(static_cast<std::size_t>(cfg.replicas));
    const std::size_t stride = explore_stride(cfg.explore_fraction);
    parallel_for(rows.size(), cfg.threads, [&](std::size_t k) {
        rows[k] = run_replica(cfg, k, top, stride != 0 && k % stride == 0);
    });
    return rows;
}

inline json stat_json(const stats::TestStatistic& t) {
    json j = {{"statistic", t.statistic}, {"p_value", t.p_value}};
    if (t.dof > 0) j["dof"] = t.dof;
    return j;
}

inline TestResult explore_test(const std::vector<ReplicaRow>& rows, json& statistics) {
    std::int64_t checked = 0, bad = 0;
    for (const auto& r : rows) {
        if (r.explore == ExploreCheck::skipped) continue;
        ++checked;
        if (r.explore == ExploreCheck::disagree) ++bad;
    }
    statistics["explore_checked"] = checked;
    statistics["explore_disagreements"] = bad;
    return {"exploration_matches_union_find", static_cast<double>(bad), -1.0, bad == 0, true,
            std::to_string(checked) + " replicas cross-checked"};
}

/// Pairs sorted sample values with reference quantiles at (i + 0.5) / R.
inline std::vector<std::pair<double, double>> qq(std::vector<double> sample, const std::function<double(double)>& inv) {
    std::sort(sample.begin(), sample.end());
    std::vector<std::pair<double, double>> out;
    const double R = static_cast<double>(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) out.emplace_back(sample[i], inv((static_cast<double>(i) + 0.5) / R));
    return out;
}

inline double lambda_of(const ExperimentConfig& cfg) { return branching_factor(cfg.sequence.law()); }

}  // namespace detail

inline json to_json(const SupercriticalPrediction& p) {
    return {{"n", p.n},           {"epsilon", p.epsilon}, {"Lambda", p.Lambda},     {"z", p.z},
            {"rho", p.rho},       {"rho_star", p.rho_star}, {"mean_L1", p.mean_L1}, {"var_L1", p.var_L1},
            {"mean_N1", p.mean_N1}, {"var_N1", p.var_N1}, {"cov", p.cov},           {"corr", p.corr},
            {"slope_at_rho", p.slope_at_rho}, {"L2_scale", p.L2_scale}, {"L1_by_degree", p.L1_by_degree},
            {"warnings", p.warnings}};
}

inline json to_json(const SubcriticalPrediction& p) {
    return {{"n", p.n},
            {"epsilon", p.epsilon},
            {"Lambda", p.Lambda},
            {"v0", p.v0},
            {"a_n", p.a_n},
            {"delta_n", p.delta_n},
            {"delta_asymptotic", p.delta_asymptotic},
            {"c2z", p.c2z},
            {"c2z_method", "exact first-passage DP, tail divided by sum_{s>=t} s^{-3/2} e^{-delta s}"},
            {"c2z_flagged", p.c2z_flagged},
            {"c2z_heuristic", p.c2z_heuristic},
            {"c", p.c},
            {"c_heuristic", p.c_heuristic},
            {"window_centre", p.window(0.0)},
            {"warnings", p.warnings}};
}

inline json to_json(const LimitParams& p) {
    return {{"alpha0", p.alpha0}, {"alpha1", p.alpha1}, {"alpha2", p.alpha2},
            {"beta", p.beta},     {"ds", p.ds},         {"s_max", p.s_max}};
}

inline MCReport run_supercritical(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const DegreeDistribution law = cfg.sequence.law();
    if (!(detail::lambda_of(cfg) > 1.0) && !cfg.force) throw std::domain_error("regime mismatch: lambda <= 1 (use --force)");
    const double n = static_cast<double>(cfg.n());
    const SupercriticalPrediction pred = supercritical_prediction(law, n);

    MCReport rep;
    rep.regime = Regime::supercritical;
    rep.config = cfg;
    rep.prediction = to_json(pred);
    rep.rows = detail::run_replicas(cfg, 2);

    std::vector<double> L1, N1, L2ratio, zL, zN;
    for (const auto& r : rep.rows) {
        L1.push_back(static_cast<double>(r.L(0)));
        N1.push_back(static_cast<double>(r.N(0)));
        L2ratio.push_back(static_cast<double>(r.L(1)) / pred.L2_scale);
        zL.push_back((L1.back() - pred.mean_L1) / std::sqrt(pred.var_L1));
        zN.push_back((N1.back() - pred.mean_N1) / std::sqrt(pred.var_N1));
    }
    const double R = static_cast<double>(rep.rows.size());
    const double mL = stats::mean(L1), vL = stats::variance(L1);
    const double mN = stats::mean(N1), vN = stats::variance(N1);
    const double seL = std::sqrt(vL / R), seN = std::sqrt(vN / R);
    const double corr = stats::correlation(L1, N1);
    const double l2p95 = stats::quantile(L2ratio, 0.95);
    const auto ksL = stats::ks_one_sample(zL, stats::normal_cdf);
    const auto ksN = stats::ks_one_sample(zN, stats::normal_cdf);

    json& s = rep.statistics;
    s["mean_L1"] = mL;
    s["var_L1"] = vL;
    s["se_L1"] = seL;
    s["z_mean_L1"] = (mL - pred.mean_L1) / seL;
    s["var_ratio_L1"] = vL / pred.var_L1;
    if (cfg.sequence.kind == SequenceSpec::Kind::rregular && cfg.sequence.r >= 3) {
        const RRegularClosedForm cor = rregular_closed_form(cfg.sequence.r, pred.epsilon, n);
        s["var_ratio_L1_closed_form"] = vL / (cor.sigma2 * n);
        s["rho_closed_form"] = cor.rho0;
    }
    s["mean_N1"] = mN;
    s["var_N1"] = vN;
    s["se_N1"] = seN;
    s["z_mean_N1"] = (mN - pred.mean_N1) / seN;
    s["var_ratio_N1"] = vN / pred.var_N1;
    s["cov_L1_N1"] = stats::covariance(L1, N1);
    s["corr_L1_N1"] = corr;
    s["L2_ratio_median"] = stats::median(L2ratio);
    s["L2_ratio_p95"] = l2p95;
    s["ks_L1_normal"] = detail::stat_json(ksL);
    s["ks_N1_normal"] = detail::stat_json(ksN);

    const double a = cfg.alpha;
    const double zmL = (mL - pred.mean_L1) / seL, zmN = (mN - pred.mean_N1) / seN;
    rep.tests.push_back({"mean_L1_within_3se", zmL, -1.0, std::fabs(zmL) <= 3.0, true, "|mean - rho n| / SE"});
    rep.tests.push_back({"var_ratio_L1", vL / pred.var_L1, -1.0, vL / pred.var_L1 >= 0.75 && vL / pred.var_L1 <= 1.25, true, "in [0.75, 1.25]"});
    rep.tests.push_back({"ks_L1_normal", ksL.statistic, ksL.p_value, ksL.p_value > a, true, "theory-standardized"});
    rep.tests.push_back({"corr_L1_N1", corr, -1.0, corr >= 0.65 && corr <= 0.88, true, "in [0.65, 0.88]"});
    rep.tests.push_back({"mean_N1_within_3se", zmN, -1.0, std::fabs(zmN) <= 3.0, true, "|mean - rho* n| / SE"});
    rep.tests.push_back({"var_ratio_N1", vN / pred.var_N1, -1.0, vN / pred.var_N1 >= 0.7 && vN / pred.var_N1 <= 1.3, true, "in [0.7, 1.3]"});
    rep.tests.push_back({"ks_N1_normal", ksN.statistic, ksN.p_value, ksN.p_value > a, false, "theory-standardized, reported only"});
    rep.tests.push_back({"L2_ratio_p95", l2p95, -1.0, l2p95 <= 10.0, true, "95th percentile of L2 / (eps^-2 log(eps^3 n)) <= 10"});
    rep.tests.push_back(detail::explore_test(rep.rows, s));

    rep.plot_reference = "standard normal";
    rep.plot = detail::qq(zL, stats::normal_quantile);
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

inline MCReport run_subcritical(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const DegreeDistribution law = cfg.sequence.law();
    if (!(detail::lambda_of(cfg) < 1.0) && !cfg.force) throw std::domain_error("regime mismatch: lambda >= 1 (use --force)");
    const double n = static_cast<double>(cfg.n());
    const SubcriticalPrediction pred = subcritical_prediction(law, n);

    MCReport rep;
    rep.regime = Regime::subcritical;
    rep.config = cfg;
    rep.prediction = to_json(pred);
    rep.rows = detail::run_replicas(cfg, 2);

    std::vector<double> x;
    for (const auto& r : rep.rows) x.push_back(pred.standardize(static_cast<double>(r.L(0))));
    const double med = stats::median(x);
    const double loc = med + std::log(std::log(2.0));
    const auto ks_shape = stats::ks_one_sample(x, [loc](double v) { return stats::gumbel_cdf(v - loc); });
    const auto ks_c = stats::ks_one_sample(x, [&pred](double v) { return pred.limit_cdf(v); });

    json& s = rep.statistics;
    std::vector<double> L1;
    for (const auto& r : rep.rows) L1.push_back(static_cast<double>(r.L(0)));
    s["median_L1"] = stats::median(L1);
    s["mean_L1"] = stats::mean(L1);
    s["window_centre"] = pred.window(0.0);
    s["median_x"] = med;
    s["gumbel_location"] = loc;
    s["implied_c"] = std::exp(loc);
    s["ks_gumbel_shape"] = detail::stat_json(ks_shape);
    s["ks_gumbel_estimated_c"] = detail::stat_json(ks_c);
    // moment fit of a Gumbel with free location and scale, for diagnosis
    const double fit_scale = std::sqrt(stats::variance(x) * 6.0) / std::numbers::pi;
    const double fit_loc = stats::mean(x) - std::numbers::egamma * fit_scale;
    const auto ks_free = stats::ks_one_sample(x, [=](double v) { return stats::gumbel_cdf((v - fit_loc) / fit_scale); });
    s["gumbel_fit_scale"] = fit_scale;
    s["gumbel_fit_location"] = fit_loc;
    s["ks_gumbel_location_scale_free"] = detail::stat_json(ks_free);

    rep.tests.push_back({"median_in_window", med, -1.0, std::fabs(med) <= 2.0, true, "|delta_n median(L1) - centre| <= 2"});
    rep.tests.push_back({"ks_gumbel_shape", ks_shape.statistic, ks_shape.p_value, ks_shape.p_value > cfg.alpha, true, "location from the sample median"});
    rep.tests.push_back({"ks_gumbel_location_scale_free", ks_free.statistic, ks_free.p_value, ks_free.p_value > cfg.alpha, false, "moment-fitted scale; reported only"});
    rep.tests.push_back({"ks_gumbel_estimated_c", ks_c.statistic, ks_c.p_value, ks_c.p_value > cfg.alpha, false, "c from the estimated tail constant; reported only"});
    if (cfg.sequence.kind == SequenceSpec::Kind::rregular && cfg.sequence.r >= 3) {
        const double eps = 1.0 - detail::lambda_of(cfg);
        const RRegularClosedForm cor = rregular_closed_form(cfg.sequence.r, eps, n);
        const double ratio = pred.delta_n / cor.delta;
        s["delta_closed_form"] = cor.delta;
        rep.tests.push_back({"delta_vs_closed_form", ratio, -1.0, std::fabs(ratio - 1.0) <= 0.05, false, "small-eps approximation, reported only"});
    }
    rep.tests.push_back(detail::explore_test(rep.rows, s));

    rep.plot_reference = "Gumbel, location freed";
    rep.plot = detail::qq(x, [loc](double p) { return loc - std::log(-std::log(p)); });
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

/// Runs `runs` independent simulations of the limit process on per-run streams.
inline std::vector<ExcursionSample> run_limit(const LimitParams& params, std::uint64_t seed, std::size_t runs,
                                              int threads, std::size_t keep = 3) {
    std::vector<ExcursionSample> out(runs);
    parallel_for(runs, threads, [&](std::size_t k) {
        Xoshiro256 rng = derive_stream(seed, k, detail::limit_tag);
        ExcursionSample s = simulate_limit(params, rng);
        if (s.excursions.size() > keep) s.excursions.resize(keep);
        out[k] = std::move(s);
    });
    return out;
}

inline MCReport run_critical(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const DegreeDistribution law = cfg.sequence.law();
    const double n = static_cast<double>(cfg.n());
    const LimitParams params = params_from_sequence(law, n);
    if (std::fabs(params.alpha1) > 10.0 && !cfg.force) throw std::domain_error("regime mismatch: |n^{1/3}(lambda - 1)| > 10 (use --force)");

    MCReport rep;
    rep.regime = Regime::critical;
    rep.config = cfg;
    rep.limit_params = to_json(params);
    rep.prediction = {{"limit", rep.limit_params}, {"lambda", detail::lambda_of(cfg)}};
    const auto top = static_cast<std::size_t>(cfg.top);
    rep.rows = detail::run_replicas(cfg, top);
    rep.limit_runs = run_limit(params, cfg.seed, static_cast<std::size_t>(cfg.limit_runs), cfg.threads, top);

    const double scale = std::pow(n, -2.0 / 3.0);
    std::vector<double> graph_L1, limit_L1;
    for (const auto& r : rep.rows) graph_L1.push_back(static_cast<double>(r.L(0)) * scale);
    std::int64_t horizon_open = 0;
    for (const auto& s : rep.limit_runs) {
        limit_L1.push_back(s.largest());
        if (s.open_at_horizon()) ++horizon_open;
    }
    const auto ks = stats::ks_two_sample(graph_L1, limit_L1);

    json& s = rep.statistics;
    s["median_rescaled_L1"] = stats::median(graph_L1);
    s["median_limit_L1"] = stats::median(limit_L1);
    s["mean_rescaled_L1"] = stats::mean(graph_L1);
    s["mean_limit_L1"] = stats::mean(limit_L1);
    s["limit_runs_open_at_horizon"] = horizon_open;
    s["ks_L1_vs_limit"] = detail::stat_json(ks);
    rep.tests.push_back({"ks_L1_vs_limit", ks.statistic, ks.p_value, ks.p_value > cfg.alpha, true, "two-sample KS on n^{-2/3} L1"});

    for (std::size_t j = 0; j < top; ++j) {
        std::vector<std::int64_t> gn, ln;
        for (const auto& r : rep.rows) gn.push_back(r.N(j));
        for (const auto& ls : rep.limit_runs) ln.push_back(j < ls.excursions.size() ? ls.excursions[j].marks : 0);
        const auto chi = stats::chi_square_homogeneity(stats::bin_counts(gn, 8), stats::bin_counts(ln, 8));
        const std::string name = "chi2_nullity_rank" + std::to_string(j + 1);
        s[name] = detail::stat_json(chi);
        rep.tests.push_back({name, chi.statistic, chi.p_value, chi.p_value > cfg.alpha, j == 0, "nullity vs marks, binned 0..7+"});
    }
    rep.tests.push_back(detail::explore_test(rep.rows, s));

    std::vector<double> sorted_limit = limit_L1;
    std::sort(sorted_limit.begin(), sorted_limit.end());
    rep.plot_reference = "limit process largest excursion";
    rep.plot = detail::qq(graph_L1, [&](double p) { return stats::quantile(sorted_limit, p); });
    rep.wall_seconds = detail::seconds_since(t0);
    return rep;
}

inline MCReport run_experiment(const ExperimentConfig& cfg) {
    switch (cfg.regime) {
        case Regime::supercritical: return run_supercritical(cfg);
        case Regime::subcritical: return run_subcritical(cfg);
        case Regime::critical: return run_critical(cfg);
    }
    throw std::invalid_argument("unknown regime");
}

/// Per-replica rows; deterministic for a given (config, seed).
inline void write_replica_csv(std::ostream& os, const MCReport& rep) {
    std::size_t width = 0;
    for (const auto& r : rep.rows) width = std::max(width, r.L1_by_degree.size());
    os << "replica,L1,N1,L2,N2,L3,N3,components,edges,explore_check";
    for (std::size_t d = 0; d < width; ++d) os << ",L1_d" << d;
    os << '\n';
    for (const auto& r : rep.rows) {
        os << r.replica << ',' << r.L(0) << ',' << r.N(0) << ',' << r.L(1) << ',' << r.N(1) << ',' << r.L(2) << ','
           << r.N(2) << ',' << r.components << ',' << r.edges << ','
           << (r.explore == ExploreCheck::skipped ? "skip" : r.explore == ExploreCheck::agree ? "agree" : "disagree");
        for (std::size_t d = 0; d < width; ++d) os << ',' << (d < r.L1_by_degree.size() ? r.L1_by_degree[d] : 0);
        os << '\n';
    }
}

inline json summary_json(const MCReport& rep) {
    json tests = json::array();
    for (const auto& t : rep.tests) {
        json jt = {{"name", t.name}, {"statistic", t.statistic}, {"pass", t.pass}, {"gating", t.gating}, {"note", t.note}};
        jt["p_value"] = t.p_value >= 0.0 ? json(t.p_value) : json(nullptr);
        tests.push_back(jt);
    }
    double replica_seconds = 0.0;
    for (const auto& r : rep.rows) replica_seconds += r.seconds;
    return {{"schema_version", 1},
            {"regime", to_string(rep.regime)},
            {"config", rep.config.to_json()},
            {"rng", {{"algorithm", std::string(Xoshiro256::algorithm)},
                     {"seed", rep.config.seed},
                     {"stream_derivation", "replica k: seed xor splitmix64(k + 0x632BE59BD9B4E019)"}}},
            {"prediction", rep.prediction},
            {"statistics", rep.statistics},
            {"tests", tests},
            {"verdict", rep.verdict()},
            {"timing", {{"wall_seconds", rep.wall_seconds},
                        {"replica_seconds_total", replica_seconds},
                        {"replica_seconds_mean", replica_seconds / static_cast<double>(std::max<std::size_t>(rep.rows.size(), 1))}}}};
}

struct ReportPaths {
    std::filesystem::path replicas_csv;
    std::filesystem::path summary_json;
    std::filesystem::path plot_csv;
    std::filesystem::path limit_csv;  ///< empty unless the report has limit runs
};

/// Writes replicas.csv, summary.json, plot.csv (and limit.csv for critical
/// runs) into `dir`, creating it if needed.
inline ReportPaths emit_report(const MCReport& rep, const std::filesystem::path& dir) {
    if (rep.rows.empty()) throw std::invalid_argument("report has no replicas");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        return f;
    };
    ReportPaths paths{dir / "replicas.csv", dir / "summary.json", dir / "plot.csv", {}};
    {
        auto f = open(paths.replicas_csv);
        write_replica_csv(f, rep);
    }
    {
        auto f = open(paths.summary_json);
        f << summary_json(rep).dump(2) << '\n';
    }
    {
        auto f = open(paths.plot_csv);
        f << "i,sample,reference\n";
        f.precision(10);
        for (std::size_t i = 0; i < rep.plot.size(); ++i) f << i << ',' << rep.plot[i].first << ',' << rep.plot[i].second << '\n';
    }
    if (!rep.limit_runs.empty()) {
        paths.limit_csv = dir / "limit.csv";
        auto f = open(paths.limit_csv);
        f << "run,rank,length,marks\n";
        f.precision(10);
        for (std::size_t k = 0; k < rep.limit_runs.size(); ++k) write_excursion_rows(f, k, rep.limit_runs[k]);
    }
    return paths;
}

}  // namespace cmlab
