#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cmlab/harness.hpp"

using namespace cmlab;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir{CMLAB_SOURCE_DIR};

ExperimentConfig small_config(const std::string& regime, const json& rregular, int replicas = 12) {
    json j = {{"regime", regime},
              {"sequence", {{"rregular", rregular}, {"graph", "percolated"}}},
              {"replicas", replicas},
              {"seed", 77},
              {"explore_fraction", 0.5},
              {"limit_runs", 40}};
    return parse_config(j);
}

ExperimentConfig small_super(int replicas = 12) {
    return small_config("supercritical", {{"r", 3}, {"eps", 0.15}, {"n", 20000}}, replicas);
}

std::string replica_csv(const MCReport& rep) {
    std::ostringstream os;
    write_replica_csv(os, rep);
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cmlab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

/// First violation of the JSON Schema subset used by docs/summary.schema.json
/// (type, enum, required, properties, items), or an empty string.
std::string schema_error(const json& value, const json& schema, const std::string& where) {
    if (schema.contains("type")) {
        std::vector<std::string> types;
        if (schema["type"].is_array()) {
            for (const auto& t : schema["type"]) types.push_back(t.get<std::string>());
        } else {
            types.push_back(schema["type"].get<std::string>());
        }
        bool ok = false;
        for (const auto& t : types) {
            if (t == "object") ok |= value.is_object();
            if (t == "array") ok |= value.is_array();
            if (t == "string") ok |= value.is_string();
            if (t == "boolean") ok |= value.is_boolean();
            if (t == "null") ok |= value.is_null();
            if (t == "integer") ok |= value.is_number_integer();
            if (t == "number") ok |= value.is_number();
        }
        if (!ok) return where + ": wrong type";
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& e : schema["enum"]) found |= e == value;
        if (!found) return where + ": not in enum";
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!value.contains(key.get<std::string>())) return where + ": missing " + key.get<std::string>();
        }
    }
    if (schema.contains("properties") && value.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (!value.contains(key)) continue;
            if (auto e = schema_error(value[key], sub, where + "." + key); !e.empty()) return e;
        }
    }
    if (schema.contains("items") && value.is_array()) {
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (auto e = schema_error(value[i], schema["items"], where + "[" + std::to_string(i) + "]"); !e.empty()) return e;
        }
    }
    return {};
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
    const auto super = load_config((source_dir / "configs/supercritical.json").string());
    EXPECT_EQ(super.regime, Regime::supercritical);
    EXPECT_EQ(super.n(), 200000);
    EXPECT_EQ(super.replicas, 200);
    EXPECT_NEAR(super.sequence.p, 1.15 / 2.0, 1e-15);
    EXPECT_NO_THROW(super.validate());

    const auto sub = load_config((source_dir / "configs/subcritical.json").string());
    EXPECT_EQ(sub.regime, Regime::subcritical);
    EXPECT_NEAR(sub.sequence.p, 0.85 / 2.0, 1e-15);
    EXPECT_NEAR(0.15 * 0.15 * 0.15 * static_cast<double>(sub.n()), 700.0, 0.01);

    const auto crit = load_config((source_dir / "configs/critical.json").string());
    EXPECT_EQ(crit.regime, Regime::critical);
    EXPECT_EQ(crit.limit_runs, 2000);
    EXPECT_EQ(crit.top, 3);
    EXPECT_DOUBLE_EQ(crit.sequence.p, 0.5);
}

TEST(Config, CountsSequence) {
    const auto c = parse_config(json::parse(R"({"regime": "sub", "sequence": {"counts": {"1": 600, "2": 300, "3": 100}}})"));
    EXPECT_EQ(c.regime, Regime::subcritical);
    EXPECT_EQ(c.n(), 1000);
    EXPECT_EQ(c.sequence.realized().count(2), 300);
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.to_json()["sequence"]["counts"]["3"], 100);
}

TEST(Config, Rejections) {
    auto bad = [](const char* text) { return parse_config(json::parse(text)); };
    EXPECT_THROW(bad(R"({"regime": "hot", "sequence": {"counts": {"1": 2}}})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"regime": "critical"})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"sequence": {"rregular": {"r": 3, "n": 1000}}})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"sequence": {"rregular": {"r": 3, "p": 1.5, "n": 1000}}})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"sequence": {"rregular": {"r": 3, "p": 0.5, "n": 1001}}})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"sequence": {"rregular": {"r": 3, "p": 0.5, "n": 1000}, "graph": "other"}})"), std::invalid_argument);
    EXPECT_THROW(bad(R"({"sequence": {"other": {}}})"), std::invalid_argument);

    auto c = small_super();
    c.replicas = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_config("supercritical", {{"r", 3}, {"p", 0.6}, {"n", 998}});
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_super();
    c.alpha = 0.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = small_super();
    c.threads = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(load_config("/nonexistent/config.json"), std::runtime_error);
}

TEST(ParallelFor, CoversEveryIndexOnce) {
    for (int threads : {1, 2, 5}) {
        std::vector<std::atomic<int>> hits(1000);
        parallel_for(hits.size(), threads, [&](std::size_t k) { ++hits[k]; });
        for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
    }
}

TEST(ParallelFor, RethrowsTaskException) {
    for (int threads : {1, 3}) {
        EXPECT_THROW(parallel_for(100, threads,
                                  [](std::size_t k) {
                                      if (k == 37) throw std::runtime_error("boom");
                                  }),
                     std::runtime_error);
    }
}

TEST(Harness, RegimeGuards) {
    auto c = small_config("supercritical", {{"r", 3}, {"eps", -0.1}, {"n", 2000}}, 2);
    try {
        run_supercritical(c);
        FAIL() << "expected a regime mismatch";
    } catch (const std::domain_error& e) {
        EXPECT_NE(std::string(e.what()).find("regime mismatch"), std::string::npos);
    }
    // forcing skips the guard; the theory layer still rejects an undefined prediction
    c.force = true;
    try {
        run_supercritical(c);
        FAIL() << "expected the prediction to be rejected";
    } catch (const std::domain_error& e) {
        EXPECT_EQ(std::string(e.what()).find("regime mismatch"), std::string::npos);
    }
    auto near = small_config("critical", {{"r", 3}, {"p", 0.9}, {"n", 2000}}, 2);
    near.limit_runs = 2;
    EXPECT_THROW(run_critical(near), std::domain_error);
    near.force = true;
    EXPECT_NO_THROW(run_critical(near));

    auto s = small_config("subcritical", {{"r", 3}, {"eps", 0.1}, {"n", 2000}}, 2);
    EXPECT_THROW(run_subcritical(s), std::domain_error);

    auto k = small_config("critical", {{"r", 3}, {"p", 0.7}, {"n", 100000}}, 2);
    EXPECT_THROW(run_critical(k), std::domain_error);
}

TEST(Harness, SupercriticalMechanics) {
    const auto rep = run_supercritical(small_super());
    ASSERT_EQ(rep.rows.size(), 12u);
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const auto& r = rep.rows[k];
        EXPECT_EQ(r.replica, k);
        EXPECT_GE(r.L(0), r.L(1));
        std::int64_t profile = 0;
        for (auto c : r.L1_by_degree) profile += c;
        EXPECT_EQ(profile, r.L(0));
        EXPECT_EQ(r.explore, k % 2 == 0 ? ExploreCheck::agree : ExploreCheck::skipped);
    }
    for (const char* name : {"mean_L1_within_3se", "var_ratio_L1", "ks_L1_normal", "corr_L1_N1", "mean_N1_within_3se",
                             "var_ratio_N1", "ks_N1_normal", "L2_ratio_p95", "exploration_matches_union_find"}) {
        const auto* t = rep.find_test(name);
        ASSERT_NE(t, nullptr) << name;
        EXPECT_TRUE(std::isfinite(t->statistic)) << name;
    }
    EXPECT_TRUE(rep.find_test("exploration_matches_union_find")->pass);
    EXPECT_FALSE(rep.find_test("ks_N1_normal")->gating);
    EXPECT_EQ(rep.statistics["explore_checked"], 6);
    EXPECT_EQ(rep.plot.size(), 12u);
}

TEST(Harness, SubcriticalMechanics) {
    const auto c = small_config("subcritical", {{"r", 3}, {"eps", -0.15}, {"n", 20000}});
    const auto rep = run_subcritical(c);
    ASSERT_EQ(rep.rows.size(), 12u);
    for (const char* name : {"median_in_window", "ks_gumbel_shape", "ks_gumbel_location_scale_free",
                             "ks_gumbel_estimated_c", "delta_vs_closed_form", "exploration_matches_union_find"}) {
        ASSERT_NE(rep.find_test(name), nullptr) << name;
    }
    EXPECT_TRUE(rep.find_test("ks_gumbel_shape")->gating);
    EXPECT_FALSE(rep.find_test("ks_gumbel_estimated_c")->gating);
    EXPECT_TRUE(rep.find_test("exploration_matches_union_find")->pass);
    const double delta = rep.prediction["delta_n"].get<double>();
    const double centre = rep.prediction["window_centre"].get<double>();
    EXPECT_NEAR(delta * centre, std::log(67.5) - 2.5 * std::log(std::log(67.5)), 1e-9);
}

TEST(Harness, DeltaMatchesClosedFormAtEpsTenth) {
    const auto c = small_config("subcritical", {{"r", 3}, {"eps", -0.1}, {"n", 20000}}, 2);
    const auto rep = run_subcritical(c);
    const auto* t = rep.find_test("delta_vs_closed_form");
    ASSERT_NE(t, nullptr);
    EXPECT_NEAR(t->statistic, 1.0, 0.05);
    EXPECT_TRUE(t->pass);
}

TEST(Harness, CriticalMechanics) {
    const auto c = small_config("critical", {{"r", 3}, {"p", 0.5}, {"n", 5000}});
    const auto rep = run_critical(c);
    ASSERT_EQ(rep.rows.size(), 12u);
    ASSERT_EQ(rep.limit_runs.size(), 40u);
    for (const auto& s : rep.limit_runs) EXPECT_LE(s.excursions.size(), 3u);
    EXPECT_NEAR(rep.limit_params["alpha0"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(rep.limit_params["alpha2"].get<double>(), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(rep.limit_params["beta"].get<double>(), 2.0 / 3.0, 1e-12);
    EXPECT_NE(rep.find_test("ks_L1_vs_limit"), nullptr);
    for (const char* name : {"chi2_nullity_rank1", "chi2_nullity_rank2", "chi2_nullity_rank3"}) {
        ASSERT_NE(rep.find_test(name), nullptr) << name;
    }
    EXPECT_TRUE(rep.find_test("chi2_nullity_rank1")->gating);
    EXPECT_FALSE(rep.find_test("chi2_nullity_rank2")->gating);
    EXPECT_TRUE(rep.find_test("exploration_matches_union_find")->pass);
}

TEST(Harness, LimitRunsAreIndependentOfThreads) {
    const auto p = params_from_sequence(rregular_percolation_distribution(3, 0.5), 1e5);
    const auto a = run_limit(p, 5, 30, 1);
    const auto b = run_limit(p, 5, 30, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        ASSERT_EQ(a[k].excursions.size(), b[k].excursions.size());
        for (std::size_t i = 0; i < a[k].excursions.size(); ++i) {
            EXPECT_EQ(a[k].excursions[i].length, b[k].excursions[i].length);
            EXPECT_EQ(a[k].excursions[i].marks, b[k].excursions[i].marks);
        }
    }
}

TEST(Determinism, SameSeedSameCsv) {
    const auto c = small_super();
    EXPECT_EQ(replica_csv(run_supercritical(c)), replica_csv(run_supercritical(c)));
}

TEST(Determinism, ThreadCountDoesNotChangeRows) {
    auto c = small_super();
    const std::string one = replica_csv(run_supercritical(c));
    c.threads = 3;
    EXPECT_EQ(replica_csv(run_supercritical(c)), one);
}

TEST(Determinism, AddingReplicasKeepsEarlierOnes) {
    const auto a = run_supercritical(small_super(6));
    const auto b = run_supercritical(small_super(12));
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].sizes, b.rows[k].sizes);
        EXPECT_EQ(a.rows[k].nullities, b.rows[k].nullities);
        EXPECT_EQ(a.rows[k].edges, b.rows[k].edges);
        EXPECT_EQ(a.rows[k].L1_by_degree, b.rows[k].L1_by_degree);
    }
}

TEST(Determinism, DifferentSeedsDiffer) {
    auto c = small_super(4);
    const std::string a = replica_csv(run_supercritical(c));
    c.seed += 1;
    EXPECT_NE(replica_csv(run_supercritical(c)), a);
}

TEST(Report, CsvLayout) {
    const auto rep = run_supercritical(small_super(3));
    std::istringstream in(replica_csv(rep));
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("replica,L1,N1,L2,N2,L3,N3,components,edges,explore_check,L1_d0", 0), 0u);
    int rows = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), std::count(header.begin(), header.end(), ','));
        EXPECT_EQ(line.rfind(std::to_string(rows) + ",", 0), 0u);
        ++rows;
    }
    EXPECT_EQ(rows, 3);
}

TEST(Report, EmitWritesFilesAndSummaryMatchesSchema) {
    const auto rep = run_critical(small_config("critical", {{"r", 3}, {"p", 0.5}, {"n", 5000}}, 4));
    const fs::path dir = scratch_dir("emit");
    const auto paths = emit_report(rep, dir);
    EXPECT_TRUE(fs::exists(paths.replicas_csv));
    EXPECT_TRUE(fs::exists(paths.plot_csv));
    ASSERT_FALSE(paths.limit_csv.empty());
    EXPECT_EQ(slurp(paths.limit_csv).rfind("run,rank,length,marks\n", 0), 0u);
    EXPECT_EQ(slurp(paths.replicas_csv), replica_csv(rep));

    const json summary = json::parse(slurp(paths.summary_json));
    const json schema = json::parse(slurp(source_dir / "docs/summary.schema.json"));
    EXPECT_EQ(schema_error(summary, schema, "summary"), "");
    EXPECT_EQ(summary["rng"]["algorithm"], std::string(Xoshiro256::algorithm));
    EXPECT_EQ(summary["verdict"].get<bool>(), rep.verdict());
    EXPECT_EQ(summary["tests"].size(), rep.tests.size());

    for (const auto& r : {run_supercritical(small_super(3)),
                          run_subcritical(small_config("subcritical", {{"r", 3}, {"eps", -0.15}, {"n", 20000}}, 3))}) {
        EXPECT_EQ(schema_error(summary_json(r), schema, "summary"), "");
    }
    fs::remove_all(dir);
}

TEST(Report, SchemaCheckCatchesBadSummary) {
    const json schema = json::parse(slurp(source_dir / "docs/summary.schema.json"));
    const json good = summary_json(run_supercritical(small_super(3)));
    json s = good;
    s.erase("verdict");
    EXPECT_EQ(schema_error(s, schema, "summary"), "summary: missing verdict");
    s = good;
    s["tests"][0]["p_value"] = "n/a";
    EXPECT_EQ(schema_error(s, schema, "summary"), "summary.tests[0].p_value: wrong type");
    s = good;
    s["regime"] = "warm";
    EXPECT_EQ(schema_error(s, schema, "summary"), "summary.regime: not in enum");
}

TEST(Report, EmitErrors) {
    MCReport empty;
    const fs::path dir = scratch_dir("empty");
    EXPECT_THROW(emit_report(empty, dir), std::invalid_argument);
    EXPECT_FALSE(fs::exists(dir / "replicas.csv"));

    const auto rep = run_supercritical(small_super(2));
    const fs::path blocker = scratch_dir("blocker");
    std::ofstream(blocker) << "file";
    EXPECT_THROW(emit_report(rep, blocker / "sub"), std::runtime_error);
    fs::remove(blocker);
}

TEST(EarlyStop, TopComponentsMatchFullRun) {
    // critical 3-regular percolation, stopped after omega n^{2/3} steps
    const std::int64_t n = 10000;
    const DegreeSequence seq = realize(rregular_percolation_distribution(3, 0.5), n);
    const auto T = static_cast<std::int64_t>(10.0 * std::pow(static_cast<double>(n), 2.0 / 3.0));
    int within = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        Xoshiro256 r1 = derive_stream(99, k), r2 = derive_stream(99, k);
        const auto full = explore(seq, r1);
        const auto early = explore(seq, r2, ExploreOptions::until(T));
        ASSERT_LE(early.components.size(), full.components.size());
        for (std::size_t i = 0; i < early.components.size(); ++i) {
            ASSERT_EQ(early.components[i].size, full.components[i].size);
            ASSERT_EQ(early.components[i].nullity, full.components[i].nullity);
        }
        const auto top_full = full.ranked_components();
        bool finished = true;
        for (std::size_t i = 0; i < 3; ++i) finished &= top_full[i].end <= T;
        if (!finished) continue;
        ++within;
        const auto top_early = early.ranked_components();
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(top_early[i].size, top_full[i].size);
            EXPECT_EQ(top_early[i].nullity, top_full[i].nullity);
        }
    }
    EXPECT_GE(within, 50);
}
