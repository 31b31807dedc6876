#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmlab/degree_sequence.hpp"
#include "cmlab/generator.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {

using json = nlohmann::json;

enum class Regime { supercritical, subcritical, critical };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::supercritical: return "supercritical";
        case Regime::subcritical: return "subcritical";
        case Regime::critical: return "critical";
    }
    return "unknown";
}

inline Regime parse_regime(const std::string& s) {
    if (s == "supercritical" || s == "super") return Regime::supercritical;
    if (s == "subcritical" || s == "sub") return Regime::subcritical;
    if (s == "critical") return Regime::critical;
    throw std::invalid_argument("unknown regime '" + s + "'");
}

/// Either explicit degree counts or an r-regular graph with edge percolation.
struct SequenceSpec {
    enum class Kind { counts, rregular };
    Kind kind = Kind::counts;
    DegreeSequence counts;
    int r = 3;
    double p = 1.0;
    std::int64_t n = 0;
    /// r-regular only: percolate an actual r-regular multigraph (true) or use
    /// fixed counts rounded from the binomial law (false).
    bool percolate_graph = true;

    std::int64_t vertices() const { return kind == Kind::counts ? counts.n() : n; }

    /// Degree law used for predictions: the exact fractions of explicit
    /// counts, or the idealized Binomial(r, p) law.
    DegreeDistribution law() const {
        if (kind == Kind::counts) return DegreeDistribution::of(counts);
        return rregular_percolation_distribution(r, p);
    }

    /// A concrete degree sequence (rounded from the law for r-regular specs).
    DegreeSequence realized() const {
        if (kind == Kind::counts) return counts;
        return realize(rregular_percolation_distribution(r, p), n);
    }

    Multigraph sample(Xoshiro256& rng) const {
        if (kind == Kind::rregular && percolate_graph) {
            const std::vector<int> degrees(static_cast<std::size_t>(n), r);
            const Multigraph g = to_multigraph(generate_pairing(degrees, rng));
            return percolate(g, p, rng);
        }
        return to_multigraph(generate_pairing(realized(), rng));
    }

    json to_json() const {
        if (kind == Kind::counts) {
            json c = json::object();
            for (int d = 0; d <= counts.dmax(); ++d) {
                if (counts.count(d) > 0) c[std::to_string(d)] = counts.count(d);
            }
            return {{"counts", c}};
        }
        return {{"rregular", {{"r", r}, {"p", p}, {"n", n}}}, {"graph", percolate_graph ? "percolated" : "fixed"}};
    }
};

/// Parses {"counts": {"d": n_d, ...}} or {"rregular": {"r", "p" | "eps", "n"}}.
inline SequenceSpec parse_sequence(const json& j) {
    SequenceSpec s;
    if (j.contains("counts")) {
        std::map<int, std::int64_t> m;
        for (const auto& [key, value] : j.at("counts").items()) m[std::stoi(key)] = value.get<std::int64_t>();
        s.kind = SequenceSpec::Kind::counts;
        s.counts = DegreeSequence::from_map(m);
        s.n = s.counts.n();
        return s;
    }
    if (j.contains("rregular")) {
        const json& rr = j.at("rregular");
        s.kind = SequenceSpec::Kind::rregular;
        s.r = rr.at("r").get<int>();
        if (s.r < 1) throw std::invalid_argument("r must be positive");
        s.n = rr.at("n").get<std::int64_t>();
        if (rr.contains("p")) {
            s.p = rr.at("p").get<double>();
        } else if (rr.contains("eps")) {
            s.p = (1.0 + rr.at("eps").get<double>()) / (s.r - 1.0);
        } else {
            throw std::invalid_argument("rregular spec needs 'p' or 'eps'");
        }
        if (!(s.p >= 0.0 && s.p <= 1.0)) throw std::invalid_argument("percolation probability outside [0,1]");
        if ((s.n * s.r) % 2 != 0) throw std::invalid_argument("n * r must be even");
        if (j.contains("graph")) {
            const std::string g = j.at("graph").get<std::string>();
            if (g == "percolated") s.percolate_graph = true;
            else if (g == "fixed") s.percolate_graph = false;
            else throw std::invalid_argument("graph must be 'percolated' or 'fixed'");
        }
        return s;
    }
    throw std::invalid_argument("sequence needs 'counts' or 'rregular'");
}

struct ExperimentConfig {
    Regime regime = Regime::supercritical;
    SequenceSpec sequence;
    int replicas = 100;
    std::uint64_t seed = 1;
    double alpha = 0.01;
    int threads = 1;
    bool force = false;
    double explore_fraction = 0.1;
    int limit_runs = 2000;   ///< critical: reference runs of the limit process
    int top = 3;             ///< critical: components compared per replica
    std::string out_dir;

    std::int64_t n() const { return sequence.vertices(); }

    void validate() const {
        if (replicas < 2) throw std::invalid_argument("replicas must be >= 2");
        if (n() < 1000) throw std::invalid_argument("n must be >= 1000");
        if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
        if (threads < 1) throw std::invalid_argument("threads must be >= 1");
        if (!(explore_fraction >= 0.0 && explore_fraction <= 1.0)) throw std::invalid_argument("explore_fraction outside [0,1]");
        if (limit_runs < 2) throw std::invalid_argument("limit_runs must be >= 2");
        if (top < 1) throw std::invalid_argument("top must be >= 1");
    }

    json to_json() const {
        return {{"regime", to_string(regime)}, {"sequence", sequence.to_json()}, {"n", n()},
                {"replicas", replicas},        {"seed", seed},                   {"alpha", alpha},
                {"threads", threads},          {"force", force},                 {"explore_fraction", explore_fraction},
                {"limit_runs", limit_runs},    {"top", top}};
    }
};

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig c;
    if (j.contains("regime")) c.regime = parse_regime(j.at("regime").get<std::string>());
    if (!j.contains("sequence")) throw std::invalid_argument("config needs 'sequence'");
    c.sequence = parse_sequence(j.at("sequence"));
    c.replicas = j.value("replicas", c.replicas);
    c.seed = j.value("seed", c.seed);
    c.alpha = j.value("alpha", c.alpha);
    c.threads = j.value("threads", c.threads);
    c.force = j.value("force", c.force);
    c.explore_fraction = j.value("explore_fraction", c.explore_fraction);
    c.limit_runs = j.value("limit_runs", c.limit_runs);
    c.top = j.value("top", c.top);
    c.out_dir = j.value("out", c.out_dir);
    return c;
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return json::parse(in);
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(read_json_file(path)); }

}  // namespace cmlab
