#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmlab/degree_sequence.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {

using VertexId = std::uint32_t;
using StubId = std::uint32_t;

/// A perfect matching of stubs. Vertex v owns stubs [offset[v], offset[v+1]).
struct Pairing {
    std::vector<StubId> offset;   ///< size n + 1
    std::vector<VertexId> owner;  ///< vertex of each stub
    std::vector<StubId> partner;  ///< involution without fixed points

    std::size_t vertex_count() const noexcept { return offset.empty() ? 0 : offset.size() - 1; }
    std::size_t stub_count() const noexcept { return owner.size(); }
    std::size_t edge_count() const noexcept { return owner.size() / 2; }
    int degree(VertexId v) const noexcept { return static_cast<int>(offset[v + 1] - offset[v]); }

    bool is_valid() const {
        if (partner.size() != owner.size()) return false;
        for (std::size_t s = 0; s < partner.size(); ++s) {
            const StubId t = partner[s];
            if (t >= partner.size() || t == s || partner[t] != s) return false;
        }
        return true;
    }
};

struct Edge {
    VertexId u = 0;
    VertexId v = 0;
    bool is_loop() const noexcept { return u == v; }
    auto operator<=>(const Edge&) const = default;
};

/// Edge list over vertices 0..n-1; loops and parallel edges allowed, u <= v.
struct Multigraph {
    std::size_t n = 0;
    std::vector<Edge> edges;

    std::size_t edge_count() const noexcept { return edges.size(); }

    /// Degree per vertex; a loop contributes 2.
    std::vector<int> degrees() const {
        std::vector<int> deg(n, 0);
        for (const Edge& e : edges) {
            ++deg[e.u];
            ++deg[e.v];
        }
        return deg;
    }

    DegreeSequence degree_sequence() const {
        std::map<int, std::int64_t> counts;
        for (int d : degrees()) ++counts[d];
        if (n == 0) return DegreeSequence{};
        return DegreeSequence::from_map(counts);
    }
};

inline Edge make_edge(VertexId a, VertexId b) noexcept { return a <= b ? Edge{a, b} : Edge{b, a}; }

/// Stub layout for a list of per-vertex degrees; partners left unset.
inline Pairing stub_layout(const std::vector<int>& degrees) {
    Pairing p;
    p.offset.resize(degrees.size() + 1, 0);
    for (std::size_t v = 0; v < degrees.size(); ++v) {
        if (degrees[v] < 0) throw std::invalid_argument("negative degree");
        p.offset[v + 1] = p.offset[v] + static_cast<StubId>(degrees[v]);
    }
    p.owner.resize(p.offset.back());
    for (std::size_t v = 0; v < degrees.size(); ++v) {
        std::fill(p.owner.begin() + p.offset[v], p.owner.begin() + p.offset[v + 1], static_cast<VertexId>(v));
    }
    return p;
}

/// Uniform random perfect matching: shuffle all stubs, pair consecutive positions.
inline Pairing generate_pairing(const std::vector<int>& degrees, Xoshiro256& rng) {
    Pairing p = stub_layout(degrees);
    const std::size_t stubs = p.owner.size();
    if (stubs % 2 != 0) throw std::invalid_argument("stub sum is odd");
    std::vector<StubId> order(stubs);
    std::iota(order.begin(), order.end(), StubId{0});
    shuffle(order.begin(), order.end(), rng);
    p.partner.resize(stubs);
    for (std::size_t i = 0; i < stubs; i += 2) {
        p.partner[order[i]] = order[i + 1];
        p.partner[order[i + 1]] = order[i];
    }
    return p;
}

inline Pairing generate_pairing(const DegreeSequence& seq, Xoshiro256& rng) {
    return generate_pairing(seq.vertex_degrees(), rng);
}

/// Edges in order of their lower stub index.
inline Multigraph to_multigraph(const Pairing& pairing) {
    Multigraph g;
    g.n = pairing.vertex_count();
    g.edges.reserve(pairing.edge_count());
    for (StubId s = 0; s < pairing.stub_count(); ++s) {
        const StubId t = pairing.partner[s];
        if (s < t) g.edges.push_back(make_edge(pairing.owner[s], pairing.owner[t]));
    }
    return g;
}

/// The pairing that realizes g: stubs of each vertex numbered in edge order.
inline Pairing pairing_of(const Multigraph& g) {
    Pairing p = stub_layout(g.degrees());
    p.partner.resize(p.owner.size());
    std::vector<StubId> next(p.offset.begin(), p.offset.end() - 1);
    for (const Edge& e : g.edges) {
        const StubId a = next[e.u]++;
        const StubId b = next[e.v]++;
        p.partner[a] = b;
        p.partner[b] = a;
    }
    return p;
}

/// Keep each edge independently with probability p; vertex set unchanged.
inline Multigraph percolate(const Multigraph& g, double p, Xoshiro256& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percolation probability outside [0,1]");
    Multigraph out;
    out.n = g.n;
    out.edges.reserve(static_cast<std::size_t>(p * static_cast<double>(g.edges.size())) + 16);
    for (const Edge& e : g.edges) {
        if (rng.uniform01() < p) out.edges.push_back(e);
    }
    return out;
}

inline bool is_simple(const Multigraph& g) {
    std::vector<Edge> sorted = g.edges;
    for (const Edge& e : sorted) {
        if (e.is_loop()) return false;
    }
    std::sort(sorted.begin(), sorted.end());
    return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

/// exp(-theta - theta^2) with theta = mu_2 / (2 mu_1).
template <DegreeLaw L>
double simplicity_probability(const L& law) {
    const double theta = branching_factor(law) / 2.0;
    return std::exp(-theta - theta * theta);
}

class SimplicityError : public std::runtime_error {
public:
    explicit SimplicityError(int attempts)
        : std::runtime_error("no simple pairing after " + std::to_string(attempts) + " attempts"),
          attempts_(attempts) {}
    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

struct SimpleSample {
    Multigraph graph;
    int attempts = 0;
};

/// Rejection sampling of the configuration multigraph conditioned on simplicity.
inline SimpleSample generate_simple(const DegreeSequence& seq, Xoshiro256& rng, int max_attempts) {
    if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
    const std::vector<int> degrees = seq.vertex_degrees();
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        Multigraph g = to_multigraph(generate_pairing(degrees, rng));
        if (is_simple(g)) return {std::move(g), attempt};
    }
    throw SimplicityError(max_attempts);
}

/// Edge-list text: header "# n=<n> m=<m>", then one "u v" pair per line.
inline void write_edge_list(std::ostream& os, const Multigraph& g) {
    os << "# n=" << g.n << " m=" << g.edges.size() << '\n';
    for (const Edge& e : g.edges) os << e.u << ' ' << e.v << '\n';
}

inline Multigraph read_edge_list(std::istream& is) {
    std::string line;
    Multigraph g;
    std::size_t m = 0;
    if (!std::getline(is, line) || std::sscanf(line.c_str(), "# n=%zu m=%zu", &g.n, &m) != 2) {
        throw std::runtime_error("edge list: missing '# n=<n> m=<m>' header");
    }
    g.edges.reserve(m);
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::uint64_t u = 0, v = 0;
        if (!(ls >> u >> v) || u >= g.n || v >= g.n) throw std::runtime_error("edge list: bad line '" + line + "'");
        g.edges.push_back(make_edge(static_cast<VertexId>(u), static_cast<VertexId>(v)));
    }
    if (g.edges.size() != m) throw std::runtime_error("edge list: edge count does not match header");
    return g;
}

}  // namespace cmlab
