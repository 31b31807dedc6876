#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <ostream>
#include <vector>

#include "cmlab/generator.hpp"

namespace cmlab {

/// Disjoint sets with path halving and union by size.
class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<VertexId>(i);
    }

    VertexId find(VertexId x) noexcept {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns the surviving root.
    VertexId unite(VertexId a, VertexId b) noexcept {
        a = find(a);
        b = find(b);
        if (a == b) return a;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        return a;
    }

    std::uint32_t size_of(VertexId x) noexcept { return size_[find(x)]; }

private:
    std::vector<VertexId> parent_;
    std::vector<std::uint32_t> size_;
};

struct Component {
    std::int64_t size = 0;
    std::int64_t edges = 0;
    std::int64_t nullity = 0;       ///< edges - size + 1
    VertexId first_vertex = 0;      ///< smallest vertex id, used for tie-breaking

    auto operator<=>(const Component&) const = default;
};

/// Components sorted by size descending, then nullity ascending, then
/// smallest vertex id. `rank` maps each vertex to its component's index.
struct ComponentStats {
    std::vector<Component> components;
    std::vector<std::uint32_t> rank;

    std::int64_t L(std::size_t i) const noexcept {
        return i < components.size() ? components[i].size : 0;
    }
    std::int64_t L1() const noexcept { return L(0); }
    std::int64_t L2() const noexcept { return L(1); }
    std::int64_t N1() const noexcept { return components.empty() ? 0 : components[0].nullity; }
    std::size_t count() const noexcept { return components.size(); }

    /// Sorted (size, nullity) pairs, for multiset comparison with exploration.
    std::vector<std::pair<std::int64_t, std::int64_t>> size_nullity_multiset() const {
        std::vector<std::pair<std::int64_t, std::int64_t>> out;
        out.reserve(components.size());
        for (const auto& c : components) out.emplace_back(c.size, c.nullity);
        std::sort(out.begin(), out.end());
        return out;
    }
};

inline ComponentStats component_stats(const Multigraph& g) {
    UnionFind uf(g.n);
    for (const Edge& e : g.edges) uf.unite(e.u, e.v);

    constexpr auto none = static_cast<std::uint32_t>(-1);
    std::vector<std::uint32_t> slot(g.n, none);
    std::vector<Component> comps;
    std::vector<std::uint32_t> vertex_slot(g.n);
    for (VertexId v = 0; v < g.n; ++v) {
        const VertexId root = uf.find(v);
        if (slot[root] == none) {
            slot[root] = static_cast<std::uint32_t>(comps.size());
            comps.push_back(Component{0, 0, 0, v});
        }
        vertex_slot[v] = slot[root];
        ++comps[slot[root]].size;
    }
    for (const Edge& e : g.edges) ++comps[vertex_slot[e.u]].edges;
    for (auto& c : comps) c.nullity = c.edges - c.size + 1;

    std::vector<std::uint32_t> order(comps.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const Component& x = comps[a];
        const Component& y = comps[b];
        if (x.size != y.size) return x.size > y.size;
        if (x.nullity != y.nullity) return x.nullity < y.nullity;
        return x.first_vertex < y.first_vertex;
    });
    std::vector<std::uint32_t> new_rank(comps.size());
    ComponentStats out;
    out.components.reserve(comps.size());
    for (std::uint32_t r = 0; r < order.size(); ++r) {
        new_rank[order[r]] = r;
        out.components.push_back(comps[order[r]]);
    }
    out.rank.resize(g.n);
    for (VertexId v = 0; v < g.n; ++v) out.rank[v] = new_rank[vertex_slot[v]];
    return out;
}

/// Number of vertices of each degree (degree in g) inside the largest component.
inline std::map<int, std::int64_t> largest_component_degree_profile(const Multigraph& g,
                                                                   const ComponentStats& stats) {
    std::map<int, std::int64_t> profile;
    if (stats.components.empty()) return profile;
    const std::vector<int> deg = g.degrees();
    for (VertexId v = 0; v < g.n; ++v) {
        if (stats.rank[v] == 0) ++profile[deg[v]];
    }
    return profile;
}

/// CSV rows "replica,rank,size,edges,nullity" for the first `limit` components.
inline void write_component_rows(std::ostream& os, std::uint64_t replica, const ComponentStats& stats,
                                 std::size_t limit = static_cast<std::size_t>(-1)) {
    const std::size_t rows = std::min(limit, stats.components.size());
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& c = stats.components[r];
        os << replica << ',' << r + 1 << ',' << c.size << ',' << c.edges << ',' << c.nullity << '\n';
    }
}

}  // namespace cmlab
