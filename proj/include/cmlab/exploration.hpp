#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cmlab/degree_sequence.hpp"
#include "cmlab/generator.hpp"
#include "cmlab/rng.hpp"
#include "cmlab/theory.hpp"

namespace cmlab {

enum class ActiveOrder { fifo, lifo };

struct ExploreOptions {
    /// Stop after this many steps; unset means run until every vertex is reached.
    std::optional<std::int64_t> until_steps;
    ActiveOrder order = ActiveOrder::fifo;
    /// Times t (0 <= t <= steps run) at which to record U_{d,t}.
    std::vector<std::int64_t> snapshot_times;

    static ExploreOptions full() { return {}; }
    static ExploreOptions until(std::int64_t steps) {
        ExploreOptions o;
        o.until_steps = steps;
        return o;
    }
};

struct ExploredComponent {
    std::int64_t size = 0;
    std::int64_t nullity = 0;
    std::int64_t start = 0;  ///< t_{i-1}
    std::int64_t end = 0;    ///< t_i
};

struct UnreachedSnapshot {
    std::int64_t t = 0;
    std::vector<std::int64_t> by_degree;  ///< U_{d,t}
};

/// Step t (1-based) is stored at index t - 1; A, C, X, Y also have their t = 0
/// value (all zero) at index 0 of the `*_path` arrays.
struct ExplorationTrace {
    std::vector<int> eta;
    std::vector<int> beta;
    std::vector<std::int64_t> active;      ///< A_t, t = 0..steps
    std::vector<std::int64_t> started;     ///< C_t
    std::vector<std::int64_t> X;           ///< A_t - 2 C_t
    std::vector<std::int64_t> Y;           ///< back-edges so far
    std::vector<std::int64_t> boundaries;  ///< t_0 = 0 < t_1 < ...
    std::vector<ExploredComponent> components;
    std::vector<UnreachedSnapshot> snapshots;
    bool complete = false;                 ///< every vertex reached

    std::int64_t steps() const noexcept { return static_cast<std::int64_t>(eta.size()); }

    std::vector<std::pair<std::int64_t, std::int64_t>> size_nullity_multiset() const {
        std::vector<std::pair<std::int64_t, std::int64_t>> out;
        out.reserve(components.size());
        for (const auto& c : components) out.emplace_back(c.size, c.nullity);
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Finished components, largest first (size descending, then nullity ascending).
    std::vector<ExploredComponent> ranked_components() const {
        std::vector<ExploredComponent> out = components;
        std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            if (a.size != b.size) return a.size > b.size;
            return a.nullity < b.nullity;
        });
        return out;
    }
};

namespace detail {

/// Shared step logic. `Source` supplies partners and the next starting vertex.
template <class Source>
class Explorer {
public:
    Explorer(const Pairing& layout, Source& source, const ExploreOptions& opts)
        : layout_(layout), src_(source), opts_(opts), state_(layout.stub_count(), unreached),
          reached_(layout.vertex_count(), false) {
        int dmax = 0;
        for (VertexId v = 0; v < layout.vertex_count(); ++v) dmax = std::max(dmax, layout.degree(v));
        unreached_.assign(static_cast<std::size_t>(dmax) + 1, 0);
        for (VertexId v = 0; v < layout.vertex_count(); ++v) ++unreached_[layout.degree(v)];
    }

    ExplorationTrace run() {
        const auto n = static_cast<std::int64_t>(layout_.vertex_count());
        std::int64_t limit = n;
        if (opts_.until_steps) {
            if (*opts_.until_steps > n) throw std::invalid_argument("until_steps exceeds n");
            if (*opts_.until_steps < 0) throw std::invalid_argument("until_steps must be non-negative");
            limit = *opts_.until_steps;
        }
        std::vector<std::int64_t> snaps = opts_.snapshot_times;
        std::sort(snaps.begin(), snaps.end());
        for (std::int64_t s : snaps) {
            if (s < 0 || s > limit) throw std::invalid_argument("snapshot time outside the explored range");
        }
        std::size_t next_snap = 0;

        ExplorationTrace tr;
        tr.eta.reserve(static_cast<std::size_t>(limit));
        tr.beta.reserve(static_cast<std::size_t>(limit));
        for (auto* v : {&tr.active, &tr.started, &tr.X, &tr.Y}) {
            v->reserve(static_cast<std::size_t>(limit) + 1);
            v->push_back(0);
        }
        tr.boundaries.push_back(0);
        auto snapshot_if_due = [&](std::int64_t t) {
            while (next_snap < snaps.size() && snaps[next_snap] == t) {
                tr.snapshots.push_back({t, unreached_});
                ++next_snap;
            }
        };
        snapshot_if_due(0);

        std::int64_t A = 0, C = 0, Y = 0;
        std::vector<StubId> fresh;
        for (std::int64_t t = 1; t <= limit; ++t) {
            VertexId v;
            fresh.clear();
            if (A > 0) {
                const StubId a = pop_active();
                const StubId u = src_.partner(a);
                state_[a] = paired;
                state_[u] = paired;
                --A;
                v = layout_.owner[u];
                for (StubId s = layout_.offset[v]; s < layout_.offset[v + 1]; ++s) {
                    if (s != u) fresh.push_back(s);
                }
            } else {
                v = src_.next_start(reached_);
                ++C;
                for (StubId s = layout_.offset[v]; s < layout_.offset[v + 1]; ++s) fresh.push_back(s);
            }
            reached_[v] = true;
            --unreached_[layout_.degree(v)];

            int beta = 0;
            // (i) stubs of v already paired with active stubs
            for (StubId s : fresh) {
                const StubId p = src_.partner(s);
                if (state_[p] == active) {
                    state_[p] = paired;
                    state_[s] = paired;
                    --A;
                    ++beta;
                }
            }
            // (ii) pairs among the remaining stubs of v
            for (StubId s : fresh) {
                if (state_[s] != unreached) continue;
                const StubId p = src_.partner(s);
                if (layout_.owner[p] == v && state_[p] == unreached) {
                    state_[p] = paired;
                    state_[s] = paired;
                    ++beta;
                }
            }
            for (StubId s : fresh) {
                if (state_[s] != unreached) continue;
                state_[s] = active;
                queue_.push_back(s);
                ++A;
            }
            Y += beta;

            tr.eta.push_back(layout_.degree(v));
            tr.beta.push_back(beta);
            tr.active.push_back(A);
            tr.started.push_back(C);
            tr.X.push_back(A - 2 * C);
            tr.Y.push_back(Y);
            if (A == 0) {
                const std::int64_t prev = tr.boundaries.back();
                const std::int64_t prevY = tr.Y[static_cast<std::size_t>(prev)];
                tr.components.push_back({t - prev, Y - prevY, prev, t});
                tr.boundaries.push_back(t);
            }
            snapshot_if_due(t);
        }
        tr.complete = limit == n;
        return tr;
    }

private:
    enum : std::uint8_t { unreached = 0, active = 1, paired = 2 };

    StubId pop_active() {
        for (;;) {
            StubId s;
            if (opts_.order == ActiveOrder::fifo) {
                s = queue_.front();
                queue_.pop_front();
            } else {
                s = queue_.back();
                queue_.pop_back();
            }
            if (state_[s] == active) return s;
        }
    }

    const Pairing& layout_;
    Source& src_;
    const ExploreOptions& opts_;
    std::vector<std::uint8_t> state_;
    std::vector<bool> reached_;
    std::vector<std::int64_t> unreached_;
    std::deque<StubId> queue_;
};

/// Partners revealed on demand, uniformly among stubs whose partner is unknown.
///
/// Every active stub has its partner fixed at the moment it becomes active, so
/// at a component start the free stubs are exactly the stubs of unreached
/// vertices and a uniform free stub picks a vertex with probability
/// proportional to its degree.
class LazySource {
public:
    LazySource(const Pairing& layout, Xoshiro256& rng)
        : layout_(layout), rng_(rng), partner_(layout.stub_count(), none), pool_(layout.stub_count()),
          pos_(layout.stub_count()) {
        for (StubId s = 0; s < pool_.size(); ++s) {
            pool_[s] = s;
            pos_[s] = s;
        }
    }

    StubId partner(StubId s) {
        if (partner_[s] != none) return partner_[s];
        remove(s);
        const StubId t = pool_[rng_.below(pool_.size())];
        remove(t);
        partner_[s] = t;
        partner_[t] = s;
        return t;
    }

    VertexId next_start(const std::vector<bool>& reached) {
        if (!pool_.empty()) return layout_.owner[pool_[rng_.below(pool_.size())]];
        while (reached[isolated_cursor_]) ++isolated_cursor_;
        return static_cast<VertexId>(isolated_cursor_);
    }

private:
    static constexpr StubId none = static_cast<StubId>(-1);

    void remove(StubId s) {
        const StubId last = pool_.back();
        pool_[pos_[s]] = last;
        pos_[last] = pos_[s];
        pool_.pop_back();
    }

    const Pairing& layout_;
    Xoshiro256& rng_;
    std::vector<StubId> partner_;
    std::vector<StubId> pool_;
    std::vector<StubId> pos_;
    std::size_t isolated_cursor_ = 0;
};

/// Partners read from a fixed pairing. Starting vertices follow a uniformly
/// random order of all stubs: the unreached vertex owning the earliest stub.
class ReplaySource {
public:
    ReplaySource(const Pairing& pairing, Xoshiro256& rng) : pairing_(pairing), order_(pairing.stub_count()) {
        for (StubId s = 0; s < order_.size(); ++s) order_[s] = s;
        shuffle(order_.begin(), order_.end(), rng);
    }

    StubId partner(StubId s) const { return pairing_.partner[s]; }

    VertexId next_start(const std::vector<bool>& reached) {
        while (cursor_ < order_.size() && reached[pairing_.owner[order_[cursor_]]]) ++cursor_;
        if (cursor_ < order_.size()) return pairing_.owner[order_[cursor_]];
        while (reached[isolated_cursor_]) ++isolated_cursor_;
        return static_cast<VertexId>(isolated_cursor_);
    }

private:
    const Pairing& pairing_;
    std::vector<StubId> order_;
    std::size_t cursor_ = 0;
    std::size_t isolated_cursor_ = 0;
};

}  // namespace detail

/// Explores a configuration multigraph while generating its pairing lazily.
/// Vertices of degree 0 are reached last, one singleton component each.
inline ExplorationTrace explore(const DegreeSequence& seq, Xoshiro256& rng, const ExploreOptions& opts = {}) {
    const Pairing layout = stub_layout(seq.vertex_degrees());
    detail::LazySource src(layout, rng);
    return detail::Explorer<detail::LazySource>(layout, src, opts).run();
}

/// Same process on a fixed pairing; rng only drives the choice of starting vertices.
inline ExplorationTrace replay_on_pairing(const Pairing& pairing, Xoshiro256& rng, const ExploreOptions& opts = {}) {
    if (pairing.partner.size() != pairing.owner.size()) throw std::invalid_argument("pairing has no partners");
    detail::ReplaySource src(pairing, rng);
    return detail::Explorer<detail::ReplaySource>(pairing, src, opts).run();
}

struct UnreachedRow {
    std::int64_t t = 0;
    int d = 0;
    std::int64_t observed = 0;
    double predicted = 0.0;  ///< n_d z(t/n)^d
    double deviation = 0.0;  ///< |observed - predicted| / sqrt(t), 0 at t = 0
};

/// Observed unreached counts U_{d,t} against n_d z(t/n)^d for d >= 1.
/// The trace must hold snapshots at every requested time.
inline std::vector<UnreachedRow> unreached_diagnostic(const ExplorationTrace& trace, const DegreeSequence& seq,
                                                      const std::vector<std::int64_t>& times) {
    const auto n = static_cast<double>(seq.n());
    const double horizon = trajectory_horizon(seq);
    std::vector<UnreachedRow> rows;
    for (std::int64_t t : times) {
        if (t > trace.steps()) throw std::invalid_argument("diagnostic time beyond trace length");
        const auto snap = std::find_if(trace.snapshots.begin(), trace.snapshots.end(),
                                       [t](const UnreachedSnapshot& s) { return s.t == t; });
        if (snap == trace.snapshots.end()) throw std::invalid_argument("no snapshot recorded at requested time");
        const double tau = std::min(static_cast<double>(t) / n, horizon);
        const double z = z_of_tau(seq, tau);
        for (int d = 1; d <= seq.dmax(); ++d) {
            if (seq.count(d) == 0) continue;
            UnreachedRow row;
            row.t = t;
            row.d = d;
            row.observed = d < static_cast<int>(snap->by_degree.size()) ? snap->by_degree[static_cast<std::size_t>(d)] : 0;
            row.predicted = static_cast<double>(seq.count(d)) * std::pow(z, d);
            row.deviation = t == 0 ? 0.0
                                   : std::fabs(static_cast<double>(row.observed) - row.predicted) /
                                         std::sqrt(static_cast<double>(t));
            rows.push_back(row);
        }
    }
    return rows;
}

/// CSV "t,eta,beta,A,C,X,Y" for t = 0, k, 2k, ... and the final step.
inline void write_walk_csv(std::ostream& os, const ExplorationTrace& tr, std::int64_t every = 1) {
    if (every < 1) throw std::invalid_argument("sampling interval must be >= 1");
    os << "t,eta,beta,A,C,X,Y\n";
    const std::int64_t T = tr.steps();
    for (std::int64_t t = 0; t <= T; ++t) {
        if (t % every != 0 && t != T) continue;
        const auto i = static_cast<std::size_t>(t);
        const int eta = t == 0 ? 0 : tr.eta[i - 1];
        const int beta = t == 0 ? 0 : tr.beta[i - 1];
        os << t << ',' << eta << ',' << beta << ',' << tr.active[i] << ',' << tr.started[i] << ',' << tr.X[i] << ','
           << tr.Y[i] << '\n';
    }
}

}  // namespace cmlab
