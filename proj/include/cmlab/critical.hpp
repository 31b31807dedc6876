#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmlab/components.hpp"
#include "cmlab/degree_sequence.hpp"
#include "cmlab/rng.hpp"

namespace cmlab {

/// Reflected Brownian motion with parabolic drift, W(s) = sqrt(alpha0) BM(s)
/// + alpha1 s - alpha2 s^2 / 2, with marks at rate beta * B(s).
struct LimitParams {
    double alpha0 = 1.0;
    double alpha1 = 0.0;
    double alpha2 = 1.0;
    double beta = 1.0;
    double ds = 0.0;
    double s_max = 0.0;

    /// Fills the default horizon (alpha2 s_max >= |alpha1| + 6 sqrt(alpha0)) and
    /// grid step (1e-4 s_max) where they are unset.
    LimitParams& with_defaults() {
        if (!(s_max > 0.0)) s_max = (std::fabs(alpha1) + 6.0 * std::sqrt(alpha0)) / alpha2;
        if (!(ds > 0.0)) ds = 1e-4 * s_max;
        return *this;
    }

    void validate() const {
        if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
        if (!(alpha2 > 0.0)) throw std::invalid_argument("alpha2 must be positive");
        if (!(beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
        if (!(s_max > 0.0) || !(ds > 0.0)) throw std::invalid_argument("grid not set");
        if (ds > 1e-3 * s_max * (1.0 + 1e-12)) throw std::invalid_argument("grid step must be <= 1e-3 * s_max");
    }

    /// True when the drift at the horizon is not yet clearly negative.
    bool horizon_short() const {
        return alpha1 - alpha2 * s_max > -5.0 * std::sqrt(alpha0 / s_max);
    }

    std::size_t cells() const { return static_cast<std::size_t>(std::ceil(s_max / ds - 1e-9)); }
};

struct Excursion {
    double length = 0.0;
    std::int64_t marks = 0;
    std::size_t first = 0;  ///< grid index of the first positive point
    std::size_t count = 0;  ///< number of positive grid points
    double area = 0.0;      ///< sum of B over the run times ds
};

struct ExcursionSample {
    std::vector<Excursion> excursions;  ///< length descending
    double horizon = 0.0;
    std::string rng_algorithm{Xoshiro256::algorithm};
    bool horizon_warning = false;
    double open_length = 0.0;  ///< length of the run of B > 0 still open at the horizon

    /// True when the run still open at the horizon is at least `fraction` of the largest excursion.
    bool open_at_horizon(double fraction = 0.05) const noexcept {
        return open_length > 0.0 && open_length >= fraction * largest();
    }

    double largest() const noexcept { return excursions.empty() ? 0.0 : excursions.front().length; }
};

/// W on the grid s_i = i ds, i = 0..cells, by Euler-Maruyama.
inline std::vector<double> simulate_drifted_bm(const LimitParams& p, Xoshiro256& rng) {
    p.validate();
    const std::size_t m = p.cells();
    std::vector<double> w(m + 1);
    w[0] = 0.0;
    const double sd = std::sqrt(p.alpha0 * p.ds);
    for (std::size_t i = 0; i < m; ++i) {
        const double s = static_cast<double>(i) * p.ds;
        w[i + 1] = w[i] + (p.alpha1 - p.alpha2 * s) * p.ds + sd * rng.normal();
    }
    return w;
}

/// B(s_i) = W(s_i) - min_{j <= i} W(s_j); exactly 0 where the minimum is attained.
inline std::vector<double> reflect(const std::vector<double>& w) {
    std::vector<double> b(w.size());
    double lo = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i == 0 || w[i] < lo) lo = w[i];
        b[i] = w[i] - lo;
    }
    return b;
}

/// Maximal runs of grid points with B > 0; length = points * ds. Runs of a
/// single point are discarded.
inline std::vector<Excursion> excursions(const std::vector<double>& b, double ds) {
    std::vector<Excursion> out;
    std::size_t i = 0;
    while (i < b.size()) {
        if (b[i] <= 0.0) {
            ++i;
            continue;
        }
        Excursion e;
        e.first = i;
        double area = 0.0;
        while (i < b.size() && b[i] > 0.0) {
            area += b[i];
            ++i;
        }
        e.count = i - e.first;
        e.length = static_cast<double>(e.count) * ds;
        e.area = area * ds;
        if (e.count >= 2) out.push_back(e);
    }
    return out;
}

/// Total marks of each excursion: Poisson with mean beta * area, the sum of
/// the per-cell Poisson(beta B ds) counts.
inline void attach_marks(std::vector<Excursion>& ex, double beta, Xoshiro256& rng) {
    for (auto& e : ex) e.marks = static_cast<std::int64_t>(rng.poisson(beta * e.area));
}

inline void sort_by_length(std::vector<Excursion>& ex) {
    std::stable_sort(ex.begin(), ex.end(), [](const Excursion& a, const Excursion& b) { return a.length > b.length; });
}

inline ExcursionSample simulate_limit(const LimitParams& params, Xoshiro256& rng) {
    const std::vector<double> b = reflect(simulate_drifted_bm(params, rng));
    ExcursionSample out;
    out.excursions = excursions(b, params.ds);
    attach_marks(out.excursions, params.beta, rng);
    sort_by_length(out.excursions);
    out.horizon = static_cast<double>(params.cells()) * params.ds;
    out.horizon_warning = params.horizon_short();
    std::size_t tail = 0;
    while (tail < b.size() && b[b.size() - 1 - tail] > 0.0) ++tail;
    out.open_length = static_cast<double>(tail) * params.ds;
    return out;
}

/// alpha0 = mu3/mu1, alpha2 = mu3/mu1^2, beta = 1/mu1, alpha1 = n^{1/3}(lambda - 1).
template <DegreeLaw L>
LimitParams params_from_sequence(const L& law, double n) {
    const double mu1 = factorial_moment(law, 1);
    const double mu2 = factorial_moment(law, 2);
    const double mu3 = factorial_moment(law, 3);
    if (!(mu1 > 0.0)) throw std::domain_error("no stubs");
    if (!(mu3 > 0.0)) throw std::domain_error("mu_3 = 0: the critical limit needs mu_3/mu_1 -> alpha0 > 0");
    LimitParams p;
    p.alpha0 = mu3 / mu1;
    p.alpha2 = mu3 / (mu1 * mu1);
    p.beta = 1.0 / mu1;
    p.alpha1 = std::cbrt(n) * (mu2 / mu1 - 1.0);
    return p.with_defaults();
}

/// Parameters (alpha', alpha0', alpha1') with B_{a0,a1,a2}(s) equal in law to
/// alpha' B_{1,alpha1',1}(alpha0' s).
struct ScalingMap {
    double alpha_prime = 1.0;
    double alpha0_prime = 1.0;
    double alpha1_prime = 0.0;
};

inline ScalingMap scaling_map(const LimitParams& p) {
    ScalingMap m;
    m.alpha_prime = std::pow(p.alpha0, 2.0 / 3.0) * std::pow(p.alpha2, -1.0 / 3.0);
    m.alpha0_prime = std::pow(p.alpha2, 2.0 / 3.0) * std::pow(p.alpha0, -1.0 / 3.0);
    m.alpha1_prime = p.alpha1 * std::pow(p.alpha0, -1.0 / 3.0) * std::pow(p.alpha2, -1.0 / 3.0);
    return m;
}

struct RescaledComponent {
    double size = 0.0;  ///< n^{-2/3} |C|
    std::int64_t nullity = 0;
};

inline std::vector<RescaledComponent> rescale_components(const ComponentStats& stats, double n,
                                                         std::size_t top = static_cast<std::size_t>(-1)) {
    std::vector<RescaledComponent> out;
    const double scale = std::pow(n, -2.0 / 3.0);
    const std::size_t k = std::min(top, stats.components.size());
    for (std::size_t i = 0; i < k; ++i) {
        out.push_back({static_cast<double>(stats.components[i].size) * scale, stats.components[i].nullity});
    }
    return out;
}

/// CSV rows "run,rank,length,marks" for the first `limit` excursions.
inline void write_excursion_rows(std::ostream& os, std::uint64_t run, const ExcursionSample& s,
                                 std::size_t limit = static_cast<std::size_t>(-1)) {
    const std::size_t rows = std::min(limit, s.excursions.size());
    for (std::size_t r = 0; r < rows; ++r) {
        os << run << ',' << r + 1 << ',' << s.excursions[r].length << ',' << s.excursions[r].marks << '\n';
    }
}

}  // namespace cmlab
