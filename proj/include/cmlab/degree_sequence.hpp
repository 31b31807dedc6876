#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace cmlab {

/// Anything exposing the fraction of vertices of each degree 0..dmax().
template <class T>
concept DegreeLaw = requires(const T& law, int d) {
    { law.dmax() } -> std::convertible_to<int>;
    { law.fraction(d) } -> std::convertible_to<double>;
};

/// Bounded degree sequence stored as counts per degree.
///
/// Vertex identities are not kept here; `generator` numbers vertices in
/// increasing order of degree when it needs them.
class DegreeSequence {
public:
    DegreeSequence() = default;

    /// counts[d] = number of vertices of degree d. The stub sum must be even.
    explicit DegreeSequence(std::vector<std::int64_t> counts, int dmax = -1)
        : counts_(std::move(counts)) {
        int top = static_cast<int>(counts_.size()) - 1;
        while (top > 0 && counts_[top] == 0) --top;
        if (dmax < 0) dmax = std::max(top, 0);
        if (top > dmax) {
            throw std::invalid_argument("degree " + std::to_string(top) +
                                        " exceeds dmax " + std::to_string(dmax));
        }
        counts_.resize(static_cast<std::size_t>(dmax) + 1, 0);
        dmax_ = dmax;
        for (int d = 0; d <= dmax_; ++d) {
            if (counts_[d] < 0) throw std::invalid_argument("negative vertex count");
            n_ += counts_[d];
            stubs_ += static_cast<std::int64_t>(d) * counts_[d];
        }
        if (stubs_ % 2 != 0) throw std::invalid_argument("stub sum is odd");
    }

    static DegreeSequence from_map(const std::map<int, std::int64_t>& counts, int dmax = -1) {
        int top = counts.empty() ? 0 : counts.rbegin()->first;
        if (!counts.empty() && counts.begin()->first < 0) {
            throw std::invalid_argument("negative degree");
        }
        std::vector<std::int64_t> v(static_cast<std::size_t>(top) + 1, 0);
        for (auto [d, c] : counts) v[d] += c;
        return DegreeSequence(std::move(v), dmax);
    }

    static DegreeSequence from_degrees(const std::vector<int>& degrees) {
        std::map<int, std::int64_t> m;
        for (int d : degrees) ++m[d];
        return from_map(m);
    }

    std::int64_t n() const noexcept { return n_; }
    int dmax() const noexcept { return dmax_; }
    std::int64_t count(int d) const noexcept {
        return (d < 0 || d > dmax_) ? 0 : counts_[d];
    }
    double fraction(int d) const noexcept {
        return n_ == 0 ? 0.0 : static_cast<double>(count(d)) / static_cast<double>(n_);
    }
    std::int64_t stubs() const noexcept { return stubs_; }
    std::int64_t edges() const noexcept { return stubs_ / 2; }
    const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

    /// Spread condition: at least c0*n vertices have degree outside {0, 2}.
    /// A violation is a warning for callers, not an error.
    bool satisfies_spread(double c0 = 0.05) const noexcept {
        const std::int64_t spread = n_ - count(0) - count(2);
        return static_cast<double>(spread) >= c0 * static_cast<double>(n_);
    }

    /// Degree of each vertex, vertices numbered in increasing order of degree.
    std::vector<int> vertex_degrees() const {
        std::vector<int> deg;
        deg.reserve(static_cast<std::size_t>(n_));
        for (int d = 0; d <= dmax_; ++d) deg.insert(deg.end(), static_cast<std::size_t>(counts_[d]), d);
        return deg;
    }

    bool operator==(const DegreeSequence&) const = default;

private:
    std::vector<std::int64_t> counts_{0};
    std::int64_t n_ = 0;
    std::int64_t stubs_ = 0;
    int dmax_ = 0;
};

/// Fractional degree law (idealized p_d), e.g. the binomial law of a
/// percolated r-regular graph.
class DegreeDistribution {
public:
    DegreeDistribution() = default;
    explicit DegreeDistribution(std::vector<double> p) : p_(std::move(p)) {
        if (p_.empty()) throw std::invalid_argument("empty degree distribution");
        for (double x : p_) {
            if (!(x >= 0.0)) throw std::invalid_argument("negative degree fraction");
        }
    }

    template <DegreeLaw L>
    static DegreeDistribution of(const L& law) {
        std::vector<double> p(static_cast<std::size_t>(law.dmax()) + 1);
        for (int d = 0; d <= law.dmax(); ++d) p[d] = law.fraction(d);
        return DegreeDistribution(std::move(p));
    }

    int dmax() const noexcept { return static_cast<int>(p_.size()) - 1; }
    double fraction(int d) const noexcept {
        return (d < 0 || d > dmax()) ? 0.0 : p_[d];
    }
    const std::vector<double>& fractions() const noexcept { return p_; }

private:
    std::vector<double> p_{1.0};
};

inline double falling_factorial(int d, int r) noexcept {
    double out = 1.0;
    for (int i = 0; i < r; ++i) out *= static_cast<double>(d - i);
    return out;
}

/// mu_r = n^{-1} sum_i (d_i)_r, the r-th factorial moment.
template <DegreeLaw L>
double factorial_moment(const L& law, int r) {
    if (r < 1) throw std::invalid_argument("factorial moment order must be >= 1");
    double sum = 0.0;
    for (int d = r; d <= law.dmax(); ++d) sum += law.fraction(d) * falling_factorial(d, r);
    return sum;
}

/// lambda = mu_2 / mu_1; lambda - 1 is the signed distance from criticality.
template <DegreeLaw L>
double branching_factor(const L& law) {
    const double mu1 = factorial_moment(law, 1);
    if (!(mu1 > 0.0)) throw std::domain_error("no stubs");
    return factorial_moment(law, 2) / mu1;
}

template <DegreeLaw L>
double branching_excess(const L& law) {
    return branching_factor(law) - 1.0;
}

/// Law of eta, the degree of the vertex at the far end of a uniform stub.
struct SizeBiasedDistribution {
    std::vector<double> q;  ///< q[d] = d p_d / mu_1
    double epsilon = 0.0;   ///< E(eta - 2) = lambda - 1
    double v0 = 0.0;        ///< Var(eta), closed form in factorial moments

    int dmax() const noexcept { return static_cast<int>(q.size()) - 1; }
    double mean() const noexcept { return epsilon + 2.0; }
};

template <DegreeLaw L>
SizeBiasedDistribution size_biased(const L& law) {
    const double mu1 = factorial_moment(law, 1);
    if (!(mu1 > 0.0)) throw std::domain_error("no stubs");
    const double mu2 = factorial_moment(law, 2);
    const double mu3 = factorial_moment(law, 3);
    SizeBiasedDistribution out;
    out.q.assign(static_cast<std::size_t>(law.dmax()) + 1, 0.0);
    for (int d = 1; d <= law.dmax(); ++d) out.q[d] = d * law.fraction(d) / mu1;
    out.epsilon = mu2 / mu1 - 1.0;
    out.v0 = (mu3 * mu1 + mu2 * mu1 - mu2 * mu2) / (mu1 * mu1);
    return out;
}

/// Degree generating function f(z) = sum_{d>=1} p_d z^d and its first three
/// derivatives (order 0..3). Degree-0 vertices do not contribute.
template <DegreeLaw L>
double pgf(const L& law, double z, int order = 0) {
    if (order < 0 || order > 3) throw std::invalid_argument("pgf order must be in 0..3");
    double sum = 0.0;
    for (int d = std::max(1, order); d <= law.dmax(); ++d) {
        sum += law.fraction(d) * falling_factorial(d, order) * std::pow(z, d - order);
    }
    return sum;
}

/// Keep each stub's edge with probability p: p'_j = sum_d p_d C(d,j) p^j (1-p)^(d-j).
/// Multiplies every factorial moment mu_i by p^i.
template <DegreeLaw L>
DegreeDistribution thin(const L& law, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("thinning probability outside [0,1]");
    const int dmax = law.dmax();
    std::vector<double> out(static_cast<std::size_t>(dmax) + 1, 0.0);
    for (int d = 0; d <= dmax; ++d) {
        const double pd = law.fraction(d);
        if (pd == 0.0) continue;
        double binom = 1.0;
        for (int j = 0; j <= d; ++j) {
            if (j > 0) binom = binom * (d - j + 1) / j;
            out[j] += pd * binom * std::pow(p, j) * std::pow(1.0 - p, d - j);
        }
    }
    return DegreeDistribution(std::move(out));
}

/// Idealized degree law of an r-regular graph with edges kept with
/// probability p: Binomial(r, p).
inline DegreeDistribution rregular_percolation_distribution(int r, double p) {
    if (r < 1) throw std::invalid_argument("r must be positive");
    std::vector<double> reg(static_cast<std::size_t>(r) + 1, 0.0);
    reg[r] = 1.0;
    return thin(DegreeDistribution(std::move(reg)), p);
}

/// Integer counts approximating n * p_d by largest-remainder rounding; if the
/// stub sum is odd, one vertex of the most populous class moves to an
/// adjacent degree.
inline DegreeSequence realize(const DegreeDistribution& dist, std::int64_t n) {
    if (n < 0) throw std::invalid_argument("negative vertex count");
    const int dmax = dist.dmax();
    double total = 0.0;
    for (double x : dist.fractions()) total += x;
    if (!(total > 0.0)) throw std::invalid_argument("degree distribution has zero mass");

    std::vector<std::int64_t> counts(static_cast<std::size_t>(dmax) + 1, 0);
    std::vector<std::pair<double, int>> remainders;
    std::int64_t assigned = 0;
    for (int d = 0; d <= dmax; ++d) {
        const double exact = static_cast<double>(n) * dist.fraction(d) / total;
        counts[d] = static_cast<std::int64_t>(std::floor(exact));
        assigned += counts[d];
        remainders.emplace_back(exact - std::floor(exact), d);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];

    std::int64_t stubs = 0;
    for (int d = 0; d <= dmax; ++d) stubs += d * counts[d];
    if (stubs % 2 != 0) {
        const auto largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
        --counts[largest];
        ++counts[largest > 0 ? largest - 1 : largest + 1];
    }
    return DegreeSequence(std::move(counts), std::max(dmax, 1));
}

}  // namespace cmlab
