#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cmlab {

/// Finitely supported law on the integers {min_value, ..., max_value}.
class LatticeDistribution {
public:
    LatticeDistribution() = default;

    /// probs[i] = P(Z = min_value + i). Renormalized after a 1e-9 sanity check.
    LatticeDistribution(std::int64_t min_value, std::vector<double> probs)
        : min_(min_value), p_(std::move(probs)) {
        if (p_.empty()) throw std::invalid_argument("empty lattice distribution");
        double total = 0.0;
        for (double x : p_) {
            if (!(x >= 0.0)) throw std::invalid_argument("negative probability");
            total += x;
        }
        if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("probabilities do not sum to 1");
        for (double& x : p_) x /= total;
        trim();
        for (std::size_t i = 0; i < p_.size(); ++i) {
            const double x = static_cast<double>(min_) + static_cast<double>(i);
            mean_ += p_[i] * x;
        }
        for (std::size_t i = 0; i < p_.size(); ++i) {
            const double dx = static_cast<double>(min_) + static_cast<double>(i) - mean_;
            var_ += p_[i] * dx * dx;
        }
    }

    static LatticeDistribution from_map(const std::map<std::int64_t, double>& probs) {
        if (probs.empty()) throw std::invalid_argument("empty lattice distribution");
        const std::int64_t lo = probs.begin()->first;
        const std::int64_t hi = probs.rbegin()->first;
        std::vector<double> p(static_cast<std::size_t>(hi - lo + 1), 0.0);
        for (auto [x, q] : probs) p[static_cast<std::size_t>(x - lo)] += q;
        return LatticeDistribution(lo, std::move(p));
    }

    std::int64_t min_value() const noexcept { return min_; }
    std::int64_t max_value() const noexcept { return min_ + static_cast<std::int64_t>(p_.size()) - 1; }
    /// Half-width k of the smallest symmetric window [-k, k] containing the support.
    std::int64_t span() const noexcept { return std::max(std::abs(min_), std::abs(max_value())); }
    double prob(std::int64_t x) const noexcept {
        if (x < min_ || x > max_value()) return 0.0;
        return p_[static_cast<std::size_t>(x - min_)];
    }
    const std::vector<double>& probs() const noexcept { return p_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return var_; }
    double stddev() const noexcept { return std::sqrt(var_); }
    bool has_negative() const noexcept { return min_ < 0; }
    bool has_positive() const noexcept { return max_value() > 0; }

private:
    void trim() {
        std::size_t lo = 0;
        while (lo + 1 < p_.size() && p_[lo] == 0.0) ++lo;
        std::size_t hi = p_.size();
        while (hi > lo + 1 && p_[hi - 1] == 0.0) --hi;
        p_ = std::vector<double>(p_.begin() + static_cast<std::ptrdiff_t>(lo), p_.begin() + static_cast<std::ptrdiff_t>(hi));
        min_ += static_cast<std::int64_t>(lo);
    }

    std::int64_t min_ = 0;
    std::vector<double> p_{1.0};
    double mean_ = 0.0;
    double var_ = 0.0;
};

/// b_r(Z) = 2 sup_i min{P(Z=i), P(Z=i+r)}.
inline double bernoulli_part(const LatticeDistribution& z, std::int64_t r) {
    if (r < 1) throw std::invalid_argument("Bernoulli part offset must be >= 1");
    double best = 0.0;
    for (std::int64_t i = z.min_value(); i + r <= z.max_value(); ++i) {
        best = std::max(best, std::min(z.prob(i), z.prob(i + r)));
    }
    return 2.0 * best;
}

/// Z = Z' + I*B with I ~ Bern(p), B ~ Bern(1/2) independent of (Z', I).
///
/// `residual[x]` is the law of Z' given I = 0; given I = 1, Z' = `anchor`.
/// T may be an exact rational type.
template <class T>
struct BernoulliDecomposition {
    std::int64_t min_value = 0;
    std::vector<T> residual;
    std::int64_t anchor = 0;
    T p{};

    /// Law of Z' + I*B, for checking that the parts recombine to Z.
    std::vector<T> recombine() const {
        std::vector<T> out(residual.size() + 1, T{});
        const T one{1};
        const T half = one / T{2};
        for (std::size_t i = 0; i < residual.size(); ++i) out[i] = out[i] + (one - p) * residual[i];
        const auto a = static_cast<std::size_t>(anchor - min_value);
        out[a] = out[a] + p * half;
        out[a + 1] = out[a + 1] + p * half;
        if (out.back() == T{}) out.pop_back();
        return out;
    }
};

/// Requires p <= b_1(Z). probs[i] = P(Z = min_value + i).
template <class T>
BernoulliDecomposition<T> bernoulli_decomposition(std::int64_t min_value, const std::vector<T>& probs, T p) {
    if (probs.size() < 2) throw std::invalid_argument("Bernoulli part is zero");
    std::size_t best = 0;
    for (std::size_t i = 1; i + 1 < probs.size(); ++i) {
        const T cur = probs[i] < probs[i + 1] ? probs[i] : probs[i + 1];
        const T prev = probs[best] < probs[best + 1] ? probs[best] : probs[best + 1];
        if (prev < cur) best = i;
    }
    const T two{2};
    const T m = probs[best] < probs[best + 1] ? probs[best] : probs[best + 1];
    if (two * m < p) throw std::invalid_argument("p exceeds the Bernoulli part b_1(Z)");
    const T one{1};
    if (!(p < one)) throw std::invalid_argument("p must be < 1");

    BernoulliDecomposition<T> out;
    out.min_value = min_value;
    out.anchor = min_value + static_cast<std::int64_t>(best);
    out.p = p;
    out.residual.resize(probs.size());
    const T half_p = p / two;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        T mass = probs[i];
        if (i == best || i == best + 1) mass = mass - half_p;
        out.residual[i] = mass / (one - p);
    }
    return out;
}

/// Exponential tilt that centers Z.
struct TiltResult {
    double a = 0.0;  ///< unique root of E(Z e^{aZ}) = 0
    double c = 1.0;  ///< E(e^{aZ})
    double delta = 0.0;  ///< -log c
    double residual = 0.0;
    LatticeDistribution tilted;
    double sigma_tilted() const noexcept { return tilted.stddev(); }
};

namespace detail {

inline double tilt_moment(const LatticeDistribution& z, double a, int power) {
    double sum = 0.0;
    for (std::int64_t x = z.min_value(); x <= z.max_value(); ++x) {
        const double px = z.prob(x);
        if (px == 0.0) continue;
        const double xd = static_cast<double>(x);
        sum += px * std::pow(xd, power) * std::exp(a * xd);
    }
    return sum;
}

}  // namespace detail

/// Solves E(Z e^{aZ}) = 0 by Newton's method inside a bracket that grows
/// geometrically until the sign changes; steps leaving the bracket bisect.
inline TiltResult tilt(const LatticeDistribution& z) {
    if (!z.has_negative() || !z.has_positive()) throw std::domain_error("tilt undefined: one-sided support");
    auto f = [&](double a) { return detail::tilt_moment(z, a, 1); };
    auto fp = [&](double a) { return detail::tilt_moment(z, a, 2); };

    double lo = 0.0, hi = 0.0;
    const double f0 = f(0.0);
    double step = 0.25;
    if (f0 > 0.0) {
        lo = -step;
        while (f(lo) > 0.0) {
            hi = lo;
            step *= 2.0;
            lo = -step;
        }
    } else if (f0 < 0.0) {
        hi = step;
        while (f(hi) < 0.0) {
            lo = hi;
            step *= 2.0;
            hi = step;
        }
    }

    double a = 0.0;
    if (f0 != 0.0) {
        a = std::clamp(-z.mean() / z.variance(), lo, hi);
        for (int iter = 0; iter < 200; ++iter) {
            const double fa = f(a);
            if (fa == 0.0) break;
            if (fa > 0.0) hi = a; else lo = a;
            double next = a - fa / fp(a);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            if (std::fabs(next - a) <= 1e-17 * std::max(1.0, std::fabs(a))) {
                a = next;
                break;
            }
            a = next;
        }
    }

    TiltResult out;
    out.a = a;
    out.residual = f(a);
    out.c = detail::tilt_moment(z, a, 0);
    out.delta = -std::log(out.c);
    std::vector<double> tilted(z.probs().size());
    for (std::size_t i = 0; i < tilted.size(); ++i) {
        const double x = static_cast<double>(z.min_value()) + static_cast<double>(i);
        tilted[i] = z.probs()[i] * std::exp(a * x) / out.c;
    }
    out.tilted = LatticeDistribution(z.min_value(), std::move(tilted));
    return out;
}

struct SmallTiltRow {
    double epsilon = 0.0;      ///< -E(Z)
    double a_ratio = 1.0;      ///< a / (eps / sigma^2)
    double c_ratio = 1.0;      ///< (1 - c) / (eps^2 / (2 sigma^2))
    double var_ratio = 1.0;    ///< Var(Z') / Var(Z)
};

/// Small-drift tilt asymptotics along a family Z(eps) with mean -eps.
inline std::vector<SmallTiltRow> small_tilt_check(const std::function<LatticeDistribution(double)>& family,
                                                  const std::vector<double>& eps_values) {
    std::vector<SmallTiltRow> rows;
    for (double eps : eps_values) {
        SmallTiltRow row;
        row.epsilon = eps;
        const LatticeDistribution z = family(eps);
        if (eps != 0.0) {
            const double mean = -z.mean();
            const double s2 = z.variance();
            const TiltResult t = tilt(z);
            row.epsilon = mean;
            row.a_ratio = t.a / (mean / s2);
            row.c_ratio = (1.0 - t.c) / (mean * mean / (2.0 * s2));
            row.var_ratio = t.tilted.variance() / s2;
        }
        rows.push_back(row);
    }
    return rows;
}

/// Point masses of S_t = Z_1 + ... + Z_t on [min_value, min_value + size).
/// Stored as natural logs when the linear scale would underflow.
struct LatticePmf {
    std::int64_t min_value = 0;
    std::vector<double> values;
    bool log_scale = false;

    std::int64_t max_value() const noexcept { return min_value + static_cast<std::int64_t>(values.size()) - 1; }
    double prob(std::int64_t x) const noexcept {
        if (x < min_value || x > max_value()) return 0.0;
        const double v = values[static_cast<std::size_t>(x - min_value)];
        return log_scale ? std::exp(v) : v;
    }
    double log_prob(std::int64_t x) const noexcept {
        if (x < min_value || x > max_value()) return -std::numeric_limits<double>::infinity();
        const double v = values[static_cast<std::size_t>(x - min_value)];
        return log_scale ? v : std::log(v);
    }
};

namespace detail {

/// Neumaier-compensated accumulator.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) noexcept {
        const double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + comp; }
};

}  // namespace detail

/// Exact law of the sum of t independent copies of Z, by dynamic programming.
inline LatticePmf exact_convolution(const LatticeDistribution& z, std::int64_t t) {
    if (t < 1) throw std::invalid_argument("convolution length must be >= 1");
    if (t * std::max<std::int64_t>(z.span(), 1) > 1'000'000) throw std::length_error("convolution exceeds t*k <= 1e6 guard");

    const auto& p = z.probs();
    double min_positive = 1.0;
    for (double x : p) if (x > 0.0) min_positive = std::min(min_positive, x);
    const bool use_log = static_cast<double>(t) * -std::log(min_positive) > 690.0;

    const std::size_t width = p.size();
    LatticePmf out;
    out.min_value = z.min_value() * t;
    out.log_scale = use_log;
    std::vector<double> cur;
    if (use_log) {
        std::vector<double> logp(width);
        for (std::size_t i = 0; i < width; ++i) logp[i] = p[i] > 0.0 ? std::log(p[i]) : -std::numeric_limits<double>::infinity();
        cur = logp;
        for (std::int64_t step = 1; step < t; ++step) {
            std::vector<double> next(cur.size() + width - 1, -std::numeric_limits<double>::infinity());
            for (std::size_t j = 0; j < next.size(); ++j) {
                double top = -std::numeric_limits<double>::infinity();
                const std::size_t i0 = j + 1 > cur.size() ? j + 1 - cur.size() : 0;
                const std::size_t i1 = std::min(width - 1, j);
                for (std::size_t i = i0; i <= i1; ++i) top = std::max(top, logp[i] + cur[j - i]);
                if (top == -std::numeric_limits<double>::infinity()) continue;
                detail::CompensatedSum acc;
                for (std::size_t i = i0; i <= i1; ++i) acc.add(std::exp(logp[i] + cur[j - i] - top));
                next[j] = top + std::log(acc.value());
            }
            cur = std::move(next);
        }
    } else {
        cur = p;
        for (std::int64_t step = 1; step < t; ++step) {
            std::vector<double> next(cur.size() + width - 1, 0.0);
            for (std::size_t j = 0; j < next.size(); ++j) {
                const std::size_t i0 = j + 1 > cur.size() ? j + 1 - cur.size() : 0;
                const std::size_t i1 = std::min(width - 1, j);
                detail::CompensatedSum acc;
                for (std::size_t i = i0; i <= i1; ++i) acc.add(p[i] * cur[j - i]);
                next[j] = acc.value();
            }
            cur = std::move(next);
        }
    }
    out.values = std::move(cur);
    return out;
}

struct LltEstimate {
    double value = 0.0;
    bool weak_hypothesis = false;  ///< t * b_1(Z) < 50
};

/// P(S_t = x) ~ e^{-a x} c^t / (sigma' sqrt(2 pi t)), sigma' the tilted
/// standard deviation. Valid for x small compared with sqrt(t).
inline LltEstimate llt_point_prob(const LatticeDistribution& z, std::int64_t t, std::int64_t x) {
    const double b1 = bernoulli_part(z, 1);
    if (b1 == 0.0) throw std::domain_error("lattice span > 1; formula invalid");
    const TiltResult tr = tilt(z);
    const double td = static_cast<double>(t);
    LltEstimate out;
    out.value = std::exp(-tr.a * static_cast<double>(x) + td * std::log(tr.c)) /
                (tr.sigma_tilted() * std::sqrt(2.0 * std::numbers::pi * td));
    out.weak_hypothesis = td * b1 < 50.0;
    return out;
}

/// First-passage law of tau_r = inf{t : W_t = -r} for the walk with steps Z.
struct HittingPmf {
    std::vector<double> first_passage;  ///< [t] = P(tau_r = t), t = 0..T
    std::vector<double> survival;       ///< [t] = P(tau_r >= t), t = 0..T+1
    double truncated_mass = 0.0;        ///< mass dropped above the 10 sigma sqrt(T) cap
};

/// Forward DP on walk states >= -r+1. States that cannot reach -r by time T
/// are dropped exactly; states above 10 sigma sqrt(T) are dropped with their
/// mass reported in `truncated_mass`.
inline HittingPmf exact_hitting(const LatticeDistribution& z, std::int64_t r, std::int64_t T) {
    if (z.min_value() < -1) throw std::invalid_argument("steps below -1 are not supported");
    if (r < 1 || T < 1) throw std::invalid_argument("need r >= 1 and T >= 1");

    const std::int64_t cap = static_cast<std::int64_t>(std::ceil(10.0 * z.stddev() * std::sqrt(static_cast<double>(T)))) + 2 * z.span() + r;
    // index = height + r - 1, heights -r+1 .. cap
    const std::size_t states = static_cast<std::size_t>(cap + r);
    std::vector<double> cur(states, 0.0), next(states, 0.0);
    cur[static_cast<std::size_t>(r - 1)] = 1.0;

    HittingPmf out;
    out.first_passage.assign(static_cast<std::size_t>(T) + 1, 0.0);
    out.survival.assign(static_cast<std::size_t>(T) + 2, 0.0);
    out.survival[0] = out.survival[1] = 1.0;
    double parked = 0.0;  // mass that provably cannot hit -r by time T
    std::size_t top = static_cast<std::size_t>(r);  // exclusive bound of occupied indices

    const auto& p = z.probs();
    const std::int64_t zmin = z.min_value();
    for (std::int64_t t = 1; t <= T; ++t) {
        std::fill(next.begin(), next.begin() + static_cast<std::ptrdiff_t>(std::min(states, top + p.size())), 0.0);
        detail::CompensatedSum absorbed;
        std::size_t new_top = 0;
        for (std::size_t s = 0; s < top; ++s) {
            const double mass = cur[s];
            if (mass == 0.0) continue;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (p[i] == 0.0) continue;
                const std::int64_t idx = static_cast<std::int64_t>(s) + zmin + static_cast<std::int64_t>(i);
                const double m = mass * p[i];
                if (idx < 0) {
                    absorbed.add(m);
                } else if (static_cast<std::size_t>(idx) >= states) {
                    out.truncated_mass += m;
                } else {
                    next[static_cast<std::size_t>(idx)] += m;
                    new_top = std::max(new_top, static_cast<std::size_t>(idx) + 1);
                }
            }
        }
        // A walk at height h needs h + r more down-steps to hit -r.
        const std::int64_t remaining = T - t;
        const std::int64_t max_useful = std::max<std::int64_t>(remaining, 0);
        for (std::size_t s = static_cast<std::size_t>(std::min<std::int64_t>(max_useful, static_cast<std::int64_t>(new_top))); s < new_top; ++s) {
            parked += next[s];
            next[s] = 0.0;
        }
        new_top = std::min<std::size_t>(new_top, static_cast<std::size_t>(max_useful));
        out.first_passage[static_cast<std::size_t>(t)] = absorbed.value();
        std::swap(cur, next);
        top = new_top;
        detail::CompensatedSum alive;
        for (std::size_t s = 0; s < top; ++s) alive.add(cur[s]);
        out.survival[static_cast<std::size_t>(t) + 1] = alive.value() + parked + out.truncated_mass;
    }
    return out;
}

/// Fitted constants for the first-passage tail P(tau_r >= t).
struct CrEstimate {
    double fitted = 0.0;          ///< least-squares constant of the delta^{-1} t^{-3/2} e^{-delta t} form
    double point_constant = 0.0;  ///< constant K with P(tau_r = t) ~ K t^{-3/2} e^{-delta t}
    double anchor = 0.0;          ///< 1 / (sigma sqrt(2 pi)), the r = 1 value of K
    double delta = 0.0;
    double max_relative_residual = 0.0;
    std::int64_t horizon = 0;     ///< T, chosen so that delta T = 10
    bool flagged = false;         ///< residual above 20% or truncation above 1e-12
};

/// Fits the tail constants from the exact first-passage DP over t in [T/2, T].
///
/// `fitted` is the plain least-squares constant for the asymptotic tail form.
/// `point_constant` divides the exact tail by sum_{s>=t} s^{-3/2} e^{-delta s}
/// instead, which removes the O(1/(delta t)) bias of the asymptotic form; it
/// is the quantity that tends to `anchor` for r = 1 as the drift vanishes.
inline CrEstimate estimate_cr(const LatticeDistribution& z, std::int64_t r, std::int64_t max_horizon = 400'000) {
    if (!(z.mean() < 0.0)) throw std::domain_error("tail constant needs negative drift (delta > 0)");
    const TiltResult tr = tilt(z);
    if (!(tr.delta > 0.0)) throw std::domain_error("delta = 0: tail is polynomial only");

    CrEstimate est;
    est.delta = tr.delta;
    est.anchor = 1.0 / (z.stddev() * std::sqrt(2.0 * std::numbers::pi));
    const double delta = tr.delta;
    std::int64_t T = static_cast<std::int64_t>(std::ceil(10.0 / delta));
    T = std::max<std::int64_t>(T, 40);
    if (T > max_horizon) {
        T = max_horizon;
        est.flagged = true;
    }
    est.horizon = T;
    const HittingPmf h = exact_hitting(z, r, T);
    if (h.truncated_mass > 1e-12) est.flagged = true;

    const std::int64_t t0 = T / 2;
    // Suffix sums of s^{-3/2} e^{-delta s} from t0 up to where terms vanish.
    const std::int64_t tail_end = T + static_cast<std::int64_t>(std::ceil(60.0 / delta));
    std::vector<double> suffix(static_cast<std::size_t>(tail_end - t0 + 2), 0.0);
    for (std::int64_t s = tail_end; s >= t0; --s) {
        const double term = std::pow(static_cast<double>(s), -1.5) * std::exp(-delta * static_cast<double>(s));
        suffix[static_cast<std::size_t>(s - t0)] = suffix[static_cast<std::size_t>(s - t0 + 1)] + term;
    }

    std::vector<double> y_fit, y_point;
    for (std::int64_t t = t0; t <= T; ++t) {
        const double td = static_cast<double>(t);
        const double tail = h.survival[static_cast<std::size_t>(t)];
        y_fit.push_back(tail * std::pow(td, 1.5) * std::exp(delta * td) * delta);
        y_point.push_back(tail / suffix[static_cast<std::size_t>(t - t0)]);
    }
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    est.fitted = mean_of(y_fit);
    est.point_constant = mean_of(y_point);
    for (double y : y_fit) est.max_relative_residual = std::max(est.max_relative_residual, std::fabs(y - est.fitted) / est.fitted);
    if (est.max_relative_residual > 0.2) est.flagged = true;
    return est;
}

/// c_r delta^{-1} t^{-3/2} e^{-delta t} with c_r the fitted tail constant.
inline double hitting_tail(const CrEstimate& cr, std::int64_t t) {
    const double td = static_cast<double>(t);
    return cr.fitted / cr.delta * std::pow(td, -1.5) * std::exp(-cr.delta * td);
}

inline double hitting_tail(const LatticeDistribution& z, std::int64_t r, std::int64_t t) {
    return hitting_tail(estimate_cr(z, r), t);
}

}  // namespace cmlab
