#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace cmlab::stats {

inline double mean(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("variance needs at least two values");
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double covariance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("covariance needs paired samples");
    const double mx = mean(x), my = mean(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
    return covariance(x, y) / std::sqrt(variance(x) * variance(y));
}

/// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> x, double q) {
    if (x.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(x.begin(), x.end());
    const double h = (static_cast<double>(x.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// exp(-c e^{-x})
inline double gumbel_cdf(double x, double c = 1.0) { return std::exp(-c * std::exp(-x)); }

/// Inverse of the standard normal CDF (Acklam's rational approximation with one Newton step).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal quantile needs 0 < p < 1");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p > 1.0 - 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

/// Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 lambda^2}. Small lambda uses
/// the dual theta series 1 - sqrt(2 pi)/lambda sum_{j>=1} e^{-(2j-1)^2 pi^2 / (8 lambda^2)}.
inline double kolmogorov_q(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 1.18) {
        const double k = -std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda);
        double sum = 0.0;
        for (int j = 1; j <= 20; ++j) {
            const double term = std::exp(k * (2.0 * j - 1.0) * (2.0 * j - 1.0));
            sum += term;
            if (term <= 1e-17 * sum) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * sum, 0.0, 1.0);
    }
    double sum = 0.0, sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = sign * std::exp(-2.0 * j * j * lambda * lambda);
        sum += term;
        if (std::fabs(term) <= 1e-17 * std::fabs(sum)) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct TestStatistic {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// One-sample Kolmogorov-Smirnov test; p-value from the asymptotic series with
/// the effective-size correction sqrt(n) + 0.12 + 0.11/sqrt(n).
inline TestStatistic ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
    if (x.empty()) throw std::invalid_argument("KS test on empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double D = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double F = cdf(x[i]);
        D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
    }
    const double en = std::sqrt(n);
    return {D, kolmogorov_q((en + 0.12 + 0.11 / en) * D), 0};
}

inline TestStatistic ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS test on empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double D = 0.0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        D = std::max(D, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    return {D, kolmogorov_q((en + 0.12 + 0.11 / en) * D), 0};
}

inline double chi_square_sf(double stat, int dof) {
    if (dof < 1) throw std::invalid_argument("chi-square needs dof >= 1");
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

/// Bins 0..K-1 of integer counts, the last bin collecting everything >= K-1.
inline std::vector<std::int64_t> bin_counts(const std::vector<std::int64_t>& values, int bins) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(bins), 0);
    for (std::int64_t v : values) {
        const auto b = std::min<std::int64_t>(std::max<std::int64_t>(v, 0), bins - 1);
        ++out[static_cast<std::size_t>(b)];
    }
    return out;
}

/// Chi-square test of homogeneity for two binned samples. Adjacent bins are
/// merged from the top until every expected cell count is at least `min_expected`.
inline TestStatistic chi_square_homogeneity(std::vector<std::int64_t> a, std::vector<std::int64_t> b,
                                            double min_expected = 5.0) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("bin vectors must match");
    double na = 0.0, nb = 0.0;
    for (auto v : a) na += static_cast<double>(v);
    for (auto v : b) nb += static_cast<double>(v);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("empty sample in chi-square test");
    const double frac_min = std::min(na, nb) / (na + nb);
    auto ok = [&](std::size_t k) { return static_cast<double>(a[k] + b[k]) * frac_min >= min_expected; };
    // merge sparse bins downward, then a sparse first bin upward
    for (std::size_t k = a.size(); k-- > 1;) {
        if (!ok(k)) {
            a[k - 1] += a[k];
            b[k - 1] += b[k];
            a.erase(a.begin() + static_cast<std::ptrdiff_t>(k));
            b.erase(b.begin() + static_cast<std::ptrdiff_t>(k));
        }
    }
    while (a.size() > 1 && !ok(0)) {
        a[1] += a[0];
        b[1] += b[0];
        a.erase(a.begin());
        b.erase(b.begin());
    }
    TestStatistic out;
    out.dof = static_cast<int>(a.size()) - 1;
    if (out.dof < 1) return out;
    const double N = na + nb;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double col = static_cast<double>(a[k] + b[k]);
        const double ea = col * na / N, eb = col * nb / N;
        out.statistic += (static_cast<double>(a[k]) - ea) * (static_cast<double>(a[k]) - ea) / ea;
        out.statistic += (static_cast<double>(b[k]) - eb) * (static_cast<double>(b[k]) - eb) / eb;
    }
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

/// Goodness of fit of observed counts against expected cell probabilities.
inline TestStatistic chi_square_gof(const std::vector<std::int64_t>& observed, const std::vector<double>& probs) {
    if (observed.size() != probs.size() || observed.size() < 2) throw std::invalid_argument("bin vectors must match");
    double n = 0.0;
    for (auto v : observed) n += static_cast<double>(v);
    TestStatistic out;
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const double e = n * probs[k];
        if (!(e > 0.0)) throw std::invalid_argument("expected count must be positive");
        out.statistic += (static_cast<double>(observed[k]) - e) * (static_cast<double>(observed[k]) - e) / e;
    }
    out.dof = static_cast<int>(observed.size()) - 1;
    out.p_value = chi_square_sf(out.statistic, out.dof);
    return out;
}

}  // namespace cmlab::stats
