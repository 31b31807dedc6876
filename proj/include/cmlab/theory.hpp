#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmlab/degree_sequence.hpp"
#include "cmlab/tilt.hpp"

namespace cmlab {

struct SurvivalSolution {
    double z = 1.0;
    double rho = 0.0;
    double rho_star = 0.0;
    bool supercritical = false;
    int iterations = 0;
};

namespace detail {

/// g(z) = sum_d q_d z^{d-1} = f'(z) / mu_1 and its derivative.
template <DegreeLaw L>
double survival_map(const L& law, double mu1, double z) { return pgf(law, z, 1) / mu1; }

template <DegreeLaw L>
double survival_map_slope(const L& law, double mu1, double z) { return pgf(law, z, 2) / mu1; }

/// sum_{d>=0} p_d z^d
template <DegreeLaw L>
double full_pgf(const L& law, double z) { return law.fraction(0) + pgf(law, z, 0); }

}  // namespace detail

/// Smallest fixed point of z = sum_d q_d z^{d-1}, by upward iteration from 0
/// and a bisection polish below the point where the map has slope 1.
template <DegreeLaw L>
SurvivalSolution solve_survival(const L& law) {
    const double mu1 = factorial_moment(law, 1);
    if (!(mu1 > 0.0)) throw std::domain_error("no stubs");
    const double lambda = factorial_moment(law, 2) / mu1;
    SurvivalSolution out;
    if (lambda <= 1.0) return out;
    out.supercritical = true;

    auto h = [&](double z) { return detail::survival_map(law, mu1, z) - z; };
    double z = 0.0;
    if (detail::survival_map(law, mu1, 0.0) > 0.0) {
        int it = 0;
        for (; it < 1'000'000; ++it) {
            const double next = detail::survival_map(law, mu1, z);
            if (next - z <= 1e-15) break;
            z = next;
        }
        out.iterations = it;

        // g' is increasing with g'(1) = lambda > 1; the root lies below where g' = 1.
        double lo = 0.0, hi = 1.0;
        if (detail::survival_map_slope(law, mu1, 0.0) >= 1.0) hi = 0.0;
        for (int i = 0; i < 200 && hi > 0.0 && hi - lo > 1e-17; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (detail::survival_map_slope(law, mu1, mid) < 1.0) lo = mid; else hi = mid;
        }
        double a = z, b = std::max(hi, z);
        for (int i = 0; i < 200 && b - a > 1e-17; ++i) {
            const double mid = 0.5 * (a + b);
            if (h(mid) > 0.0) a = mid; else b = mid;
        }
        z = std::fabs(h(a)) <= std::fabs(h(b)) ? a : b;
        if (std::fabs(h(z)) > 1e-12) throw std::runtime_error("survival fixed point did not converge");
    }
    out.z = z;
    const double F = detail::full_pgf(law, z);
    out.rho = 1.0 - F;
    out.rho_star = F - mu1 * z * z / 2.0 - 1.0 + mu1 / 2.0;
    return out;
}

struct RhoApprox {
    double rho = 0.0;
    double rho_star = 0.0;
};

/// Small-epsilon forms 2 mu_1^2 eps / mu_3 and 2 mu_1^3 eps^3 / (3 mu_3^2).
template <DegreeLaw L>
RhoApprox asymptotic_rho(const L& law) {
    const double mu1 = factorial_moment(law, 1);
    const double mu3 = factorial_moment(law, 3);
    const double eps = branching_excess(law);
    if (!(eps > 0.0)) throw std::domain_error("asymptotic_rho needs lambda > 1");
    if (!(mu3 > 0.0)) throw std::domain_error("asymptotic_rho needs mu_3 > 0");
    return {2.0 * mu1 * mu1 * eps / mu3, 2.0 * mu1 * mu1 * mu1 * eps * eps * eps / (3.0 * mu3 * mu3)};
}

struct TrajectoryPoint {
    double tau = 0.0;
    double z = 1.0;
    double x = 0.0;
    double u = 0.0;
    double xdot = 0.0;    ///< closed form -1 - z f''/f' + 2 f''/mu_1
    double de_rhs = 0.0;  ///< -1 + (z f''/f')(1 - 2x/u)
    double xddot = 0.0;   ///< analytic second derivative
};

/// Largest tau for which z(tau) is defined: f(1) - f(0) = 1 - p_0.
template <DegreeLaw L>
double trajectory_horizon(const L& law) { return pgf(law, 1.0, 0); }

/// z(tau) with f(z) + tau = f(1), so z(0) = 1. Bisection on [0, 1].
template <DegreeLaw L>
double z_of_tau(const L& law, double tau) {
    const double f1 = pgf(law, 1.0, 0);
    if (!(tau >= 0.0 && tau <= f1 * (1.0 + 1e-15))) throw std::domain_error("tau outside [0, 1 - p_0]");
    if (tau == 0.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    const double target = f1 - tau;
    for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (pgf(law, mid, 0) < target) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
}

template <DegreeLaw L>
TrajectoryPoint trajectory_at_z(const L& law, double z, double tau) {
    const double mu1 = factorial_moment(law, 1);
    const double f1 = pgf(law, z, 1);
    const double f2 = pgf(law, z, 2);
    const double f3 = pgf(law, z, 3);
    TrajectoryPoint p;
    p.tau = tau;
    p.z = z;
    p.u = z * f1;
    p.x = z * f1 - f1 * f1 / mu1;
    p.xdot = -1.0 - z * f2 / f1 + 2.0 * f2 / mu1;
    p.de_rhs = -1.0 + (z * f2 / f1) * (1.0 - 2.0 * p.x / p.u);
    // dz/dtau = -1/f'
    const double dxdot_dz = -(f2 / f1 + z * f3 / f1 - z * f2 * f2 / (f1 * f1)) + 2.0 * f3 / mu1;
    p.xddot = -dxdot_dz / f1;
    return p;
}

template <DegreeLaw L>
TrajectoryPoint trajectory(const L& law, double tau) {
    return trajectory_at_z(law, z_of_tau(law, tau), tau);
}

/// -(mu_1 mu_3 + mu_2^2 - mu_1 mu_2) / mu_1^3
template <DegreeLaw L>
double xddot_at_zero(const L& law) {
    const double m1 = factorial_moment(law, 1);
    const double m2 = factorial_moment(law, 2);
    const double m3 = factorial_moment(law, 3);
    return -(m1 * m3 + m2 * m2 - m1 * m2) / (m1 * m1 * m1);
}

struct SupercriticalPrediction {
    double n = 0.0;
    double epsilon = 0.0;
    double Lambda = 0.0;
    double z = 0.0;
    double rho = 0.0;
    double rho_star = 0.0;
    double mean_L1 = 0.0;
    double var_L1 = 0.0;
    double mean_N1 = 0.0;
    double var_N1 = 0.0;
    double cov = 0.0;
    double corr = 0.0;
    double slope_at_rho = 0.0;
    double L2_scale = 0.0;
    std::vector<double> L1_by_degree;  ///< n_d (1 - z^d)
    std::vector<std::string> warnings;
};

template <DegreeLaw L>
SupercriticalPrediction supercritical_prediction(const L& law, double n) {
    const double mu1 = factorial_moment(law, 1);
    const double mu3 = factorial_moment(law, 3);
    const double eps = branching_excess(law);
    if (!(eps > 0.0)) throw std::domain_error("supercritical prediction needs lambda > 1");
    const double Lambda = eps * eps * eps * n;
    if (Lambda < 1.0) throw std::domain_error("supercritical prediction needs eps^3 n >= 1");
    if (!(mu3 > 0.0)) throw std::domain_error("supercritical prediction needs mu_3 > 0");

    SupercriticalPrediction p;
    p.n = n;
    p.epsilon = eps;
    p.Lambda = Lambda;
    if (Lambda < 100.0) p.warnings.emplace_back("eps^3 n < 100: asymptotics numerically weak");
    if (eps > 0.3) p.warnings.emplace_back("eps > 0.3: small-eps variance formulas are rough");

    const SurvivalSolution s = solve_survival(law);
    p.z = s.z;
    p.rho = s.rho;
    p.rho_star = s.rho_star;
    p.mean_L1 = s.rho * n;
    p.mean_N1 = s.rho_star * n;
    p.var_L1 = 2.0 * mu1 / eps * n;
    p.var_N1 = 10.0 * mu1 * mu1 * mu1 / (3.0 * mu3 * mu3) * eps * eps * eps * n;
    p.cov = 2.0 * mu1 * mu1 / mu3 * eps * n;
    p.corr = p.cov / std::sqrt(p.var_L1 * p.var_N1);
    p.slope_at_rho = -trajectory_at_z(law, s.z, s.rho).xdot;
    p.L2_scale = std::log(Lambda) / (eps * eps);
    for (int d = 0; d <= law.dmax(); ++d) p.L1_by_degree.push_back(n * law.fraction(d) * (1.0 - std::pow(s.z, d)));
    return p;
}

/// Law of eta - 2 for eta drawn from the size-biased degree law.
template <DegreeLaw L>
LatticeDistribution eta_minus_two(const L& law) {
    const SizeBiasedDistribution sb = size_biased(law);
    std::vector<double> p(sb.q.size() - 1);
    for (std::size_t d = 1; d < sb.q.size(); ++d) p[d - 1] = sb.q[d];
    return LatticeDistribution(-1, std::move(p));
}

struct SubcriticalPrediction {
    double n = 0.0;
    double epsilon = 0.0;       ///< 1 - lambda
    double Lambda = 0.0;        ///< eps^3 n
    double v0 = 0.0;
    double a_n = 0.0;
    double delta_n = 0.0;
    double delta_asymptotic = 0.0;  ///< eps^2 / (2 v0)
    double c2z = 0.0;               ///< numerically estimated tail constant for tau_2
    double c2z_heuristic = 0.0;     ///< 2 / (sigma sqrt(2 pi))
    bool c2z_flagged = false;
    double c = 0.0;                 ///< Gumbel scale c_{2,Z} (2 v0)^{-3/2} mu_1 / 2
    double c_heuristic = 0.0;
    double mu1 = 0.0;
    std::vector<std::string> warnings;

    double centre() const { return std::log(Lambda) - 2.5 * std::log(std::log(Lambda)); }
    double window(double x) const { return (centre() + x) / delta_n; }
    double limit_cdf(double x) const { return std::exp(-c * std::exp(-x)); }
    /// The Gumbel variate x for an observed largest component size.
    double standardize(double L1) const { return delta_n * L1 - centre(); }
};

template <DegreeLaw L>
SubcriticalPrediction subcritical_prediction(const L& law, double n) {
    const double mu1 = factorial_moment(law, 1);
    const double eps = -branching_excess(law);
    if (!(eps > 0.0)) throw std::domain_error("subcritical prediction needs lambda < 1");
    const double Lambda = eps * eps * eps * n;
    if (Lambda < 3.0) throw std::domain_error("subcritical prediction needs eps^3 n >= 3");
    const LatticeDistribution z = eta_minus_two(law);
    if (!z.has_positive()) throw std::domain_error("eta - 2 has no positive support: L1 = O(log n) regime unsupported");

    SubcriticalPrediction p;
    p.n = n;
    p.epsilon = eps;
    p.Lambda = Lambda;
    p.mu1 = mu1;
    p.v0 = size_biased(law).v0;
    if (Lambda < 100.0) p.warnings.emplace_back("eps^3 n < 100: asymptotics numerically weak");

    const TiltResult tr = tilt(z);
    p.a_n = tr.a;
    p.delta_n = tr.delta;
    p.delta_asymptotic = eps * eps / (2.0 * p.v0);
    const CrEstimate cr = estimate_cr(z, 2);
    p.c2z = cr.point_constant;
    p.c2z_flagged = cr.flagged;
    if (cr.flagged) p.warnings.emplace_back("tail constant estimate flagged");
    p.c2z_heuristic = 2.0 / (z.stddev() * std::sqrt(2.0 * std::numbers::pi));
    const double scale = std::pow(2.0 * p.v0, -1.5) * mu1 / 2.0;
    p.c = p.c2z * scale;
    p.c_heuristic = p.c2z_heuristic * scale;
    return p;
}

struct RRegularClosedForm {
    int r = 3;
    double epsilon = 0.0;
    double n = 0.0;
    double p = 0.0;           ///< percolation probability (1 + eps)/(r - 1)
    double rho0 = 0.0;        ///< 2 eps r / (r - 2)
    double sigma2 = 0.0;      ///< 2 r / (eps (r - 1)), per vertex
    double delta = 0.0;       ///< (r - 1) eps^2 / (2 (r - 2))
    double alpha0 = 0.0;
    double alpha2 = 0.0;
    double beta = 0.0;
};

inline RRegularClosedForm rregular_closed_form(int r, double eps, double n) {
    if (r < 3) throw std::invalid_argument("r-regular closed form needs r >= 3");
    const double rd = r;
    RRegularClosedForm c;
    c.r = r;
    c.epsilon = eps;
    c.n = n;
    c.p = (1.0 + eps) / (rd - 1.0);
    c.rho0 = 2.0 * eps * rd / (rd - 2.0);
    c.sigma2 = 2.0 * rd / (eps * (rd - 1.0));
    c.delta = (rd - 1.0) * eps * eps / (2.0 * (rd - 2.0));
    c.alpha0 = (rd - 2.0) / (rd - 1.0);
    c.alpha2 = (rd - 2.0) / rd;
    c.beta = (rd - 1.0) / rd;
    return c;
}

}  // namespace cmlab
