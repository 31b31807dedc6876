#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "cmlab/theory.hpp"

using namespace cmlab;

namespace {

const DegreeSequence half13({0, 1, 0, 1});        // p1 = p3 = 1/2
const DegreeSequence q06({0, 18, 0, 4});          // q1 = 0.6, q3 = 0.4
const DegreeSequence all3({0, 0, 0, 4});

std::vector<DegreeSequence> supercritical_battery() {
    return {half13, DegreeSequence({0, 0, 10, 4}), DegreeSequence({5, 20, 30, 20, 10, 6}),
            DegreeSequence({0, 30, 0, 10, 0, 2}), DegreeSequence({0, 500, 0, 490})};
}

/// Smallest root in [0, 1] of q3 z^2 + (q2 - 1) z + q1 = 0 for dmax <= 3.
double quadratic_root(const DegreeSequence& s) {
    const double mu1 = factorial_moment(s, 1);
    const double q1 = s.fraction(1) / mu1, q2 = 2 * s.fraction(2) / mu1, q3 = 3 * s.fraction(3) / mu1;
    if (q3 == 0.0) return q2 == 1.0 ? 1.0 : std::min(1.0, q1 / (1.0 - q2));
    const double b = q2 - 1.0;
    const double disc = std::sqrt(b * b - 4 * q3 * q1);
    const double r1 = (-b - disc) / (2 * q3);
    return std::min(1.0, r1);
}

}  // namespace

TEST(Survival, HalfOneHalfThree) {
    const auto s = solve_survival(half13);
    EXPECT_NEAR(s.z, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.rho, 22.0 / 27.0, 1e-12);
    EXPECT_NEAR(s.rho_star, 2.0 / 27.0, 1e-12);
    EXPECT_TRUE(s.supercritical);
}

TEST(Survival, AllThree) {
    const auto s = solve_survival(all3);
    EXPECT_NEAR(s.z, 0.0, 1e-12);
    EXPECT_NEAR(s.rho, 1.0, 1e-12);
}

TEST(Survival, SubcriticalIsDegenerate) {
    const auto s = solve_survival(q06);
    EXPECT_EQ(s.z, 1.0);
    EXPECT_EQ(s.rho, 0.0);
    EXPECT_EQ(s.rho_star, 0.0);
    EXPECT_FALSE(s.supercritical);
}

TEST(Survival, MatchesQuadraticRoots) {
    for (const auto& s : {half13, DegreeSequence({0, 0, 10, 4}), DegreeSequence({0, 500, 0, 490}),
                          DegreeSequence({3, 8, 11, 6}), DegreeSequence({1, 10, 5, 12})}) {
        EXPECT_NEAR(solve_survival(s).z, quadratic_root(s), 1e-11);
    }
}

TEST(Survival, InvariantsOverBattery) {
    for (const auto& s : supercritical_battery()) {
        const auto sol = solve_survival(s);
        const double mu1 = factorial_moment(s, 1);
        double g = 0.0, F = 0.0;
        for (int d = 1; d <= s.dmax(); ++d) g += d * s.fraction(d) / mu1 * std::pow(sol.z, d - 1);
        for (int d = 0; d <= s.dmax(); ++d) F += s.fraction(d) * std::pow(sol.z, d);
        EXPECT_NEAR(g, sol.z, 1e-12);
        EXPECT_NEAR(sol.rho, 1.0 - F, 1e-12);
        EXPECT_GE(sol.rho_star, 0.0);
        // no smaller fixed point
        for (double y = 0.0; y < sol.z - 1e-6; y += 1e-3) {
            double gy = 0.0;
            for (int d = 1; d <= s.dmax(); ++d) gy += d * s.fraction(d) / mu1 * std::pow(y, d - 1);
            EXPECT_GT(gy, y);
        }
    }
}

TEST(AsymptoticRho, Examples) {
    const auto a = asymptotic_rho(half13);
    EXPECT_NEAR(a.rho, 4.0 / 3.0, 1e-12);
    EXPECT_THROW(asymptotic_rho(q06), std::domain_error);
    for (double eps : {0.05, 0.01}) {
        const auto r = asymptotic_rho(rregular_percolation_distribution(3, (1 + eps) / 2));
        // the general form equals the closed form's 6 eps up to a factor 1 / (1 + eps)
        EXPECT_NEAR(r.rho, 6 * eps / (1 + eps), 1e-12);
    }
}

TEST(AsymptoticRho, RatioTendsToOneMonotonically) {
    double prev = 0.0;
    for (double eps : {0.1, 0.03, 0.01}) {
        const auto law = rregular_percolation_distribution(4, (1 + eps) / 3);
        const double ratio = solve_survival(law).rho / asymptotic_rho(law).rho;
        EXPECT_GT(ratio, prev);
        EXPECT_LT(ratio, 1.0);
        prev = ratio;
    }
    EXPECT_GT(prev, 0.98);
}

TEST(Trajectory, Origin) {
    for (const auto& s : supercritical_battery()) {
        const auto p = trajectory(s, 0.0);
        EXPECT_EQ(p.z, 1.0);
        EXPECT_NEAR(p.x, 0.0, 1e-15);
        EXPECT_NEAR(p.xdot, branching_excess(s), 1e-12);
    }
    EXPECT_THROW(trajectory(half13, 1.5), std::domain_error);
    EXPECT_THROW(trajectory(half13, -0.1), std::domain_error);
}

TEST(Trajectory, AllThreeClosedForm) {
    const auto p = trajectory(all3, 7.0 / 8.0);
    EXPECT_NEAR(p.z, 0.5, 1e-12);
    EXPECT_NEAR(p.x, 3.0 / 16.0, 1e-12);
    for (int i = 0; i <= 20; ++i) {
        const double tau = i / 20.0;
        const double w = 1.0 - tau;
        EXPECT_NEAR(trajectory(all3, tau).x, 3 * w - 3 * std::pow(w, 4.0 / 3.0), 1e-12) << tau;
    }
}

TEST(Trajectory, VanishesAtRho) {
    for (const auto& s : supercritical_battery()) {
        const auto sol = solve_survival(s);
        const auto p = trajectory(s, sol.rho);
        EXPECT_NEAR(p.x, 0.0, 1e-10);
        EXPECT_LT(p.xdot, 0.0);
    }
}

TEST(Trajectory, SecondDerivativeAtZero) {
    for (const auto& s : supercritical_battery()) {
        const double closed = xddot_at_zero(s);
        EXPECT_NEAR(trajectory(s, 0.0).xddot, closed, 1e-12 * std::fabs(closed));
        const double h = 1e-4;
        // one-sided: x is only defined for tau >= 0
        const double x1 = trajectory(s, h).x, x2 = trajectory(s, 2 * h).x, x3 = trajectory(s, 3 * h).x;
        const double fd = (2 * 0.0 - 5 * x1 + 4 * x2 - x3) / (h * h);
        EXPECT_NEAR(fd / closed, 1.0, 1e-5);
    }
}

TEST(Trajectory, DifferentialEquationResidual) {
    for (const auto& s : supercritical_battery()) {
        const double T = trajectory_horizon(s);
        for (int i = 1; i <= 20; ++i) {
            const double tau = T * i / 21.0;
            const auto p = trajectory(s, tau);
            EXPECT_NEAR(p.xdot, p.de_rhs, 1e-10) << tau;
            const double h = 1e-6;
            const double fd = (trajectory(s, tau + h).x - trajectory(s, tau - h).x) / (2 * h);
            EXPECT_NEAR(fd, p.xdot, 1e-6);
            EXPECT_NEAR(p.u, p.z * pgf(s, p.z, 1), 1e-15);
            EXPECT_NEAR(pgf(s, p.z) + tau, pgf(s, 1.0), 1e-12);
        }
    }
}

TEST(Trajectory, EarlyLinearLowerBound) {
    for (const auto& s : supercritical_battery()) {
        const double eps = branching_excess(s);
        const double top = std::min(eps / 10, trajectory_horizon(s));
        for (int i = 1; i <= 50; ++i) {
            const double tau = top * i / 50.0;
            EXPECT_GT(trajectory(s, tau).x, eps * tau / 2) << tau;
        }
    }
}

TEST(Supercritical, Formulas) {
    const double n = 1e6;
    const auto p = supercritical_prediction(half13, n);
    EXPECT_NEAR(p.rho, 22.0 / 27.0, 1e-12);
    EXPECT_NEAR(p.L1_by_degree[3], 13.0 * n / 27.0, 1e-6);
    EXPECT_NEAR(p.L1_by_degree[1], n / 2 * (2.0 / 3.0), 1e-6);
    EXPECT_NEAR(p.corr, std::sqrt(0.6), 1e-12);
    EXPECT_FALSE(p.warnings.empty());  // eps = 0.5

    for (double eps : {0.05, 0.15}) {
        const auto law = rregular_percolation_distribution(3, (1 + eps) / 2);
        const auto q = supercritical_prediction(law, 2e5);
        EXPECT_NEAR(q.corr, std::sqrt(0.6), 1e-12);
        // 2 mu_1 / eps with mu_1 = 3 p = 3 (1 + eps) / 2
        EXPECT_NEAR(q.var_L1, 3 * (1 + eps) / eps * 2e5, 1e-6 * q.var_L1);
        EXPECT_GT(q.slope_at_rho, 0.0);
    }
    EXPECT_THROW(supercritical_prediction(q06, 1e6), std::domain_error);
    EXPECT_THROW(supercritical_prediction(rregular_percolation_distribution(3, 0.51), 100), std::domain_error);
}

TEST(Supercritical, RobustToSmallPerturbations) {
    const std::int64_t n = 100000;
    const auto base = solve_survival(DegreeSequence({0, n / 2, 0, n / 2}));
    const double eps = branching_excess(DegreeSequence({0, n / 2, 0, n / 2}));
    for (std::int64_t m : {2, 20, 200}) {
        const auto moved = solve_survival(DegreeSequence({0, n / 2 - m, 0, n / 2 + m}));
        const double rel = std::fabs(moved.rho - base.rho) / base.rho;
        EXPECT_LT(rel, 1.0 * m / (eps * n));
    }
}

TEST(Subcritical, TwoPointClosedForm) {
    const auto p = subcritical_prediction(q06, 1e6);
    EXPECT_NEAR(p.a_n, 0.5 * std::log(1.5), 1e-12);
    EXPECT_NEAR(p.delta_n, -std::log(2 * std::sqrt(0.24)), 1e-12);
    EXPECT_NEAR(p.delta_n, 0.020411, 1e-6);
    EXPECT_NEAR(p.delta_asymptotic, 0.04 / 1.92, 1e-12);
    EXPECT_NEAR(p.delta_n / p.delta_asymptotic, 0.98, 0.01);
    EXPECT_LT(p.window(0.0), p.window(1.0));
    EXPECT_NEAR(p.limit_cdf(0.0), std::exp(-p.c), 1e-15);
    EXPECT_NEAR(p.standardize(p.window(0.7)), 0.7, 1e-12);
}

TEST(Subcritical, DeltaRatioTendsToOne) {
    double prev = 0.0;
    for (double eps : {0.2, 0.1, 0.05, 0.02}) {
        const auto law = rregular_percolation_distribution(3, (1 - eps) / 2);
        const auto p = subcritical_prediction(law, 1e4 / (eps * eps * eps));
        const double ratio = p.delta_n / p.delta_asymptotic;
        EXPECT_GT(ratio, 0.0);
        EXPECT_GT(std::fabs(1 - prev), std::fabs(1 - ratio)) << eps;
        prev = ratio;
    }
    EXPECT_NEAR(prev, 1.0, 0.02);
}

TEST(Subcritical, Rejections) {
    EXPECT_THROW(subcritical_prediction(half13, 1e6), std::domain_error);
    // eta - 2 symmetric: lambda = 1
    EXPECT_THROW(subcritical_prediction(DegreeSequence({0, 3, 0, 1}), 1e6), std::domain_error);
    // only degrees 1 and 2: eta - 2 never positive
    EXPECT_THROW(subcritical_prediction(DegreeSequence({0, 2, 1}), 1e6), std::domain_error);
    EXPECT_THROW(subcritical_prediction(q06, 100), std::domain_error);
}

TEST(ClosedForm, RegularThree) {
    const auto c = rregular_closed_form(3, 0.1, 1e5);
    EXPECT_NEAR(c.rho0, 0.6, 1e-15);
    EXPECT_NEAR(c.sigma2, 30.0, 1e-12);
    EXPECT_NEAR(c.delta, 0.01, 1e-15);
    EXPECT_DOUBLE_EQ(c.alpha0, 0.5);
    EXPECT_DOUBLE_EQ(c.alpha2, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(c.beta, 2.0 / 3.0);
    EXPECT_NEAR(rregular_closed_form(1000000, 0.1, 1e5).rho0, 0.2, 1e-6);
    EXPECT_THROW(rregular_closed_form(2, 0.1, 1e5), std::invalid_argument);
}

TEST(ClosedForm, AgreesWithGeneralFormulas) {
    // Both pipelines on the binomial law differ by exactly the factor 1 + eps,
    // which is within 2% once eps <= 0.02.
    for (double eps : {0.05, 0.02}) {
        const double n = 1e7;
        const auto c = rregular_closed_form(3, eps, n);
        const auto law = rregular_percolation_distribution(3, c.p);
        const auto sp = supercritical_prediction(law, n);
        EXPECT_NEAR(sp.var_L1 / (c.sigma2 * n), 1 + eps, 1e-12);
        EXPECT_NEAR(c.rho0 / asymptotic_rho(law).rho, 1 + eps, 1e-12);
        if (eps <= 0.02) {
            EXPECT_NEAR(sp.var_L1 / (c.sigma2 * n), 1.0, 0.02);
        }
    }
}
