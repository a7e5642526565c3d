#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <gtfk/quadrature.hpp>
#include <gtfk/self_consistent.hpp>

using namespace gtfk;

namespace {

// Gaussian average by adaptive Gauss-Kronrod over +-12 standard deviations
double kronrod_smear(const std::function<double(double)>& f, double xbar, double alpha) {
    const double s = std::sqrt(alpha);
    auto g = [&](double xi) { return std::exp(-xi * xi / (2 * alpha)) * f(xbar + xi); };
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -12 * s, 12 * s, 15, 1e-14) /
           std::sqrt(2 * std::numbers::pi * alpha);
}

}  // namespace

TEST(Quadrature, LegendreIntegratesPolynomialsExactly) {
    const auto& r = gauss_legendre(16);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 30);
    EXPECT_NEAR(s, 2.0 / 31.0, 1e-14);
    EXPECT_NEAR(integrate_legendre([](double x) { return std::exp(x); }, 0.0, 1.0, 20), std::exp(1.0) - 1.0, 1e-14);
}

TEST(Quadrature, HermiteMoments) {
    const auto& r = gauss_hermite(40);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        m0 += r.weights[i];
        m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    }
    EXPECT_NEAR(m0, std::sqrt(std::numbers::pi), 1e-13);
    EXPECT_NEAR(m2, 0.5 * std::sqrt(std::numbers::pi), 1e-13);
}

TEST(Quadrature, TrapezoidAndBadOrders) {
    EXPECT_DOUBLE_EQ(trapezoid({1.0, 2.0, 3.0}, 0.5), 2.0);
    EXPECT_THROW(gauss_legendre(0), std::invalid_argument);
}

TEST(Smear, SecondMoment) {
    EXPECT_NEAR(gaussian_smear([](double x) { return x * x; }, 0.0, 0.04), 0.04, 1e-15);
}

TEST(Smear, LognormalMean) {
    const double v = gaussian_smear([](double x) { return std::exp(x); }, 0.0, 0.5);
    EXPECT_NEAR(v, 1.2840254166877415, 1e-13);
    EXPECT_NEAR(v, kronrod_smear([](double x) { return std::exp(x); }, 0.0, 0.5), 1e-12);
}

TEST(Smear, GarchCurvatureTerm) {
    const double v = gaussian_smear([](double x) { return std::exp(-2 * x); }, 1.0, 0.3);
    EXPECT_NEAR(v, 0.24659696394160648, 1e-13);
}

TEST(Smear, IdentityAtZeroVariance) {
    for (double xbar : {-3.0, 0.0, 0.7}) {
        EXPECT_EQ(gaussian_smear([](double x) { return std::sin(x) + x * x * x; }, xbar, 0.0),
                  std::sin(xbar) + xbar * xbar * xbar);
        const auto bk = black_karasinski(0.1, std::log(0.04), 0.85);
        const auto s = smeared_potential(bk, xbar, 0.0, 1.0);
        EXPECT_EQ(s.value, bk.potential(xbar, 1.0));
        EXPECT_EQ(s.second, bk.potential_second(xbar, 1.0));
        const auto g = smeared_potential(without_closed_form_smears(garch(0.1, 0.04, 0.6)), xbar, 0.0, 1.0);
        EXPECT_EQ(g.value, garch(0.1, 0.04, 0.6).potential(xbar, 1.0));
    }
}

TEST(Smear, ClosedFormAgreesWithQuadrature) {
    for (const auto& m : {black_karasinski(0.1, std::log(0.04), 0.85), garch(0.1, 0.04, 0.6), garch(0.1, 0.02, 0.5),
                          quadratic(0.1, 0.0, 0.02, 1.0, 0.5)}) {
        const auto generic = without_closed_form_smears(m);
        for (double xbar : {std::log(0.005), std::log(0.03), std::log(0.2)}) {
            for (double alpha : {1e-4, 0.01, 0.1, 0.5}) {
                const auto c = smeared_potential(m, xbar, alpha, 1.0);
                const auto q = smeared_potential(generic, xbar, alpha, 1.0);
                EXPECT_NEAR(c.value, q.value, 1e-10 * std::max(1.0, std::abs(c.value))) << m.base.name;
                EXPECT_NEAR(c.second, q.second, 1e-10 * std::max(1.0, std::abs(c.second))) << m.base.name;
                // an independent adaptive rule
                const double k = kronrod_smear([&](double x) { return m.potential(x, 1.0); }, xbar, alpha);
                EXPECT_NEAR(c.value, k, 1e-9 * std::max(1.0, std::abs(k))) << m.base.name;
            }
        }
    }
}

TEST(Smear, NonFiniteIsEvaluationError) {
    EXPECT_THROW(gaussian_smear([](double x) { return std::exp(x * x * x * x); }, 0.0, 50.0), EvaluationError);
    EXPECT_THROW(gaussian_smear([](double x) { return x; }, 0.0, -1.0), InputError);
}

TEST(Alpha, SmallFrequencyLimit) {
    for (double T : {0.5, 1.0, 5.0}) {
        EXPECT_NEAR(alpha_of_omega(0.0, T, 0.85), 0.7225 * T / 12.0, 1e-16);
        EXPECT_NEAR(alpha_of_omega(1e-14, T, 0.85) / (0.7225 * T / 12.0), 1.0, 1e-12);
    }
}

TEST(Alpha, RealBranchValue) {
    const double direct = 0.7225 / 0.2 * (1.0 / std::tanh(0.05) - 20.0);
    const double a = alpha_of_omega(0.01, 1.0, 0.85);
    EXPECT_NEAR(a, 0.060198300999733534, 1e-15);
    EXPECT_NEAR(direct, a, 1e-12);
}

TEST(Alpha, ImaginaryBranchValue) {
    EXPECT_NEAR(alpha_of_omega(-1.0, 1.0, 1.0), 0.08475613914377404, 1e-15);
}

TEST(Alpha, SeriesSwitchIsSeamless) {
    // the formulas on both sides of each switch point agree
    for (double f : {0.999e-3, 1.001e-3, 0.999, 1.001}) {
        for (double sign : {1.0, -1.0}) {
            const double om2 = sign * 4.0 * f * f;  // T = 1
            const double a = alpha_of_omega(om2, 1.0, 1.0);
            double ref;
            if (sign > 0) ref = (1.0 / (2.0 * 2.0 * f)) * (1.0 / std::tanh(f) - 1.0 / f);
            else ref = 0.25 * (1.0 / (f * f) - 1.0 / (std::tan(f) * f));
            EXPECT_NEAR(a, ref, f < 0.01 ? 1e-9 : 1e-14) << "f=" << f << " sign=" << sign;
        }
    }
}

TEST(Alpha, ContinuousAcrossZero) {
    const double up = alpha_of_omega(1e-6, 1.0, 1.0), down = alpha_of_omega(-1e-6, 1.0, 1.0);
    EXPECT_NEAR(up, 1.0 / 12.0, 1e-8);
    EXPECT_NEAR(down, 1.0 / 12.0, 1e-8);
    EXPECT_LT(up, down);
}

TEST(Alpha, MonotoneDecreasingOnBothBranches) {
    const double T = 2.0, sigma = 0.5;
    const double edge = -std::pow(2.0 * (std::numbers::pi - 1e-3) / T, 2);
    double prev = INFINITY;
    for (int i = 0; i <= 400; ++i) {
        const double om2 = edge + (10.0 - edge) * i / 400.0;
        const double a = alpha_of_omega(om2, T, sigma);
        EXPECT_GT(a, 0.0);
        EXPECT_LT(a, prev) << "omega2=" << om2;
        prev = a;
    }
}

TEST(Alpha, BranchBreakdown) {
    const double T = 1.0;
    const double om2 = -std::pow(2.0 * std::numbers::pi / T, 2);
    EXPECT_THROW(alpha_of_omega(om2, T, 1.0), BranchBreakdown);
    try {
        alpha_of_omega(-50.0, T, 1.0);
        FAIL() << "expected breakdown";
    } catch (const BranchBreakdown& e) {
        EXPECT_NEAR(e.phi(), 0.5 * std::sqrt(50.0), 1e-14);
    }
    EXPECT_NO_THROW(alpha_of_omega(-std::pow(2.0 * (std::numbers::pi - 1e-4), 2), T, 1.0));
    EXPECT_THROW(alpha_of_omega(1.0, 0.0, 1.0), InputError);
}

TEST(SelfConsistent, VasicekOneStep) {
    const auto m = vasicek(0.3, 0.05, 0.02);
    for (double xbar : {-0.1, 0.0, 0.05, 0.2}) {
        const auto p = solve_self_consistent(m, 0.0, 2.0, xbar);
        EXPECT_NEAR(p.omega2, 0.09, 1e-15);
        EXPECT_NEAR(p.w, m.potential(xbar, 0.0), 1e-14 * (1.0 + std::abs(p.w)) + 1e-15);
        EXPECT_LE(p.iterations, 2);
        EXPECT_FALSE(p.used_bisection);
    }
}

TEST(SelfConsistent, QuadraticConstantFrequency) {
    const double a = 0.1, sigma = 0.02, gamma = 0.5, lambda = 1.0;
    const auto m = quadratic(a, 0.0, sigma, 1.0, gamma);
    for (double xbar : {-0.2, 0.0, 0.03, 0.3})
        EXPECT_NEAR(solve_self_consistent(m, lambda, 2.0, xbar).omega2, a * a + 2 * lambda * gamma * sigma * sigma,
                    1e-15);
}

TEST(SelfConsistent, BlackKarasinskiAgainstIndependentBisection) {
    const auto p = solve_self_consistent(black_karasinski(0.1, std::log(0.04), 0.85), 1.0, 5.0, std::log(0.06));
    EXPECT_NEAR(p.omega2, 0.060208376217784262, 1e-12);
    EXPECT_NEAR(p.alpha, 0.29375033296007422, 1e-12);
    EXPECT_NEAR(p.w, 0.010423560375876388, 1e-12);
    EXPECT_LE(p.residual_omega2, 1e-12);
    EXPECT_LE(p.residual_alpha, 1e-11);
}

TEST(SelfConsistent, ResidualsSmallAcrossWorkingRange) {
    const auto bk = black_karasinski(0.1, std::log(0.04), 0.85);
    const auto g = garch(0.1, 0.04, 0.6);
    for (const auto* m : {&bk, &g}) {
        for (double T : {0.1, 1.0, 10.0, 20.0}) {
            for (double xbar = -8.0; xbar <= 0.5; xbar += 0.25) {
                const auto p = solve_self_consistent(*m, 1.0, T, xbar);
                EXPECT_GT(p.alpha, 0.0);
                EXPECT_LE(p.residual_omega2, 1e-12 * std::max(1.0, std::abs(p.omega2)) * 10)
                    << m->base.name << " T=" << T << " xbar=" << xbar;
                EXPECT_LE(p.residual_alpha, 1e-10) << m->base.name << " T=" << T << " xbar=" << xbar;
                // w from the generic condition
                const auto s = smeared_potential(*m, xbar, p.alpha, 1.0);
                EXPECT_NEAR(p.w, s.value - p.omega2 * p.alpha / (2 * m->sigma * m->sigma), 1e-12 * (1 + std::abs(p.w)));
            }
        }
    }
}

TEST(SelfConsistent, SmallFluctuationLimit) {
    for (const auto& m : {vasicek(0.1, 0.05, 0.02), black_karasinski(0.1, std::log(0.04), 0.85), garch(0.1, 0.04, 0.6)}) {
        const double x0 = lamperti_transform(m, 0.06);
        const auto p = solve_self_consistent(m, 1.0, 1e-4, x0);
        EXPECT_NEAR(p.alpha / (m.sigma * m.sigma * 1e-4 / 12.0), 1.0, 1e-6);
    }
}

TEST(SelfConsistent, BreakdownNamesAveragePoint) {
    const auto m = black_karasinski(0.001, std::log(0.04), 3.0);
    try {
        solve_self_consistent(m, -1.0, 10.0, 0.0);
        FAIL() << "expected breakdown";
    } catch (const BranchBreakdown& e) {
        EXPECT_EQ(e.xbar(), 0.0);
        EXPECT_NE(std::string(e.what()).find("xbar = 0"), std::string::npos) << e.what();
    }
}

TEST(ReducedDensity, SwapSymmetricAndPositive) {
    const auto bk = black_karasinski(0.1, std::log(0.04), 0.85);
    for (double T : {0.5, 5.0}) {
        for (double xbar : {-4.0, -3.0, -2.0}) {
            const auto p = solve_self_consistent(bk, 1.0, T, xbar);
            for (double x0 : {-3.5, -2.8}) {
                for (double xT : {-4.2, -3.0, -2.1}) {
                    const double a = reduced_density(p, x0, xT), b = reduced_density(p, xT, x0);
                    EXPECT_GE(a, 0.0);
                    EXPECT_NEAR(a, b, 1e-12 * a);
                }
            }
        }
    }
}

TEST(ReducedDensity, ImaginaryBranchIsSymmetric) {
    const auto m = black_karasinski(0.001, std::log(0.04), 3.0);
    const auto p = solve_self_consistent(m, -1.0, 1.0, -3.0);
    ASSERT_TRUE(p.imaginary);
    EXPECT_NEAR(reduced_density(p, -3.2, -2.5), reduced_density(p, -2.5, -3.2), 1e-12 * reduced_density(p, -3.2, -2.5));
}

TEST(ReducedDensity, FreeParticleLimit) {
    GtfkPoint p;
    p.xbar = 0.1;
    p.T = 2.0;
    p.sigma = 0.5;
    p.omega2 = 1e-12;
    p.half_angle = 0.5 * std::sqrt(p.omega2) * p.T;
    p.alpha = alpha_of_omega(p.omega2, p.T, p.sigma);
    p.w = 0.03;
    const double s2T = p.sigma * p.sigma * p.T;
    const double alpha0 = s2T / 12.0;
    for (double x0 : {0.0, 0.2}) {
        for (double xT : {-0.3, 0.1, 0.4}) {
            const double xi = 0.5 * (x0 + xT) - p.xbar;
            const double free = std::exp(-p.T * p.w) / std::sqrt(2 * std::numbers::pi * s2T) *
                                std::exp(-xi * xi / (2 * alpha0)) / std::sqrt(2 * std::numbers::pi * alpha0) *
                                std::exp(-(xT - x0) * (xT - x0) / (2 * s2T));
            EXPECT_NEAR(reduced_density(p, x0, xT), free, 1e-10 * free);
        }
    }
}

TEST(Scan, FlagsBreakdownRowsWithoutThrowing) {
    const auto m = black_karasinski(0.001, std::log(0.04), 3.0);
    const auto rows = scan_self_consistent(m, -1.0, 10.0, -12.0, 2.0, 15);
    int bad = 0;
    for (const auto& r : rows) bad += r.ok ? 0 : 1;
    EXPECT_GT(bad, 0);
    const auto vas = scan_self_consistent(vasicek(0.1, 0.0, 0.02), 1.0, 1.0, -0.1, 0.1, 11);
    for (const auto& r : vas) {
        ASSERT_TRUE(r.ok);
        EXPECT_NEAR(r.point.omega2, 0.01, 1e-15);
    }
}

TEST(Scan, WeakAndStrongDiffusionRegimes) {
    auto spread = [](const std::vector<ScanRow>& rows) {
        double lo = INFINITY, hi = -INFINITY, mean = 0.0;
        for (const auto& r : rows) {
            lo = std::min(lo, r.point.alpha);
            hi = std::max(hi, r.point.alpha);
            mean += r.point.alpha / rows.size();
        }
        return (hi - lo) / mean;
    };
    const double x0 = std::log(0.06);
    // two stationary-style spreads either side of x0
    const double s_weak = 0.2 * std::sqrt(0.5);
    const auto weak = scan_self_consistent(black_karasinski(0.1, std::log(0.04), 0.2), 1.0, 0.5, x0 - 2 * s_weak,
                                           x0 + 2 * s_weak, 41);
    EXPECT_LT(spread(weak), 0.10);
    const double s_strong = 0.85 * std::sqrt((1 - std::exp(-2.0)) / 0.2);
    const auto strong = scan_self_consistent(black_karasinski(0.1, std::log(0.04), 0.85), 1.0, 10.0,
                                             x0 - 2 * s_strong, x0 + 2 * s_strong, 41);
    EXPECT_GT(spread(strong), 0.50);
}
