#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "fracwave/error.hpp"
#include "fracwave/fracops.hpp"

using namespace fracwave;

namespace {

Series sample(const TimeGrid& grid, auto f) {
    std::vector<double> v;
    for (double t : grid.times()) v.push_back(f(t));
    return Series(grid, v);
}

// Independent Abel oracle: (1/Gamma(g)) int_0^t v(t - tau) tau^(g-1) dtau by
// tanh-sinh quadrature, which absorbs the endpoint singularity.
double abel_oracle(auto v, double gamma, double t) {
    if (t == 0.0) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator;
    const double val = integrator.integrate(
        [&](double tau) { return v(t - tau) * std::pow(tau, gamma - 1.0); }, 0.0, t);
    return val / std::tgamma(gamma);
}

// Grunwald-Letnikov with the initial-value correction v - v(0).
std::vector<double> grunwald(const Series& v, double alpha) {
    const int n = v.grid.n_steps();
    std::vector<double> g(n + 1);
    g[0] = 1.0;
    for (int k = 1; k <= n; ++k) g[k] = g[k - 1] * (1.0 - (alpha + 1.0) / k);
    std::vector<double> out(n + 1, 0.0);
    const double scale = std::pow(v.grid.dt(), -alpha);
    for (int i = 1; i <= n; ++i) {
        double acc = 0.0;
        for (int k = 0; k <= i; ++k) acc += g[k] * (v.values[i - k] - v.values[0]);
        out[i] = scale * acc;
    }
    return out;
}

double max_error(const Series& s, auto exact) {
    double e = 0.0;
    for (int i = 0; i < s.grid.n_nodes(); ++i) {
        e = std::max(e, std::abs(s.values[i] - exact(s.grid.time(i))));
    }
    return e;
}

}  // namespace

TEST(TimeGrid, RejectsBadParameters) {
    EXPECT_THROW(TimeGrid(1.0, 1), DomainError);
    EXPECT_THROW(TimeGrid(0.0, 10), DomainError);
    const TimeGrid g(2.0, 4);
    EXPECT_DOUBLE_EQ(g.dt(), 0.5);
    EXPECT_EQ(g.n_nodes(), 5);
}

TEST(Series, RejectsLengthMismatchAndNaN) {
    const TimeGrid g(1.0, 4);
    EXPECT_THROW(Series(g, std::vector<double>(4, 0.0)), ShapeError);
    EXPECT_THROW(Series(g, {0, 1, NAN, 2, 3}), DomainError);
}

TEST(AbelIntegral, ConstantAtOrderOneIsTime) {
    const TimeGrid g(1.0, 64);
    const Series out = abel_integral(sample(g, [](double) { return 1.0; }), 1.0);
    EXPECT_LE(max_error(out, [](double t) { return t; }), 1e-14);
}

TEST(AbelIntegral, ConstantAtHalfOrderIsExact) {
    const TimeGrid g(1.0, 256);
    const Series out = abel_integral(sample(g, [](double) { return 1.0; }), 0.5);
    EXPECT_LE(max_error(out, [](double t) { return std::sqrt(t) / std::tgamma(1.5); }), 1e-10);
    EXPECT_EQ(out.values[0], 0.0);
}

TEST(AbelIntegral, ExactOnLinears) {
    const TimeGrid g(2.0, 100);
    const double gamma = 0.37;
    const Series out = abel_integral(sample(g, [](double t) { return 3.0 - 2.0 * t; }), gamma);
    auto exact = [&](double t) {
        return 3.0 * std::pow(t, gamma) / std::tgamma(gamma + 1.0) -
               2.0 * std::pow(t, gamma + 1.0) / std::tgamma(gamma + 2.0);
    };
    EXPECT_LE(max_error(out, exact), 1e-12);
}

TEST(AbelIntegral, SecondOrderAgainstQuadratureOracle) {
    const double gamma = 0.3;
    auto f = [](double t) { return std::sin(t); };
    double err[2];
    int idx = 0;
    for (int n : {128, 256}) {
        const TimeGrid g(1.0, n);
        const Series out = abel_integral(sample(g, f), gamma);
        err[idx++] = max_error(out, [&](double t) { return abel_oracle(f, gamma, t); });
    }
    const double ratio = err[0] / err[1];
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(AbelIntegral, Linearity) {
    const TimeGrid g(1.0, 50);
    const Series u = sample(g, [](double t) { return std::exp(t); });
    const Series v = sample(g, [](double t) { return std::cos(3 * t); });
    std::vector<double> w(g.n_nodes());
    for (int i = 0; i < g.n_nodes(); ++i) w[i] = 2.0 * u.values[i] - 0.5 * v.values[i];
    const Series iu = abel_integral(u, 0.6);
    const Series iv = abel_integral(v, 0.6);
    const Series iw = abel_integral(Series(g, w), 0.6);
    for (int i = 0; i < g.n_nodes(); ++i) {
        EXPECT_NEAR(iw.values[i], 2.0 * iu.values[i] - 0.5 * iv.values[i], 1e-13);
    }
}

TEST(AbelIntegral, SemigroupConvergesAtSecondOrder) {
    // Vanishing to second order at t = 0 keeps the intermediate I^0.4[v] smooth.
    auto f = [](double t) { return t * t * std::cos(2 * t); };
    double err[2];
    int idx = 0;
    for (int n : {64, 128}) {
        const TimeGrid g(1.0, n);
        const Series v = sample(g, f);
        const Series composed = abel_integral(abel_integral(v, 0.3), 0.4);
        const Series direct = abel_integral(v, 0.7);
        double e = 0.0;
        for (int i = 0; i < g.n_nodes(); ++i) {
            e = std::max(e, std::abs(composed.values[i] - direct.values[i]));
        }
        err[idx++] = e;
    }
    EXPECT_LT(err[1], err[0]);
    EXPECT_GT(err[0] / err[1], 3.5);
}

TEST(AbelIntegral, RejectsOrderOutsideRange) {
    const TimeGrid g(1.0, 4);
    const Series v(g, std::vector<double>(5, 1.0));
    EXPECT_THROW(abel_integral(v, 0.0), DomainError);
    EXPECT_THROW(abel_integral(v, 1.5), DomainError);
}

TEST(CaputoDerivative, ConstantVanishes) {
    const TimeGrid g(1.0, 32);
    const Series out = caputo_derivative(sample(g, [](double) { return 4.2; }), 0.4);
    for (double x : out.values) EXPECT_EQ(x, 0.0);
}

TEST(CaputoDerivative, ExactOnLinear) {
    const TimeGrid g(1.0, 200);
    const Series out = caputo_derivative(sample(g, [](double t) { return t; }), 0.5);
    EXPECT_LE(max_error(out, [](double t) { return std::sqrt(t) / std::tgamma(1.5); }), 1e-10);
}

TEST(CaputoDerivative, MatchesGrunwaldOnSquare) {
    const TimeGrid g(1.0, 512);
    const Series v = sample(g, [](double t) { return t * t; });
    const Series l1 = caputo_derivative(v, 0.25);
    const std::vector<double> gl = grunwald(v, 0.25);
    double e = 0.0;
    for (int i = 0; i < g.n_nodes(); ++i) e = std::max(e, std::abs(l1.values[i] - gl[i]));
    EXPECT_LE(e, 2e-3);
}

TEST(CaputoDerivative, NearOneIsBackwardDifference) {
    const TimeGrid g(1.0, 100);
    const Series v = sample(g, [](double t) { return std::sin(3 * t) + t * t; });
    const Series out = caputo_derivative(v, 1.0 - 1e-8);
    for (int i = 1; i < g.n_nodes(); ++i) {
        const double bd = (v.values[i] - v.values[i - 1]) / g.dt();
        EXPECT_LE(std::abs(out.values[i] - bd), 1e-5 * std::max(1.0, std::abs(bd)));
    }
}

TEST(CaputoDerivative, AbelIsLeftInverse) {
    const double alpha = 0.6;
    auto f = [](double t) { return std::sin(2 * t) + t; };
    double err[2];
    int idx = 0;
    for (int n : {64, 256}) {
        const TimeGrid g(1.0, n);
        const Series v = sample(g, f);
        const Series back = abel_integral(caputo_derivative(v, alpha), alpha);
        double e = 0.0;
        for (int i = 0; i < g.n_nodes(); ++i) e = std::max(e, std::abs(back.values[i] - v.values[i]));
        err[idx++] = e;
    }
    EXPECT_LT(err[0], 0.05);
    // O(dt^(2 - alpha)): a factor 4 in n gives at least 4^1.4 / 2.
    EXPECT_GT(err[0] / err[1], 3.0);
}

TEST(CaputoDerivative, RejectsOrderOutsideRange) {
    const TimeGrid g(1.0, 4);
    const Series v(g, std::vector<double>(5, 1.0));
    EXPECT_THROW(caputo_derivative(v, 1.0), DomainError);
    EXPECT_THROW(caputo_derivative(v, 0.0), DomainError);
}

TEST(Alikhanov, ZeroFunction) {
    const TimeGrid g(1.0, 15);
    const AlikhanovCheck r = verify_alikhanov(Series(g, std::vector<double>(16, 0.0)), 0.5);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_TRUE(r.holds);
}

TEST(Alikhanov, LinearFunctionAnalytic) {
    const TimeGrid g(1.0, 15);
    const AlikhanovCheck r = verify_alikhanov(sample(g, [](double t) { return t; }), 0.5);
    EXPECT_NEAR(r.lhs, (2.0 / 3.0) / std::tgamma(1.5), 1e-12);
    // ||t^0.5 / Gamma(1.5)||^2 = 1 / (2 Gamma(1.5)^2), divided by 2 Gamma(0.5).
    const double rhs = 0.5 / (std::tgamma(1.5) * std::tgamma(1.5)) / (2.0 * std::tgamma(0.5));
    EXPECT_NEAR(r.rhs, rhs, 1e-8);
    EXPECT_TRUE(r.holds);
}

TEST(Alikhanov, RandomPiecewiseLinearInputs) {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    const TimeGrid g(1.0, 15);
    for (int a = 1; a <= 9; ++a) {
        const double alpha = 0.1 * a;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> v(16);
            for (double& x : v) x = coeff(rng);
            const AlikhanovCheck r = verify_alikhanov(Series(g, v), alpha);
            EXPECT_TRUE(r.holds) << "alpha " << alpha << " trial " << trial << " lhs " << r.lhs
                                 << " rhs " << r.rhs;
        }
    }
}

TEST(Alikhanov, InterpolantCaputoMatchesL1AtNodes) {
    const TimeGrid g(1.0, 20);
    const Series v = sample(g, [](double t) { return std::cos(4 * t); });
    const Series l1 = caputo_derivative(v, 0.35);
    for (int i = 1; i < g.n_nodes(); ++i) {
        EXPECT_NEAR(caputo_of_interpolant(v, 0.35, g.time(i)), l1.values[i], 1e-9);
    }
}
