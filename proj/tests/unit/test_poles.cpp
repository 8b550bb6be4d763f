#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fracwave/error.hpp"
#include "fracwave/poles.hpp"

using namespace fracwave;
using std::numbers::pi;

namespace {

Symbol cwch(double b, double beta, double alpha, double lambda, double c = 1.0) {
    return {{c, Cwch{b, beta, alpha}}, lambda};
}

Symbol zener(double b1, double b2, double a1, double a2, double lambda, double c = 1.0) {
    return {{c, FractionalZener{b1, b2, a1, a2}}, lambda};
}

// Independent symbol evaluation with the standard library's complex pow.
Complex omega_ref(double b, double beta, double alpha, double lambda, Complex s) {
    return s * s + b * std::pow(lambda, beta) * std::pow(s, alpha) + lambda;
}

bool has_conjugate(const PoleSet& set, Complex s) {
    for (const Pole& p : set.poles) {
        if (std::abs(p.s - std::conj(s)) <= 1e-9 * std::max(1.0, std::abs(s))) return true;
    }
    return false;
}

}  // namespace

TEST(PrincipalPow, BranchConvention) {
    EXPECT_NEAR(std::abs(principal_pow({-1.0, 0.0}, 0.5) - Complex(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(principal_pow({-1.0, -0.0}, 0.5) - Complex(0, 1)), 0.0, 1e-15);
    EXPECT_EQ(principal_pow({2.0, 3.0}, 2.0), Complex(2.0, 3.0) * Complex(2.0, 3.0));
    EXPECT_EQ(principal_pow({0.0, 0.0}, 0.5), Complex(0.0));
}

TEST(Omega, HandValues) {
    const double lam = pi * pi;
    EXPECT_LE(std::abs(omega(cwch(0.0, 1.0, 0.5, lam), {0.0, pi})), 1e-12);
    EXPECT_LE(std::abs(omega(zener(0.5, 0.5, 1.0, 1.0, lam), {-2.0, 0.0})), 1e-12);
    const Complex w = omega(cwch(0.1, 1.0, 0.5, lam), {1.0, 0.0});
    EXPECT_NEAR(w.real(), 1.0 + 0.1 * pi * pi + pi * pi, 1e-12);
    EXPECT_EQ(w.imag(), 0.0);
    EXPECT_EQ(omega(cwch(0.1, 1.0, 0.5, lam), {0.0, 0.0}), Complex(lam));
}

TEST(RationalApproximation, SmallDenominators) {
    const Rational h = rational_approximation(0.5, 1e-3, 64);
    EXPECT_EQ(h.p, 1);
    EXPECT_EQ(h.q, 2);
    const Rational n = rational_approximation(0.9, 1e-3, 64);
    EXPECT_EQ(n.p, 9);
    EXPECT_EQ(n.q, 10);
    const Rational r = rational_approximation(1.0 / std::sqrt(2.0), 1e-3, 64);
    EXPECT_LE(std::abs(static_cast<double>(r.p) / r.q - 1.0 / std::sqrt(2.0)), 1e-3);
    EXPECT_LE(r.q, 64);
}

TEST(FindPoles, UndampedRootsAreExact) {
    for (int n = 1; n <= 5; ++n) {
        const double lam = n * n * pi * pi;
        const PoleSet set = find_poles(cwch(0.0, 1.0, 0.5, lam, 2.0));
        ASSERT_EQ(set.poles.size(), 2u);
        EXPECT_LE(std::abs(set.poles[0].s - Complex(0.0, 2.0 * n * pi)), 1e-10);
        EXPECT_LE(std::abs(set.poles[1].s - Complex(0.0, -2.0 * n * pi)), 1e-10);
        EXPECT_LE(set.poles[0].newton_residual, 1e-10);
        const Complex expected = 1.0 / Complex(0.0, 2.0 * 2.0 * n * pi);
        EXPECT_LE(std::abs(set.poles[0].residue_w - expected), 1e-14);
    }
}

TEST(FindPoles, ZenerZeroDiffusivityFractional) {
    const double lam = pi * pi, b2 = 0.3;
    const PoleSet set = find_poles(zener(b2, b2, 0.5, 0.5, lam));
    ASSERT_EQ(set.poles.size(), 2u);
    EXPECT_LE(std::abs(set.poles[0].s - Complex(0.0, pi)), 1e-10);
    EXPECT_LE(std::abs(set.poles[1].s - Complex(0.0, -pi)), 1e-10);
    EXPECT_EQ(set.branch_count_certificate, 2);
}

TEST(FindPoles, ZenerZeroDiffusivityIntegerHasRealRoot) {
    const double lam = 4 * pi * pi, b2 = 0.25;
    const PoleSet set = find_poles(zener(b2, b2, 1.0, 1.0, lam));
    ASSERT_EQ(set.poles.size(), 3u);
    bool real_found = false;
    for (const Pole& p : set.poles) {
        if (std::abs(p.s.imag()) < 1e-12) {
            EXPECT_NEAR(p.s.real(), -1.0 / b2, 1e-10);
            real_found = true;
            // omega' = 3 b2 s^2 + 2 s + b1 lambda, against contour quadrature.
            const Complex s = p.s;
            const Complex closed = 1.0 / (3.0 * b2 * s * s + 2.0 * s + b2 * lam);
            EXPECT_LE(std::abs(p.residue_w - closed), 1e-12 * std::abs(closed));
            const Complex contour = residue_contour(zener(b2, b2, 1.0, 1.0, lam), s);
            EXPECT_LE(std::abs(contour - closed), 1e-8 * std::abs(closed));
        }
    }
    EXPECT_TRUE(real_found);
}

TEST(FindPoles, MatchesBruteForceSeeding) {
    const double b = 0.1, lam = pi * pi;
    const PoleSet set = find_poles(cwch(b, 1.0, 0.5, lam));
    ASSERT_EQ(set.poles.size(), 2u);
    const Complex upper = set.poles[0].s;
    ASSERT_GT(upper.imag(), 0.0);
    EXPECT_LT(upper.real(), 0.0);

    // 10^4 seeds in [-50, 5] x [0, 50], Newton with a numerical derivative.
    std::vector<Complex> roots;
    for (int i = 0; i < 100; ++i) {
        for (int k = 0; k < 100; ++k) {
            Complex s(-50.0 + 55.0 * (i + 0.5) / 100, 50.0 * (k + 0.5) / 100);
            bool ok = false;
            for (int it = 0; it < 60; ++it) {
                const Complex w = omega_ref(b, 1.0, 0.5, lam, s);
                if (std::abs(w) < 1e-12 * std::max(std::norm(s), lam)) {
                    ok = true;
                    break;
                }
                const Complex h = 1e-7 * std::max(1.0, std::abs(s));
                const Complex d = (omega_ref(b, 1.0, 0.5, lam, s + h) -
                                   omega_ref(b, 1.0, 0.5, lam, s - h)) / (2.0 * h);
                s -= w / d;
            }
            if (!ok || s.imag() < 0.0) continue;
            bool seen = false;
            for (Complex r : roots) seen = seen || std::abs(r - s) < 1e-6;
            if (!seen) roots.push_back(s);
        }
    }
    ASSERT_EQ(roots.size(), 1u);
    EXPECT_LE(std::abs(roots[0] - upper), 1e-9 * std::abs(upper));
}

TEST(FindPoles, CwchPropertiesOverParameterGrid) {
    for (double b : {0.01, 0.1, 1.0}) {
        for (double beta : {0.0, 0.5, 1.0}) {
            for (double alpha : {0.25, 0.5, 0.9, 1.0}) {
                for (int n : {1, 7, 20}) {
                    const PoleSet set = find_poles(cwch(b, beta, alpha, n * n * pi * pi));
                    ASSERT_EQ(set.poles.size(), 2u) << b << " " << beta << " " << alpha << " " << n;
                    EXPECT_EQ(set.branch_count_certificate, 2);
                    for (const Pole& p : set.poles) {
                        EXPECT_LE(p.s.real(), 1e-9);
                        EXPECT_TRUE(has_conjugate(set, p.s));
                    }
                }
            }
        }
    }
}

TEST(FindPoles, ZenerLeftHalfPlane) {
    const double lam = 9 * pi * pi;
    for (double b2 : {0.01, 0.1, 1.0}) {
        for (double extra : {0.0, 0.1, 1.0}) {
            for (double alpha : {0.3, 0.5, 1.0}) {
                const PoleSet set = find_poles(zener(b2 + extra, b2, alpha, alpha, lam));
                for (const Pole& p : set.poles) {
                    EXPECT_LE(p.s.real(), 1e-9);
                    EXPECT_TRUE(has_conjugate(set, p.s));
                }
            }
        }
    }
}

TEST(FindPoles, ZenerUnequalOrdersCertified) {
    const PoleSet set = find_poles(zener(0.4, 0.1, 0.7, 0.3, pi * pi));
    EXPECT_EQ(set.found_in_contour, set.branch_count_certificate);
    for (const Pole& p : set.poles) {
        EXPECT_TRUE(p.converged);
        EXPECT_TRUE(has_conjugate(set, p.s));
    }
}

TEST(FindPoles, IrrationalExponent) {
    const double alpha = 1.0 / std::sqrt(2.0);
    const PoleSet set = find_poles(cwch(0.2, 0.5, alpha, 4 * pi * pi));
    ASSERT_EQ(set.poles.size(), 2u);
    for (const Pole& p : set.poles) {
        EXPECT_LE(std::abs(omega_ref(0.2, 0.5, alpha, 4 * pi * pi, p.s)), 1e-10 * 4 * pi * pi);
    }
}

TEST(FindPoles, DistinctEigenvaluesGiveDisjointPoles) {
    std::vector<Complex> all;
    for (int n = 1; n <= 10; ++n) {
        for (const Pole& p : find_poles(cwch(0.1, 1.0, 0.5, n * n * pi * pi)).poles) {
            for (Complex q : all) EXPECT_GT(std::abs(p.s - q), 1e-6);
            all.push_back(p.s);
        }
    }
}

TEST(FindPoles, ContinuousAsDampingVanishes) {
    const double lam = pi * pi;
    double ratio_max = 0.0;
    for (double b : {1e-2, 1e-3, 1e-4}) {
        const PoleSet set = find_poles(cwch(b, 1.0, 0.5, lam));
        ratio_max = std::max(ratio_max, std::abs(set.poles[0].s - Complex(0, pi)) / b);
    }
    // Perturbation: |ds| ~ b lambda |s|^alpha / (2 |s|).
    EXPECT_LE(ratio_max, lam);
}

TEST(FindPoles, DoubleRootIsReportedNotCertifiedTwice) {
    // alpha = 1 and b lambda = 2 sqrt(lambda): s^2 + 2 sqrt(lambda) s + lambda.
    const double lam = pi * pi;
    const PoleSet set = find_poles(cwch(2.0 / pi, 1.0, 1.0, lam));
    ASSERT_EQ(set.poles.size(), 1u);
    EXPECT_EQ(set.poles[0].multiplicity, 2);
    EXPECT_NEAR(set.poles[0].s.real(), -pi, 1e-6);
    EXPECT_THROW(residue(cwch(2.0 / pi, 1.0, 1.0, lam), Pole{Complex(-pi, 0.0)}), MultipleRootError);
}

TEST(FindPoles, RejectsInvalidSymbols) {
    EXPECT_THROW(find_poles(cwch(0.1, 1.0, 0.5, -1.0)), DomainError);
    EXPECT_THROW(find_poles(cwch(0.1, 1.0, 1.5, 1.0)), ModelError);
    EXPECT_THROW(find_poles(zener(0.0, 0.1, 0.5, 0.5, 1.0)), ModelError);
    Symbol unphysical = zener(0.0, 0.1, 0.5, 0.5, 1.0);
    unphysical.model.allow_unphysical = true;
    EXPECT_NO_THROW(find_poles(unphysical));
}

TEST(Residue, ClosedFormAgainstContour) {
    for (double alpha : {0.25, 0.5, 0.9}) {
        for (int n : {1, 3, 10}) {
            const Symbol sym = cwch(0.1, 1.0, alpha, n * n * pi * pi);
            for (const Pole& p : find_poles(sym).poles) {
                const Complex closed =
                    1.0 / (2.0 * p.s + alpha * 0.1 * sym.lambda * std::pow(p.s, alpha - 1.0));
                EXPECT_LE(std::abs(p.residue_w - closed), 1e-12 * std::abs(closed));
                const Complex contour = residue_contour(sym, p.s);
                EXPECT_LE(std::abs(contour - p.residue_w), 1e-6 * std::abs(p.residue_w));
            }
        }
    }
}

TEST(Residue, InverseGrowsMildly) {
    double c_max = 0.0;
    for (int n = 1; n <= 20; ++n) {
        const Symbol sym = cwch(0.1, 1.0, 0.5, n * n * pi * pi);
        const Pole p = find_poles(sym).poles[0];
        c_max = std::max(c_max, 1.0 / std::abs(p.residue_w) / std::abs(p.s));
    }
    EXPECT_LE(c_max, 3.0);
}

TEST(DeltaSensitivity, GoldenValuesAndSigns) {
    const DeltaSensitivity d = delta_sensitivity_at_known_root(1.0, 1.0, pi * pi, 0.5, pi / 2);
    EXPECT_GT(d.dr_ddelta, 0.0);
    EXPECT_GT(d.dtheta_ddelta, 0.0);
    // Frozen after agreement of Cramer's rule, ds/ddelta = -lambda s^alpha / omega'(s),
    // and finite differences of the pole path.
    EXPECT_NEAR(d.dr_ddelta, 1.0383986209687386, 1e-12);
    EXPECT_NEAR(d.dtheta_ddelta, 0.094259362831592405, 1e-12);
}

TEST(DeltaSensitivity, MatchesPolePathFiniteDifferences) {
    for (double alpha : {0.3, 0.5, 0.8}) {
        for (int n : {1, 2, 4}) {
            const double b2 = 0.5, c = 1.5, lam = n * n * pi * pi;
            const DeltaSensitivity d = delta_sensitivity_at_known_root(b2, c, lam, alpha, pi / 2);
            const double h = 1e-4;
            auto upper = [&](double delta) {
                for (const Pole& p : find_poles(zener(c * c * b2 + delta, b2, alpha, alpha, lam, c)).poles) {
                    if (p.s.imag() > 0) return p.s;
                }
                return Complex(NAN);
            };
            const Complex p0 = upper(0.0);
            const Complex p1 = upper(h);
            const double dr = (std::abs(p1) - std::abs(p0)) / h;
            const double dth = (std::arg(p1) - std::arg(p0)) / h;
            EXPECT_GT(d.dr_ddelta, 0.0);
            EXPECT_GT(d.dtheta_ddelta, 0.0);
            EXPECT_LE(std::abs(dr - d.dr_ddelta), 0.01 * d.dr_ddelta);
            EXPECT_LE(std::abs(dth - d.dtheta_ddelta), 0.01 * d.dtheta_ddelta);
        }
    }
}

TEST(DeltaSensitivity, RejectsBadParameters) {
    EXPECT_THROW(delta_sensitivity_at_known_root(0.0, 1.0, 1.0, 0.5, pi / 2), DomainError);
}
