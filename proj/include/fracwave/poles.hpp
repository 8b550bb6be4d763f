#pragma once

#include <complex>
#include <string>
#include <vector>

#include "fracwave/model.hpp"

namespace fracwave {

using Complex = std::complex<double>;

/// Relaxation symbol of one mode:
///   CWCH: omega(s) = s^2 + b lambda^beta s^alpha + c^2 lambda
///   FZ:   omega(s) = b2 s^(2+alpha2) + s^2 + b1 lambda s^alpha1 + c^2 lambda
struct Symbol {
    AcousticModel model;
    double lambda;
};

/// Principal branch, arg(s) in (-pi, pi]. Integer exponents are exact.
Complex principal_pow(Complex s, double exponent);

/// At s = 0 every fractional power vanishes, so omega(0) = c^2 lambda.
Complex omega(const Symbol& sym, Complex s);
Complex omega_derivative(const Symbol& sym, Complex s);

/// max(|s|^2, c^2 lambda): the size of the dominant terms of omega near a root.
double omega_scale(const Symbol& sym, Complex s);

struct Pole {
    Complex s;
    /// Residue of 1/omega at s.
    Complex residue_w;
    int multiplicity = 1;
    /// |omega(s)| after refinement.
    double newton_residual = 0.0;
    bool converged = true;
    std::string diagnostic;
};

struct PoleSet {
    double lambda = 0.0;
    std::vector<Pole> poles;
    /// Zero count from the argument principle over the certification contour.
    int branch_count_certificate = -1;
    /// Found poles that lie inside the certification contour.
    int found_in_contour = 0;
    /// Half-width L of the contour [-L, eps] x [-L, L].
    double contour_half_width = 0.0;
};

struct PoleSearchOptions {
    double rational_tol = 1e-3;
    int max_denominator = 64;
    int newton_max_iter = 50;
    double newton_tol = 1e-11;
    double dedup_tol = 1e-8;
    double contour_eps = 1e-6;
    bool certify = true;
};

struct Rational {
    int p;
    int q;
};

/// Smallest denominator q <= max_q with |x - p/q| <= tol; the closest
/// approximant with q <= max_q when none is within tol.
Rational rational_approximation(double x, double tol, int max_q);

/// All roots of omega on the principal sheet: companion-matrix roots of the
/// lifted polynomial (s = z^q), Newton polish at the true exponents,
/// deduplication, conjugate closure, and an argument-principle count over
/// [-L, eps] x [-L, L], slit along the negative real axis for fractional
/// exponents. L = 10 c sqrt(lambda) + 10, widened to 1.1 times the Fujiwara
/// root bound of the lifted polynomial when that is larger.
/// Throws CertificationError when the count disagrees with the poles found.
PoleSet find_poles(const Symbol& sym, const PoleSearchOptions& options = {});

/// Winding number of omega along the boundary of [-L, eps] x [-L, L]
/// (minus the negative real axis when a branch cut is present).
int count_zeros(const Symbol& sym, double half_width, double eps);

/// 1 / omega'(p). Throws MultipleRootError when omega'(p) vanishes.
Complex residue(const Symbol& sym, const Pole& p);

/// (1 / 2 pi i) \oint ds / omega(s) on a circle of radius radius_factor |p|.
Complex residue_contour(const Symbol& sym, Complex p, double radius_factor = 1e-3,
                        int nodes = 64);

struct DeltaSensitivity {
    double dr_ddelta;
    double dtheta_ddelta;
};

/// Implicit-function derivatives of a FZ root s = r e^{i theta} with respect
/// to delta = b1 - c^2 b2 (b2 fixed), by Cramer's rule on
/// (Re omega, Im omega)(r, theta; delta) = 0.
DeltaSensitivity delta_sensitivity(const FractionalZener& fz, double c, double lambda, double r,
                                   double theta);

/// The same at delta = 0, alpha1 = alpha2 = alpha and the known root
/// r = c sqrt(lambda), theta = +-pi/2. Throws DegenerateError for a singular
/// Jacobian.
DeltaSensitivity delta_sensitivity_at_known_root(double b2, double c, double lambda,
                                                 double alpha, double theta);

}  // namespace fracwave
