#pragma once

#include <span>
#include <vector>

namespace fracwave {

/// Uniform discretisation of (0, T] with node 0 at t = 0.
class TimeGrid {
public:
    TimeGrid(double t_final, int n_steps);

    double t_final() const { return t_final_; }
    int n_steps() const { return n_steps_; }
    int n_nodes() const { return n_steps_ + 1; }
    double dt() const { return t_final_ / n_steps_; }
    double time(int i) const { return dt() * i; }
    std::vector<double> times() const;

    bool operator==(const TimeGrid& other) const = default;

private:
    double t_final_;
    int n_steps_;
};

/// Scalar trajectory sampled at every node of a TimeGrid.
struct Series {
    Series(TimeGrid grid, std::vector<double> values);

    TimeGrid grid;
    std::vector<double> values;
};

/// Product-trapezoid weights for the Abel integral I^gamma on a uniform grid,
/// piecewise-linear interpolation of the integrand:
///
///   I^gamma[v](t_n) = scale * ( first(n) v_0 + sum_{j=1}^{n} interior(n-j) v_j )
///
/// gamma = 0 degenerates to the identity.
class AbelWeights {
public:
    AbelWeights(double gamma, double dt, int n_max);

    double gamma() const { return gamma_; }
    double scale() const { return scale_; }
    double first(int n) const { return first_[n]; }
    double interior(int k) const { return interior_[k]; }
    std::span<const double> interior() const { return interior_; }

private:
    double gamma_;
    double scale_;
    std::vector<double> first_;
    std::vector<double> interior_;
};

/// L1 weights for the Caputo derivative of order alpha in (0, 1]:
///
///   d^alpha v(t_n) = scale * sum_{k=0}^{n-1} coeff(k) (v_{n-k} - v_{n-k-1})
///
/// alpha = 1 gives the backward difference.
class L1Weights {
public:
    L1Weights(double alpha, double dt, int n_max);

    double alpha() const { return alpha_; }
    double scale() const { return scale_; }
    double coeff(int k) const { return coeff_[k]; }
    std::span<const double> coeffs() const { return coeff_; }

private:
    double alpha_;
    double scale_;
    std::vector<double> coeff_;
};

/// Abel integral (1/Gamma(gamma)) int_0^t v(s) (t-s)^(gamma-1) ds by product
/// integration of the piecewise-linear interpolant. Exact for linear v.
/// Throws DomainError unless 0 < gamma <= 1.
Series abel_integral(const Series& v, double gamma);

/// L1 Caputo derivative with base point v(0). Exact for linear v.
/// Throws DomainError unless 0 < alpha < 1.
Series caputo_derivative(const Series& v, double alpha);

struct AlikhanovCheck {
    double lhs;
    double rhs;
    bool holds;
};

/// Checks int_0^T d^alpha[v] v' ds >= ||d^alpha v||^2_{L2(0,T)} / (2 Gamma(alpha) T^(1-alpha))
/// for the piecewise-linear interpolant of v. The left side is integrated in
/// closed form cell by cell; the right side with graded Gauss-Legendre
/// quadrature of the exact Caputo derivative of the interpolant.
AlikhanovCheck verify_alikhanov(const Series& v, double alpha);

/// Exact Caputo derivative of the piecewise-linear interpolant of v at time t.
double caputo_of_interpolant(const Series& v, double alpha, double t);

}  // namespace fracwave
