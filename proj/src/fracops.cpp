#include "fracwave/fracops.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <string>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

// (1+x)^p - 1 without cancellation for small x.
double pow1p_m1(double x, double p) { return std::expm1(p * std::log1p(x)); }

void require_finite(std::span<const double> values) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw DomainError("series contains a non-finite value");
        }
    }
}

}  // namespace

TimeGrid::TimeGrid(double t_final, int n_steps) : t_final_(t_final), n_steps_(n_steps) {
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        throw DomainError("time grid needs t_final > 0, got " + std::to_string(t_final));
    }
    if (n_steps < 2) {
        throw DomainError("time grid needs n_steps >= 2, got " + std::to_string(n_steps));
    }
}

std::vector<double> TimeGrid::times() const {
    std::vector<double> t(n_nodes());
    for (int i = 0; i < n_nodes(); ++i) t[i] = time(i);
    return t;
}

Series::Series(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n_nodes()) {
        throw ShapeError("series length " + std::to_string(values.size()) + " does not match " +
                         std::to_string(grid.n_nodes()) + " grid nodes");
    }
    require_finite(values);
}

AbelWeights::AbelWeights(double gamma, double dt, int n_max)
    : gamma_(gamma), scale_(std::pow(dt, gamma) / std::tgamma(gamma + 2.0)) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw DomainError("Abel order must lie in [0, 1], got " + std::to_string(gamma));
    }
    const double p = gamma + 1.0;
    first_.assign(n_max + 1, 0.0);
    for (int n = 1; n <= n_max; ++n) {
        // (n-1)^(g+1) - (n-1-g) n^g, rearranged to n^g ((n-1)((1-1/n)^g - 1) + g)
        const double nd = n;
        first_[n] = std::pow(nd, gamma) * ((nd - 1.0) * pow1p_m1(-1.0 / nd, gamma) + gamma);
    }
    interior_.assign(n_max + 1, 0.0);
    interior_[0] = 1.0;
    if (n_max >= 1) interior_[1] = std::pow(2.0, p) - 2.0;
    for (int k = 2; k <= n_max; ++k) {
        // (k+1)^p - 2 k^p + (k-1)^p
        const double kd = k;
        interior_[k] = std::pow(kd, p) * (pow1p_m1(1.0 / kd, p) + pow1p_m1(-1.0 / kd, p));
    }
}

L1Weights::L1Weights(double alpha, double dt, int n_max)
    : alpha_(alpha), scale_(std::pow(dt, -alpha) / std::tgamma(2.0 - alpha)) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("L1 order must lie in (0, 1], got " + std::to_string(alpha));
    }
    coeff_.assign(n_max + 1, 0.0);
    coeff_[0] = 1.0;
    for (int k = 1; k <= n_max; ++k) {
        const double kd = k;
        coeff_[k] = std::pow(kd, 1.0 - alpha) * pow1p_m1(1.0 / kd, 1.0 - alpha);
    }
}

Series abel_integral(const Series& v, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw DomainError("abel_integral: order must satisfy 0 < gamma <= 1, got " +
                          std::to_string(gamma));
    }
    const int n_steps = v.grid.n_steps();
    const AbelWeights w(gamma, v.grid.dt(), n_steps);
    std::vector<double> out(n_steps + 1, 0.0);
    for (int n = 1; n <= n_steps; ++n) {
        double acc = w.first(n) * v.values[0];
        for (int j = 1; j <= n; ++j) acc += w.interior(n - j) * v.values[j];
        out[n] = w.scale() * acc;
    }
    return Series(v.grid, std::move(out));
}

Series caputo_derivative(const Series& v, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("caputo_derivative: order must satisfy 0 < alpha < 1, got " +
                          std::to_string(alpha));
    }
    const int n_steps = v.grid.n_steps();
    const L1Weights w(alpha, v.grid.dt(), n_steps);
    std::vector<double> out(n_steps + 1, 0.0);
    for (int n = 1; n <= n_steps; ++n) {
        double acc = 0.0;
        for (int k = 0; k < n; ++k) acc += w.coeff(k) * (v.values[n - k] - v.values[n - k - 1]);
        out[n] = w.scale() * acc;
    }
    return Series(v.grid, std::move(out));
}

double caputo_of_interpolant(const Series& v, double alpha, double t) {
    const double dt = v.grid.dt();
    const double e = 1.0 - alpha;
    double acc = 0.0;
    for (int k = 0; k < v.grid.n_steps(); ++k) {
        const double tk = v.grid.time(k);
        if (t <= tk) break;
        const double slope = (v.values[k + 1] - v.values[k]) / dt;
        const double after = t - tk - dt;
        acc += slope * (std::pow(t - tk, e) - (after > 0.0 ? std::pow(after, e) : 0.0));
    }
    return acc / std::tgamma(2.0 - alpha);
}

AlikhanovCheck verify_alikhanov(const Series& v, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError("verify_alikhanov: order must satisfy 0 < alpha < 1, got " +
                          std::to_string(alpha));
    }
    const int n = v.grid.n_steps();
    const double dt = v.grid.dt();
    const double t_final = v.grid.t_final();
    std::vector<double> slope(n);
    for (int k = 0; k < n; ++k) slope[k] = (v.values[k + 1] - v.values[k]) / dt;

    // int over cell j of (s - a)_+^(1-alpha) has antiderivative (s - a)_+^(2-alpha) / (2-alpha).
    const double q = 2.0 - alpha;
    auto ramp = [q](double tau) { return tau > 0.0 ? std::pow(tau, q) / q : 0.0; };
    double lhs = 0.0;
    for (int j = 0; j < n; ++j) {
        if (slope[j] == 0.0) continue;
        const double lo = v.grid.time(j);
        const double hi = v.grid.time(j + 1);
        double cell = 0.0;
        for (int k = 0; k <= j; ++k) {
            const double tk = v.grid.time(k);
            const double tk1 = tk + dt;
            cell += slope[k] *
                    (ramp(hi - tk) - ramp(lo - tk) - ramp(hi - tk1) + ramp(lo - tk1));
        }
        lhs += slope[j] * cell;
    }
    lhs /= std::tgamma(2.0 - alpha);

    // Graded substitution s = t_j + dt u^4 removes the (s - t_j)^(1-alpha) kink.
    using Rule = boost::math::quadrature::gauss<double, 20>;
    double l2 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double lo = v.grid.time(j);
        l2 += Rule::integrate(
            [&](double u) {
                const double s = lo + dt * u * u * u * u;
                const double d = caputo_of_interpolant(v, alpha, s);
                return d * d * 4.0 * dt * u * u * u;
            },
            0.0, 1.0);
    }
    const double rhs = l2 / (2.0 * std::tgamma(alpha) * std::pow(t_final, 1.0 - alpha));
    const double tol = 1e-8 * (1.0 + std::abs(lhs));
    return {lhs, rhs, lhs >= rhs - tol};
}

}  // namespace fracwave
