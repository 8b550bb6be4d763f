#include "fracwave/poles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_integer(double x) { return x == std::floor(x); }

std::vector<double> fractional_exponents(const AcousticModel& model) {
    if (const auto* m = std::get_if<Cwch>(&model.damping)) return {m->alpha};
    const auto& fz = std::get<FractionalZener>(model.damping);
    return {fz.alpha1, fz.alpha2};
}

bool has_branch_cut(const AcousticModel& model) {
    const auto ex = fractional_exponents(model);
    return std::any_of(ex.begin(), ex.end(), [](double a) { return !is_integer(a); });
}

// Common-denominator rational approximation of all exponents.
std::pair<std::vector<int>, int> lift_exponents(const std::vector<double>& ex, double tol,
                                                int max_q) {
    int best_q = 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (int q = 1; q <= max_q; ++q) {
        double err = 0.0;
        for (double a : ex) err = std::max(err, std::abs(a - std::round(a * q) / q));
        if (err <= tol) {
            best_q = q;
            best_err = err;
            break;
        }
        if (err < best_err) {
            best_err = err;
            best_q = q;
        }
    }
    std::vector<int> p;
    for (double a : ex) p.push_back(static_cast<int>(std::round(a * best_q)));
    return {p, best_q};
}

// Roots of sum_k coef[k] y^k via eigenvalues of the companion matrix.
std::vector<Complex> polynomial_roots(std::vector<double> coef) {
    while (coef.size() > 1 && coef.back() == 0.0) coef.pop_back();
    const int deg = static_cast<int>(coef.size()) - 1;
    if (deg < 1) return {};
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -coef[i] / coef[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<Complex> roots;
    for (int i = 0; i < deg; ++i) roots.push_back(solver.eigenvalues()[i]);
    return roots;
}

struct Refined {
    Complex s;
    double residual;
    bool converged;
};

Refined newton(const Symbol& sym, Complex s, const PoleSearchOptions& opt) {
    for (int it = 0; it < opt.newton_max_iter; ++it) {
        const Complex w = omega(sym, s);
        if (std::abs(w) <= opt.newton_tol * omega_scale(sym, s)) {
            return {s, std::abs(w), true};
        }
        const Complex d = omega_derivative(sym, s);
        if (d == Complex(0.0)) break;
        s -= w / d;
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) break;
    }
    const Complex w = omega(sym, s);
    return {s, std::abs(w), std::abs(w) <= opt.newton_tol * omega_scale(sym, s)};
}

double distance_scale(const Symbol& sym, Complex s) {
    return std::max(std::abs(s), sym.model.c * std::sqrt(sym.lambda));
}

bool contains(const std::vector<Pole>& poles, const Symbol& sym, Complex s, double tol) {
    return std::any_of(poles.begin(), poles.end(), [&](const Pole& p) {
        return std::abs(p.s - s) <= tol * distance_scale(sym, s);
    });
}

void add_candidate(std::vector<Pole>& poles, const Symbol& sym, Complex seed,
                   const PoleSearchOptions& opt) {
    const Refined r = newton(sym, seed, opt);
    if (!std::isfinite(r.s.real()) || !std::isfinite(r.s.imag())) return;
    // At a double root Newton converges linearly and only to ~sqrt(eps), so
    // copies are merged with a looser tolerance.
    const bool double_root =
        std::abs(omega_derivative(sym, r.s)) <= 1e-6 * 2.0 * distance_scale(sym, r.s);
    if (contains(poles, sym, r.s, double_root ? 1e-6 : opt.dedup_tol)) return;
    Pole p;
    p.s = r.s;
    p.newton_residual = r.residual;
    p.converged = r.converged;
    if (double_root) {
        p.multiplicity = 2;
        p.diagnostic = "omega' nearly vanishes: double root";
    }
    if (!r.converged) {
        p.diagnostic = "Newton did not reach |omega| <= tol * scale (residual " +
                       std::to_string(r.residual) + ")";
    }
    poles.push_back(p);
}

bool in_contour(Complex s, double half_width, double eps) {
    return s.real() <= eps && s.real() >= -half_width && std::abs(s.imag()) <= half_width;
}

int count_found(const std::vector<Pole>& poles, double half_width, double eps) {
    int n = 0;
    for (const Pole& p : poles) {
        if (p.converged && in_contour(p.s, half_width, eps)) n += p.multiplicity;
    }
    return n;
}

double phase_change(const Symbol& sym, Complex a, Complex b, Complex wa, Complex wb, int depth) {
    const double d = std::arg(wb / wa);
    if (std::abs(d) < kPi / 6.0 || depth > 48) return d;
    const Complex mid = 0.5 * (a + b);
    const Complex wm = omega(sym, mid);
    return phase_change(sym, a, mid, wa, wm, depth + 1) +
           phase_change(sym, mid, b, wm, wb, depth + 1);
}

}  // namespace

Complex principal_pow(Complex s, double exponent) {
    if (is_integer(exponent) && std::abs(exponent) <= 16.0) {
        const int n = static_cast<int>(exponent);
        Complex acc(1.0, 0.0);
        const Complex base = n >= 0 ? s : 1.0 / s;
        for (int i = 0; i < std::abs(n); ++i) acc *= base;
        return acc;
    }
    if (s == Complex(0.0)) {
        return exponent > 0.0 ? Complex(0.0) : Complex(std::numeric_limits<double>::infinity());
    }
    double theta = std::atan2(s.imag(), s.real());
    if (theta <= -kPi) theta = kPi;
    return std::polar(std::pow(std::abs(s), exponent), exponent * theta);
}

Complex omega(const Symbol& sym, Complex s) {
    const double c2l = sym.model.c * sym.model.c * sym.lambda;
    if (const auto* m = std::get_if<Cwch>(&sym.model.damping)) {
        return s * s + m->b * std::pow(sym.lambda, m->beta) * principal_pow(s, m->alpha) + c2l;
    }
    const auto& fz = std::get<FractionalZener>(sym.model.damping);
    return fz.b2 * principal_pow(s, 2.0 + fz.alpha2) + s * s +
           fz.b1 * sym.lambda * principal_pow(s, fz.alpha1) + c2l;
}

Complex omega_derivative(const Symbol& sym, Complex s) {
    if (const auto* m = std::get_if<Cwch>(&sym.model.damping)) {
        return 2.0 * s +
               m->alpha * m->b * std::pow(sym.lambda, m->beta) * principal_pow(s, m->alpha - 1.0);
    }
    const auto& fz = std::get<FractionalZener>(sym.model.damping);
    return (2.0 + fz.alpha2) * fz.b2 * principal_pow(s, 1.0 + fz.alpha2) + 2.0 * s +
           fz.alpha1 * fz.b1 * sym.lambda * principal_pow(s, fz.alpha1 - 1.0);
}

double omega_scale(const Symbol& sym, Complex s) {
    return std::max(std::norm(s), sym.model.c * sym.model.c * sym.lambda);
}

Rational rational_approximation(double x, double tol, int max_q) {
    const auto [p, q] = lift_exponents({x}, tol, max_q);
    return {p[0], q};
}

int count_zeros(const Symbol& sym, double half_width, double eps) {
    const double L = half_width;
    std::vector<Complex> path;
    if (has_branch_cut(sym.model)) {
        const double r = 0.5 * eps;
        path = {{eps, -L}, {eps, L}, {-L, L}, {-L, r}, {0.0, r},
                {r, 0.0},  {0.0, -r}, {-L, -r}, {-L, -L}, {eps, -L}};
    } else {
        path = {{eps, -L}, {eps, L}, {-L, L}, {-L, -L}, {eps, -L}};
    }
    double total = 0.0;
    constexpr int kPieces = 64;
    for (std::size_t e = 0; e + 1 < path.size(); ++e) {
        const Complex a = path[e];
        const Complex b = path[e + 1];
        Complex prev = a;
        Complex w_prev = omega(sym, a);
        for (int k = 1; k <= kPieces; ++k) {
            const Complex cur = a + (b - a) * (static_cast<double>(k) / kPieces);
            const Complex w_cur = omega(sym, cur);
            total += phase_change(sym, prev, cur, w_prev, w_cur, 0);
            prev = cur;
            w_prev = w_cur;
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * kPi)));
}

PoleSet find_poles(const Symbol& sym, const PoleSearchOptions& opt) {
    validate(sym.model);
    if (!(sym.lambda > 0.0)) throw DomainError("eigenvalue must be > 0");
    const double c2l = sym.model.c * sym.model.c * sym.lambda;

    const auto [p, q] = lift_exponents(fractional_exponents(sym.model), opt.rational_tol,
                                       opt.max_denominator);
    // Lift s = z^q and rescale z = rho y so the constant and s^2 terms balance.
    std::vector<std::pair<int, double>> terms;
    if (const auto* m = std::get_if<Cwch>(&sym.model.damping)) {
        terms = {{2 * q, 1.0}, {p[0], m->b * std::pow(sym.lambda, m->beta)}, {0, c2l}};
    } else {
        const auto& fz = std::get<FractionalZener>(sym.model.damping);
        terms = {{2 * q + p[1], fz.b2}, {2 * q, 1.0}, {p[0], fz.b1 * sym.lambda}, {0, c2l}};
    }
    const double rho = std::pow(c2l, 1.0 / (2.0 * q));
    int degree = 0;
    for (const auto& t : terms) degree = std::max(degree, t.first);
    std::vector<double> coef(degree + 1, 0.0);
    for (const auto& [k, a] : terms) coef[k] += a * std::pow(rho, k) / c2l;

    PoleSet set;
    set.lambda = sym.lambda;
    const double sheet = kPi / q;
    for (const Complex y : polynomial_roots(coef)) {
        const Complex z = rho * y;
        const double arg_z = std::arg(z);
        if (std::abs(arg_z) > sheet * (1.0 + 1e-9)) continue;
        const Complex seed = std::polar(std::pow(std::abs(z), q), q * arg_z);
        add_candidate(set.poles, sym, seed, opt);
    }

    // Real symbol coefficients: roots come in conjugate pairs.
    const std::size_t n_found = set.poles.size();
    for (std::size_t i = 0; i < n_found; ++i) {
        const Pole& pole = set.poles[i];
        if (!pole.converged || std::abs(pole.s.imag()) <= opt.dedup_tol * distance_scale(sym, pole.s)) {
            continue;
        }
        add_candidate(set.poles, sym, std::conj(pole.s), opt);
    }

    // Fujiwara's bound on the lifted polynomial encloses every root, so the
    // contour is widened when heavy damping pushes roots beyond the default.
    double fujiwara = 0.0;
    for (int k = 0; k < degree; ++k) {
        const double ratio = std::abs(coef[k] / coef[degree]);
        if (ratio > 0.0) fujiwara = std::max(fujiwara, std::pow(ratio, 1.0 / (degree - k)));
    }
    const double root_bound = std::pow(2.0 * rho * fujiwara, q);
    set.contour_half_width =
        std::max(10.0 * sym.model.c * std::sqrt(sym.lambda) + 10.0, 1.1 * root_bound);
    if (opt.certify) {
        const double L = set.contour_half_width;
        set.branch_count_certificate = count_zeros(sym, L, opt.contour_eps);
        set.found_in_contour = count_found(set.poles, L, opt.contour_eps);
        if (set.found_in_contour != set.branch_count_certificate) {
            // Companion seeds missed a root: sweep Newton over the contour interior.
            constexpr int kSeeds = 48;
            for (int i = 0; i <= kSeeds; ++i) {
                for (int k = 0; k <= kSeeds; ++k) {
                    const Complex seed(-L + (L + opt.contour_eps) * i / kSeeds,
                                       -L + 2.0 * L * k / kSeeds);
                    add_candidate(set.poles, sym, seed, opt);
                }
            }
            std::erase_if(set.poles, [](const Pole& pl) { return !pl.converged; });
            set.found_in_contour = count_found(set.poles, L, opt.contour_eps);
        }
        if (set.found_in_contour != set.branch_count_certificate) {
            throw CertificationError("argument principle counts " +
                                     std::to_string(set.branch_count_certificate) +
                                     " zeros but " + std::to_string(set.found_in_contour) +
                                     " poles were found for lambda = " +
                                     std::to_string(sym.lambda));
        }
    }

    for (Pole& pole : set.poles) {
        if (pole.converged && pole.multiplicity == 1) pole.residue_w = residue(sym, pole);
    }
    std::sort(set.poles.begin(), set.poles.end(), [](const Pole& a, const Pole& b) {
        if (a.s.imag() != b.s.imag()) return a.s.imag() > b.s.imag();
        return a.s.real() > b.s.real();
    });
    return set;
}

Complex residue(const Symbol& sym, const Pole& p) {
    const Complex d = omega_derivative(sym, p.s);
    if (std::abs(d) <= 1e-12 * distance_scale(sym, p.s)) {
        throw MultipleRootError("omega'(p) vanishes at p = (" + std::to_string(p.s.real()) + ", " +
                                std::to_string(p.s.imag()) + ")");
    }
    return 1.0 / d;
}

Complex residue_contour(const Symbol& sym, Complex p, double radius_factor, int nodes) {
    const double radius = radius_factor * std::abs(p);
    Complex acc(0.0);
    for (int k = 0; k < nodes; ++k) {
        const Complex e = std::polar(radius, 2.0 * kPi * k / nodes);
        acc += e / omega(sym, p + e);
    }
    return acc / static_cast<double>(nodes);
}

DeltaSensitivity delta_sensitivity(const FractionalZener& fz, double c, double lambda, double r,
                                   double theta) {
    const double a1 = fz.alpha1;
    const double a2 = fz.alpha2;
    const double dr_re = (2.0 + a2) * fz.b2 * std::pow(r, 1.0 + a2) * std::cos((2.0 + a2) * theta) +
                         2.0 * r * std::cos(2.0 * theta) +
                         a1 * fz.b1 * lambda * std::pow(r, a1 - 1.0) * std::cos(a1 * theta);
    const double dr_im = (2.0 + a2) * fz.b2 * std::pow(r, 1.0 + a2) * std::sin((2.0 + a2) * theta) +
                         2.0 * r * std::sin(2.0 * theta) +
                         a1 * fz.b1 * lambda * std::pow(r, a1 - 1.0) * std::sin(a1 * theta);
    // Cauchy-Riemann in polar form: d/dtheta = i r d/dr.
    const double A1 = dr_re;
    const double A2 = dr_im;
    const double B1 = -r * A2;
    const double B2 = r * A1;
    const double C1 = lambda * std::pow(r, a1) * std::cos(a1 * theta);
    const double C2 = lambda * std::pow(r, a1) * std::sin(a1 * theta);
    const double det = A1 * B2 - A2 * B1;
    (void)c;
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) {
        throw DegenerateError("implicit-function Jacobian is singular (A1^2 + A2^2 = 0)");
    }
    return {(B1 * C2 - B2 * C1) / det, (C1 * A2 - C2 * A1) / det};
}

DeltaSensitivity delta_sensitivity_at_known_root(double b2, double c, double lambda, double alpha,
                                                 double theta) {
    if (!(b2 > 0.0 && c > 0.0 && lambda > 0.0 && alpha > 0.0 && alpha <= 1.0)) {
        throw DomainError("delta_sensitivity needs b2, c, lambda > 0 and alpha in (0, 1]");
    }
    const FractionalZener fz{c * c * b2, b2, alpha, alpha};
    return delta_sensitivity(fz, c, lambda, c * std::sqrt(lambda), theta);
}

}  // namespace fracwave
