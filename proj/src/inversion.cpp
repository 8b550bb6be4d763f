#include "fracwave/inversion.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <numbers>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
const F& need(const F& fn, const char* what) {
    if (!fn) throw SpecificationError(std::string("custom time profile lacks ") + what);
    return fn;
}

bool linear(const TimeProfile& p) { return p.kind == TimeProfileKind::Linear; }

double caputo_chi(const TimeProfile& p, double t, double alpha) {
    if (linear(p)) {
        if (alpha >= 1.0) return 1.0;
        return std::pow(t, 1.0 - alpha) / std::tgamma(2.0 - alpha);
    }
    return need(p.caputo, "a Caputo derivative of chi")(t, alpha);
}

double chi_dd_value(const TimeProfile& p, double t) {
    if (linear(p)) return 0.0;
    return need(p.chi_dd, "chi''")(t);
}

double caputo_chi_dd(const TimeProfile& p, double t, double alpha) {
    if (linear(p)) return 0.0;
    return need(p.caputo_dd, "a Caputo derivative of chi''")(t, alpha);
}

double chi_dot0(const TimeProfile& p) { return linear(p) ? 1.0 : p.chi_dot0; }

}  // namespace

GridFunction excitation_profile(const std::string& name, const SpectralBasis& basis) {
    const Eigen::ArrayXd x = basis.grid().array();
    if (name == "sin") return (kPi * x).sin().matrix();
    if (name == "sin_half") return (0.5 * kPi * x).sin().matrix();
    throw SpecificationError("unknown excitation profile '" + name +
                             "' (expected sin or sin_half)");
}

double chi_value(const TimeProfile& p, double t) {
    return linear(p) ? t : need(p.chi, "chi")(t);
}

double psi_value(const TimeProfile& p, double t) {
    return linear(p) ? 2.0 : need(p.psi, "psi = (chi^2)''")(t);
}

Complex psi_hat_raw(const TimeProfile& p, Complex s) {
    return linear(p) ? 2.0 / s : need(p.psi_hat, "the Laplace transform of psi")(s);
}

Complex psi_hat_scaled(const TimeProfile& p, Complex s) { return s * psi_hat_raw(p, s); }

void validate_excitation(const Excitation& exc, const SpectralBasis& basis, const TimeGrid& grid) {
    if (exc.f.size() != basis.n_nodes()) throw ShapeError("excitation profile does not match grid");
    if (!exc.f.allFinite()) throw DomainError("excitation profile has non-finite entries");
    int small = 0;
    for (int i = 0; i < exc.f.size(); ++i) small += std::abs(exc.f[i]) < 1e-12;
    if (small > 2) {
        throw DomainError("excitation profile vanishes on " + std::to_string(small) +
                          " grid nodes; it must be nonzero almost everywhere");
    }
    const double norm = l2_norm(basis, exc.f);
    const double tail = l2_norm(basis, exc.f - synthesize(basis, project(basis, exc.f)));
    if (tail > 1e-8 * norm) {
        throw DomainError("excitation profile is not resolved by the modal basis (tail " +
                          std::to_string(tail / norm) + " relative)");
    }
    bool nonzero = false;
    for (int i = 1; i < grid.n_nodes() && !nonzero; ++i) nonzero = psi_value(exc.chi, grid.time(i)) != 0.0;
    if (!nonzero) throw DomainError("(chi^2)'' vanishes on the whole time grid");
}

Source build_excitation_source(const Excitation& exc, const AcousticModel& model,
                               const SpectralBasis& basis, const TimeGrid& grid) {
    validate(model);
    const ModalVector f = project(basis, exc.f);
    const int n = basis.n_modes();
    ModalField h(grid.n_nodes(), n);
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double t = grid.time(i);
        const double chi = chi_value(exc.chi, t);
        const double chi_dd = chi_dd_value(exc.chi, t);
        for (int j = 0; j < n; ++j) {
            const double lam = basis.lambda(j);
            double damping = 0.0;
            if (const auto* m = std::get_if<Cwch>(&model.damping)) {
                if (m->b != 0.0) damping = m->b * std::pow(lam, m->beta) * caputo_chi(exc.chi, t, m->alpha);
            } else {
                const auto& fz = std::get<FractionalZener>(model.damping);
                damping = fz.b1 * lam * caputo_chi(exc.chi, t, fz.alpha1) +
                          fz.b2 * caputo_chi_dd(exc.chi, t, fz.alpha2);
            }
            h(i, j) = f[j] * (chi_dd + model.c * model.c * lam * chi + damping);
        }
    }
    return {h, f * chi_value(exc.chi, 0.0), f * chi_dot0(exc.chi)};
}

ModalVector modal_loads(const GridFunction& dkappa, const Excitation& exc,
                        const SpectralBasis& basis) {
    if (dkappa.size() != basis.n_nodes()) throw ShapeError("dkappa does not match grid");
    return project(basis, dkappa.cwiseProduct(exc.f).cwiseProduct(exc.f));
}

ModalField synthesize_modes(const ModalVector& loads, const TimeProfile& chi,
                            const AcousticModel& model, const SpectralBasis& basis,
                            const TimeGrid& grid) {
    validate(model);
    if (loads.size() != basis.n_modes()) throw ShapeError("loads do not match basis");
    const int n_steps = grid.n_steps();
    const double dt = grid.dt();
    const double c2 = model.c * model.c;

    double velocity_alpha = 1.0, accel_coef = 0.0, accel_alpha = 1.0;
    if (const auto* m = std::get_if<Cwch>(&model.damping)) {
        velocity_alpha = m->alpha;
    } else {
        const auto& fz = std::get<FractionalZener>(model.damping);
        velocity_alpha = fz.alpha1;
        accel_coef = fz.b2;
        accel_alpha = fz.alpha2;
    }
    const bool fz = is_fz(model);
    const AbelWeights abel(1.0 - velocity_alpha, dt, n_steps);
    const L1Weights l1(accel_alpha, dt, n_steps);
    std::vector<double> psi(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) psi[i] = psi_value(chi, grid.time(i));

    ModalField out = ModalField::Zero(grid.n_nodes(), basis.n_modes());
    for (int j = 0; j < basis.n_modes(); ++j) {
        if (loads[j] == 0.0) continue;
        double d = 0.0;
        if (const auto* m = std::get_if<Cwch>(&model.damping)) {
            d = m->b * std::pow(basis.lambda(j), m->beta);
        } else {
            d = std::get<FractionalZener>(model.damping).b1 * basis.lambda(j);
        }
        const bool memory = velocity_alpha < 1.0 && d != 0.0;
        const double k2 = c2 * basis.lambda(j);
        std::vector<double> z(grid.n_nodes(), 0.0), v(grid.n_nodes(), 0.0), a(grid.n_nodes(), 0.0);
        // Zero displacement and velocity; FZ also starts from zero acceleration.
        a[0] = fz ? 0.0 : loads[j] * psi[0];
        const double implicit = 1.0 + 0.25 * dt * dt * k2 +
                                d * 0.5 * dt * (memory ? abel.scale() * abel.interior(0) : 1.0) +
                                accel_coef * l1.scale() * l1.coeff(0);
        for (int n = 0; n < n_steps; ++n) {
            const double zp = z[n] + dt * v[n] + 0.25 * dt * dt * a[n];
            const double vp = v[n] + 0.5 * dt * a[n];
            double rhs = loads[j] * psi[n + 1] - k2 * zp;
            if (memory) {
                double hist = abel.first(n + 1) * v[0] + abel.interior(0) * vp;
                for (int k = 1; k <= n; ++k) hist += abel.interior(n + 1 - k) * v[k];
                rhs -= d * abel.scale() * hist;
            } else {
                rhs -= d * vp;
            }
            if (fz) {
                double hist = -l1.coeff(0) * a[n];
                for (int k = 1; k <= n; ++k) hist += l1.coeff(k) * (a[n + 1 - k] - a[n - k]);
                rhs -= accel_coef * l1.scale() * hist;
            }
            a[n + 1] = rhs / implicit;
            v[n + 1] = vp + 0.5 * dt * a[n + 1];
            z[n + 1] = zp + 0.25 * dt * dt * a[n + 1];
        }
        if (!std::isfinite(z.back())) throw DivergenceError("scalar mode synthesis diverged");
        for (int i = 0; i < grid.n_nodes(); ++i) out(i, j) = z[i];
    }
    return out;
}

ObservationTrace synthesize_trace(const GridFunction& dkappa, const Excitation& exc,
                                  const AcousticModel& model, const SpectralBasis& basis,
                                  const TimeGrid& grid, double x0) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("observation point must lie in [0, 1]");
    const ModalField z = synthesize_modes(modal_loads(dkappa, exc, basis), exc.chi, model, basis, grid);
    const Eigen::VectorXd vals = z * basis.eigenfunctions_at(x0);
    return {x0, grid, std::vector<double>(vals.data(), vals.data() + vals.size())};
}

LaplaceValue laplace_trace(const ObservationTrace& h, Complex s) {
    const TimeGrid& g = h.grid;
    Complex acc(0.0);
    double hmax = 0.0;
    for (int i = 0; i < g.n_nodes(); ++i) {
        const double w = (i == 0 || i == g.n_steps()) ? 0.5 : 1.0;
        acc += w * h.values[i] * std::exp(-s * g.time(i));
        hmax = std::max(hmax, std::abs(h.values[i]));
    }
    LaplaceValue out{acc * g.dt(), std::numeric_limits<double>::infinity(), s.real() < 0.0};
    if (s.real() > 0.0) out.truncation_bound = hmax * std::exp(-s.real() * g.t_final()) / s.real();
    return out;
}

ResidueData extract_residues(const ObservationTrace& h, const std::vector<PoleSet>& poles,
                             int n_modes_fit, const FitOptions& options) {
    if (n_modes_fit < 1 || n_modes_fit > static_cast<int>(poles.size())) {
        throw DomainError("n_modes_fit must lie in [1, " + std::to_string(poles.size()) + "]");
    }
    ResidueData out;
    for (int m = 0; m < n_modes_fit; ++m) {
        for (const Pole& p : poles[m].poles) {
            if (p.multiplicity != 1) {
                throw MultipleRootError("mode " + std::to_string(m + 1) + " has a multiple pole");
            }
            if (p.s.imag() < 0.0) continue;
            out.entries.push_back({m, p.s, p.residue_w, {}});
        }
    }
    const double real_tol = 1e-12;
    int n_unknowns = options.include_constant ? 1 : 0;
    for (const auto& e : out.entries) n_unknowns += std::abs(e.pole.imag()) <= real_tol * std::abs(e.pole) ? 1 : 2;

    std::vector<int> rows;
    for (int i = 0; i < h.grid.n_nodes(); ++i) {
        if (h.grid.time(i) >= options.t_min) rows.push_back(i);
    }
    if (static_cast<int>(rows.size()) < 4 * n_unknowns) {
        throw DomainError("fit window holds " + std::to_string(rows.size()) + " samples for " +
                          std::to_string(n_unknowns) + " unknowns (need 4 per unknown)");
    }

    Eigen::MatrixXd A(rows.size(), n_unknowns);
    Eigen::VectorXd y(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double t = h.grid.time(rows[r]);
        y[r] = h.values[rows[r]];
        int col = 0;
        if (options.include_constant) A(r, col++) = 1.0;
        for (const auto& e : out.entries) {
            const Complex ex = std::exp(e.pole * t);
            if (std::abs(e.pole.imag()) <= real_tol * std::abs(e.pole)) {
                A(r, col++) = ex.real();
            } else {
                A(r, col++) = 2.0 * ex.real();
                A(r, col++) = -2.0 * ex.imag();
            }
        }
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    const Eigen::VectorXd x = qr.solve(y);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const Eigen::VectorXd sv = svd.singularValues();
    out.condition_number = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1]
                                                   : std::numeric_limits<double>::infinity();
    out.fit_residual = (A * x - y).norm();
    int col = 0;
    if (options.include_constant) out.constant = x[col++];
    for (auto& e : out.entries) {
        if (std::abs(e.pole.imag()) <= real_tol * std::abs(e.pole)) {
            e.residue = x[col++];
        } else {
            e.residue = Complex(x[col], x[col + 1]);
            col += 2;
        }
    }
    if (out.condition_number > options.warn_condition) {
        out.warning = "fit matrix is ill-conditioned (condition number " +
                      std::to_string(out.condition_number) + ")";
    }
    return out;
}

Recovery recover_coefficients(const ResidueData& res, const Excitation& exc,
                              const SpectralBasis& basis, double x0,
                              const RecoveryOptions& options) {
    if (exc.f.size() != basis.n_nodes()) throw ShapeError("excitation profile does not match grid");
    const Eigen::VectorXd phi_x0 = basis.eigenfunctions_at(x0);
    Recovery out;
    out.coefficients = ModalVector::Zero(basis.n_modes());
    std::vector<Complex> a(basis.n_modes(), Complex(0.0));
    std::vector<bool> done(basis.n_modes(), false);
    // Prefer the complex pole of each mode; fall back to a real one.
    for (int pass = 0; pass < 2; ++pass) {
        for (const ModeResidue& e : res.entries) {
            if (e.mode >= basis.n_modes()) throw ShapeError("residue mode exceeds basis size");
            const bool complex_pole = e.pole.imag() > 0.0;
            if (done[e.mode] || complex_pole != (pass == 0)) continue;
            const Complex psi = psi_hat_raw(exc.chi, e.pole);
            if (!(std::abs(psi) > options.hypothesis_tol)) {
                throw AssumptionError("psi-hat vanishes at the pole of mode " +
                                      std::to_string(e.mode + 1) +
                                      ": the injectivity hypothesis on chi fails");
            }
            if (!(std::abs(phi_x0[e.mode]) > options.hypothesis_tol)) {
                throw AssumptionError("phi_" + std::to_string(e.mode + 1) +
                                      " vanishes at the observation point x0 = " +
                                      std::to_string(x0) +
                                      ": x0 must not be a Dirichlet point");
            }
            a[e.mode] = e.residue / (e.residue_w * psi * phi_x0[e.mode]);
            done[e.mode] = true;
        }
    }
    double max_abs = 0.0, max_imag = 0.0;
    for (int m = 0; m < basis.n_modes(); ++m) {
        out.coefficients[m] = a[m].real();
        max_abs = std::max(max_abs, std::abs(a[m]));
        max_imag = std::max(max_imag, std::abs(a[m].imag()));
    }
    out.imag_relative = max_abs > 0.0 ? max_imag / max_abs : 0.0;

    const GridFunction load = synthesize(basis, out.coefficients);
    const double floor = options.f_floor_rel * exc.f.cwiseAbs().maxCoeff();
    out.dkappa = GridFunction::Constant(basis.n_nodes(), std::numeric_limits<double>::quiet_NaN());
    out.mask.assign(basis.n_nodes(), false);
    for (int i = 0; i < basis.n_nodes(); ++i) {
        if (std::abs(exc.f[i]) > floor) {
            out.mask[i] = true;
            out.dkappa[i] = load[i] / (exc.f[i] * exc.f[i]);
        }
    }
    return out;
}

double masked_relative_error(const Recovery& rec, const GridFunction& reference,
                             const SpectralBasis& basis) {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < basis.n_nodes(); ++i) {
        if (!rec.mask[i]) continue;
        const double w = basis.weights()[i];
        num += w * std::pow(rec.dkappa[i] - reference[i], 2);
        den += w * reference[i] * reference[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace fracwave
