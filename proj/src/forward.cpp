#include "fracwave/forward.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

// Per-mode damping split into a velocity-memory part d_j I^gamma[u_t] and an
// acceleration-memory part e d_t^alpha[u_tt].
struct DampingTerms {
    Eigen::VectorXd velocity;  // d_j
    double velocity_order = 1.0;  // gamma = 1 - alpha
    double acceleration = 0.0;  // e
    double acceleration_order = 1.0;
};

DampingTerms damping_terms(const AcousticModel& model, const SpectralBasis& basis) {
    DampingTerms t;
    t.velocity = Eigen::VectorXd::Zero(basis.n_modes());
    if (const auto* m = std::get_if<Cwch>(&model.damping)) {
        for (int j = 0; j < basis.n_modes(); ++j) {
            t.velocity[j] = m->b * std::pow(basis.lambda(j), m->beta);
        }
        t.velocity_order = 1.0 - m->alpha;
    } else {
        const auto& fz = std::get<FractionalZener>(model.damping);
        t.velocity = fz.b1 * basis.lambdas();
        t.velocity_order = 1.0 - fz.alpha1;
        t.acceleration = fz.b2;
        t.acceleration_order = fz.alpha2;
    }
    return t;
}

void check_field(const SpaceTimeField& f, const char* name, const SpectralBasis& basis,
                 const TimeGrid& grid) {
    if (f.size() == 0) return;
    if (f.rows() != grid.n_nodes() || f.cols() != basis.n_nodes()) {
        throw ShapeError(std::string(name) + " must be " + std::to_string(grid.n_nodes()) + " x " +
                         std::to_string(basis.n_nodes()));
    }
    if (!f.allFinite()) throw ShapeError(std::string(name) + " has non-finite entries");
}

Eigen::VectorXd or_zero(const ModalVector& v, int n, const char* name) {
    if (v.size() == 0) return Eigen::VectorXd::Zero(n);
    if (v.size() != n) throw ShapeError(std::string(name) + " has wrong number of modes");
    return v;
}

// Reversed weight table: rev[i] = w[m - i], so w[N - k] for k = 1..n is the
// contiguous block rev.segment(m - N + 1, n).
Eigen::VectorXd reversed(std::span<const double> w) {
    const int m = static_cast<int>(w.size()) - 1;
    Eigen::VectorXd rev(m + 1);
    for (int i = 0; i <= m; ++i) rev[i] = w[m - i];
    return rev;
}

}  // namespace

ModalTrajectory solve_linear(const AcousticModel& model, const LinearCoefficients& coeffs,
                             const InitialData& init, const SpectralBasis& basis,
                             const TimeGrid& grid) {
    validate(model);
    check_field(coeffs.sigma, "sigma", basis, grid);
    check_field(coeffs.mu, "mu", basis, grid);
    check_field(coeffs.rho, "rho", basis, grid);
    const int n_modes = basis.n_modes();
    const int n_nodes = grid.n_nodes();
    const int n_steps = grid.n_steps();
    if (coeffs.h.size() != 0 && (coeffs.h.rows() != n_nodes || coeffs.h.cols() != n_modes)) {
        throw ShapeError("forcing must be " + std::to_string(n_nodes) + " x " +
                         std::to_string(n_modes));
    }
    if (coeffs.sigma.size() != 0 && coeffs.sigma.maxCoeff() >= 1.0) {
        throw ModelError("nondegeneracy violated: max sigma = " +
                         std::to_string(coeffs.sigma.maxCoeff()) + " >= 1");
    }

    const bool fz = is_fz(model);
    const bool has_sigma = coeffs.sigma.size() != 0;
    const bool has_mu = coeffs.mu.size() != 0;
    const bool has_rho = coeffs.rho.size() != 0;
    const bool coupled = has_sigma || has_mu || has_rho;
    const bool has_h = coeffs.h.size() != 0;

    const double dt = grid.dt();
    const Eigen::VectorXd stiff = model.c * model.c * basis.lambdas();
    const DampingTerms damp = damping_terms(model, basis);
    const bool velocity_memory = damp.velocity.any() && damp.velocity_order > 0.0;
    const AbelWeights abel(damp.velocity_order, dt, n_steps);
    const L1Weights l1(damp.acceleration_order, dt, n_steps);
    const Eigen::VectorXd abel_rev = reversed(abel.interior());
    const Eigen::VectorXd l1_rev = reversed(l1.coeffs());
    const double accel_weight = damp.acceleration * l1.scale();

    ModalTrajectory out{basis.bc(), grid, ModalField::Zero(n_nodes, n_modes),
                        ModalField::Zero(n_nodes, n_modes), ModalField::Zero(n_nodes, n_modes)};
    out.u.row(0) = or_zero(init.u0, n_modes, "u0").transpose();
    out.ut.row(0) = or_zero(init.u1, n_modes, "u1").transpose();
    // Acceleration increments a_m - a_{m-1}, used by the L1 memory.
    ModalField accel_diff;
    if (fz) accel_diff = ModalField::Zero(n_nodes, n_modes);

    auto explicit_coupling = [&](int row, const Eigen::VectorXd& vel,
                                 const Eigen::VectorXd& disp) -> Eigen::VectorXd {
        Eigen::VectorXd phys = Eigen::VectorXd::Zero(basis.n_nodes());
        if (has_mu) phys += coeffs.mu.row(row).transpose().cwiseProduct(basis.phi() * vel);
        if (has_rho) phys += coeffs.rho.row(row).transpose().cwiseProduct(basis.phi() * disp);
        return project(basis, phys);
    };

    // Initial acceleration.
    if (fz) {
        out.utt.row(0) = or_zero(init.u2, n_modes, "u2").transpose();
    } else {
        const Eigen::VectorXd u0 = out.u.row(0).transpose();
        const Eigen::VectorXd v0 = out.ut.row(0).transpose();
        Eigen::VectorXd rhs = -stiff.cwiseProduct(u0);
        if (has_h) rhs += coeffs.h.row(0).transpose();
        if (!velocity_memory) rhs -= damp.velocity.cwiseProduct(v0);
        if (has_mu || has_rho) rhs -= explicit_coupling(0, v0, u0);
        if (has_sigma) {
            Eigen::MatrixXd k = Eigen::MatrixXd::Identity(n_modes, n_modes) -
                                basis.galerkin_matrix(coeffs.sigma.row(0).transpose());
            out.utt.row(0) = k.partialPivLu().solve(rhs).transpose();
        } else {
            out.utt.row(0) = rhs.transpose();
        }
    }

    const double beta_u = 0.25 * dt * dt;
    const double gamma_v = 0.5 * dt;
    Eigen::VectorXd kdiag = Eigen::VectorXd::Ones(n_modes) + beta_u * stiff;
    // Implicit parts of the memory terms (weight of the newest sample).
    kdiag += damp.velocity * (velocity_memory ? abel.scale() * gamma_v : gamma_v);
    kdiag.array() += accel_weight * l1.coeff(0);

    for (int n = 0; n < n_steps; ++n) {
        const int next = n + 1;
        const Eigen::VectorXd un = out.u.row(n).transpose();
        const Eigen::VectorXd vn = out.ut.row(n).transpose();
        const Eigen::VectorXd an = out.utt.row(n).transpose();
        const Eigen::VectorXd u_pred = un + dt * vn + beta_u * an;
        const Eigen::VectorXd v_pred = vn + gamma_v * an;

        Eigen::VectorXd rhs = -stiff.cwiseProduct(u_pred);
        if (has_h) rhs += coeffs.h.row(next).transpose();

        if (velocity_memory) {
            Eigen::VectorXd hist = abel.first(next) * out.ut.row(0).transpose() + v_pred;
            if (n >= 1) {
                hist += out.ut.middleRows(1, n).transpose() *
                        abel_rev.segment(n_steps - next + 1, n);
            }
            rhs -= abel.scale() * damp.velocity.cwiseProduct(hist);
        } else {
            rhs -= damp.velocity.cwiseProduct(v_pred);
        }

        if (fz) {
            Eigen::VectorXd hist = -l1.coeff(0) * an;
            if (n >= 1) {
                hist += accel_diff.middleRows(1, n).transpose() *
                        l1_rev.segment(n_steps - next + 1, n);
            }
            rhs -= accel_weight * hist;
        }

        Eigen::VectorXd a_next;
        if (coupled) {
            if (has_mu || has_rho) rhs -= explicit_coupling(next, v_pred, u_pred);
            Eigen::VectorXd coef = Eigen::VectorXd::Zero(basis.n_nodes());
            if (has_sigma) coef -= coeffs.sigma.row(next).transpose();
            if (has_mu) coef += gamma_v * coeffs.mu.row(next).transpose();
            if (has_rho) coef += beta_u * coeffs.rho.row(next).transpose();
            Eigen::MatrixXd k = basis.galerkin_matrix(coef);
            k.diagonal() += kdiag;
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(k);
            if (!(lu.rcond() > 1e-14)) {
                throw NumericalError("singular step matrix at t = " +
                                     std::to_string(grid.time(next)));
            }
            a_next = lu.solve(rhs);
        } else {
            a_next = rhs.cwiseQuotient(kdiag);
        }
        if (!a_next.allFinite()) {
            throw DivergenceError("non-finite state at t = " + std::to_string(grid.time(next)));
        }
        out.utt.row(next) = a_next.transpose();
        out.ut.row(next) = (v_pred + gamma_v * a_next).transpose();
        out.u.row(next) = (u_pred + beta_u * a_next).transpose();
        if (fz) accel_diff.row(next) = (a_next - an).transpose();
    }
    return out;
}

SpaceTimeField to_physical(const ModalField& field, const SpectralBasis& basis) {
    return field * basis.phi().transpose();
}

ModalField project_field(const SpaceTimeField& field, const SpectralBasis& basis) {
    if (field.cols() != basis.n_nodes()) throw ShapeError("field does not match spatial grid");
    return field * (basis.weights().asDiagonal() * basis.phi());
}

double max_l2(const ModalField& field) {
    double m = 0.0;
    for (int i = 0; i < field.rows(); ++i) m = std::max(m, field.row(i).norm());
    return m;
}

namespace {

SpaceTimeField scaled_by(const SpaceTimeField& phys, const GridFunction& factor) {
    return phys.array().rowwise() * factor.transpose().array();
}

}  // namespace

WesterveltSolution solve_westervelt(const GridFunction& kappa, const Source& source,
                                    const AcousticModel& model, const SpectralBasis& basis,
                                    const TimeGrid& grid, const FixedPointOptions& options) {
    if (kappa.size() != basis.n_nodes()) throw ShapeError("kappa does not match spatial grid");
    if (!kappa.allFinite()) throw DomainError("kappa has non-finite entries");
    LinearCoefficients coeffs;
    coeffs.h = source.forcing;
    const InitialData init{source.u0, source.u1, {}};

    WesterveltSolution sol{solve_linear(model, coeffs, init, basis, grid), 1, {}};
    if (!kappa.any()) return sol;

    for (int it = 2; it <= options.max_iter; ++it) {
        const SpaceTimeField u_phys = to_physical(sol.trajectory.u, basis);
        coeffs.sigma = scaled_by(u_phys, 2.0 * kappa);
        const double margin = 1.0 - coeffs.sigma.maxCoeff();
        if (!(margin >= options.degeneracy_margin)) {
            throw BlowUpError("degenerate Westervelt iterate: min(1 - 2 kappa u) = " +
                              std::to_string(margin) + " < " +
                              std::to_string(options.degeneracy_margin));
        }
        coeffs.mu = scaled_by(to_physical(sol.trajectory.ut, basis), -2.0 * kappa);
        ModalTrajectory next = solve_linear(model, coeffs, init, basis, grid);
        const double inc = max_l2(next.u - sol.trajectory.u);
        sol.increments.push_back(inc);
        sol.trajectory = std::move(next);
        sol.iterations = it;
        if (!std::isfinite(inc)) throw DivergenceError("fixed-point iterate is not finite");
        if (inc <= options.tol * max_l2(sol.trajectory.u)) return sol;
    }
    throw NonContractionError("fixed point did not converge within " +
                              std::to_string(options.max_iter) + " iterations (last increment " +
                              std::to_string(sol.increments.back()) + ")");
}

ModalTrajectory solve_linearized(const GridFunction& kappa, const ModalTrajectory& u,
                                 const GridFunction& dkappa, const AcousticModel& model,
                                 const SpectralBasis& basis, const TimeGrid& grid) {
    if (kappa.size() != basis.n_nodes() || dkappa.size() != basis.n_nodes()) {
        throw ShapeError("kappa/dkappa do not match spatial grid");
    }
    if (!(u.grid == grid) || u.n_modes() != basis.n_modes()) {
        throw ShapeError("trajectory does not match basis/grid");
    }
    const SpaceTimeField up = to_physical(u.u, basis);
    const SpaceTimeField vp = to_physical(u.ut, basis);
    const SpaceTimeField ap = to_physical(u.utt, basis);

    LinearCoefficients coeffs;
    if (kappa.any()) {
        coeffs.sigma = scaled_by(up, 2.0 * kappa);
        coeffs.mu = scaled_by(vp, -4.0 * kappa);
        coeffs.rho = scaled_by(ap, -2.0 * kappa);
    }
    const SpaceTimeField source = up.cwiseProduct(ap) + vp.cwiseProduct(vp);
    coeffs.h = project_field(scaled_by(source, 2.0 * dkappa), basis);
    return solve_linear(model, coeffs, {}, basis, grid);
}

ObservationTrace observe(const ModalTrajectory& u, double x0) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) {
        throw DomainError("observation point must lie in [0, 1], got " + std::to_string(x0));
    }
    // Same analytic eigenfunctions as SpectralBasis.
    Eigen::VectorXd phi(u.n_modes());
    const double shift = u.bc == BoundaryConfig::DirichletDirichlet ? 1.0 : 0.5;
    for (int j = 0; j < u.n_modes(); ++j) {
        phi[j] = std::numbers::sqrt2 * std::sin((j + shift) * std::numbers::pi * x0);
    }
    const Eigen::VectorXd vals = u.u * phi;
    return {x0, u.grid, std::vector<double>(vals.data(), vals.data() + vals.size())};
}

std::vector<double> energy_history(const ModalTrajectory& u, const SpectralBasis& basis,
                                   double c) {
    std::vector<double> e(u.u.rows());
    const Eigen::VectorXd stiff = c * c * basis.lambdas();
    for (int i = 0; i < u.u.rows(); ++i) {
        e[i] = u.ut.row(i).squaredNorm() +
               u.u.row(i).array().square().matrix().dot(stiff);
    }
    return e;
}

}  // namespace fracwave
