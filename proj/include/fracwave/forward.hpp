#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fracwave/fracops.hpp"
#include "fracwave/model.hpp"
#include "fracwave/spectral.hpp"

namespace fracwave {

/// Row i holds the modal coefficients at time node i.
using ModalField = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Row i holds grid-function samples at time node i.
using SpaceTimeField = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Coefficients of
///   (1 - sigma) u_tt + c^2 A u + D u + mu u_t + rho u = h.
/// An empty matrix stands for the zero field.
struct LinearCoefficients {
    SpaceTimeField sigma;
    SpaceTimeField mu;
    SpaceTimeField rho;
    ModalField h;
};

/// Modal initial data; empty vectors are zero. u2 (= u_tt(0)) is only read
/// by the fractional Zener model.
struct InitialData {
    ModalVector u0;
    ModalVector u1;
    ModalVector u2;
};

/// Galerkin solution. u_t and u_tt are the integrator's own velocity and
/// acceleration states.
struct ModalTrajectory {
    BoundaryConfig bc;
    TimeGrid grid;
    ModalField u;
    ModalField ut;
    ModalField utt;

    int n_modes() const { return static_cast<int>(u.cols()); }
};

struct ObservationTrace {
    double x0;
    TimeGrid grid;
    std::vector<double> values;
};

/// Implicit average-acceleration Newmark stepping of the Galerkin system.
/// Velocity damping d_t^alpha u = I^(1-alpha)[u_t] uses product-trapezoid
/// history sums of the velocity; the FZ term d_t^(alpha2+2) u = d_t^alpha2[u_tt]
/// uses L1 history sums of the acceleration. Variable coefficients enter the
/// implicit matrix through grid-quadrature Galerkin matrices.
///
/// Throws ModelError if max sigma >= 1, NumericalError on a singular step
/// matrix, DivergenceError on non-finite states.
ModalTrajectory solve_linear(const AcousticModel& model, const LinearCoefficients& coeffs,
                             const InitialData& init, const SpectralBasis& basis,
                             const TimeGrid& grid);

/// Forcing for the Westervelt problem. u0/u1 carry the impulsive part of the
/// source (e.g. chi(t) = t needs u_t(0+) = f); both default to zero.
struct Source {
    ModalField forcing;
    ModalVector u0;
    ModalVector u1;
};

struct FixedPointOptions {
    double tol = 1e-10;
    int max_iter = 50;
    /// Abort when min(1 - 2 kappa u) drops below this.
    double degeneracy_margin = 0.1;
};

struct WesterveltSolution {
    ModalTrajectory trajectory;
    int iterations;
    /// ||u^(k+1) - u^(k)||_{L_inf(L2)} for k = 1, 2, ...
    std::vector<double> increments;
};

/// u_tt + c^2 A u + D u = kappa (u^2)_tt + r by the fixed point
/// u^(k+1) = solve_linear(sigma = 2 kappa u^(k), mu = -2 kappa u_t^(k), h = r).
/// Throws BlowUpError on degeneracy and NonContractionError after max_iter.
WesterveltSolution solve_westervelt(const GridFunction& kappa, const Source& source,
                                    const AcousticModel& model, const SpectralBasis& basis,
                                    const TimeGrid& grid, const FixedPointOptions& options = {});

/// Derivative of kappa -> u in direction dkappa, with u solved for kappa:
///   (1 - 2 kappa u) z_tt + c^2 A z + D z - 4 kappa u_t z_t - 2 kappa u_tt z
///     = 2 dkappa (u u_tt + u_t^2),  z(0) = z_t(0) = 0.
ModalTrajectory solve_linearized(const GridFunction& kappa, const ModalTrajectory& u,
                                 const GridFunction& dkappa, const AcousticModel& model,
                                 const SpectralBasis& basis, const TimeGrid& grid);

/// values_i = sum_j u_j(t_i) phi_j(x0). Throws DomainError unless 0 <= x0 <= 1.
ObservationTrace observe(const ModalTrajectory& u, double x0);

SpaceTimeField to_physical(const ModalField& field, const SpectralBasis& basis);
ModalField project_field(const SpaceTimeField& field, const SpectralBasis& basis);

/// max_i ||row i||_2, i.e. the L_inf(0,T; L2) norm of a modal field.
double max_l2(const ModalField& field);

/// ||u_t(t_i)||^2 + c^2 ||grad u(t_i)||^2 at every node.
std::vector<double> energy_history(const ModalTrajectory& u, const SpectralBasis& basis,
                                   double c);

}  // namespace fracwave
