#pragma once

#include <Eigen/Dense>

namespace fracwave {

enum class BoundaryConfig { DirichletDirichlet, DirichletNeumann };

const char* to_string(BoundaryConfig bc);

/// Values of a function at the nodes of a spatial grid.
using GridFunction = Eigen::VectorXd;
/// Coefficients with respect to the eigenfunctions phi_1..phi_n.
using ModalVector = Eigen::VectorXd;

/// Eigensystem of -d^2/dx^2 on (0, 1) with Dirichlet data at x = 0 and either
/// Dirichlet or Neumann data at x = 1, sampled on n_x + 1 uniform nodes.
///
///   DirichletDirichlet: lambda_j = (j pi)^2,       phi_j = sqrt(2) sin(j pi x)
///   DirichletNeumann:   lambda_j = ((j - 1/2) pi)^2, phi_j = sqrt(2) sin((j - 1/2) pi x)
///
/// Modes are indexed from 0 in code (index 0 is phi_1). Immutable.
class SpectralBasis {
public:
    /// Throws DomainError for n_modes < 1, ResolutionError for n_x < 8 n_modes.
    SpectralBasis(BoundaryConfig bc, int n_modes, int n_x);

    BoundaryConfig bc() const { return bc_; }
    int n_modes() const { return n_modes_; }
    int n_x() const { return n_x_; }
    int n_nodes() const { return n_x_ + 1; }

    double wavenumber(int j) const;
    double lambda(int j) const { return lambdas_[j]; }
    const Eigen::VectorXd& lambdas() const { return lambdas_; }
    const Eigen::VectorXd& grid() const { return grid_; }
    /// Trapezoid weights on the grid.
    const Eigen::VectorXd& weights() const { return weights_; }
    /// phi(i, j) = phi_j(x_i).
    const Eigen::MatrixXd& phi() const { return phi_; }

    double eigenfunction(int j, double x) const;
    /// All eigenfunctions evaluated at one point.
    Eigen::VectorXd eigenfunctions_at(double x) const;

    /// Galerkin matrix <coef phi_i, phi_j> under grid quadrature.
    Eigen::MatrixXd galerkin_matrix(const GridFunction& coef) const;

private:
    BoundaryConfig bc_;
    int n_modes_;
    int n_x_;
    Eigen::VectorXd lambdas_;
    Eigen::VectorXd grid_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd phi_;
    Eigen::MatrixXd weighted_phi_;

    friend ModalVector project(const SpectralBasis&, const GridFunction&);
};

SpectralBasis build_basis(BoundaryConfig bc, int n_modes, int n_x);

/// Trapezoid quadrature of f phi_j. Throws ShapeError on length mismatch.
ModalVector project(const SpectralBasis& basis, const GridFunction& f);

GridFunction synthesize(const SpectralBasis& basis, const ModalVector& v);

/// (sum_j lambda_j^s v_j^2)^(1/2)
double sobolev_norm(const SpectralBasis& basis, const ModalVector& v, double s);

/// L2(0,1) norm of a grid function under the basis quadrature.
double l2_norm(const SpectralBasis& basis, const GridFunction& f);

}  // namespace fracwave
