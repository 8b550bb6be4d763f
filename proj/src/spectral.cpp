#include "fracwave/spectral.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fracwave/error.hpp"

namespace fracwave {

const char* to_string(BoundaryConfig bc) {
    switch (bc) {
        case BoundaryConfig::DirichletDirichlet: return "dirichlet-dirichlet";
        case BoundaryConfig::DirichletNeumann: return "dirichlet-neumann";
    }
    return "unknown";
}

SpectralBasis::SpectralBasis(BoundaryConfig bc, int n_modes, int n_x)
    : bc_(bc), n_modes_(n_modes), n_x_(n_x) {
    if (n_modes < 1) {
        throw DomainError("spectral basis needs n_modes >= 1, got " + std::to_string(n_modes));
    }
    if (n_x < 8 * n_modes) {
        throw ResolutionError("spectral basis needs n_x >= 8 * n_modes = " +
                              std::to_string(8 * n_modes) + ", got " + std::to_string(n_x));
    }
    lambdas_.resize(n_modes);
    for (int j = 0; j < n_modes; ++j) {
        const double k = wavenumber(j);
        lambdas_[j] = k * k;
    }
    grid_ = Eigen::VectorXd::LinSpaced(n_x + 1, 0.0, 1.0);
    weights_ = Eigen::VectorXd::Constant(n_x + 1, 1.0 / n_x);
    weights_[0] *= 0.5;
    weights_[n_x] *= 0.5;
    phi_.resize(n_x + 1, n_modes);
    for (int j = 0; j < n_modes; ++j) {
        for (int i = 0; i <= n_x; ++i) phi_(i, j) = eigenfunction(j, grid_[i]);
    }
    weighted_phi_ = weights_.asDiagonal() * phi_;
}

double SpectralBasis::wavenumber(int j) const {
    const double shift = bc_ == BoundaryConfig::DirichletDirichlet ? 1.0 : 0.5;
    return (j + shift) * std::numbers::pi;
}

double SpectralBasis::eigenfunction(int j, double x) const {
    return std::numbers::sqrt2 * std::sin(wavenumber(j) * x);
}

Eigen::VectorXd SpectralBasis::eigenfunctions_at(double x) const {
    Eigen::VectorXd out(n_modes_);
    for (int j = 0; j < n_modes_; ++j) out[j] = eigenfunction(j, x);
    return out;
}

Eigen::MatrixXd SpectralBasis::galerkin_matrix(const GridFunction& coef) const {
    if (coef.size() != n_nodes()) {
        throw ShapeError("coefficient has " + std::to_string(coef.size()) + " samples, grid has " +
                         std::to_string(n_nodes()));
    }
    return weighted_phi_.transpose() * (coef.asDiagonal() * phi_);
}

SpectralBasis build_basis(BoundaryConfig bc, int n_modes, int n_x) {
    return SpectralBasis(bc, n_modes, n_x);
}

ModalVector project(const SpectralBasis& basis, const GridFunction& f) {
    if (f.size() != basis.n_nodes()) {
        throw ShapeError("grid function has " + std::to_string(f.size()) + " samples, grid has " +
                         std::to_string(basis.n_nodes()));
    }
    return basis.weighted_phi_.transpose() * f;
}

GridFunction synthesize(const SpectralBasis& basis, const ModalVector& v) {
    if (v.size() != basis.n_modes()) {
        throw ShapeError("modal vector has " + std::to_string(v.size()) + " entries, basis has " +
                         std::to_string(basis.n_modes()));
    }
    return basis.phi() * v;
}

double sobolev_norm(const SpectralBasis& basis, const ModalVector& v, double s) {
    if (v.size() != basis.n_modes()) {
        throw ShapeError("modal vector length does not match basis");
    }
    double acc = 0.0;
    for (int j = 0; j < v.size(); ++j) acc += std::pow(basis.lambda(j), s) * v[j] * v[j];
    return std::sqrt(acc);
}

double l2_norm(const SpectralBasis& basis, const GridFunction& f) {
    if (f.size() != basis.n_nodes()) throw ShapeError("grid function length does not match grid");
    return std::sqrt(basis.weights().dot(f.cwiseProduct(f)));
}

}  // namespace fracwave
