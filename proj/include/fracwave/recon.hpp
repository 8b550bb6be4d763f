#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fracwave/inversion.hpp"

namespace fracwave {

/// Point samples of a trace, optionally perturbed by uniform noise.
struct NoisyData {
    std::vector<double> times;
    std::vector<double> values;
    /// Relative amplitude a of the noise a ||g||_inf U(-1, 1).
    double noise_level = 0.0;
};

/// n uniform sample times i T / n, i = 1..n. Throws DomainError for n < 10.
std::vector<double> sample_times(double t_final, int n);

/// Piecewise-linear interpolation of a trace on its time grid.
double interpolate(const ObservationTrace& h, double t);
std::vector<double> sample(const ObservationTrace& h, const std::vector<double>& times);

/// Adds noise_level ||clean||_inf U(-1, 1) per sample from a seeded
/// 64-bit Mersenne twister.
NoisyData add_noise(const std::vector<double>& times, const std::vector<double>& clean,
                    double noise_level, std::uint64_t seed);

/// Noise standard deviation from second differences of the samples.
double estimate_noise_std(const NoisyData& data);

struct SmoothingOptions {
    /// Estimate the noise from the samples instead of from noise_level.
    bool estimate_noise = false;
    /// Relative tolerance on the Morozov misfit match.
    double misfit_rtol = 1e-3;
};

struct SmoothingResult {
    ObservationTrace trace{0.0, TimeGrid(1.0, 2), {}};
    /// Smoothed values at the sample times.
    std::vector<double> at_samples;
    double mu = 0.0;
    double noise_std = 0.0;
    double misfit = 0.0;
    /// n sigma^2.
    double target_misfit = 0.0;
    std::string warning;
};

/// Cubic smoothing spline minimising sum (g(t_i) - y_i)^2 + mu ||g''||^2,
/// mu chosen by bisection so that the misfit matches n sigma^2, sampled on
/// grid (linear extrapolation outside the sample range). Zero noise gives
/// the natural interpolating spline.
SmoothingResult smooth_trace(const NoisyData& raw, const TimeGrid& grid,
                             const SmoothingOptions& options = {});

/// Hat functions on n uniform nodes k / (n - 1); they sum to one on [0, 1].
class ChapeauBasis {
public:
    explicit ChapeauBasis(int n_basis);

    int size() const { return n_; }
    double node(int k) const { return static_cast<double>(k) / (n_ - 1); }
    double eval(int k, double x) const;
    /// eta(i, k) = eta_k(x_i) on the grid of the spectral basis.
    Eigen::MatrixXd matrix(const SpectralBasis& basis) const;
    GridFunction to_grid(const Eigen::VectorXd& coeffs, const SpectralBasis& basis) const;
    /// Nodal values of a grid function by linear interpolation.
    Eigen::VectorXd interpolate(const GridFunction& g, const SpectralBasis& basis) const;

private:
    int n_;
};

/// Everything the forward map kappa -> trace samples depends on.
struct ReconstructionProblem {
    AcousticModel model;
    SpectralBasis basis;
    TimeGrid grid;
    Excitation excitation;
    Source source;
    double x0;
    std::vector<double> times;
    ChapeauBasis chapeau;
    FixedPointOptions fixed_point;
};

/// Validates the excitation and builds the source for which kappa = 0
/// gives u = f chi.
ReconstructionProblem make_problem(const AcousticModel& model, const SpectralBasis& basis,
                                   const TimeGrid& grid, const Excitation& excitation, double x0,
                                   int n_samples, int n_basis);

/// Nonlinear trace samples F(kappa) for kappa = sum_k coeffs_k eta_k.
Eigen::VectorXd forward_map(const ReconstructionProblem& p, const Eigen::VectorXd& coeffs);

/// Column k is the linearised trace response to eta_k at kappa0, sampled at
/// the problem's sample times. jobs > 1 assembles columns on worker threads.
Eigen::MatrixXd assemble_jacobian(const ReconstructionProblem& p, const Eigen::VectorXd& kappa0,
                                  int jobs = 1);

enum class StopReason { Discrepancy, MaxIter, Stagnation };
const char* to_string(StopReason r);

struct NewtonOptions {
    double gamma0 = 1e-2;
    double gamma_decay = 0.7;
    double gamma_floor = 1e-10;
    double tau = 1.5;
    int max_iter = 30;
    double stagnation_tol = 1e-10;
    int max_backtrack = 10;
    /// Reassemble the Jacobian every this many accepted steps (0: never).
    int refreeze_every = 0;
    int jobs = 1;
    /// Called with every accepted iterate and its misfit, starting at kappa_0.
    std::function<void(const Eigen::VectorXd&, double)> on_accept;
};

struct ReconstructionState {
    Eigen::VectorXd kappa_coeffs;
    Eigen::MatrixXd J;
    double gamma = 0.0;
    /// ||F(kappa_k) - g|| for every accepted iterate, starting at kappa_0.
    std::vector<double> history;
    std::vector<Eigen::VectorXd> iterates;
    StopReason stop_reason = StopReason::MaxIter;
    /// Relative residual of the last regularised normal-equation solve.
    double normal_residual = 0.0;
};

/// Frozen Newton iteration
///   kappa_(k+1) = kappa_k + (J^T J + gamma_k I)^(-1) J^T (g - F(kappa_k)),
/// gamma_k = max(gamma0 gamma_decay^k, gamma_floor), stopped once
/// ||F(kappa_k) - g|| <= tau delta. Steps that fail in the nonlinear solver
/// or raise the misfit are halved up to max_backtrack times; if every trial
/// failed in the solver a DegenerateError is thrown, otherwise the
/// iteration stops with Stagnation.
ReconstructionState frozen_newton(const ReconstructionProblem& p, const Eigen::VectorXd& data,
                                  double delta, const Eigen::MatrixXd& J,
                                  const NewtonOptions& options = {},
                                  const Eigen::VectorXd& kappa0 = {});

/// Singular values in descending order.
Eigen::VectorXd svd_analysis(const Eigen::MatrixXd& J);

struct KappaError {
    double linf = 0.0;
    double l2 = 0.0;
    double rel_l2 = 0.0;
};

/// Errors of sum coeffs_k eta_k against a reference on the grid nodes in
/// [x_lo, x_hi].
KappaError kappa_error(const ReconstructionProblem& p, const Eigen::VectorXd& coeffs,
                       const GridFunction& truth, double x_lo = 0.0, double x_hi = 1.0);

struct TwinExperiment {
    NoisyData data;
    SmoothingResult smoothed;
    double delta = 0.0;
    ReconstructionState state;
};

/// Synthetic run: noisy samples of F(truth), smoothing and frozen Newton
/// against the smoothed samples with delta = sqrt(n) sigma and the given
/// Jacobian (usually assembled at zero).
TwinExperiment run_twin_experiment(const ReconstructionProblem& p, const GridFunction& truth,
                                   double noise_level, std::uint64_t seed,
                                   const Eigen::MatrixXd& J, const NewtonOptions& options = {});

}  // namespace fracwave
