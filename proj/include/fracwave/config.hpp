#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fracwave/recon.hpp"

namespace fracwave {

/// Experiment description read from a TOML-style key = value file with
/// [model], [discretization], [excitation], [observation], [forward],
/// [inversion], [reconstruction] and [sweep] sections.
struct ExperimentConfig {
    // [model]
    std::string damping = "cwch";
    double c = 1.0;
    double b = 0.1;
    double beta = 1.0;
    double alpha = 0.5;
    double b1 = 0.1;
    double b2 = 0.01;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    bool allow_unphysical = false;

    // [discretization]
    std::string bc = "dirichlet_neumann";
    int n_modes = 32;
    int n_x = 256;
    int n_steps = 2048;
    double t_final = 1.0;

    // [excitation]
    std::string profile = "sin_half";
    std::string chi = "linear";

    // [observation]
    double x0 = 1.0;
    int n_samples = 50;

    // [forward]
    std::string kappa = "zero";
    double kappa_scale = 0.2;

    // [inversion]
    int n_modes_fit = 4;
    std::string dkappa = "quadratic";
    double dkappa_scale = 0.1;
    double fit_t_min = 0.0;

    // [reconstruction]
    int n_basis = 40;
    std::string truth = "ramp";
    double truth_scale = 0.2;
    std::vector<double> noise_levels = {0.001};
    std::uint64_t seed = 1;
    double gamma0 = 1e-2;
    double gamma_decay = 0.7;
    double gamma_floor = 1e-10;
    double tau = 1.5;
    int max_iter = 30;

    // [sweep]
    std::vector<double> sweep_alpha;
    std::vector<double> sweep_c;
    std::vector<double> sweep_delta;

    // [output]; not part of the hash, so outputs do not depend on it.
    std::string out_dir = "fracwave_out";
};

/// Throws SpecificationError for unknown keys or malformed values.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// Range checks against the module invariants, run before any solve.
/// Throws DomainError, ModelError or SpecificationError.
void validate(const ExperimentConfig& cfg);

/// One "section.key = value" line per hashed field in a fixed order,
/// doubles with 17 significant digits.
std::string canonical(const ExperimentConfig& cfg);
/// 64-bit FNV-1a hash of the canonical form.
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t h);

AcousticModel model_of(const ExperimentConfig& cfg);
BoundaryConfig bc_of(const ExperimentConfig& cfg);
SpectralBasis basis_of(const ExperimentConfig& cfg);
TimeGrid grid_of(const ExperimentConfig& cfg);
Excitation excitation_of(const ExperimentConfig& cfg, const SpectralBasis& basis);
NewtonOptions newton_options_of(const ExperimentConfig& cfg);

/// Named coefficient profiles scaled by s:
///   zero; constant s; ramp s max(0, 2x - 1); quadratic s x(1 - x);
///   tent s (1/4 + 3/4 max(0, 1 - |x - 0.6| / 0.3)).
GridFunction kappa_profile(const std::string& name, double scale, const SpectralBasis& basis);

}  // namespace fracwave
