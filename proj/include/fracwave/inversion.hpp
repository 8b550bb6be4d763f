#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "fracwave/forward.hpp"
#include "fracwave/poles.hpp"

namespace fracwave {

enum class TimeProfileKind { Linear, Custom };

/// Time factor chi of the excitation u0 = f(x) chi(t). Linear is chi(t) = t
/// with closed-form Caputo derivatives; Custom supplies its own callables.
struct TimeProfile {
    TimeProfileKind kind = TimeProfileKind::Linear;
    std::function<double(double)> chi;
    std::function<double(double)> chi_dd;
    /// chi'(0), carried as initial velocity of the excited field.
    double chi_dot0 = 0.0;
    /// (t, alpha) -> Caputo derivative of order alpha of chi.
    std::function<double(double, double)> caputo;
    /// (t, alpha) -> Caputo derivative of order alpha of chi''. FZ only.
    std::function<double(double, double)> caputo_dd;
    /// psi = (chi^2)''.
    std::function<double(double)> psi;
    /// Laplace transform of psi.
    std::function<Complex(Complex)> psi_hat;
};

struct Excitation {
    GridFunction f;
    TimeProfile chi;
};

/// Named spatial profiles: "sin" = sin(pi x), "sin_half" = sin(pi x / 2).
/// Throws SpecificationError for unknown names.
GridFunction excitation_profile(const std::string& name, const SpectralBasis& basis);

/// Evaluations of the time profile; Custom profiles without the requested
/// callable raise SpecificationError.
double chi_value(const TimeProfile& p, double t);
double psi_value(const TimeProfile& p, double t);
/// Laplace transform of psi (2 / s for chi(t) = t).
Complex psi_hat_raw(const TimeProfile& p, Complex s);
/// s psi_hat(s): the constant the residue formula uses for chi(t) = t
/// (value 2), i.e. the transform of psi paired with the residue of the
/// transformed time derivative of the trace.
Complex psi_hat_scaled(const TimeProfile& p, Complex s);

/// Checks |f| >= 1e-12 away from at most two grid nodes, that the modal
/// tail of f is below 1e-8 relative, and that psi does not vanish
/// identically on the grid. Throws DomainError.
void validate_excitation(const Excitation& exc, const SpectralBasis& basis, const TimeGrid& grid);

/// Forcing r = f chi'' + c^2 A f chi + D[f chi] and initial data so that the
/// damped linear solution is f(x) chi(t).
Source build_excitation_source(const Excitation& exc, const AcousticModel& model,
                               const SpectralBasis& basis, const TimeGrid& grid);

/// a_j = <dkappa f^2, phi_j>: the modal loads of (dkappa u0^2)_tt = dkappa f^2 psi.
ModalVector modal_loads(const GridFunction& dkappa, const Excitation& exc,
                        const SpectralBasis& basis);

/// Trace at x0 of z with z_tt + c^2 A z + D z = dkappa (u0^2)_tt, zero data,
/// computed mode by mode from scalar relaxation equations
///   z_j'' + c^2 lambda_j z_j + D_j z_j = a_j psi(t).
ObservationTrace synthesize_trace(const GridFunction& dkappa, const Excitation& exc,
                                  const AcousticModel& model, const SpectralBasis& basis,
                                  const TimeGrid& grid, double x0);

/// Per-mode scalar trajectories behind synthesize_trace (row = time).
ModalField synthesize_modes(const ModalVector& loads, const TimeProfile& chi,
                            const AcousticModel& model, const SpectralBasis& basis,
                            const TimeGrid& grid);

struct LaplaceValue {
    Complex value;
    /// ||h||_inf e^(-Re s T) / Re s for Re s > 0, infinity otherwise.
    double truncation_bound;
    /// Re s < 0: the finite-T integral does not approximate the transform.
    bool flagged;
};

/// Trapezoid quadrature of e^(-s t) h(t) over [0, T].
LaplaceValue laplace_trace(const ObservationTrace& h, Complex s);

struct ModeResidue {
    int mode;
    Complex pole;
    /// Residue of 1/omega_m at the pole.
    Complex residue_w;
    /// Fitted residue of the transformed trace at the pole.
    Complex residue;
};

struct ResidueData {
    /// Upper half-plane and real poles of each fitted mode, in mode order.
    std::vector<ModeResidue> entries;
    /// Coefficient of the constant term (pole of psi-hat at s = 0).
    double constant = 0.0;
    /// ||h - fit||_2 over the fit window.
    double fit_residual = 0.0;
    /// 2-norm condition number of the fit matrix.
    double condition_number = 0.0;
    std::string warning;
};

struct FitOptions {
    double t_min = 0.0;
    bool include_constant = true;
    /// Conditioning above which a warning is attached.
    double warn_condition = 1e12;
};

/// Linear least squares h(t) ~ c0 + sum_m sum_p 2 Re(R e^(p t)) over the
/// known poles of the first n_modes_fit modes (real poles enter once as
/// R e^(p t)). Solved by column-pivoted Householder QR.
/// Throws DomainError if the window holds fewer than 4 samples per unknown.
ResidueData extract_residues(const ObservationTrace& h, const std::vector<PoleSet>& poles,
                             int n_modes_fit, const FitOptions& options = {});

struct Recovery {
    /// a_m = <dkappa f^2, phi_m> for the fitted modes, zero beyond.
    ModalVector coefficients;
    /// max |Im a_m| / max |a_m| before taking real parts.
    double imag_relative = 0.0;
    /// Recovered dkappa on the grid; NaN where masked.
    GridFunction dkappa;
    std::vector<bool> mask;
};

struct RecoveryOptions {
    /// Mask where |f| <= f_floor_rel ||f||_inf.
    double f_floor_rel = 1e-3;
    double hypothesis_tol = 1e-10;
};

/// a_m = Res(h-hat; p_m) / (Res(w-hat_m; p_m) psi-hat(p_m) phi_m(x0)) and
/// dkappa = synthesize(a) / f^2 on the unmasked set. Uses the first complex
/// pole of each mode (the first real pole if the mode has no complex one).
/// Throws AssumptionError when psi-hat(p_m) or phi_m(x0) is below tolerance.
Recovery recover_coefficients(const ResidueData& res, const Excitation& exc,
                              const SpectralBasis& basis, double x0,
                              const RecoveryOptions& options = {});

/// Relative L2 error of a masked recovery against a reference on the mask.
double masked_relative_error(const Recovery& rec, const GridFunction& reference,
                             const SpectralBasis& basis);

}  // namespace fracwave
