#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "fracwave/config.hpp"
#include "fracwave/error.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace fracwave;

namespace {

Series series_of(const std::vector<double>& values, double t_final) {
    if (values.size() < 2) throw ShapeError("need at least two samples");
    return Series(TimeGrid(t_final, static_cast<int>(values.size()) - 1), values);
}

py::list poles_of(const AcousticModel& model, double lambda) {
    validate(model);
    const PoleSet set = find_poles({model, lambda});
    py::list out;
    for (const Pole& p : set.poles) {
        out.append(py::dict("s"_a = p.s, "residue"_a = p.residue_w, "multiplicity"_a = p.multiplicity,
                            "newton_residual"_a = p.newton_residual));
    }
    return out;
}

ReconstructionProblem problem_of(const ExperimentConfig& cfg) {
    const SpectralBasis basis = basis_of(cfg);
    return make_problem(model_of(cfg), basis, grid_of(cfg), excitation_of(cfg, basis), cfg.x0, cfg.n_samples,
                        cfg.n_basis);
}

py::dict simulate(const ExperimentConfig& cfg) {
    validate(cfg);
    const AcousticModel model = model_of(cfg);
    const SpectralBasis basis = basis_of(cfg);
    const TimeGrid grid = grid_of(cfg);
    const Excitation exc = excitation_of(cfg, basis);
    const Source src = build_excitation_source(exc, model, basis, grid);
    const WesterveltSolution sol =
        solve_westervelt(kappa_profile(cfg.kappa, cfg.kappa_scale, basis), src, model, basis, grid);
    return py::dict("t"_a = grid.times(), "trace"_a = observe(sol.trajectory, cfg.x0).values,
                    "modes"_a = Eigen::MatrixXd(sol.trajectory.u),
                    "energy"_a = energy_history(sol.trajectory, basis, model.c), "iterations"_a = sol.iterations);
}

py::dict invert_linear(const ExperimentConfig& cfg) {
    validate(cfg);
    const AcousticModel model = model_of(cfg);
    const SpectralBasis basis = basis_of(cfg);
    const TimeGrid grid = grid_of(cfg);
    const Excitation exc = excitation_of(cfg, basis);
    const GridFunction truth = kappa_profile(cfg.dkappa, cfg.dkappa_scale, basis);
    const ObservationTrace h = synthesize_trace(truth, exc, model, basis, grid, cfg.x0);
    std::vector<PoleSet> poles;
    for (int j = 0; j < cfg.n_modes_fit; ++j) poles.push_back(find_poles({model, basis.lambda(j)}));
    FitOptions fit;
    fit.t_min = cfg.fit_t_min;
    const ResidueData rd = extract_residues(h, poles, cfg.n_modes_fit, fit);
    const Recovery rec = recover_coefficients(rd, exc, basis, cfg.x0);
    return py::dict("x"_a = Eigen::VectorXd(basis.grid()), "truth"_a = truth, "dkappa"_a = rec.dkappa,
                    "coefficients"_a = Eigen::VectorXd(rec.coefficients.head(cfg.n_modes_fit)),
                    "coefficients_exact"_a = Eigen::VectorXd(modal_loads(truth, exc, basis).head(cfg.n_modes_fit)),
                    "masked_relative_error"_a = masked_relative_error(rec, truth, basis),
                    "condition_number"_a = rd.condition_number, "fit_residual"_a = rd.fit_residual);
}

py::dict reconstruct(const ExperimentConfig& cfg, double noise_level, std::uint64_t seed, int jobs) {
    validate(cfg);
    const ReconstructionProblem p = problem_of(cfg);
    const GridFunction truth = kappa_profile(cfg.truth, cfg.truth_scale, p.basis);
    NewtonOptions opts = newton_options_of(cfg);
    opts.jobs = jobs;
    const Eigen::MatrixXd J = assemble_jacobian(p, Eigen::VectorXd::Zero(cfg.n_basis), jobs);
    const TwinExperiment tw = run_twin_experiment(p, truth, noise_level, seed, J, opts);
    const KappaError err = kappa_error(p, tw.state.kappa_coeffs, truth);
    return py::dict("x"_a = Eigen::VectorXd(p.basis.grid()), "truth"_a = truth,
                    "kappa"_a = p.chapeau.to_grid(tw.state.kappa_coeffs, p.basis),
                    "coefficients"_a = tw.state.kappa_coeffs, "history"_a = tw.state.history,
                    "stop_reason"_a = to_string(tw.state.stop_reason), "delta"_a = tw.delta, "linf"_a = err.linf,
                    "l2"_a = err.l2);
}

Eigen::VectorXd singular_values(const ExperimentConfig& cfg, int jobs) {
    validate(cfg);
    const ReconstructionProblem p = problem_of(cfg);
    return svd_analysis(assemble_jacobian(p, Eigen::VectorXd::Zero(cfg.n_basis), jobs));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fractionally damped Westervelt simulation, pole analysis and coefficient reconstruction";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto validation = py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    (void)validation;

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("damping", &ExperimentConfig::damping)
        .def_readwrite("c", &ExperimentConfig::c)
        .def_readwrite("b", &ExperimentConfig::b)
        .def_readwrite("beta", &ExperimentConfig::beta)
        .def_readwrite("alpha", &ExperimentConfig::alpha)
        .def_readwrite("b1", &ExperimentConfig::b1)
        .def_readwrite("b2", &ExperimentConfig::b2)
        .def_readwrite("alpha1", &ExperimentConfig::alpha1)
        .def_readwrite("alpha2", &ExperimentConfig::alpha2)
        .def_readwrite("bc", &ExperimentConfig::bc)
        .def_readwrite("n_modes", &ExperimentConfig::n_modes)
        .def_readwrite("n_x", &ExperimentConfig::n_x)
        .def_readwrite("n_steps", &ExperimentConfig::n_steps)
        .def_readwrite("t_final", &ExperimentConfig::t_final)
        .def_readwrite("x0", &ExperimentConfig::x0)
        .def_readwrite("n_samples", &ExperimentConfig::n_samples)
        .def_readwrite("kappa", &ExperimentConfig::kappa)
        .def_readwrite("kappa_scale", &ExperimentConfig::kappa_scale)
        .def_readwrite("n_modes_fit", &ExperimentConfig::n_modes_fit)
        .def_readwrite("dkappa", &ExperimentConfig::dkappa)
        .def_readwrite("dkappa_scale", &ExperimentConfig::dkappa_scale)
        .def_readwrite("n_basis", &ExperimentConfig::n_basis)
        .def_readwrite("truth", &ExperimentConfig::truth)
        .def_readwrite("truth_scale", &ExperimentConfig::truth_scale)
        .def_readwrite("noise_levels", &ExperimentConfig::noise_levels)
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("tau", &ExperimentConfig::tau)
        .def_readwrite("max_iter", &ExperimentConfig::max_iter)
        .def("validate", [](const ExperimentConfig& c) { validate(c); })
        .def("canonical", [](const ExperimentConfig& c) { return canonical(c); })
        .def("hash", [](const ExperimentConfig& c) { return hash_hex(config_hash(c)); });

    m.def("parse_config", &parse_config, "text"_a);
    m.def("load_config", &load_config, "path"_a);

    m.def(
        "caputo_derivative",
        [](const std::vector<double>& v, double t_final, double alpha) {
            return caputo_derivative(series_of(v, t_final), alpha).values;
        },
        "values"_a, "t_final"_a, "alpha"_a, "L1 Caputo derivative of samples on a uniform grid over [0, t_final].");
    m.def(
        "abel_integral",
        [](const std::vector<double>& v, double t_final, double gamma) {
            return abel_integral(series_of(v, t_final), gamma).values;
        },
        "values"_a, "t_final"_a, "gamma"_a);
    m.def(
        "verify_alikhanov",
        [](const std::vector<double>& v, double t_final, double alpha) {
            const AlikhanovCheck r = verify_alikhanov(series_of(v, t_final), alpha);
            return py::dict("lhs"_a = r.lhs, "rhs"_a = r.rhs, "holds"_a = r.holds);
        },
        "values"_a, "t_final"_a, "alpha"_a);

    m.def(
        "cwch_poles",
        [](double lambda, double c, double b, double beta, double alpha) {
            return poles_of({c, Cwch{b, beta, alpha}}, lambda);
        },
        "lam"_a, "c"_a = 1.0, "b"_a = 0.1, "beta"_a = 1.0, "alpha"_a = 0.5);
    m.def(
        "fz_poles",
        [](double lambda, double c, double b1, double b2, double alpha1, double alpha2) {
            return poles_of({c, FractionalZener{b1, b2, alpha1, alpha2}}, lambda);
        },
        "lam"_a, "c"_a = 1.0, "b1"_a = 0.1, "b2"_a = 0.01, "alpha1"_a = 0.5, "alpha2"_a = 0.5);

    m.def("simulate", &simulate, "config"_a);
    m.def("invert_linear", &invert_linear, "config"_a);
    m.def("reconstruct", &reconstruct, "config"_a, "noise_level"_a = 0.0, "seed"_a = 1, "jobs"_a = 1);
    m.def("singular_values", &singular_values, "config"_a, "jobs"_a = 1);
    m.def("run_cli", &cli::run, "args"_a, "Runs the command-line driver and returns its exit code.");
}
