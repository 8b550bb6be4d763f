#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "fracwave/config.hpp"
#include "fracwave/error.hpp"

namespace fracwave::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    std::string command;
    ExperimentConfig cfg;
    fs::path out;
    int jobs = 1;
    std::string hash;
};

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.16e", v);
    return buf;
}

class Csv {
public:
    Csv(const Run& run, const std::string& name, const std::vector<std::string>& columns)
        : out_(run.out / name) {
        if (!out_) throw ValidationError("cannot write " + (run.out / name).string());
        out_ << "# fracwave " << run.command << "\n# config_hash = " << run.hash
             << "\n# seed = " << run.cfg.seed << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

void write_json(const Run& run, const std::string& name, json body) {
    body["command"] = run.command;
    body["config_hash"] = run.hash;
    body["seed"] = run.cfg.seed;
    std::ofstream out(run.out / name);
    if (!out) throw ValidationError("cannot write " + (run.out / name).string());
    out << body.dump(2) << "\n";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void cmd_simulate(const Run& run) {
    const ExperimentConfig& cfg = run.cfg;
    const AcousticModel model = model_of(cfg);
    const SpectralBasis basis = basis_of(cfg);
    const TimeGrid grid = grid_of(cfg);
    const Excitation exc = excitation_of(cfg, basis);
    validate_excitation(exc, basis, grid);
    const Source src = build_excitation_source(exc, model, basis, grid);
    const GridFunction kappa = kappa_profile(cfg.kappa, cfg.kappa_scale, basis);
    const WesterveltSolution sol = solve_westervelt(kappa, src, model, basis, grid);
    const ModalTrajectory& u = sol.trajectory;

    std::vector<std::string> cols = {"t"};
    for (int j = 1; j <= basis.n_modes(); ++j) cols.push_back("u_" + std::to_string(j));
    Csv traj(run, "trajectory.csv", cols);
    for (int i = 0; i < grid.n_nodes(); ++i) {
        std::vector<double> r = {grid.time(i)};
        for (int j = 0; j < basis.n_modes(); ++j) r.push_back(u.u(i, j));
        traj.row(r);
    }

    const ObservationTrace h = observe(u, cfg.x0);
    const double fx0 = project(basis, exc.f).dot(basis.eigenfunctions_at(cfg.x0));
    Csv trace(run, "trace.csv", {"t", "h", "f_x0_chi"});
    double deviation = 0.0;
    for (int i = 0; i < grid.n_nodes(); ++i) {
        const double ref = fx0 * chi_value(exc.chi, grid.time(i));
        trace.row({grid.time(i), h.values[i], ref});
        deviation = std::max(deviation, std::abs(h.values[i] - ref));
    }

    const std::vector<double> energy = energy_history(u, basis, model.c);
    Csv en(run, "energy.csv", {"t", "energy"});
    for (int i = 0; i < grid.n_nodes(); ++i) en.row({grid.time(i), energy[i]});

    const GridFunction final_u = synthesize(basis, u.u.row(grid.n_steps()).transpose());
    Csv snap(run, "snapshot.csv", {"x", "u_final", "kappa"});
    for (int i = 0; i < basis.n_nodes(); ++i) snap.row({basis.grid()[i], final_u[i], kappa[i]});

    write_json(run, "summary.json",
               {{"model", describe(model)},
                {"iterations", sol.iterations},
                {"increments", sol.increments},
                {"trace_final", h.values.back()},
                {"max_deviation_from_f_chi", deviation}});
}

void cmd_poles(const Run& run) {
    const ExperimentConfig& cfg = run.cfg;
    const bool fz = cfg.damping == "fz";
    const SpectralBasis basis = basis_of(cfg);
    const std::vector<double> alphas =
        cfg.sweep_alpha.empty() ? std::vector<double>{fz ? cfg.alpha1 : cfg.alpha} : cfg.sweep_alpha;
    const std::vector<double> cs = cfg.sweep_c.empty() ? std::vector<double>{cfg.c} : cfg.sweep_c;

    Csv csv(run, "poles.csv",
            {"c", "alpha", "delta", "mode", "lambda", "re", "im", "residue_re", "residue_im", "multiplicity",
             "newton_residual",
             "certificate", "found_in_contour"});
    json combos = json::array();
    for (double c : cs) {
        for (double alpha : alphas) {
            std::vector<double> deltas = {0.0};
            if (fz) {
                deltas = cfg.sweep_delta.empty() ? std::vector<double>{cfg.b1 - c * c * cfg.b2} : cfg.sweep_delta;
            }
            for (double delta : deltas) {
                ExperimentConfig one = cfg;
                one.c = c;
                if (fz) {
                    if (!cfg.sweep_alpha.empty()) one.alpha1 = one.alpha2 = alpha;
                    one.b1 = delta + c * c * cfg.b2;
                } else {
                    one.alpha = alpha;
                }
                const AcousticModel model = model_of(one);
                validate(model);
                double max_re = -INFINITY;
                int count = 0;
                for (int j = 0; j < basis.n_modes(); ++j) {
                    const Symbol sym{model, basis.lambda(j)};
                    const PoleSet ps = find_poles(sym);
                    for (const Pole& p : ps.poles) {
                        const Complex r = p.residue_w;
                        csv.row({c, alpha, fz ? delta : NAN, static_cast<double>(j + 1), ps.lambda, p.s.real(),
                                 p.s.imag(), r.real(), r.imag(), static_cast<double>(p.multiplicity),
                                 p.newton_residual,
                                 static_cast<double>(ps.branch_count_certificate),
                                 static_cast<double>(ps.found_in_contour)});
                        max_re = std::max(max_re, p.s.real());
                        ++count;
                    }
                }
                json entry = {{"c", c}, {"alpha", alpha}, {"max_re", max_re}, {"n_poles", count},
                              {"model", describe(model)}};
                if (fz) entry["delta"] = delta;
                combos.push_back(entry);
            }
        }
    }
    write_json(run, "summary.json", {{"n_modes", basis.n_modes()}, {"sweeps", combos}});
}

void cmd_invert_linear(const Run& run) {
    const ExperimentConfig& cfg = run.cfg;
    const AcousticModel model = model_of(cfg);
    const SpectralBasis basis = basis_of(cfg);
    const TimeGrid grid = grid_of(cfg);
    const Excitation exc = excitation_of(cfg, basis);
    validate_excitation(exc, basis, grid);
    const GridFunction truth = kappa_profile(cfg.dkappa, cfg.dkappa_scale, basis);
    const ObservationTrace h = synthesize_trace(truth, exc, model, basis, grid, cfg.x0);
    std::vector<PoleSet> poles;
    for (int j = 0; j < cfg.n_modes_fit; ++j) poles.push_back(find_poles({model, basis.lambda(j)}));
    FitOptions fit;
    fit.t_min = cfg.fit_t_min;
    const ResidueData rd = extract_residues(h, poles, cfg.n_modes_fit, fit);
    const Recovery rec = recover_coefficients(rd, exc, basis, cfg.x0);
    const ModalVector exact = modal_loads(truth, exc, basis);

    Csv trace(run, "trace.csv", {"t", "h"});
    for (int i = 0; i < grid.n_nodes(); ++i) trace.row({grid.time(i), h.values[i]});
    Csv res(run, "residues.csv", {"mode", "pole_re", "pole_im", "residue_re", "residue_im", "coefficient",
                                  "coefficient_exact"});
    for (const ModeResidue& e : rd.entries) {
        res.row({static_cast<double>(e.mode + 1), e.pole.real(), e.pole.imag(), e.residue.real(), e.residue.imag(),
                 rec.coefficients[e.mode], exact[e.mode]});
    }
    Csv dk(run, "dkappa.csv", {"x", "truth", "recovered", "mask"});
    for (int i = 0; i < basis.n_nodes(); ++i) {
        dk.row({basis.grid()[i], truth[i], rec.dkappa[i], rec.mask[i] ? 1.0 : 0.0});
    }
    std::vector<double> coeffs(rec.coefficients.data(), rec.coefficients.data() + cfg.n_modes_fit);
    std::vector<double> exact_c(exact.data(), exact.data() + cfg.n_modes_fit);
    write_json(run, "summary.json",
               {{"model", describe(model)},
                {"n_modes_fit", cfg.n_modes_fit},
                {"masked_relative_error", finite_or_null(masked_relative_error(rec, truth, basis))},
                {"condition_number", finite_or_null(rd.condition_number)},
                {"fit_residual", rd.fit_residual},
                {"constant", rd.constant},
                {"imag_relative", rec.imag_relative},
                {"coefficients", coeffs},
                {"coefficients_exact", exact_c},
                {"warning", rd.warning}});
}

ReconstructionProblem problem_of(const ExperimentConfig& cfg) {
    const SpectralBasis basis = basis_of(cfg);
    return make_problem(model_of(cfg), basis, grid_of(cfg), excitation_of(cfg, basis), cfg.x0, cfg.n_samples,
                        cfg.n_basis);
}

void write_iterates(const Run& run, const std::string& name, const std::vector<Eigen::VectorXd>& its,
                    const std::vector<double>& misfit) {
    std::vector<std::string> cols = {"iteration", "misfit"};
    const int n = its.empty() ? 0 : static_cast<int>(its.front().size());
    for (int k = 0; k < n; ++k) cols.push_back("c_" + std::to_string(k));
    Csv csv(run, name, cols);
    for (std::size_t i = 0; i < its.size(); ++i) {
        std::vector<double> r = {static_cast<double>(i), misfit[i]};
        for (int k = 0; k < n; ++k) r.push_back(its[i][k]);
        csv.row(r);
    }
}

void cmd_reconstruct(const Run& run) {
    const ExperimentConfig& cfg = run.cfg;
    const ReconstructionProblem p = problem_of(cfg);
    const GridFunction truth = kappa_profile(cfg.truth, cfg.truth_scale, p.basis);
    const Eigen::MatrixXd J = assemble_jacobian(p, Eigen::VectorXd::Zero(cfg.n_basis), run.jobs);
    json rows = json::array();
    for (std::size_t level = 0; level < cfg.noise_levels.size(); ++level) {
        const std::string tag = std::to_string(level);
        std::vector<Eigen::VectorXd> its;
        std::vector<double> misfit;
        NewtonOptions opts = newton_options_of(cfg);
        opts.jobs = run.jobs;
        opts.on_accept = [&](const Eigen::VectorXd& k, double m) {
            its.push_back(k);
            misfit.push_back(m);
        };
        TwinExperiment tw;
        try {
            tw = run_twin_experiment(p, truth, cfg.noise_levels[level], cfg.seed, J, opts);
        } catch (const Error&) {
            write_iterates(run, "iterates_" + tag + ".csv", its, misfit);
            throw;
        }
        write_iterates(run, "iterates_" + tag + ".csv", its, misfit);

        Csv data(run, "data_" + tag + ".csv", {"t", "noisy", "smoothed"});
        for (std::size_t i = 0; i < p.times.size(); ++i) {
            data.row({p.times[i], tw.data.values[i], tw.smoothed.at_samples[i]});
        }
        const GridFunction k = p.chapeau.to_grid(tw.state.kappa_coeffs, p.basis);
        Csv kap(run, "kappa_" + tag + ".csv", {"x", "truth", "reconstruction"});
        for (int i = 0; i < p.basis.n_nodes(); ++i) kap.row({p.basis.grid()[i], truth[i], k[i]});

        const KappaError all = kappa_error(p, tw.state.kappa_coeffs, truth);
        const KappaError window = kappa_error(p, tw.state.kappa_coeffs, truth, 0.3, 1.0);
        rows.push_back({{"noise_level", cfg.noise_levels[level]},
                        {"linf", all.linf},
                        {"l2", all.l2},
                        {"rel_l2_window_0.3_1", window.rel_l2},
                        {"stop_reason", to_string(tw.state.stop_reason)},
                        {"iterations", tw.state.history.size() - 1},
                        {"delta", tw.delta},
                        {"final_misfit", tw.state.history.back()},
                        {"smoothing_mu", tw.smoothed.mu}});
    }
    write_json(run, "summary.json", {{"model", describe(p.model)}, {"truth", cfg.truth}, {"runs", rows}});
}

void cmd_svd(const Run& run) {
    const ExperimentConfig& cfg = run.cfg;
    if (cfg.damping != "cwch") throw SpecificationError("svd sweeps over alpha need model.damping = cwch");
    const std::vector<double> alphas = cfg.sweep_alpha.empty() ? std::vector<double>{cfg.alpha} : cfg.sweep_alpha;
    const std::vector<double> cs = cfg.sweep_c.empty() ? std::vector<double>{cfg.c} : cfg.sweep_c;
    Csv csv(run, "singular_values.csv", {"alpha", "c", "n", "sigma", "sigma_over_sigma1"});
    json combos = json::array();
    for (double alpha : alphas) {
        for (double c : cs) {
            ExperimentConfig one = cfg;
            one.alpha = alpha;
            one.c = c;
            validate(one);
            const ReconstructionProblem p = problem_of(one);
            const Eigen::VectorXd sv = svd_analysis(assemble_jacobian(p, Eigen::VectorXd::Zero(cfg.n_basis), run.jobs));
            for (int n = 0; n < sv.size(); ++n) csv.row({alpha, c, static_cast<double>(n + 1), sv[n], sv[n] / sv[0]});
            combos.push_back({{"alpha", alpha}, {"c", c}, {"sigma_1", sv[0]}, {"sigma_min", sv[sv.size() - 1]}});
        }
    }
    write_json(run, "summary.json", {{"sweeps", combos}});
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Fractionally damped Westervelt simulation, pole analysis and coefficient reconstruction",
                 "fracwave"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    int jobs = 1;
    std::uint64_t seed = 0;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"simulate", "solve the Westervelt equation and write trajectory, trace and energy"},
        {"poles", "locate and certify the poles of the relaxation symbols"},
        {"invert-linear", "residue inversion of the linearised trace"},
        {"reconstruct", "frozen Newton reconstruction of kappa from noisy synthetic data"},
        {"svd", "singular values of the frozen Jacobian"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
        sub->add_option("--jobs", jobs, "worker threads for Jacobian assembly")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "noise seed (overrides reconstruction.seed)");
        subs.push_back(sub);
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ValidationFailure;
    }

    Run run;
    for (CLI::App* sub : subs) {
        if (sub->parsed()) run.command = sub->get_name();
    }
    try {
        run.cfg = load_config(config_path);
        for (CLI::App* sub : subs) {
            if (sub->parsed() && sub->count("--seed")) run.cfg.seed = seed;
        }
        if (!out_dir.empty()) run.cfg.out_dir = out_dir;
        validate(run.cfg);
        run.jobs = jobs;
        run.out = run.cfg.out_dir;
        run.hash = hash_hex(config_hash(run.cfg));
        fs::create_directories(run.out);
        if (run.command == "simulate") cmd_simulate(run);
        else if (run.command == "poles") cmd_poles(run);
        else if (run.command == "invert-linear") cmd_invert_linear(run);
        else if (run.command == "reconstruct") cmd_reconstruct(run);
        else cmd_svd(run);
    } catch (const ValidationError& e) {
        std::cerr << "fracwave " << run.command << ": validation failure: " << e.what() << "\n";
        return ValidationFailure;
    } catch (const NumericalError& e) {
        std::cerr << "fracwave " << run.command << ": numerical failure: " << e.what() << "\n";
        return NumericalFailure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "fracwave " << run.command << ": " << e.what() << "\n";
        return ValidationFailure;
    } catch (const std::exception& e) {
        std::cerr << "fracwave " << run.command << ": numerical failure: " << e.what() << "\n";
        return NumericalFailure;
    }
    return Ok;
}

}  // namespace fracwave::cli
