#include "fracwave/recon.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

struct Spline {
    std::vector<double> t;
    Eigen::VectorXd g;
    /// Second derivatives at the knots, zero at both ends.
    Eigen::VectorXd gamma;

    double operator()(double x) const {
        const int n = static_cast<int>(t.size());
        if (x <= t[0]) {
            const double h = t[1] - t[0];
            const double slope = (g[1] - g[0]) / h - h * gamma[1] / 6.0;
            return g[0] + slope * (x - t[0]);
        }
        if (x >= t[n - 1]) {
            const double h = t[n - 1] - t[n - 2];
            const double slope = (g[n - 1] - g[n - 2]) / h + h * gamma[n - 2] / 6.0;
            return g[n - 1] + slope * (x - t[n - 1]);
        }
        const int i = static_cast<int>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
        const double h = t[i + 1] - t[i];
        const double a = x - t[i], b = t[i + 1] - x;
        return (a * g[i + 1] + b * g[i]) / h -
               a * b / 6.0 * ((1.0 + a / h) * gamma[i + 1] + (1.0 + b / h) * gamma[i]);
    }
};

/// Reinsch form: (R + mu Q^T Q) gamma = Q^T y, g = y - mu Q gamma.
class SplineSmoother {
public:
    SplineSmoother(std::vector<double> t, const std::vector<double>& y)
        : t_(std::move(t)), y_(Eigen::Map<const Eigen::VectorXd>(y.data(), y.size())) {
        const int n = static_cast<int>(t_.size());
        Q_ = Eigen::MatrixXd::Zero(n, n - 2);
        R_ = Eigen::MatrixXd::Zero(n - 2, n - 2);
        for (int j = 1; j < n - 1; ++j) {
            const double h0 = t_[j] - t_[j - 1], h1 = t_[j + 1] - t_[j];
            Q_(j - 1, j - 1) = 1.0 / h0;
            Q_(j, j - 1) = -1.0 / h0 - 1.0 / h1;
            Q_(j + 1, j - 1) = 1.0 / h1;
            R_(j - 1, j - 1) = (h0 + h1) / 3.0;
            if (j < n - 2) R_(j - 1, j) = R_(j, j - 1) = h1 / 6.0;
        }
        QtQ_ = Q_.transpose() * Q_;
        Qty_ = Q_.transpose() * y_;
    }

    Spline fit(double mu) const {
        const Eigen::VectorXd inner = (R_ + mu * QtQ_).ldlt().solve(Qty_);
        Spline s{t_, y_ - mu * Q_ * inner, Eigen::VectorXd::Zero(y_.size())};
        s.gamma.segment(1, inner.size()) = inner;
        return s;
    }

    double misfit(const Spline& s) const { return (s.g - y_).squaredNorm(); }

private:
    std::vector<double> t_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd Q_, R_, QtQ_;
    Eigen::VectorXd Qty_;
};

double uniform_pm1(std::mt19937_64& rng) {
    return 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
}

[[noreturn]] void rethrow_with_column(int k) {
    const std::string where = "Jacobian column " + std::to_string(k) + ": ";
    try {
        throw;
    } catch (const BlowUpError& e) {
        throw BlowUpError(where + e.what());
    } catch (const NonContractionError& e) {
        throw NonContractionError(where + e.what());
    } catch (const DivergenceError& e) {
        throw DivergenceError(where + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(where + e.what());
    } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
    }
}

/// Solves (J^T J + gamma I) s = b with iterative refinement against an
/// extended-precision residual; returns the relative residual.
double regularized_solve(const Eigen::MatrixXd& JtJ, double gamma, const Eigen::VectorXd& b,
                         Eigen::VectorXd& s) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const Eigen::MatrixXd A = JtJ + gamma * Eigen::MatrixXd::Identity(JtJ.rows(), JtJ.cols());
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    const LMat Al = A.cast<long double>();
    const LVec bl = b.cast<long double>();
    s = ldlt.solve(b);
    const long double bnorm = bl.norm();
    long double rel = 0.0L;
    for (int it = 0; it < 4; ++it) {
        const LVec r = bl - Al * s.cast<long double>();
        rel = bnorm > 0.0L ? r.norm() / bnorm : r.norm();
        if (rel <= 1e-14L) break;
        s += ldlt.solve(r.cast<double>());
    }
    return static_cast<double>(rel);
}

}  // namespace

std::vector<double> sample_times(double t_final, int n) {
    if (n < 10) throw DomainError("n_samples must be at least 10, got " + std::to_string(n));
    if (!(t_final > 0.0)) throw DomainError("final time must be positive");
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = t_final * (i + 1) / n;
    return t;
}

double interpolate(const ObservationTrace& h, double t) {
    const TimeGrid& g = h.grid;
    if (!(t >= 0.0 && t <= g.t_final() * (1.0 + 1e-14))) {
        throw DomainError("interpolation time outside the trace window");
    }
    const double pos = std::min(t / g.dt(), static_cast<double>(g.n_steps()));
    const int i = std::min(static_cast<int>(pos), g.n_steps() - 1);
    const double w = pos - i;
    return (1.0 - w) * h.values[i] + w * h.values[i + 1];
}

std::vector<double> sample(const ObservationTrace& h, const std::vector<double>& times) {
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) out.push_back(interpolate(h, t));
    return out;
}

NoisyData add_noise(const std::vector<double>& times, const std::vector<double>& clean,
                    double noise_level, std::uint64_t seed) {
    if (times.size() != clean.size()) throw ShapeError("sample times and values differ in length");
    if (!(noise_level >= 0.0)) throw DomainError("noise_level must be non-negative");
    double amp = 0.0;
    for (double v : clean) amp = std::max(amp, std::abs(v));
    amp *= noise_level;
    std::mt19937_64 rng(seed);
    NoisyData out{times, clean, noise_level};
    for (double& v : out.values) v += amp * uniform_pm1(rng);
    return out;
}

double estimate_noise_std(const NoisyData& data) {
    const auto& y = data.values;
    const int n = static_cast<int>(y.size());
    double acc = 0.0;
    for (int i = 1; i + 1 < n; ++i) acc += std::pow(y[i - 1] - 2.0 * y[i] + y[i + 1], 2);
    return std::sqrt(acc / (6.0 * (n - 2)));
}

SmoothingResult smooth_trace(const NoisyData& raw, const TimeGrid& grid,
                             const SmoothingOptions& options) {
    const int n = static_cast<int>(raw.times.size());
    if (n < 10) throw DomainError("smoothing needs at least 10 samples, got " + std::to_string(n));
    if (static_cast<int>(raw.values.size()) != n) throw ShapeError("sample times and values differ in length");
    for (int i = 1; i < n; ++i) {
        if (!(raw.times[i] > raw.times[i - 1])) throw DomainError("sample times must increase");
    }
    if (!(raw.noise_level >= 0.0)) throw DomainError("noise_level must be non-negative");

    SmoothingResult out;
    double ymax = 0.0;
    for (double v : raw.values) ymax = std::max(ymax, std::abs(v));
    out.noise_std = options.estimate_noise ? estimate_noise_std(raw)
                                           : raw.noise_level * ymax / std::sqrt(3.0);
    out.target_misfit = n * out.noise_std * out.noise_std;

    const SplineSmoother smoother(raw.times, raw.values);
    Spline best = smoother.fit(0.0);
    if (out.target_misfit > 0.0) {
        double lo = -30.0, hi = 30.0;
        const Spline widest = smoother.fit(std::pow(10.0, hi));
        if (smoother.misfit(widest) <= out.target_misfit) {
            best = widest;
            out.mu = std::pow(10.0, hi);
            out.warning = "noise estimate exceeds the misfit of the linear fit";
        } else {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                best = smoother.fit(std::pow(10.0, mid));
                out.mu = std::pow(10.0, mid);
                const double m = smoother.misfit(best);
                if (std::abs(m / out.target_misfit - 1.0) <= options.misfit_rtol) break;
                (m < out.target_misfit ? lo : hi) = mid;
            }
        }
    } else if (std::all_of(raw.values.begin(), raw.values.end(),
                           [&](double v) { return v == raw.values[0]; })) {
        out.warning = "constant samples with zero noise estimate; returning the interpolant";
    }
    out.misfit = smoother.misfit(best);

    out.trace = {0.0, grid, {}};
    out.trace.values.reserve(grid.n_nodes());
    for (int i = 0; i < grid.n_nodes(); ++i) out.trace.values.push_back(best(grid.time(i)));
    for (double t : raw.times) out.at_samples.push_back(best(t));
    return out;
}

ChapeauBasis::ChapeauBasis(int n_basis) : n_(n_basis) {
    if (n_basis < 2) throw DomainError("chapeau basis needs at least 2 functions");
}

double ChapeauBasis::eval(int k, double x) const {
    const double h = 1.0 / (n_ - 1);
    return std::max(0.0, 1.0 - std::abs(x - node(k)) / h);
}

Eigen::MatrixXd ChapeauBasis::matrix(const SpectralBasis& basis) const {
    Eigen::MatrixXd m(basis.n_nodes(), n_);
    for (int i = 0; i < basis.n_nodes(); ++i) {
        for (int k = 0; k < n_; ++k) m(i, k) = eval(k, basis.grid()[i]);
    }
    return m;
}

GridFunction ChapeauBasis::to_grid(const Eigen::VectorXd& coeffs, const SpectralBasis& basis) const {
    if (coeffs.size() != n_) throw ShapeError("chapeau coefficients do not match the basis");
    return matrix(basis) * coeffs;
}

Eigen::VectorXd ChapeauBasis::interpolate(const GridFunction& g, const SpectralBasis& basis) const {
    const Eigen::VectorXd& x = basis.grid();
    Eigen::VectorXd out(n_);
    for (int k = 0; k < n_; ++k) {
        const double xk = node(k);
        const int i = std::min(static_cast<int>(std::upper_bound(x.data(), x.data() + x.size(), xk) - x.data()),
                               static_cast<int>(x.size()) - 1);
        const int j = std::max(i - 1, 0);
        const double w = i == j ? 0.0 : (xk - x[j]) / (x[i] - x[j]);
        out[k] = (1.0 - w) * g[j] + w * g[i];
    }
    return out;
}

ReconstructionProblem make_problem(const AcousticModel& model, const SpectralBasis& basis,
                                   const TimeGrid& grid, const Excitation& excitation, double x0,
                                   int n_samples, int n_basis) {
    validate(model);
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("observation point must lie in [0, 1]");
    validate_excitation(excitation, basis, grid);
    return {model,
            basis,
            grid,
            excitation,
            build_excitation_source(excitation, model, basis, grid),
            x0,
            sample_times(grid.t_final(), n_samples),
            ChapeauBasis(n_basis),
            {}};
}

Eigen::VectorXd forward_map(const ReconstructionProblem& p, const Eigen::VectorXd& coeffs) {
    const GridFunction kappa = p.chapeau.to_grid(coeffs, p.basis);
    const WesterveltSolution sol =
        solve_westervelt(kappa, p.source, p.model, p.basis, p.grid, p.fixed_point);
    const std::vector<double> v = sample(observe(sol.trajectory, p.x0), p.times);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

Eigen::MatrixXd assemble_jacobian(const ReconstructionProblem& p, const Eigen::VectorXd& kappa0,
                                  int jobs) {
    if (jobs < 1) throw DomainError("jobs must be at least 1");
    const GridFunction k0 = p.chapeau.to_grid(kappa0, p.basis);
    const ModalTrajectory u =
        solve_westervelt(k0, p.source, p.model, p.basis, p.grid, p.fixed_point).trajectory;
    const Eigen::MatrixXd eta = p.chapeau.matrix(p.basis);
    const int n = p.chapeau.size();
    Eigen::MatrixXd J(p.times.size(), n);
    std::vector<std::exception_ptr> errors(n);
    auto column = [&](int k) {
        try {
            const ModalTrajectory z =
                solve_linearized(k0, u, eta.col(k), p.model, p.basis, p.grid);
            const std::vector<double> v = sample(observe(z, p.x0), p.times);
            J.col(k) = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const int workers = std::min(jobs, n);
    if (workers == 1) {
        for (int k = 0; k < n; ++k) column(k);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (int k = w; k < n; k += workers) column(k);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (int k = 0; k < n; ++k) {
        if (!errors[k]) continue;
        try {
            std::rethrow_exception(errors[k]);
        } catch (...) {
            rethrow_with_column(k);
        }
    }
    return J;
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::Discrepancy: return "discrepancy";
        case StopReason::MaxIter: return "max_iter";
        case StopReason::Stagnation: return "stagnation";
    }
    return "unknown";
}

ReconstructionState frozen_newton(const ReconstructionProblem& p, const Eigen::VectorXd& data,
                                  double delta, const Eigen::MatrixXd& J,
                                  const NewtonOptions& options, const Eigen::VectorXd& kappa0) {
    const int n = p.chapeau.size();
    if (data.size() != static_cast<int>(p.times.size())) throw ShapeError("data do not match sample times");
    if (J.rows() != data.size() || J.cols() != n) throw ShapeError("Jacobian shape does not match the problem");
    if (!(delta >= 0.0)) throw DomainError("noise level delta must be non-negative");
    if (!(options.tau > 1.0)) throw DomainError("tau must exceed 1");
    if (!(options.gamma0 > 0.0 && options.gamma_decay > 0.0 && options.gamma_decay <= 1.0)) {
        throw DomainError("gamma schedule needs gamma0 > 0 and 0 < gamma_decay <= 1");
    }
    if (options.max_iter < 0 || options.max_backtrack < 0) throw DomainError("iteration limits must be non-negative");

    ReconstructionState st;
    st.kappa_coeffs = kappa0.size() == 0 ? Eigen::VectorXd::Zero(n) : kappa0;
    if (st.kappa_coeffs.size() != n) throw ShapeError("initial coefficients do not match the basis");
    st.J = J;
    Eigen::MatrixXd JtJ = J.transpose() * J;
    Eigen::VectorXd residual = data - forward_map(p, st.kappa_coeffs);
    st.history.push_back(residual.norm());
    st.iterates.push_back(st.kappa_coeffs);
    if (options.on_accept) options.on_accept(st.kappa_coeffs, st.history.back());

    for (int k = 0;; ++k) {
        if (st.history.back() <= options.tau * delta) {
            st.stop_reason = StopReason::Discrepancy;
            return st;
        }
        if (k == options.max_iter) {
            st.stop_reason = StopReason::MaxIter;
            return st;
        }
        st.gamma = std::max(options.gamma0 * std::pow(options.gamma_decay, k), options.gamma_floor);
        Eigen::VectorXd step;
        st.normal_residual = regularized_solve(JtJ, st.gamma, st.J.transpose() * residual, step);
        if (step.norm() <= options.stagnation_tol) {
            st.stop_reason = StopReason::Stagnation;
            return st;
        }
        bool accepted = false, any_solved = false;
        std::string last_error;
        double theta = 1.0;
        for (int b = 0; b <= options.max_backtrack && !accepted; ++b, theta *= 0.5) {
            const Eigen::VectorXd trial = st.kappa_coeffs + theta * step;
            try {
                const Eigen::VectorXd r = data - forward_map(p, trial);
                any_solved = true;
                if (r.norm() <= st.history.back()) {
                    st.kappa_coeffs = trial;
                    residual = r;
                    accepted = true;
                }
            } catch (const NumericalError& e) {
                last_error = e.what();
            }
        }
        if (!accepted) {
            if (!any_solved) {
                throw DegenerateError("frozen Newton step " + std::to_string(k + 1) +
                                      " failed in the forward solver after " +
                                      std::to_string(options.max_backtrack) +
                                      " halvings: " + last_error);
            }
            st.stop_reason = StopReason::Stagnation;
            return st;
        }
        st.history.push_back(residual.norm());
        st.iterates.push_back(st.kappa_coeffs);
        if (options.on_accept) options.on_accept(st.kappa_coeffs, st.history.back());
        if (options.refreeze_every > 0 && (k + 1) % options.refreeze_every == 0) {
            st.J = assemble_jacobian(p, st.kappa_coeffs, options.jobs);
            JtJ = st.J.transpose() * st.J;
        }
    }
}

Eigen::VectorXd svd_analysis(const Eigen::MatrixXd& J) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(J).singularValues();
}

KappaError kappa_error(const ReconstructionProblem& p, const Eigen::VectorXd& coeffs,
                       const GridFunction& truth, double x_lo, double x_hi) {
    if (truth.size() != p.basis.n_nodes()) throw ShapeError("reference does not match grid");
    const GridFunction k = p.chapeau.to_grid(coeffs, p.basis);
    KappaError e;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < p.basis.n_nodes(); ++i) {
        const double x = p.basis.grid()[i];
        if (x < x_lo || x > x_hi) continue;
        const double w = p.basis.weights()[i];
        const double d = k[i] - truth[i];
        e.linf = std::max(e.linf, std::abs(d));
        num += w * d * d;
        den += w * truth[i] * truth[i];
    }
    e.l2 = std::sqrt(num);
    e.rel_l2 = den > 0.0 ? std::sqrt(num / den) : e.l2;
    return e;
}

TwinExperiment run_twin_experiment(const ReconstructionProblem& p, const GridFunction& truth,
                                   double noise_level, std::uint64_t seed,
                                   const Eigen::MatrixXd& J, const NewtonOptions& options) {
    const WesterveltSolution sol =
        solve_westervelt(truth, p.source, p.model, p.basis, p.grid, p.fixed_point);
    TwinExperiment out;
    out.data = add_noise(p.times, sample(observe(sol.trajectory, p.x0), p.times), noise_level, seed);
    out.smoothed = smooth_trace(out.data, p.grid);
    out.delta = std::sqrt(out.smoothed.target_misfit);
    const Eigen::Map<const Eigen::VectorXd> g(out.smoothed.at_samples.data(),
                                              out.smoothed.at_samples.size());
    out.state = frozen_newton(p, g, out.delta, J, options);
    return out;
}

}  // namespace fracwave
