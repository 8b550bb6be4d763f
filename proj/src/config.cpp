#include "fracwave/config.hpp"

#include <CLI11.hpp>
#include <climits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double to_double(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw SpecificationError(key + ": expected a number, got '" + s + "'");
    return v;
}

template <class T>
T to_integer(const std::string& key, const std::string& s) {
    std::size_t pos = 0;
    T v = 0;
    try {
        if constexpr (std::is_signed_v<T>) {
            v = std::stoll(s, &pos);
        } else {
            if (!s.empty() && s.front() == '-') throw DomainError(key + ": must be non-negative");
            v = std::stoull(s, &pos);
        }
    } catch (const DomainError&) {
        throw;
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw SpecificationError(key + ": expected an integer, got '" + s + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw SpecificationError(key + ": expected true or false, got '" + s + "'");
}

using Inputs = std::vector<std::string>;

const std::string& single(const std::string& key, const Inputs& in) {
    if (in.size() != 1) throw SpecificationError(key + ": expected a single value");
    return in.front();
}

/// Field table shared by the parser and the canonical dump.
struct Field {
    std::string key;
    std::function<void(ExperimentConfig&, const std::string&, const Inputs&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
    bool hashed = true;
};

template <class T>
Field number(const std::string& key, T ExperimentConfig::*m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& k, const Inputs& in) {
                if constexpr (std::is_same_v<T, double>) {
                    c.*m = to_double(k, single(k, in));
                } else if constexpr (std::is_same_v<T, int>) {
                    const long long v = to_integer<long long>(k, single(k, in));
                    if (v < INT_MIN || v > INT_MAX) throw DomainError(k + ": value out of range");
                    c.*m = static_cast<int>(v);
                } else {
                    c.*m = to_integer<T>(k, single(k, in));
                }
            },
            [m](const ExperimentConfig& c) {
                if constexpr (std::is_same_v<T, double>) return format17(c.*m);
                else return std::to_string(c.*m);
            }};
}

Field text(const std::string& key, std::string ExperimentConfig::*m) {
    return {key, [m](ExperimentConfig& c, const std::string& k, const Inputs& in) { c.*m = single(k, in); },
            [m](const ExperimentConfig& c) { return c.*m; }};
}

Field flag(const std::string& key, bool ExperimentConfig::*m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& k, const Inputs& in) { c.*m = to_bool(k, single(k, in)); },
            [m](const ExperimentConfig& c) { return std::string(c.*m ? "true" : "false"); }};
}

Field list(const std::string& key, std::vector<double> ExperimentConfig::*m) {
    return {key,
            [m](ExperimentConfig& c, const std::string& k, const Inputs& in) {
                (c.*m).clear();
                for (const auto& s : in) (c.*m).push_back(to_double(k, s));
            },
            [m](const ExperimentConfig& c) {
                std::string out = "[";
                for (std::size_t i = 0; i < (c.*m).size(); ++i) out += (i ? ", " : "") + format17((c.*m)[i]);
                return out + "]";
            }};
}

Field unhashed(Field f) {
    f.hashed = false;
    return f;
}

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> f = {
        text("model.damping", &C::damping),
        number("model.c", &C::c),
        number("model.b", &C::b),
        number("model.beta", &C::beta),
        number("model.alpha", &C::alpha),
        number("model.b1", &C::b1),
        number("model.b2", &C::b2),
        number("model.alpha1", &C::alpha1),
        number("model.alpha2", &C::alpha2),
        flag("model.allow_unphysical", &C::allow_unphysical),
        text("discretization.bc", &C::bc),
        number("discretization.n_modes", &C::n_modes),
        number("discretization.n_x", &C::n_x),
        number("discretization.n_steps", &C::n_steps),
        number("discretization.t_final", &C::t_final),
        text("excitation.profile", &C::profile),
        text("excitation.chi", &C::chi),
        number("observation.x0", &C::x0),
        number("observation.n_samples", &C::n_samples),
        text("forward.kappa", &C::kappa),
        number("forward.kappa_scale", &C::kappa_scale),
        number("inversion.n_modes_fit", &C::n_modes_fit),
        text("inversion.dkappa", &C::dkappa),
        number("inversion.dkappa_scale", &C::dkappa_scale),
        number("inversion.fit_t_min", &C::fit_t_min),
        number("reconstruction.n_basis", &C::n_basis),
        text("reconstruction.truth", &C::truth),
        number("reconstruction.truth_scale", &C::truth_scale),
        list("reconstruction.noise_levels", &C::noise_levels),
        number("reconstruction.seed", &C::seed),
        number("reconstruction.gamma0", &C::gamma0),
        number("reconstruction.gamma_decay", &C::gamma_decay),
        number("reconstruction.gamma_floor", &C::gamma_floor),
        number("reconstruction.tau", &C::tau),
        number("reconstruction.max_iter", &C::max_iter),
        list("sweep.alpha", &C::sweep_alpha),
        list("sweep.c", &C::sweep_c),
        list("sweep.delta", &C::sweep_delta),
        unhashed(text("output.dir", &C::out_dir)),
    };
    return f;
}

ExperimentConfig from_items(const std::vector<CLI::ConfigItem>& items) {
    std::map<std::string, const Field*> by_key;
    for (const auto& f : fields()) by_key[f.key] = &f;
    ExperimentConfig cfg;
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        const std::string key = item.fullname();
        const auto it = by_key.find(key);
        if (it == by_key.end()) throw SpecificationError("unknown config key '" + key + "'");
        it->second->set(cfg, key, item.inputs);
    }
    return cfg;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    std::istringstream in(text);
    try {
        return from_items(CLI::ConfigTOML().from_config(in));
    } catch (const CLI::Error& e) {
        throw SpecificationError(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecificationError("cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.damping != "cwch" && cfg.damping != "fz") {
        throw SpecificationError("model.damping must be cwch or fz, got '" + cfg.damping + "'");
    }
    validate(model_of(cfg));
    bc_of(cfg);
    require(cfg.n_modes >= 1, "discretization.n_modes must be >= 1");
    require(cfg.n_x >= 8 * cfg.n_modes, "discretization.n_x must be >= 8 n_modes");
    require(cfg.n_steps >= 2, "discretization.n_steps must be >= 2");
    require(std::isfinite(cfg.t_final) && cfg.t_final > 0.0, "discretization.t_final must be > 0");
    if (cfg.profile != "sin" && cfg.profile != "sin_half") {
        throw SpecificationError("excitation.profile must be sin or sin_half");
    }
    if (cfg.chi != "linear") throw SpecificationError("excitation.chi must be linear");
    require(cfg.x0 >= 0.0 && cfg.x0 <= 1.0, "observation.x0 must lie in [0, 1]");
    require(cfg.n_samples >= 10, "observation.n_samples must be >= 10");
    require(cfg.n_modes_fit >= 1 && cfg.n_modes_fit <= cfg.n_modes,
            "inversion.n_modes_fit must lie in [1, n_modes]");
    require(cfg.fit_t_min >= 0.0 && cfg.fit_t_min < cfg.t_final, "inversion.fit_t_min must lie in [0, t_final)");
    require(cfg.n_basis >= 2, "reconstruction.n_basis must be >= 2");
    require(!cfg.noise_levels.empty(), "reconstruction.noise_levels must not be empty");
    for (double v : cfg.noise_levels) require(v >= 0.0 && std::isfinite(v), "reconstruction.noise_levels must be >= 0");
    require(cfg.gamma0 > 0.0, "reconstruction.gamma0 must be > 0");
    require(cfg.gamma_decay > 0.0 && cfg.gamma_decay <= 1.0, "reconstruction.gamma_decay must lie in (0, 1]");
    require(cfg.gamma_floor >= 0.0, "reconstruction.gamma_floor must be >= 0");
    require(cfg.tau > 1.0, "reconstruction.tau must be > 1");
    require(cfg.max_iter >= 0, "reconstruction.max_iter must be >= 0");
    for (double a : cfg.sweep_alpha) require(a > 0.0 && a <= 1.0, "sweep.alpha entries must lie in (0, 1]");
    for (double c : cfg.sweep_c) require(c > 0.0 && std::isfinite(c), "sweep.c entries must be > 0");
    for (double d : cfg.sweep_delta) require(std::isfinite(d), "sweep.delta entries must be finite");
    for (const auto& name : {cfg.kappa, cfg.dkappa, cfg.truth}) {
        if (name != "zero" && name != "constant" && name != "ramp" && name != "quadratic" && name != "tent") {
            throw SpecificationError("unknown coefficient profile '" + name +
                                     "' (expected zero, constant, ramp, quadratic or tent)");
        }
    }
}

std::string canonical(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        if (f.hashed) out += f.key + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

AcousticModel model_of(const ExperimentConfig& cfg) {
    AcousticModel m{cfg.c, Cwch{cfg.b, cfg.beta, cfg.alpha}, cfg.allow_unphysical};
    if (cfg.damping == "fz") m.damping = FractionalZener{cfg.b1, cfg.b2, cfg.alpha1, cfg.alpha2};
    return m;
}

BoundaryConfig bc_of(const ExperimentConfig& cfg) {
    if (cfg.bc == "dirichlet_neumann" || cfg.bc == "dn") return BoundaryConfig::DirichletNeumann;
    if (cfg.bc == "dirichlet_dirichlet" || cfg.bc == "dd") return BoundaryConfig::DirichletDirichlet;
    throw SpecificationError("discretization.bc must be dirichlet_neumann or dirichlet_dirichlet");
}

SpectralBasis basis_of(const ExperimentConfig& cfg) { return build_basis(bc_of(cfg), cfg.n_modes, cfg.n_x); }

TimeGrid grid_of(const ExperimentConfig& cfg) { return TimeGrid(cfg.t_final, cfg.n_steps); }

Excitation excitation_of(const ExperimentConfig& cfg, const SpectralBasis& basis) {
    return {excitation_profile(cfg.profile, basis), {}};
}

NewtonOptions newton_options_of(const ExperimentConfig& cfg) {
    NewtonOptions o;
    o.gamma0 = cfg.gamma0;
    o.gamma_decay = cfg.gamma_decay;
    o.gamma_floor = cfg.gamma_floor;
    o.tau = cfg.tau;
    o.max_iter = cfg.max_iter;
    return o;
}

GridFunction kappa_profile(const std::string& name, double scale, const SpectralBasis& basis) {
    const Eigen::ArrayXd x = basis.grid().array();
    if (name == "zero") return GridFunction::Zero(x.size());
    if (name == "constant") return GridFunction::Constant(x.size(), scale);
    if (name == "ramp") return (scale * (2.0 * x - 1.0).max(0.0)).matrix();
    if (name == "quadratic") return (scale * x * (1.0 - x)).matrix();
    if (name == "tent") {
        return (scale * (0.25 + 0.75 * (1.0 - (x - 0.6).abs() / 0.3).max(0.0))).matrix();
    }
    throw SpecificationError("unknown coefficient profile '" + name + "'");
}

}  // namespace fracwave
