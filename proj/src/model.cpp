#include "fracwave/model.hpp"

#include <cmath>
#include <sstream>

#include "fracwave/error.hpp"

namespace fracwave {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ModelError(what);
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

double diffusivity(const FractionalZener& fz, double c) { return fz.b1 - c * c * fz.b2; }

bool is_fz(const AcousticModel& model) {
    return std::holds_alternative<FractionalZener>(model.damping);
}

void validate(const AcousticModel& model) {
    require(std::isfinite(model.c) && model.c > 0.0, "wave speed c must be > 0");
    std::visit(
        Overloaded{
            [](const Cwch& m) {
                require(std::isfinite(m.b) && m.b >= 0.0, "CWCH damping b must be >= 0");
                require(m.beta >= 0.0 && m.beta <= 1.0, "CWCH beta must lie in [0, 1]");
                require(m.alpha > 0.0 && m.alpha <= 1.0, "CWCH alpha must lie in (0, 1]");
            },
            [&](const FractionalZener& m) {
                require(std::isfinite(m.b1) && m.b1 >= 0.0, "FZ b1 must be >= 0");
                require(std::isfinite(m.b2) && m.b2 > 0.0, "FZ b2 must be > 0");
                require(m.alpha1 > 0.0 && m.alpha1 <= 1.0, "FZ alpha1 must lie in (0, 1]");
                require(m.alpha2 > 0.0 && m.alpha2 <= 1.0, "FZ alpha2 must lie in (0, 1]");
                require(m.alpha1 >= m.alpha2, "FZ requires alpha1 >= alpha2");
                require(model.allow_unphysical || diffusivity(m, model.c) >= 0.0,
                        "FZ requires b1 >= c^2 b2 (nonnegative diffusivity); "
                        "set allow_unphysical to override");
            },
        },
        model.damping);
}

std::string describe(const AcousticModel& model) {
    std::ostringstream os;
    os.precision(17);
    os << "c=" << model.c << ' ';
    std::visit(Overloaded{
                   [&](const Cwch& m) {
                       os << "cwch b=" << m.b << " beta=" << m.beta << " alpha=" << m.alpha;
                   },
                   [&](const FractionalZener& m) {
                       os << "fz b1=" << m.b1 << " b2=" << m.b2 << " alpha1=" << m.alpha1
                          << " alpha2=" << m.alpha2;
                   },
               },
               model.damping);
    return os.str();
}

}  // namespace fracwave
