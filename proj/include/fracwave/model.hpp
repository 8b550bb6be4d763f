#pragma once

#include <string>
#include <variant>

namespace fracwave {

/// D = b A^beta d_t^alpha
struct Cwch {
    double b = 0.1;
    double beta = 1.0;
    double alpha = 0.5;
};

/// Fractional Zener: D = b1 A d_t^alpha1 + b2 d_t^(alpha2 + 2)
struct FractionalZener {
    double b1 = 0.1;
    double b2 = 0.1;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
};

using DampingModel = std::variant<Cwch, FractionalZener>;

/// Constant wave speed plus the damping law.
struct AcousticModel {
    double c = 1.0;
    DampingModel damping = Cwch{};
    /// Permit FZ with negative diffusivity b1 - c^2 b2.
    bool allow_unphysical = false;
};

/// delta = b1 - c^2 b2, the diffusivity of sound.
double diffusivity(const FractionalZener& fz, double c);

/// Throws ModelError naming the first violated invariant.
void validate(const AcousticModel& model);

bool is_fz(const AcousticModel& model);

std::string describe(const AcousticModel& model);

}  // namespace fracwave
