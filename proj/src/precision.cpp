#include "subsense/precision.hpp"

#include <cmath>

#include "subsense/core.hpp"
#include "subsense/errors.hpp"

namespace subsense {

namespace {

constexpr double kHbar = 1.054571817e-34;

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(what) + " must be positive and finite");
}

}  // namespace

void PrecisionInputs::validate() const {
    require_positive(gamma_sub, "gamma_sub");
    require_positive(gamma_0, "gamma_0");
    require_positive(omega_0, "omega_0");
    require_positive(atoms, "atom count");
    require_positive(excitation, "excitation probability");
    require_positive(tau, "measurement time");
    require_positive(efficiency, "detection efficiency");
    require_positive(contrast, "contrast");
    if (excitation > 0.1) throw ValidationError("excitation probability above 0.1 leaves the linear-response regime");
}

const std::vector<PrecisionPreset>& precision_presets() {
    static const std::vector<PrecisionPreset> presets{
        {"rb-d2", "87Rb D2 line, 780 nm", kTwoPi * 6.0666e6, kTwoPi * 384.2305e12},
        {"sr-clock", "88Sr 1S0-3P0 class, 698 nm, millihertz natural width", kTwoPi * 1e-3, kTwoPi * 429.228e12},
    };
    return presets;
}

const PrecisionPreset& precision_preset(std::string_view name) {
    for (const auto& p : precision_presets())
        if (p.name == name) return p;
    throw ValidationError("unknown precision preset '" + std::string(name) + "'");
}

double frequency_uncertainty(const PrecisionInputs& in) {
    in.validate();
    return in.gamma_sub / (in.contrast * std::sqrt(in.efficiency * in.excitation * in.atoms * in.gamma_0 * in.tau));
}

double fractional_precision(const PrecisionInputs& in) { return frequency_uncertainty(in) / in.omega_0; }

double incident_power_estimate(const PrecisionInputs& in) {
    in.validate();
    return in.excitation * in.atoms * kHbar * in.omega_0 * in.gamma_0;
}

PrecisionReport precision_report(const PrecisionInputs& in) {
    PrecisionReport r;
    r.inputs = in;
    r.delta_omega = frequency_uncertainty(in);
    r.fractional = r.delta_omega / in.omega_0;
    r.power = incident_power_estimate(in);
    return r;
}

}  // namespace subsense
