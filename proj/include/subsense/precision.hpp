#pragma once

// Shot-noise frequency-uncertainty estimate for a transmission-locked clock.

#include <string>
#include <string_view>
#include <vector>

namespace subsense {

/// Rates in s^-1 (angular), time in s.
struct PrecisionInputs {
    double gamma_sub = 0.0;
    double gamma_0 = 0.0;
    double omega_0 = 0.0;
    double atoms = 1.0;
    double excitation = 0.01;  ///< max excitation probability per atom
    double tau = 1.0;
    double efficiency = 1.0;
    double contrast = 1.0;

    void validate() const;
};

struct PrecisionPreset {
    std::string name;
    std::string description;
    double gamma_0 = 0.0;
    double omega_0 = 0.0;
};

const std::vector<PrecisionPreset>& precision_presets();
/// Throws ValidationError for an unknown name.
const PrecisionPreset& precision_preset(std::string_view name);

inline constexpr std::string_view kPrecisionDisclaimer =
    "order-of-magnitude estimate (+/- 1 decade); shot-noise-limited detection assumed";

struct PrecisionReport {
    PrecisionInputs inputs;
    double delta_omega = 0.0;  ///< rad/s
    double fractional = 0.0;   ///< delta_omega / omega_0
    double power = 0.0;        ///< W, p N hbar omega_0 Gamma_0
    std::string disclaimer{kPrecisionDisclaimer};
};

double frequency_uncertainty(const PrecisionInputs& in);
double fractional_precision(const PrecisionInputs& in);
double incident_power_estimate(const PrecisionInputs& in);
PrecisionReport precision_report(const PrecisionInputs& in);

}  // namespace subsense
