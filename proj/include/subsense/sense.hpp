#pragma once

// Sensitivity of the transmittance to global and site-resolved perturbations.

#include <span>
#include <vector>

#include <Eigen/Core>

#include "subsense/modes.hpp"
#include "subsense/spectra.hpp"

namespace subsense {

enum class Wrt { Detunings, Positions };

/// dT/dDelta_L at one laser detuning.
double dT_dDelta(const Scene& scene, double laser_detuning);

struct SensitivityCurve {
    std::vector<double> grid;
    std::vector<double> S;  ///< |dT/dDelta_L|
    double argmax = 0.0;
    double max = 0.0;
};

SensitivityCurve sensitivity_curve(const Scene& scene, std::span<const double> grid);

struct SensitivitySearch {
    double tolerance = 1e-4;       ///< relative accuracy of S*
    double window_linewidths = 5.0;  ///< search window: every mode resonance +/- this many linewidths
    std::size_t uniform_points = 400;
};

struct MaxSensitivity {
    double detuning = 0.0;
    double value = 0.0;
};

/// Mode-anchored coarse search followed by golden-section refinement of the best brackets.
MaxSensitivity max_sensitivity(const TransmissionModel& model, const SensitivitySearch& search = {});
MaxSensitivity max_sensitivity(const Scene& scene, const SensitivitySearch& search = {});
/// Same search on the two-mode bright/dark transmission.
MaxSensitivity max_sensitivity(const BrightDarkModel& model, const SensitivitySearch& search = {});

/// dT/d delta_j (N entries) or dT/dx_j (N entries, axial displacements of a static waveguide chain).
Eigen::VectorXd gradient_T(const Scene& scene, double laser_detuning, Wrt wrt);

struct JacobianReport {
    Eigen::MatrixXd matrix;  ///< M x N, rows are sample frequencies
    Eigen::VectorXd singular_values;
    std::vector<double> frequencies;
    Eigen::Index rank = 0;
    double condition_number = 0.0;  ///< sigma_max / sigma_min; infinity when rank deficient
    double rank_threshold = 0.0;    ///< sigma_max * 1e-12
};

/// 2N samples at the real part of every eigenmode, offset by half its linewidth on either side.
std::vector<double> default_samples(const TransmissionModel& model);

JacobianReport jacobian(const Scene& scene, std::span<const double> frequencies, Wrt wrt);
JacobianReport jacobian(const Scene& scene, Wrt wrt);

struct IntegratedSensitivity {
    double value = 0.0;           ///< includes the tail estimate
    double quadrature_error = 0.0;
    double tail = 0.0;            ///< analytic estimate beyond the truncation window
    double window_lo = 0.0, window_hi = 0.0;
};

/// Integral of ||grad T|| over Delta_L: adaptive quadrature between mode resonances over +/- `linewidths`,
/// plus a power-law tail fitted at each window edge.
IntegratedSensitivity integrated_sensitivity(const Scene& scene, Wrt wrt, double linewidths = 20.0);

struct ReconstructionOptions {
    double initial_damping = 1e-3;
    int max_iterations = 100;
    double step_tolerance = 1e-10;
    double residual_tolerance = 1e-3;  ///< converged requires ||T(p) - data|| below this
    double max_condition = 1e4;
};

struct ReconstructionResult {
    Eigen::VectorXd parameters;  ///< inferred perturbation on top of the control scene
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double condition_number = 0.0;  ///< of the Jacobian at the solution
};

/// Scene with `perturbation` added to detunings or axial positions.
Scene perturbed(const Scene& scene, const Eigen::VectorXd& perturbation, Wrt wrt);

/// Levenberg-Marquardt fit of the perturbation p to measured transmittances T(frequencies; control + p).
/// Refuses (ValidationError) when the Jacobian at the control point is rank deficient or too ill-conditioned.
ReconstructionResult reconstruct(const Scene& control, std::span<const double> frequencies,
                                 std::span<const double> measured, Wrt wrt, const Eigen::VectorXd& initial_guess,
                                 const ReconstructionOptions& options = {});

}  // namespace subsense
