#pragma once

// Scattered fields, transmission and reflection, and frequency sweeps.

#include <atomic>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "subsense/core.hpp"
#include "subsense/greens.hpp"
#include "subsense/modes.hpp"
#include "subsense/steady.hpp"

namespace subsense {

/// Where the free-space transmittance is sampled, relative to the array plane along the beam axis.
struct DetectionLayout {
    struct SinglePointOnAxis {
        double distance = 1.1;
    };
    /// Deterministic sunflower layout of `count` points in a disk; radius 0 selects 1.2 w0.
    struct DiskSampling {
        double radius = 0.0;
        int count = 31;
        double distance = 1.1;
    };
    std::variant<SinglePointOnAxis, DiskSampling> kind = DiskSampling{};

    std::vector<Eigen::Vector3d> points(const EmitterArray& array, const GaussianBeam& beam) const;
};

/// Beam waist 0.3 sqrt(N) a used for finite free-space arrays.
double default_beam_waist(std::size_t count, double spacing);

/// Everything needed to evaluate a spectrum.
struct Scene {
    EmitterArray array;
    DriveField drive;
    MotionModel motion;  ///< waveguide only; sigma = 0 means static emitters
    DetectionLayout detection;

    void validate() const;
};

/// Incident field (Rabi-frequency units) at r, including the drive amplitude. For waveguide scenes
/// the x coordinate is used and the phase reference is the chain centroid.
cplx incident_field(const Scene& scene, const Eigen::Vector3d& r);

/// Total field at r: incident plus the field scattered by the coherences, as a vector along the
/// emitter dipole (free space: full vector; waveguide: guided amplitude times the dipole unit vector).
Eigen::Vector3cd scattered_field(const Scene& scene, const Eigen::VectorXcd& coherences, const Eigen::Vector3d& r);

/// Linear model of the spectrum: for every laser detuning the coherences are A^-1 u (unit drive u),
/// and each detected amplitude is offset + weights . sigma. T is the weighted sum of |amplitude|^2.
class TransmissionModel {
public:
    explicit TransmissionModel(const Scene& scene);

    struct Point {
        double detuning = 0.0;
        cplx t;
        cplx r;  ///< waveguide only
        double T = 0.0;
        double R = 0.0;
        double dT = 0.0;  ///< dT / dDelta_L
    };

    Point evaluate(double laser_detuning) const;
    double transmittance(double laser_detuning) const { return evaluate(laser_detuning).T; }
    double dT_dDelta(double laser_detuning) const { return evaluate(laser_detuning).dT; }
    /// dT / d delta_j for every emitter.
    Eigen::VectorXd detuning_gradient(double laser_detuning) const;
    /// Coherences for the scene's actual drive amplitude.
    Eigen::VectorXcd coherences(double laser_detuning) const;

    const ModeSet& modes() const { return modes_; }
    const CouplingMatrices& couplings() const { return couplings_; }
    const std::vector<double>& detunings() const { return detunings_; }
    const Eigen::VectorXcd& unit_drive() const { return drive_; }
    /// Columns hold the weights q_p of each detected amplitude t_p = 1 + q_p . sigma (unit drive).
    const Eigen::MatrixXcd& transmission_weights() const { return probes_; }
    bool waveguide() const { return waveguide_; }
    Eigen::Index size() const { return drive_.size(); }
    double drive_amplitude() const { return amplitude_; }

private:
    bool waveguide_ = true;
    double amplitude_ = 0.0;
    CouplingMatrices couplings_;
    std::vector<double> detunings_;
    Eigen::VectorXcd drive_;
    Eigen::VectorXcd reflect_;        // waveguide reflection weights
    Eigen::MatrixXcd probes_;         // columns: transmission weights per detection point
    Eigen::VectorXcd probe_offset_;   // 1 for transmitted amplitudes
    double probe_weight_ = 1.0;       // 1 / number of detection points
    ModeSet modes_;
    ShiftedSolver solver_;
    std::shared_ptr<std::atomic<bool>> warned_ = std::make_shared<std::atomic<bool>>(false);

    struct Solved;
    Solved solve(double laser_detuning, bool with_derivative) const;
};

/// Guided-mode t and r for a waveguide scene. N = 2 static scenes with equal detunings use the
/// closed-form symmetric/antisymmetric expansion; `force_numeric` bypasses it.
std::pair<cplx, cplx> waveguide_transmission(const Scene& scene, double laser_detuning, bool force_numeric = false);

/// Two-mode transmission 1 + (i/2) Gamma_B (lambda_D - Delta) / [(lambda_B - Delta)(lambda_D - Delta) - delta0^2].
cplx bright_dark_transmission(const BrightDarkModel& model, double laser_detuning);
/// d|t|^2 / dDelta for the two-mode model.
double bright_dark_dT(const BrightDarkModel& model, double laser_detuning);

/// Mean of |t_p|^2 over the detection layout for a free-space scene driven by a Gaussian beam.
double freespace_transmittance(const Scene& scene, double laser_detuning);

struct GridSpec {
    double start = -5.0;
    double stop = 5.0;
    std::size_t count = 1001;
    bool refine = false;
    double threshold = 0.1;  ///< refine where |T_i+1 - T_i| exceeds this
    int max_levels = 12;

    void validate() const;
    std::vector<double> uniform() const;
};

struct SpectrumRecord {
    std::vector<TransmissionModel::Point> points;
    bool waveguide = true;
    std::size_t uniform_points = 0;
    std::size_t inserted_points = 0;
    int refinement_levels = 0;

    /// Largest |dT/dDelta| over the recorded points, and where it occurs.
    std::pair<double, double> max_sensitivity() const;
};

SpectrumRecord sweep_spectrum(const Scene& scene, const GridSpec& grid);
SpectrumRecord sweep_spectrum(const TransmissionModel& model, const GridSpec& grid);

}  // namespace subsense
