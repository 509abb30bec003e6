#pragma once

// Weak-drive steady state: (H - Delta_L) sigma = Omega.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "subsense/core.hpp"
#include "subsense/greens.hpp"

namespace subsense {

/// Predicted single-site excitation above which a warning is emitted, and above which solving is refused.
inline constexpr double kExcitationWarning = 0.01;
inline constexpr double kExcitationLimit = 0.1;

struct SteadyState {
    Eigen::VectorXcd coherences;
    double laser_detuning = 0.0;
    double residual = 0.0;  ///< relative backward error ||A s - b|| / (||A|| ||s|| + ||b||)
};

/// A = H - Delta_L I, with diagonal -Delta_L - delta_j - i (1 + Gamma') / 2.
Eigen::MatrixXcd steady_system_matrix(const CouplingMatrices& couplings, std::span<const double> detunings,
                                      double laser_detuning);

/// Dense LU with partial pivoting plus one refinement step. Warns or throws on large excitation.
SteadyState solve_steady_state(const CouplingMatrices& couplings, std::span<const double> detunings,
                               const Eigen::VectorXcd& drive, double laser_detuning);

/// Warn above kExcitationWarning, throw ValidationError above kExcitationLimit.
void check_excitation(double max_excitation);

/// Solves (H - Delta I) X = B for many shifts Delta after a single Hessenberg reduction of H.
/// Each shift costs O(N^2) per right-hand side; the result is refined once against H.
class ShiftedSolver {
public:
    ShiftedSolver() = default;
    explicit ShiftedSolver(Eigen::MatrixXcd H);

    Eigen::Index size() const { return H_.rows(); }
    const Eigen::MatrixXcd& hamiltonian() const { return H_; }

    /// Hessenberg-basis factorization of H - Delta I for one shift.
    class Factor {
    public:
        Eigen::MatrixXcd solve(const Eigen::MatrixXcd& B) const;
        Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
        double shift() const { return shift_; }

    private:
        friend class ShiftedSolver;
        const ShiftedSolver* owner_ = nullptr;
        double shift_ = 0.0;
        Eigen::MatrixXcd lu_;  // upper triangle U; subdiagonal holds the single multiplier of each column
        std::vector<char> swapped_;
        Eigen::MatrixXcd raw_solve(const Eigen::MatrixXcd& B) const;
    };

    /// Throws NumericalError if H - Delta I is numerically singular.
    Factor factor(double shift) const;

private:
    Eigen::MatrixXcd H_;
    Eigen::MatrixXcd Q_;
    Eigen::MatrixXcd hess_;
    double norm_ = 0.0;
};

// Motion averaging ------------------------------------------------------------------

struct GaussHermite {
    int order = 40;
};
struct MonteCarlo {
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    int replicas = 16;  ///< independent stratified replicas, used for the standard error
};

/// Independent isotropic Gaussian position spread of every emitter (high-velocity limit).
struct MotionModel {
    double sigma = 0.0;
    std::variant<GaussHermite, MonteCarlo> quadrature = GaussHermite{};

    void validate() const;
};

/// Position-averaged inputs of the waveguide problem. Drive and detection profiles are unit-amplitude
/// guided plane waves referred to the chain centroid; `drive_left[j]` = <exp(i k (x_j - x_c))>.
struct AveragedInputs {
    CouplingMatrices couplings;
    Eigen::VectorXcd drive_left;
    Eigen::VectorXcd drive_right;
    double standard_error = 0.0;  ///< largest Monte Carlo standard error over all averaged entries (0 for quadrature)
};

AveragedInputs motion_averaged_inputs(const EmitterArray& array, const MotionModel& motion);

/// Averages <exp(i k |d + s|)> for s ~ N(0, 2 sigma^2); exposed for testing.
cplx averaged_pair_phase(double separation, double k, double sigma, int order);

/// Runs the Gauss-Hermite and Monte Carlo paths and throws NumericalError if any averaged coupling or
/// drive entry differs by more than `tolerance`. Returns the largest difference.
double check_motion_quadrature(const EmitterArray& array, double sigma, int order, std::size_t samples,
                               std::uint64_t seed, double tolerance = 1e-3);

/// Deterministic removal of round(fraction N) emitters; survivors keep their order.
EmitterArray remove_atoms(const EmitterArray& array, double fraction, std::uint64_t seed);

}  // namespace subsense
