#pragma once

#include <Eigen/Core>

#include "subsense/core.hpp"

namespace subsense {

/// Pairs closer than this (in wavelengths) are rejected as coincident.
inline constexpr double kCoincidenceGuard = 1e-9;

/// Coherent (J) and dissipative (Gamma) couplings in units of the single-emitter rate.
struct CouplingMatrices {
    Eigen::MatrixXd J;
    Eigen::MatrixXd Gamma;
    double gamma_prime = 0.0;

    Eigen::Index size() const { return J.rows(); }
    /// J - i Gamma / 2 (without the uncorrelated loss).
    Eigen::MatrixXcd effective_hamiltonian() const;
};

/// Contracted guided-mode Green's function: (i/2) exp(i kp |x|), rate units.
cplx greens_waveguide(double x, double kp);

/// Free-space dyadic Green's tensor at separation r (wavelength units). Rejects |r| = 0.
Eigen::Matrix3cd greens_freespace(const Eigen::Vector3d& r, double k0 = kWavenumber);

/// J - i Gamma/2 for two dipoles at separation r, evaluated through the full tensor.
cplx freespace_pair_coupling(const Eigen::Vector3d& r, const Eigen::Vector3cd& dipole, double k0 = kWavenumber);

/// J_jj = 0 and Gamma_jj = 1 on the diagonal; off-diagonal entries from the environment's Green's function.
CouplingMatrices coupling_matrix(const EmitterArray& array);

}  // namespace subsense
