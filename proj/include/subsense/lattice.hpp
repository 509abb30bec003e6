#pragma once

// Collective modes of an infinite square lattice in free space.

#include <Eigen/Core>

#include "subsense/core.hpp"
#include "subsense/modes.hpp"

namespace subsense {

enum class LatticeSumMethod {
    Ewald,             ///< spectral + real-space split, exponentially convergent
    DampedRichardson,  ///< direct real-space sum with exp(-eps r) damping, extrapolated to eps -> 0
};

struct LatticeSumOptions {
    LatticeSumMethod method = LatticeSumMethod::Ewald;
    double tolerance = 1e-6;  ///< in units of the free-space decay rate
    double ewald_split = 0.0;  ///< Ewald splitting parameter; 0 selects sqrt(pi)/a
    int richardson_levels = 6;
    double max_sites = 2e8;  ///< damped sum refuses to go beyond this many lattice sites
};

/// Bloch mode of the infinite lattice. `quasi_momentum` is in radians per wavelength (k0 = 2 pi).
struct LatticeMode {
    Eigen::Vector2d quasi_momentum = Eigen::Vector2d::Zero();
    cplx eigenvalue;
    bool in_light_cone = false;
    double residual = 0.0;  ///< achieved accuracy estimate of the lattice sum

    double shift() const { return eigenvalue.real(); }
    double decay() const { return -2.0 * eigenvalue.imag(); }
};

/// lambda_k = sum_{j != 0} (J_0j - i Gamma_0j / 2) exp(i k . r_j) - i/2 for a square lattice of spacing a.
/// Throws NumericalError if the requested accuracy is not reached or k + g lies on the light cone.
LatticeMode infinite_lattice_mode(const Eigen::Vector2d& k, double a, const Eigen::Vector3cd& dipole,
                                  const LatticeSumOptions& options = {});

/// Bright mode at k = 0 coupled to the dark mode at `k_dark` (default the zone corner (pi/a, pi/a)).
BrightDarkModel lattice_bright_dark(double a, const Eigen::Vector3cd& dipole, double delta0,
                                    const LatticeSumOptions& options = {});
BrightDarkModel lattice_bright_dark(double a, const Eigen::Vector3cd& dipole, double delta0,
                                    const Eigen::Vector2d& k_dark, const LatticeSumOptions& options = {});

}  // namespace subsense
