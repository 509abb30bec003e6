#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "subsense/core.hpp"
#include "subsense/greens.hpp"

namespace subsense {

enum class ModeClass { Superradiant, Subradiant, Neutral };

std::string_view mode_class_name(ModeClass c);

/// Eigen-decomposition of the non-Hermitian system Hamiltonian.
/// Eigenvalues are lambda = J - i Gamma / 2, sorted by ascending Gamma (ties by ascending J).
struct ModeSet {
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;  ///< right eigenvectors as columns
    std::vector<ModeClass> classes;

    Eigen::Index size() const { return eigenvalues.size(); }
    double shift(Eigen::Index a) const { return eigenvalues(a).real(); }
    double decay(Eigen::Index a) const { return -2.0 * eigenvalues(a).imag(); }
};

/// H = (J - i Gamma/2) - diag(delta) - i (Gamma'/2) I; the matrix of the weak-drive linear system is H - Delta_L.
Eigen::MatrixXcd system_hamiltonian(const CouplingMatrices& couplings, std::span<const double> detunings);

/// Full eigen-decomposition; classification compares Gamma_alpha - Gamma' with the single-emitter rate.
ModeSet eigenmodes(const CouplingMatrices& couplings, std::span<const double> detunings);

/// Eigenvalues only, same ordering as `eigenmodes`.
Eigen::VectorXcd mode_eigenvalues(const CouplingMatrices& couplings, std::span<const double> detunings);

/// Symmetric / antisymmetric eigenvalues of two guided-mode-coupled emitters at spacing a.
std::pair<cplx, cplx> two_atom_eigenvalues(double a, double kp = kWavenumber);

/// Transmission zeros of a bright mode coupled to a dark mode by a control detuning delta0.
std::pair<double, double> dressed_resonances(double J_B, double J_D, double delta0);

/// Two-mode reduction: a radiating bright mode coupled to a dark mode by delta0.
struct BrightDarkModel {
    cplx lambda_B;  ///< J_B - i Gamma_B / 2
    cplx lambda_D;  ///< J_D (real for a perfectly dark mode)
    double coupling = 0.0;  ///< delta0
    cplx rabi_B = 1.0;

    double J_B() const { return lambda_B.real(); }
    double Gamma_B() const { return -2.0 * lambda_B.imag(); }
    double J_D() const { return lambda_D.real(); }
    void validate() const;
};

}  // namespace subsense
