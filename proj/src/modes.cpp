#include "subsense/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "subsense/errors.hpp"

namespace subsense {

namespace {

constexpr double kNeutralTolerance = 1e-9;

// Ordering key: decay rate quantised at 1e-10 so that numerically degenerate rates tie and
// fall back to the shift.
std::vector<Eigen::Index> sorted_order(const Eigen::VectorXcd& ev) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(ev.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    auto key = [&](Eigen::Index a) { return std::llround(-2.0 * ev(a).imag() * 1e10); };
    std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        const auto ka = key(a), kb = key(b);
        if (ka != kb) return ka < kb;
        return ev(a).real() < ev(b).real();
    });
    return idx;
}

void check_detunings(const CouplingMatrices& c, std::span<const double> detunings) {
    if (static_cast<Eigen::Index>(detunings.size()) != c.size())
        throw ValidationError("detuning list length does not match coupling matrix size");
}

}  // namespace

std::string_view mode_class_name(ModeClass c) {
    switch (c) {
        case ModeClass::Superradiant: return "superradiant";
        case ModeClass::Subradiant: return "subradiant";
        case ModeClass::Neutral: return "neutral";
    }
    return "unknown";
}

Eigen::MatrixXcd system_hamiltonian(const CouplingMatrices& couplings, std::span<const double> detunings) {
    check_detunings(couplings, detunings);
    Eigen::MatrixXcd H = couplings.effective_hamiltonian();
    for (Eigen::Index j = 0; j < H.rows(); ++j)
        H(j, j) += cplx(-detunings[static_cast<std::size_t>(j)], -0.5 * couplings.gamma_prime);
    return H;
}

ModeSet eigenmodes(const CouplingMatrices& couplings, std::span<const double> detunings) {
    const Eigen::MatrixXcd H = system_hamiltonian(couplings, detunings);
    if (H.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(H, true);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");

    const auto order = sorted_order(solver.eigenvalues());
    ModeSet modes;
    const Eigen::Index n = H.rows();
    modes.eigenvalues.resize(n);
    modes.eigenvectors.resize(n, n);
    modes.classes.resize(static_cast<std::size_t>(n));
    for (Eigen::Index a = 0; a < n; ++a) {
        const Eigen::Index src = order[static_cast<std::size_t>(a)];
        modes.eigenvalues(a) = solver.eigenvalues()(src);
        modes.eigenvectors.col(a) = solver.eigenvectors().col(src);
        const double radiative = modes.decay(a) - couplings.gamma_prime;
        modes.classes[static_cast<std::size_t>(a)] = radiative > 1.0 + kNeutralTolerance   ? ModeClass::Superradiant
                                                     : radiative < 1.0 - kNeutralTolerance ? ModeClass::Subradiant
                                                                                           : ModeClass::Neutral;
    }
    return modes;
}

Eigen::VectorXcd mode_eigenvalues(const CouplingMatrices& couplings, std::span<const double> detunings) {
    const Eigen::MatrixXcd H = system_hamiltonian(couplings, detunings);
    if (H.rows() == 0) return {};
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(H, false);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
    const auto order = sorted_order(solver.eigenvalues());
    Eigen::VectorXcd out(H.rows());
    for (Eigen::Index a = 0; a < H.rows(); ++a) out(a) = solver.eigenvalues()(order[static_cast<std::size_t>(a)]);
    return out;
}

std::pair<cplx, cplx> two_atom_eigenvalues(double a, double kp) {
    if (!(a >= 0.0)) throw ValidationError("spacing must be non-negative");
    const double phase = kp * a;
    const double c = std::cos(0.5 * phase);
    const double s = std::sin(0.5 * phase);
    const cplx sym(0.5 * std::sin(phase), -c * c);
    const cplx anti(-0.5 * std::sin(phase), -s * s);
    return {sym, anti};
}

std::pair<double, double> dressed_resonances(double J_B, double J_D, double delta0) {
    const double mean = 0.5 * (J_B + J_D);
    const double half = 0.5 * std::sqrt((J_B - J_D) * (J_B - J_D) + 4.0 * delta0 * delta0);
    return {mean + half, mean - half};
}

void BrightDarkModel::validate() const {
    if (!(Gamma_B() > 0.0)) throw ValidationError("bright mode must have a positive decay rate");
}

}  // namespace subsense
