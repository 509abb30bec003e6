#include "subsense/greens.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "subsense/errors.hpp"
#include "subsense/kernels.hpp"

namespace subsense {

Eigen::MatrixXcd CouplingMatrices::effective_hamiltonian() const {
    Eigen::MatrixXcd H(J.rows(), J.cols());
    for (Eigen::Index j = 0; j < J.cols(); ++j)
        for (Eigen::Index i = 0; i < J.rows(); ++i) H(i, j) = cplx(J(i, j), -0.5 * Gamma(i, j));
    return H;
}

cplx greens_waveguide(double x, double kp) {
    if (!(kp > 0.0)) throw ValidationError("guided wavenumber must be positive");
    return cplx(0.0, 0.5) * std::exp(cplx(0.0, kp * std::abs(x)));
}

Eigen::Matrix3cd greens_freespace(const Eigen::Vector3d& r, double k0) {
    const double dist = r.norm();
    if (!(dist > 0.0)) throw ValidationError("free-space Green's tensor requested at zero separation");
    const double kr = k0 * dist;
    const cplx i(0.0, 1.0);
    const cplx pref = std::exp(i * kr) / (4.0 * kPi * k0 * k0 * dist * dist * dist);
    const cplx a = kr * kr + i * kr - 1.0;
    const cplx b = -kr * kr - 3.0 * i * kr + 3.0;
    const Eigen::Vector3d n = r / dist;
    Eigen::Matrix3cd G = (a * Eigen::Matrix3cd::Identity()) + b * (n * n.transpose()).cast<cplx>();
    return pref * G;
}

cplx freespace_pair_coupling(const Eigen::Vector3d& r, const Eigen::Vector3cd& dipole, double k0) {
    // mu0 w0^2 |d|^2 / hbar = 3 pi Gamma_0 / k0
    const cplx contracted = dipole.dot(greens_freespace(r, k0) * dipole);  // dot() conjugates the left factor
    return -(3.0 * kPi / k0) * contracted;
}

CouplingMatrices coupling_matrix(const EmitterArray& array) {
    array.validate();
    const Eigen::Index n = static_cast<Eigen::Index>(array.size());
    CouplingMatrices c;
    c.J = Eigen::MatrixXd::Zero(n, n);
    c.Gamma = Eigen::MatrixXd::Identity(n, n);
    c.gamma_prime = array.gamma_prime;

    std::vector<double> dx, dy, dz, jrow, grow;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        const std::size_t m = static_cast<std::size_t>(n - i - 1);
        dx.resize(m);
        dy.resize(m);
        dz.resize(m);
        jrow.resize(m);
        grow.resize(m);
        const auto& pi = array.positions[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < m; ++k) {
            const auto& pj = array.positions[static_cast<std::size_t>(i) + 1 + k];
            dx[k] = pi.x() - pj.x();
            dy[k] = pi.y() - pj.y();
            dz[k] = pi.z() - pj.z();
            if (std::sqrt(dx[k] * dx[k] + dy[k] * dy[k] + dz[k] * dz[k]) < kCoincidenceGuard)
                throw ValidationError("emitters " + std::to_string(i) + " and " +
                                      std::to_string(static_cast<std::size_t>(i) + 1 + k) + " coincide");
        }
        if (array.is_waveguide())
            kernels::waveguide_coupling(dx, array.guided_wavenumber(), jrow, grow);
        else
            kernels::freespace_coupling(dx, dy, dz, array.dipole, kWavenumber, jrow, grow);
        for (std::size_t k = 0; k < m; ++k) {
            const Eigen::Index j = i + 1 + static_cast<Eigen::Index>(k);
            c.J(i, j) = c.J(j, i) = jrow[k];
            c.Gamma(i, j) = c.Gamma(j, i) = grow[k];
        }
    }
    return c;
}

}  // namespace subsense
