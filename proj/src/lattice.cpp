#include "subsense/lattice.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "subsense/errors.hpp"
#include "subsense/kernels.hpp"
#include "subsense/special.hpp"

namespace subsense {

namespace {

constexpr double k0 = kWavenumber;
constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

// Quasi-periodic scalar Green's function sum_R exp(i k.R) exp(i k0 |r - R|)/|r - R| with the R = 0
// term removed, and its second derivatives, all at r = 0 (in-plane components plus zz).
struct ScalarLatticeSum {
    cplx phi{};
    cplx dxx{}, dyy{}, dxy{}, dzz{};
};

ScalarLatticeSum ewald_sum(const Eigen::Vector2d& k, double a, double E, int n_spectral, int n_spatial) {
    ScalarLatticeSum s;
    const double area = a * a;
    const double b = k0 / (2.0 * E);
    const double g0 = kTwoPi / a;

    // spectral part
    for (int m = -n_spectral; m <= n_spectral; ++m) {
        for (int n = -n_spectral; n <= n_spectral; ++n) {
            const double qx = k.x() + g0 * m;
            const double qy = k.y() + g0 * n;
            const double q2 = qx * qx + qy * qy;
            const double gamma2 = q2 - k0 * k0;
            if (std::abs(gamma2) < 1e-12)
                throw NumericalError("reciprocal vector lies on the light cone; lattice sum is singular");
            cplx gamma, erfc_c, s0;
            if (gamma2 > 0.0) {
                gamma = std::sqrt(gamma2);
                const double c = gamma.real() / (2.0 * E);
                erfc_c = std::erfc(c);
                s0 = 2.0 * E * kInvSqrtPi * std::exp(-c * c);
            } else {
                const double kappa = std::sqrt(-gamma2);
                gamma = cplx(0.0, -kappa);  // outgoing branch
                const double y = kappa / (2.0 * E);
                erfc_c = cplx(1.0, special::erfi(y));
                s0 = 2.0 * E * kInvSqrtPi * std::exp(y * y);
            }
            const cplx f0 = erfc_c / gamma;
            const double w = kTwoPi / area;
            s.phi += w * f0;
            s.dxx += w * (-qx * qx) * f0;
            s.dyy += w * (-qy * qy) * f0;
            s.dxy += w * (-qx * qy) * f0;
            s.dzz += w * (gamma * erfc_c - s0);
        }
    }

    // real-space part, R != 0
    const double eb2 = b * b;
    for (int m = -n_spatial; m <= n_spatial; ++m) {
        for (int n = -n_spatial; n <= n_spatial; ++n) {
            if (m == 0 && n == 0) continue;
            const double x = a * m, y = a * n;
            const double rho = std::hypot(x, y);
            const cplx u = std::exp(cplx(0.0, k0 * rho)) * special::erfc(cplx(E * rho, b));
            const double q = 2.0 * E * kInvSqrtPi * std::exp(eb2 - E * E * rho * rho);
            const double dq = -2.0 * E * E * rho * q;
            const cplx du = cplx(0.0, k0) * u - q;
            const cplx d2u = cplx(0.0, k0) * du - dq;
            const double f = u.real() / rho;
            const double fp = du.real() / rho - u.real() / (rho * rho);
            const double fpp = d2u.real() / rho - 2.0 * du.real() / (rho * rho) + 2.0 * u.real() / (rho * rho * rho);
            const double nx = x / rho, ny = y / rho;
            const cplx phase = std::exp(cplx(0.0, k.x() * x + k.y() * y));
            s.phi += phase * f;
            s.dxx += phase * (fpp * nx * nx + fp / rho * (1.0 - nx * nx));
            s.dyy += phase * (fpp * ny * ny + fp / rho * (1.0 - ny * ny));
            s.dxy += phase * ((fpp - fp / rho) * nx * ny);
            s.dzz += phase * (fp / rho);
        }
    }

    // R = 0 real-space term minus the bare exp(i k0 r)/r, expanded about r = 0
    const double q0 = 2.0 * E * kInvSqrtPi * std::exp(eb2);
    const cplx c0 = cplx(0.0, -k0) * cplx(1.0, special::erfi(b)) - q0;
    const cplx h3 = -k0 * k0 * c0 + 2.0 * E * E * q0;
    s.phi += c0;
    s.dxx += h3 / 3.0;
    s.dyy += h3 / 3.0;
    s.dzz += h3 / 3.0;
    return s;
}

cplx contract(const ScalarLatticeSum& s, const Eigen::Vector3cd& d) {
    // S_ab = (phi delta_ab + d_a d_b phi / k0^2) / (4 pi);  lambda = -(3 pi / k0) d* S d - i/2
    Eigen::Matrix3cd S = Eigen::Matrix3cd::Zero();
    S(0, 0) = s.phi + s.dxx / (k0 * k0);
    S(1, 1) = s.phi + s.dyy / (k0 * k0);
    S(2, 2) = s.phi + s.dzz / (k0 * k0);
    S(0, 1) = S(1, 0) = s.dxy / (k0 * k0);
    S /= 4.0 * kPi;
    return -(3.0 * kPi / k0) * d.dot(S * d) - cplx(0.0, 0.5);
}

LatticeMode ewald_mode(const Eigen::Vector2d& k, double a, const Eigen::Vector3cd& d, const LatticeSumOptions& opt) {
    const double E = opt.ewald_split > 0.0 ? opt.ewald_split : std::sqrt(kPi) / a;
    // terms decay like exp(-(gamma/2E)^2) and exp(-(E rho)^2); 6.5 leaves ~1e-18
    const int n_spec = static_cast<int>(std::ceil((13.0 * E + k.norm()) * a / kTwoPi)) + 1;
    const int n_spat = static_cast<int>(std::ceil(6.5 / (E * a))) + 1;
    const cplx coarse = contract(ewald_sum(k, a, E, n_spec, n_spat), d);
    const cplx fine = contract(ewald_sum(k, a, E, n_spec + 2, n_spat + 2), d);
    LatticeMode mode;
    mode.quasi_momentum = k;
    mode.eigenvalue = fine;
    mode.residual = std::abs(fine - coarse);
    return mode;
}

LatticeMode damped_mode(const Eigen::Vector2d& k, double a, const Eigen::Vector3cd& d, const LatticeSumOptions& opt) {
    // distance of the closest singularity of the damped sum from eps = 0
    double radius = k0;
    for (int m = -4; m <= 4; ++m)
        for (int n = -4; n <= 4; ++n) {
            const double q = std::hypot(k.x() + kTwoPi / a * m, k.y() + kTwoPi / a * n);
            radius = std::min(radius, std::abs(q - k0));
        }
    if (radius < 1e-9) throw NumericalError("reciprocal vector lies on the light cone; lattice sum is singular");

    const int levels = std::max(opt.richardson_levels, 2);
    const double eps0 = 0.5 * radius;
    const double eps_min = eps0 / std::ldexp(1.0, levels - 1);
    const double r_max = 40.0 / eps_min;
    const double sites = kPi * r_max * r_max / (a * a);
    if (sites > opt.max_sites)
        throw NumericalError("damped lattice sum would need " + std::to_string(sites) +
                             " sites; use the Ewald method for this spacing");

    const int n_max = static_cast<int>(std::floor(r_max / a));
    std::vector<cplx> acc(static_cast<std::size_t>(levels), cplx{});
    std::vector<cplx> phase_x(static_cast<std::size_t>(2 * n_max + 1));
    for (int m = -n_max; m <= n_max; ++m) phase_x[static_cast<std::size_t>(m + n_max)] = std::exp(cplx(0.0, k.x() * a * m));

    std::vector<double> dx, dy, dz, J, G;
    std::vector<double> pw(static_cast<std::size_t>(levels));
    for (int n = -n_max; n <= n_max; ++n) {
        const double y = a * n;
        const double half = std::sqrt(std::max(0.0, r_max * r_max - y * y));
        const int m_max = static_cast<int>(std::floor(half / a));
        dx.clear();
        for (int m = -m_max; m <= m_max; ++m)
            if (m != 0 || n != 0) dx.push_back(a * m);
        dy.assign(dx.size(), y);
        dz.assign(dx.size(), 0.0);
        J.resize(dx.size());
        G.resize(dx.size());
        kernels::freespace_coupling(dx, dy, dz, d, k0, J, G);
        const cplx phase_y = std::exp(cplx(0.0, k.y() * y));
        for (std::size_t i = 0; i < dx.size(); ++i) {
            const int m = static_cast<int>(std::lround(dx[i] / a));
            const double rho = std::hypot(dx[i], y);
            const cplx w = cplx(J[i], -0.5 * G[i]) * phase_x[static_cast<std::size_t>(m + n_max)] * phase_y;
            pw[static_cast<std::size_t>(levels - 1)] = std::exp(-eps_min * rho);
            for (int l = levels - 2; l >= 0; --l) pw[static_cast<std::size_t>(l)] = pw[static_cast<std::size_t>(l + 1)] * pw[static_cast<std::size_t>(l + 1)];
            for (int l = 0; l < levels; ++l) acc[static_cast<std::size_t>(l)] += w * pw[static_cast<std::size_t>(l)];
        }
    }

    // Neville extrapolation to eps = 0 with eps_l = eps0 / 2^l
    std::vector<cplx> p = acc;
    std::vector<double> eps(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) eps[static_cast<std::size_t>(l)] = eps0 / std::ldexp(1.0, l);
    cplx previous = p.back();
    for (int order = 1; order < levels; ++order) {
        for (int l = levels - 1; l >= order; --l) {
            const double e_hi = eps[static_cast<std::size_t>(l - order)];
            const double e_lo = eps[static_cast<std::size_t>(l)];
            p[static_cast<std::size_t>(l)] =
                (e_hi * p[static_cast<std::size_t>(l)] - e_lo * p[static_cast<std::size_t>(l - 1)]) / (e_hi - e_lo);
        }
        if (order == levels - 2) previous = p.back();
    }
    LatticeMode mode;
    mode.quasi_momentum = k;
    mode.eigenvalue = p.back() - cplx(0.0, 0.5);
    mode.residual = std::abs(p.back() - previous);
    return mode;
}

}  // namespace

LatticeMode infinite_lattice_mode(const Eigen::Vector2d& k, double a, const Eigen::Vector3cd& dipole,
                                  const LatticeSumOptions& options) {
    if (!(a > 0.0)) throw ValidationError("lattice spacing must be positive");
    const double norm = dipole.norm();
    if (!(norm > 0.0)) throw ValidationError("dipole orientation has zero norm");
    const Eigen::Vector3cd d = dipole / norm;
    LatticeMode mode = options.method == LatticeSumMethod::Ewald ? ewald_mode(k, a, d, options)
                                                                 : damped_mode(k, a, d, options);
    mode.in_light_cone = k.norm() <= k0;
    if (!(mode.residual <= options.tolerance))
        throw NumericalError("lattice sum did not reach tolerance: residual " + std::to_string(mode.residual));
    return mode;
}

BrightDarkModel lattice_bright_dark(double a, const Eigen::Vector3cd& dipole, double delta0,
                                    const LatticeSumOptions& options) {
    return lattice_bright_dark(a, dipole, delta0, Eigen::Vector2d(kPi / a, kPi / a), options);
}

BrightDarkModel lattice_bright_dark(double a, const Eigen::Vector3cd& dipole, double delta0,
                                    const Eigen::Vector2d& k_dark, const LatticeSumOptions& options) {
    const LatticeMode bright = infinite_lattice_mode(Eigen::Vector2d::Zero(), a, dipole, options);
    const LatticeMode dark = infinite_lattice_mode(k_dark, a, dipole, options);
    BrightDarkModel model;
    model.lambda_B = bright.eigenvalue;
    model.lambda_D = dark.eigenvalue;
    model.coupling = delta0;
    model.validate();
    return model;
}

}  // namespace subsense
