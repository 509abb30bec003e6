#include <doctest.h>

#include <cmath>

#include "subsense/errors.hpp"
#include "subsense/lattice.hpp"

using namespace subsense;

namespace {

// Exact collective decay rate from the propagating diffraction orders:
// Gamma_k = (3 pi / (k0^2 a^2)) sum_{|q| < k0} (k0^2 - |d . q3|^2) / (k0 sqrt(k0^2 - q^2)),
// with q3 = (q, sqrt(k0^2 - q^2)) summed over both emission half-spaces.
double reciprocal_decay(const Eigen::Vector2d& k, double a, const Eigen::Vector3cd& d) {
    const double k0 = kWavenumber;
    double sum = 0.0;
    const int n = static_cast<int>(std::ceil(2.0 * k0 * a / kTwoPi)) + 2;
    for (int m = -n; m <= n; ++m)
        for (int l = -n; l <= n; ++l) {
            const Eigen::Vector2d q = k + kTwoPi / a * Eigen::Vector2d(m, l);
            const double q2 = q.squaredNorm();
            if (q2 >= k0 * k0) continue;
            const double qz = std::sqrt(k0 * k0 - q2);
            for (double sz : {1.0, -1.0}) {
                const Eigen::Vector3d q3(q.x(), q.y(), sz * qz);
                const double proj = std::norm(q3.cast<cplx>().dot(d));
                sum += 0.5 * (k0 * k0 - proj) / (k0 * qz);
            }
        }
    return 3.0 * kPi / (k0 * k0 * a * a) * sum;
}

}  // namespace

TEST_CASE("bright-mode decay of a subwavelength lattice matches the diffraction formula") {
    const Eigen::Vector3cd dx = Eigen::Vector3cd::UnitX();
    for (double a : {0.2, 0.3, 0.5, 0.7, 0.9}) {
        const auto mode = infinite_lattice_mode(Eigen::Vector2d::Zero(), a, dx);
        CHECK(mode.decay() == doctest::Approx(3.0 / (4.0 * kPi * a * a)).epsilon(1e-7));
        CHECK(mode.in_light_cone);
    }
}

TEST_CASE("decay rate at finite quasi-momentum and beyond the first diffraction order") {
    const Eigen::Vector3cd d = Eigen::Vector3cd(cplx(1, 0), cplx(0, 1), 0) / std::sqrt(2.0);
    const Eigen::Vector3cd dz = Eigen::Vector3cd::UnitZ();
    struct Case {
        Eigen::Vector2d k;
        double a;
    };
    const Case cases[] = {{{1.0, 0.5}, 0.4}, {{0.0, 0.0}, 1.3}, {{2.0, -1.0}, 1.6}, {{3.0, 0.0}, 0.6}};
    for (const auto& c : cases) {
        for (const auto& dip : {d, dz}) {
            const auto mode = infinite_lattice_mode(c.k, c.a, dip);
            CHECK(mode.decay() == doctest::Approx(reciprocal_decay(c.k, c.a, dip)).epsilon(1e-7));
        }
    }
}

TEST_CASE("modes outside the light cone of a subwavelength lattice are dark") {
    const double a = 0.3;
    const auto corner = infinite_lattice_mode({kPi / a, kPi / a}, a, Eigen::Vector3cd::UnitX());
    CHECK(std::abs(corner.decay()) < 1e-7);
    CHECK_FALSE(corner.in_light_cone);
}

TEST_CASE("Ewald result does not depend on the splitting parameter") {
    const Eigen::Vector3cd d = Eigen::Vector3cd::UnitY();
    for (double a : {0.25, 0.7}) {
        for (const Eigen::Vector2d k : {Eigen::Vector2d(0, 0), Eigen::Vector2d(kPi / a, kPi / a), Eigen::Vector2d(2.0, 1.0)}) {
            LatticeSumOptions o1, o2;
            o1.ewald_split = 0.6 * std::sqrt(kPi) / a;
            o2.ewald_split = 1.7 * std::sqrt(kPi) / a;
            const auto m1 = infinite_lattice_mode(k, a, d, o1);
            const auto m2 = infinite_lattice_mode(k, a, d, o2);
            CHECK(std::abs(m1.eigenvalue - m2.eigenvalue) < 1e-8);
        }
    }
}

TEST_CASE("damped direct sum extrapolates to the Ewald value") {
    const Eigen::Vector3cd d = Eigen::Vector3cd::UnitX();
    const double a = 0.3;
    LatticeSumOptions damped;
    damped.method = LatticeSumMethod::DampedRichardson;
    damped.tolerance = 1e-4;
    for (const Eigen::Vector2d k : {Eigen::Vector2d(0, 0), Eigen::Vector2d(kPi / a, kPi / a)}) {
        const auto ewald = infinite_lattice_mode(k, a, d);
        const auto direct = infinite_lattice_mode(k, a, d, damped);
        CHECK(std::abs(ewald.eigenvalue - direct.eigenvalue) < 1e-4);
    }
}

TEST_CASE("quasi-momentum on the light cone is rejected") {
    CHECK_THROWS_AS(infinite_lattice_mode({kWavenumber, 0.0}, 0.3, Eigen::Vector3cd::UnitX()), NumericalError);
    CHECK_THROWS_AS(infinite_lattice_mode({0.0, 0.0}, -0.3, Eigen::Vector3cd::UnitX()), ValidationError);
}
