#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "subsense/errors.hpp"
#include "subsense/sense.hpp"

using namespace subsense;

namespace {

Scene chain(std::size_t n, double a, std::vector<double> delta = {}) {
    Scene s;
    for (std::size_t j = 0; j < n; ++j) s.array.positions.push_back({a * static_cast<double>(j), 0, 0});
    if (delta.empty()) delta.assign(n, 0.0);
    s.array.detunings = std::move(delta);
    return s;
}

std::vector<double> linear_control(std::size_t n) {
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = 0.1 * static_cast<double>(j) / static_cast<double>(n - 1);
    return d;
}

double fd_T(const Scene& s, double delta) { return TransmissionModel(s).transmittance(delta); }

}  // namespace

TEST_CASE("single emitter maximum sensitivity matches the Lorentzian closed form") {
    // T = D^2 / (D^2 + 1/4); dT/dD peaks at D^2 = 1/12
    const double d = 1.0 / std::sqrt(12.0);
    const double expected = 0.5 * d / std::pow(d * d + 0.25, 2);
    const auto best = max_sensitivity(chain(1, 0.0));
    CHECK(best.value == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(std::abs(best.detuning) - d) < 1e-5);
}

TEST_CASE("maximum sensitivity agrees with a dense scan") {
    auto s = chain(4, 0.07, {0.0, 0.05, -0.02, 0.03});
    const auto best = max_sensitivity(s);
    std::vector<double> grid;
    for (int i = 0; i <= 200000; ++i) grid.push_back(-3.0 + 6.0 * i / 200000.0);
    const auto curve = sensitivity_curve(s, grid);
    CHECK(best.value >= curve.max * (1.0 - 1e-9));
    CHECK(best.value <= curve.max * (1.0 + 1e-3));
}

TEST_CASE("bright/dark maximum sensitivity agrees with a dense scan") {
    BrightDarkModel m{cplx(0.1, -0.5), cplx(-0.05, 0.0), 0.03};
    const auto best = max_sensitivity(m);
    double scan = 0.0;
    for (int i = 0; i <= 400000; ++i) scan = std::max(scan, std::abs(bright_dark_dT(m, -1.0 + 2.0 * i / 400000.0)));
    CHECK(best.value >= scan * (1.0 - 1e-9));
    CHECK(best.value <= scan * (1.0 + 1e-3));
}

TEST_CASE("position gradient matches finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> gap(0.03, 0.5), det(-0.3, 0.3), lf(-2.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + trial % 4;
        Scene s = chain(n, 0.0);
        for (std::size_t j = 1; j < n; ++j) s.array.positions[j].x() = s.array.positions[j - 1].x() + gap(rng);
        for (auto& d : s.array.detunings) d = det(rng);
        if (trial % 2) s.drive.kind = GuidedPlaneWave{Side::Right};
        if (trial % 3 == 0) s.array.gamma_prime = 0.2;
        const double delta = lf(rng);
        const auto g = gradient_T(s, delta, Wrt::Positions);
        const double h = 1e-6;
        for (std::size_t m = 0; m < n; ++m) {
            Scene p = s, q = s;
            p.array.positions[m].x() += h;
            q.array.positions[m].x() -= h;
            const double fd = (fd_T(p, delta) - fd_T(q, delta)) / (2 * h);
            CHECK(g(static_cast<Eigen::Index>(m)) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
        CHECK(std::abs(g.sum()) < 1e-9 * (1.0 + g.norm()));
    }
}

TEST_CASE("detuning gradient sums to the laser derivative") {
    auto s = chain(5, 0.11, {0.1, -0.2, 0.0, 0.05, 0.3});
    for (double delta : {-0.7, -0.1, 0.02, 0.4}) {
        const auto g = gradient_T(s, delta, Wrt::Detunings);
        CHECK(g.sum() == doctest::Approx(dT_dDelta(s, delta)).epsilon(1e-9));
    }
}

TEST_CASE("mirrored chain has the same transmission spectrum") {
    auto s = chain(4, 0.13, {0.2, -0.1, 0.0, 0.4});
    s.array.positions[2].x() += 0.05;
    Scene m = s;
    m.array = mirror(s.array);
    const TransmissionModel a(s), b(m);
    for (int i = 0; i <= 200; ++i) {
        const double d = -2.0 + 0.02 * i;
        CHECK(std::abs(a.transmittance(d) - b.transmittance(d)) < 1e-10);
    }
}

TEST_CASE("Jacobian rank and conditioning") {
    SUBCASE("linear control restores full rank") {
        const auto s = chain(4, 0.04, linear_control(4));
        const auto rep = jacobian(s, Wrt::Detunings);
        CHECK(rep.matrix.rows() == 8);
        CHECK(rep.rank == 4);
        CHECK(rep.condition_number <= 1e4);
    }
    SUBCASE("uniform chain at the dark-state point is rank deficient") {
        const auto s = chain(2, 0.5);
        const auto rep = jacobian(s, std::vector<double>{-0.3, 0.1, 0.4}, Wrt::Detunings);
        CHECK(rep.rank < 2);
        CHECK(std::isinf(rep.condition_number));
    }
    SUBCASE("too few samples") {
        CHECK_THROWS_AS(jacobian(chain(3, 0.1), std::vector<double>{0.0, 0.1}, Wrt::Detunings), ValidationError);
    }
    SUBCASE("positions only for guided chains") {
        Scene s;
        s.array.environment = Environment::FreeSpace;
        s.array.positions = {{0, 0, 0}};
        s.array.detunings = {0.0};
        s.array.dipole = Eigen::Vector3cd::UnitX();
        s.drive.kind = GaussianBeam{0.5};
        CHECK_THROWS_AS(gradient_T(s, 0.0, Wrt::Positions), ValidationError);
    }
}

TEST_CASE("reconstruction round trip") {
    const auto control = chain(4, 0.04, linear_control(4));
    const auto freqs = default_samples(TransmissionModel(control));
    Eigen::VectorXd truth(4);
    truth << 0.004, -0.002, 0.003, 0.001;
    const TransmissionModel target(perturbed(control, truth, Wrt::Detunings));
    std::vector<double> data;
    for (double f : freqs) data.push_back(target.transmittance(f));
    const auto res = reconstruct(control, freqs, data, Wrt::Detunings, Eigen::VectorXd::Zero(4));
    CHECK(res.converged);
    CHECK((res.parameters - truth).cwiseAbs().maxCoeff() < 1e-6);

    SUBCASE("zero perturbation converges immediately") {
        std::vector<double> flat;
        const TransmissionModel model(control);
        for (double f : freqs) flat.push_back(model.transmittance(f));
        const auto zero = reconstruct(control, freqs, flat, Wrt::Detunings, Eigen::VectorXd::Zero(4));
        CHECK(zero.converged);
        CHECK(zero.iterations <= 2);
        CHECK(zero.parameters.norm() < 1e-12);
    }
    SUBCASE("positions") {
        Eigen::VectorXd shift(4);
        shift << 1e-3, -5e-4, 0.0, 2e-4;
        const TransmissionModel moved(perturbed(control, shift, Wrt::Positions));
        std::vector<double> pdata;
        for (double f : freqs) pdata.push_back(moved.transmittance(f));
        const auto rep = jacobian(control, freqs, Wrt::Positions);
        CHECK(rep.rank < 4);  // translation invariance
        CHECK_THROWS_AS(reconstruct(control, freqs, pdata, Wrt::Positions, Eigen::VectorXd::Zero(4)),
                        ValidationError);
    }
}

TEST_CASE("reconstruction refuses without a symmetry-breaking control") {
    const auto control = chain(4, 0.5);
    std::vector<double> freqs{-1.0, -0.5, -0.2, 0.05, 0.2, 0.5, 1.0, 1.5};
    std::vector<double> data(freqs.size(), 0.5);
    CHECK_THROWS_AS(reconstruct(control, freqs, data, Wrt::Detunings, Eigen::VectorXd::Zero(4)), ValidationError);
}

TEST_CASE("integrated sensitivity") {
    SUBCASE("empty array") {
        Scene s;
        const auto r = integrated_sensitivity(s, Wrt::Detunings);
        CHECK(r.value == 0.0);
    }
    SUBCASE("single emitter matches the closed-form integral") {
        // |dT/dD| integrates to T(inf) - T(0) on each side: total 2
        const auto r = integrated_sensitivity(chain(1, 0.0), Wrt::Detunings);
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-4));
    }
    SUBCASE("halving the window changes the result by less than the tail") {
        const auto s = chain(3, 0.09, {0.05, -0.03, 0.02});
        const auto wide = integrated_sensitivity(s, Wrt::Detunings, 20.0);
        const auto narrow = integrated_sensitivity(s, Wrt::Detunings, 10.0);
        CHECK(std::abs(wide.value - narrow.value) < wide.tail);
        CHECK(wide.tail > 0.0);
    }
}
