#include <doctest.h>

#include <cmath>
#include <vector>

#include "subsense/modes.hpp"

using namespace subsense;

namespace {

EmitterArray chain(std::size_t n, double a, double gamma_prime = 0.0) {
    EmitterArray arr;
    for (std::size_t j = 0; j < n; ++j) arr.positions.push_back({a * static_cast<double>(j), 0, 0});
    arr.detunings.assign(n, 0.0);
    arr.gamma_prime = gamma_prime;
    return arr;
}

}  // namespace

TEST_CASE("two guided-mode emitters reproduce the analytic eigenvalues") {
    for (double a : {0.05, 0.125, 0.3, 0.5, 0.71}) {
        const auto c = coupling_matrix(chain(2, a));
        const auto modes = eigenmodes(c, std::vector<double>{0.0, 0.0});
        const auto [sym, anti] = two_atom_eigenvalues(a);
        // compare as unordered pairs
        const cplx l0 = modes.eigenvalues(0), l1 = modes.eigenvalues(1);
        const double direct = std::abs(l0 - sym) + std::abs(l1 - anti);
        const double swapped = std::abs(l0 - anti) + std::abs(l1 - sym);
        CHECK(std::min(direct, swapped) < 1e-12);
    }
}

TEST_CASE("modes are sorted by decay rate and classified") {
    const auto c = coupling_matrix(chain(6, 0.13, 0.2));
    const auto modes = eigenmodes(c, std::vector<double>(6, 0.0));
    for (Eigen::Index a = 1; a < modes.size(); ++a) CHECK(modes.decay(a - 1) <= modes.decay(a) + 1e-10);
    for (Eigen::Index a = 0; a < modes.size(); ++a) {
        const double radiative = modes.decay(a) - 0.2;
        if (radiative > 1.0 + 1e-6) CHECK(modes.classes[static_cast<std::size_t>(a)] == ModeClass::Superradiant);
        if (radiative < 1.0 - 1e-6) CHECK(modes.classes[static_cast<std::size_t>(a)] == ModeClass::Subradiant);
    }
    CHECK(mode_class_name(ModeClass::Subradiant) == "subradiant");
}

TEST_CASE("eigenpairs satisfy H v = lambda v and the trace is preserved") {
    const auto arr = chain(5, 0.21, 0.05);
    const std::vector<double> delta{0.1, -0.2, 0.05, 0.0, 0.3};
    const auto c = coupling_matrix(arr);
    const auto H = system_hamiltonian(c, delta);
    const auto modes = eigenmodes(c, delta);
    for (Eigen::Index a = 0; a < modes.size(); ++a) {
        const Eigen::VectorXcd v = modes.eigenvectors.col(a);
        CHECK((H * v - modes.eigenvalues(a) * v).norm() < 1e-12 * v.norm());
    }
    CHECK(std::abs(modes.eigenvalues.sum() - H.trace()) < 1e-12);
    const auto ev = mode_eigenvalues(c, delta);
    CHECK((ev - modes.eigenvalues).norm() < 1e-12);
}

TEST_CASE("a uniform detuning shifts every eigenvalue rigidly") {
    const auto c = coupling_matrix(chain(4, 0.17));
    const auto base = mode_eigenvalues(c, std::vector<double>(4, 0.0));
    const auto shifted = mode_eigenvalues(c, std::vector<double>(4, 0.37));
    CHECK((shifted - (base.array() - 0.37).matrix()).norm() < 1e-12);
}

TEST_CASE("dressed resonances solve the two-mode secular equation") {
    const double JB = 0.4, JD = -0.3, d0 = 0.25;
    const auto [p, m] = dressed_resonances(JB, JD, d0);
    for (double w : {p, m}) CHECK((JB - w) * (JD - w) - d0 * d0 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p > m);
}
