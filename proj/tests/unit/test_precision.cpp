#include <doctest.h>

#include <cmath>
#include <numbers>

#include "subsense/errors.hpp"
#include "subsense/precision.hpp"

using namespace subsense;

namespace {

PrecisionInputs rb_case() {
    const auto& rb = precision_preset("rb-d2");
    PrecisionInputs in;
    in.gamma_0 = rb.gamma_0;
    in.omega_0 = rb.omega_0;
    in.gamma_sub = rb.gamma_0 / 100.0;
    in.atoms = 1000;
    in.excitation = 0.01;
    in.tau = 1.0;
    return in;
}

}  // namespace

TEST_CASE("Rb D2 reference numbers") {
    const auto in = rb_case();
    // gamma_sub / sqrt(p N gamma_0 tau) with gamma_sub = gamma_0/100 and p N = 10
    const double g0 = 2.0 * std::numbers::pi * 6.0666e6;
    const double expected = std::sqrt(g0) / (100.0 * std::sqrt(10.0));
    CHECK(frequency_uncertainty(in) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(frequency_uncertainty(in) > 10.0);
    CHECK(frequency_uncertainty(in) < 30.0);
    const double frac = fractional_precision(in);
    CHECK(frac > 3e-15);
    CHECK(frac < 3e-14);
}

TEST_CASE("scaling laws") {
    auto in = rb_case();
    const double base = frequency_uncertainty(in);
    auto t2 = in;
    t2.tau *= 2;
    CHECK(frequency_uncertainty(t2) == doctest::Approx(base / std::sqrt(2.0)).epsilon(1e-14));
    auto n4 = in;
    n4.atoms *= 4;
    CHECK(frequency_uncertainty(n4) == doctest::Approx(base / 2.0).epsilon(1e-14));
    auto w2 = in;
    w2.omega_0 *= 2;
    CHECK(fractional_precision(w2) == doctest::Approx(fractional_precision(in) / 2.0).epsilon(1e-14));
    auto single = in;
    single.gamma_sub = in.gamma_0;
    single.atoms = 1;
    CHECK(frequency_uncertainty(single) ==
          doctest::Approx(in.gamma_0 / std::sqrt(in.excitation * in.gamma_0 * in.tau)).epsilon(1e-14));
}

TEST_CASE("millihertz preset reaches the 1e-19 regime") {
    const auto& sr = precision_preset("sr-clock");
    PrecisionInputs in;
    in.gamma_0 = sr.gamma_0;
    in.omega_0 = sr.omega_0;
    in.gamma_sub = sr.gamma_0 / 100.0;
    in.atoms = 1000;
    const double frac = fractional_precision(in);
    CHECK(frac > 1e-20);
    CHECK(frac < 1e-18);
}

TEST_CASE("report and validation") {
    const auto r = precision_report(rb_case());
    const double hbar = 1.054571817e-34;
    CHECK(r.power == doctest::Approx(0.01 * 1000 * hbar * r.inputs.omega_0 * r.inputs.gamma_0).epsilon(1e-14));
    CHECK(!r.disclaimer.empty());
    auto bad = rb_case();
    bad.excitation = 0.2;
    CHECK_THROWS_AS(frequency_uncertainty(bad), ValidationError);
    bad = rb_case();
    bad.tau = 0.0;
    CHECK_THROWS_AS(frequency_uncertainty(bad), ValidationError);
    CHECK_THROWS_AS(precision_preset("nope"), ValidationError);
}
