#include <doctest.h>

#include <cmath>

#include "subsense/errors.hpp"
#include "subsense/scene_io.hpp"

using namespace subsense;

TEST_CASE("two-atom waveguide scene") {
    const auto spec = parse_scene(R"(
[array]
environment = "waveguide"
count = 2
spacing = 0.04
[detuning]
kind = "uniform"
value = 0.2
)");
    const auto s = instantiate(spec);
    REQUIRE(s.array.size() == 2);
    CHECK(s.array.positions[1].x() == doctest::Approx(0.04));
    CHECK(s.array.detunings[0] == 0.2);
    CHECK(s.array.detunings[1] == 0.2);
    CHECK(std::holds_alternative<GuidedPlaneWave>(s.drive.kind));
}

TEST_CASE("square lattice with plane-wave control and derived waist") {
    const auto spec = parse_scene(R"(
[array]
environment = "free_space"
geometry = "square"
nx = 10
spacing = 0.5
dipole = [1, 0, 0]
[detuning]
kind = "plane_wave"
delta0 = 0.1
k = [6.283185307179586, 6.283185307179586]
)");
    const auto s = instantiate(spec);
    REQUIRE(s.array.size() == 100);
    for (std::size_t j = 0; j < 100; ++j) {
        const auto& r = s.array.positions[j];
        CHECK(s.array.detunings[j] == doctest::Approx(0.1 * std::cos(M_PI * (r.x() + r.y()) / 0.5)));
    }
    const auto& g = std::get<GaussianBeam>(s.drive.kind);
    CHECK(g.waist == doctest::Approx(0.3 * 10 * 0.5));
}

TEST_CASE("complex dipole and explicit positions") {
    const auto spec = parse_scene(R"(
[array]
environment = "free_space"
geometry = "explicit"
positions = [[0, 0, 0], [0.3, 0, 0]]
dipole = [[1, 0], [0, 1], [0, 0]]
[drive]
waist = 0.8
[detection]
kind = "on_axis"
distance = 2.0
)");
    const auto s = instantiate(spec);
    CHECK(std::abs(s.array.dipole(1) - cplx(0, 1.0 / std::sqrt(2.0))) < 1e-15);
    CHECK(std::holds_alternative<DetectionLayout::SinglePointOnAxis>(s.detection.kind));
}

TEST_CASE("missing atoms need a seed and are reproducible") {
    const auto spec = parse_scene(R"(
[array]
environment = "free_space"
geometry = "square"
nx = 10
spacing = 0.5
dipole = [1, 0, 0]
[imperfections]
missing_fraction = 0.1
)");
    CHECK_THROWS_AS(instantiate(spec), ValidationError);
    const auto a = instantiate(spec, 5), b = instantiate(spec, 5), c = instantiate(spec, 6);
    CHECK(a.array.size() == 90);
    CHECK(a.array.positions == b.array.positions);
    CHECK(a.array.positions != c.array.positions);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_scene("[array]\ncount = 2\nspacing = 0.1\nspcing = 3\n"), ValidationError);
    CHECK_THROWS_AS(parse_scene("[drive]\nkind = \"guided\"\n"), ValidationError);
    CHECK_THROWS_AS(parse_scene("[array\n"), ValidationError);
    CHECK_THROWS_AS(parse_scene("[array]\ncount = 0\n"), ValidationError);
    CHECK_THROWS_AS(parse_scene("[array]\nenvironment = \"free_space\"\ncount = 2\nspacing = 0.1\n"), ValidationError);
    CHECK_THROWS_AS(parse_scene("[array]\ncount = 2\nspacing = 0.1\n[imperfections]\nsigma = 0.01\nmotion = "
                                "\"monte_carlo\"\n"),
                    ValidationError);
    CHECK_THROWS_AS(load_scene("/nonexistent/scene.toml"), ValidationError);
}

TEST_CASE("hash tracks the text") {
    const auto a = parse_scene("[array]\ncount = 2\nspacing = 0.1\n");
    const auto b = parse_scene("[array]\ncount = 2\nspacing = 0.2\n");
    CHECK(scene_hash(a).size() == 16);
    CHECK(scene_hash(a) != scene_hash(b));
    CHECK(scene_hash(a) == scene_hash(parse_scene(a.source)));
}

TEST_CASE("unit round trip") {
    const auto spec = parse_scene("[units]\nrate_unit = 3.8e7\nlength_unit = 7.8e-7\n[array]\ncount = 1\n");
    REQUIRE(spec.units);
    for (double v : {0.04, 0.2, -1.3, 1e-3}) {
        CHECK(spec.units->from_physical_rate(spec.units->to_physical_rate(v)) == doctest::Approx(v).epsilon(1e-15));
        CHECK(spec.units->from_physical_length(spec.units->to_physical_length(v)) ==
              doctest::Approx(v).epsilon(1e-15));
    }
}

TEST_CASE("spacing-relative detuning patterns follow the spacing") {
    auto spec = parse_scene(R"(
[array]
environment = "free_space"
geometry = "square"
nx = 4
spacing = 0.3
dipole = [1, 0, 0]
[detuning]
kind = "plane_wave"
delta0 = 0.1
k = "corner"
)");
    spec.config.array.spacing = 0.45;
    const auto s = instantiate(spec);
    for (std::size_t j = 0; j < s.array.size(); ++j) {
        const auto& r = s.array.positions[j];
        CHECK(s.array.detunings[j] == doctest::Approx(0.1 * std::cos(M_PI * (r.x() + r.y()) / 0.45)));
    }
    const auto chain = instantiate(parse_scene(R"(
[array]
count = 5
spacing = 0.2
[detuning]
kind = "sinusoidal"
amplitude = 0.1
spatial_frequency = "chain"
)"));
    for (std::size_t j = 0; j < 5; ++j)
        CHECK(chain.array.detunings[j] == doctest::Approx(0.1 * std::sin(M_PI * 0.2 * j / (5 * 0.2))));
}
