#include "subsense/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <numeric>
#include <string>

#include "subsense/errors.hpp"

namespace subsense {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

WarningSink& sink() {
    static WarningSink s = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return s;
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

}  // namespace

void set_warning_sink(WarningSink s) {
    std::lock_guard lock(sink_mutex());
    sink() = std::move(s);
}

void warn(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink()) sink()(message);
}

Units Units::make(double rate_unit, double length_unit) {
    if (!(rate_unit > 0.0) || !(length_unit > 0.0))
        throw ValidationError("units: rate and length units must be positive");
    return Units{rate_unit, length_unit};
}

std::vector<double> EmitterArray::axial() const {
    std::vector<double> x(positions.size());
    std::transform(positions.begin(), positions.end(), x.begin(), [](const auto& p) { return p.x(); });
    return x;
}

void EmitterArray::validate() const {
    if (detunings.size() != positions.size())
        throw ValidationError("detuning list length " + std::to_string(detunings.size()) +
                              " does not match emitter count " + std::to_string(positions.size()));
    if (!(gamma_prime >= 0.0)) throw ValidationError("gamma_prime must be non-negative");
    for (double d : detunings)
        if (!std::isfinite(d)) throw ValidationError("detunings must be finite");
    if (is_waveguide()) {
        if (!(kp > 0.0)) throw ValidationError("guided wavenumber must be positive");
        for (const auto& p : positions)
            if (p.y() != 0.0 || p.z() != 0.0)
                throw ValidationError("waveguide emitters must lie on the axis (y = z = 0)");
    } else {
        if (std::abs(dipole.norm() - 1.0) > 1e-12) throw ValidationError("dipole orientation must have unit norm");
    }
}

std::vector<double> DetuningProfile::evaluate(std::span<const Eigen::Vector3d> positions) const {
    const std::size_t n = positions.size();
    std::vector<double> out(n, 0.0);
    std::visit(Overloaded{
                   [&](const None&) {},
                   [&](const Uniform& u) { std::fill(out.begin(), out.end(), u.value); },
                   [&](const Antisymmetric& a) {
                       if (n != 2) throw ValidationError("antisymmetric detuning requires exactly two emitters");
                       const double centre = 0.5 * (positions[0].x() + positions[1].x());
                       for (std::size_t j = 0; j < n; ++j) out[j] = positions[j].x() < centre ? a.delta0 : -a.delta0;
                       if (out[0] == out[1]) throw ValidationError("antisymmetric detuning needs distinct positions");
                   },
                   [&](const Sinusoidal1D& s) {
                       for (std::size_t j = 0; j < n; ++j)
                           out[j] = s.amplitude * std::sin(s.spatial_frequency * positions[j].x());
                   },
                   [&](const Linear1D& l) {
                       for (std::size_t j = 0; j < n; ++j) out[j] = l.slope * positions[j].x();
                   },
                   [&](const PlaneWave2D& p) {
                       for (std::size_t j = 0; j < n; ++j)
                           out[j] = p.delta0 * std::cos(p.k.x() * positions[j].x() + p.k.y() * positions[j].y());
                   },
                   [&](const PerSite& p) {
                       if (p.values.size() != n)
                           throw ValidationError("per-site detuning list has " + std::to_string(p.values.size()) +
                                                 " entries for " + std::to_string(n) + " emitters");
                       out = p.values;
                   },
               },
               kind);
    if (offset != 0.0)
        for (double& d : out) d += offset;
    return out;
}

void DriveField::validate() const {
    if (!std::isfinite(amplitude) || amplitude <= 0.0) throw ValidationError("drive amplitude must be positive");
    if (!std::isfinite(laser_detuning)) throw ValidationError("laser detuning must be finite");
    if (const auto* g = std::get_if<GaussianBeam>(&kind)) {
        if (!(g->waist > 0.0)) throw ValidationError("beam waist must be positive");
        if (!(g->axis.norm() > 0.0)) throw ValidationError("beam axis must be non-zero");
    }
}

EmitterArray build_array(const ArrayScene& config) {
    const ArrayConfig& c = config.array;
    EmitterArray array;
    array.environment = c.environment;
    array.kp = c.kp;
    array.gamma_prime = c.gamma_prime;

    switch (c.geometry) {
        case Geometry::Chain:
            if (c.count == 0) throw ValidationError("chain must contain at least one emitter");
            if (c.count > 1 && !(c.spacing > 0.0)) throw ValidationError("chain spacing must be positive");
            for (std::size_t j = 0; j < c.count; ++j)
                array.positions.emplace_back(static_cast<double>(j) * c.spacing, 0.0, 0.0);
            break;
        case Geometry::Square: {
            if (c.nx == 0 || c.ny == 0) throw ValidationError("square lattice sides must be positive");
            if (!(c.spacing > 0.0)) throw ValidationError("lattice spacing must be positive");
            if (c.environment == Environment::Waveguide1D)
                throw ValidationError("square lattices are only defined in free space");
            const double cx = 0.5 * static_cast<double>(c.nx - 1);
            const double cy = 0.5 * static_cast<double>(c.ny - 1);
            for (std::size_t iy = 0; iy < c.ny; ++iy)
                for (std::size_t ix = 0; ix < c.nx; ++ix)
                    array.positions.emplace_back((static_cast<double>(ix) - cx) * c.spacing,
                                                 (static_cast<double>(iy) - cy) * c.spacing, 0.0);
            break;
        }
        case Geometry::Explicit:
            array.positions = c.positions;
            if (array.positions.empty()) throw ValidationError("explicit geometry lists no positions");
            break;
    }

    if (c.environment == Environment::FreeSpace) {
        if (!c.dipole) throw ValidationError("free-space scenes require an explicit dipole orientation");
        const double norm = c.dipole->norm();
        if (!(norm > 0.0)) throw ValidationError("dipole orientation has zero norm");
        array.dipole = *c.dipole / norm;
    } else if (c.dipole) {
        const double norm = c.dipole->norm();
        if (!(norm > 0.0)) throw ValidationError("dipole orientation has zero norm");
        array.dipole = *c.dipole / norm;
    }

    array.detunings = config.detuning.evaluate(array.positions);
    array.validate();
    return array;
}

EmitterArray mirror(const EmitterArray& array) {
    if (!array.is_waveguide()) throw ValidationError("mirror is defined for 1D chains only");
    const std::size_t n = array.size();
    EmitterArray out = array;
    if (n == 0) return out;
    const auto [lo, hi] = std::minmax_element(array.positions.begin(), array.positions.end(),
                                              [](const auto& a, const auto& b) { return a.x() < b.x(); });
    const double span = lo->x() + hi->x();
    for (std::size_t j = 0; j < n; ++j) {
        out.positions[j] = Eigen::Vector3d(span - array.positions[n - 1 - j].x(), 0.0, 0.0);
        out.detunings[j] = array.detunings[n - 1 - j];
    }
    return out;
}

EmitterArray with_detunings(const EmitterArray& array, std::vector<double> detunings) {
    if (detunings.size() != array.size()) throw ValidationError("detuning list length mismatch");
    EmitterArray out = array;
    out.detunings = std::move(detunings);
    return out;
}

}  // namespace subsense
