#pragma once

// Shared geometry, units and configuration records.
//
// Every quantity inside the library is dimensionless: rates are measured in
// the reference single-emitter decay rate (the guided-mode rate for waveguide
// scenes, the free-space rate otherwise) and lengths in the transition
// wavelength. Physical units only appear at I/O boundaries via `Units`.

#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace subsense {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Free-space wavenumber of the transition in internal units (length unit = wavelength).
inline constexpr double kWavenumber = kTwoPi;

/// Conversion between internal dimensionless values and physical units.
struct Units {
    double rate_unit = 1.0;    ///< reference decay rate in s^-1
    double length_unit = 1.0;  ///< transition wavelength in m

    static Units make(double rate_unit, double length_unit);

    double to_physical_rate(double r) const { return r * rate_unit; }
    double from_physical_rate(double r) const { return r / rate_unit; }
    double to_physical_length(double l) const { return l * length_unit; }
    double from_physical_length(double l) const { return l / length_unit; }
};

enum class Environment { Waveguide1D, FreeSpace };

struct EmitterArray {
    std::vector<Eigen::Vector3d> positions;
    Eigen::Vector3cd dipole = Eigen::Vector3cd::UnitX();
    std::vector<double> detunings;
    Environment environment = Environment::Waveguide1D;
    double kp = 1.0;  ///< guided wavenumber in units of 2*pi/wavelength
    double gamma_prime = 0.0;

    std::size_t size() const { return positions.size(); }
    bool is_waveguide() const { return environment == Environment::Waveguide1D; }
    double guided_wavenumber() const { return kTwoPi * kp; }
    /// Axial coordinates (waveguide scenes).
    std::vector<double> axial() const;

    /// Throws ValidationError if any type invariant is broken.
    void validate() const;
};

/// Spatial detuning pattern, evaluated at emitter positions.
struct DetuningProfile {
    struct None {};
    struct Uniform {
        double value = 0.0;
    };
    /// Two-site pattern (+delta0, -delta0); the site left of the centroid gets +delta0.
    struct Antisymmetric {
        double delta0 = 0.0;
    };
    /// amplitude * sin(spatial_frequency * x)
    struct Sinusoidal1D {
        double amplitude = 0.0;
        double spatial_frequency = 0.0;
    };
    /// slope * x
    struct Linear1D {
        double slope = 0.0;
    };
    /// delta0 * cos(k . r), k in rad per wavelength
    struct PlaneWave2D {
        double delta0 = 0.0;
        Eigen::Vector2d k = Eigen::Vector2d::Zero();
    };
    struct PerSite {
        std::vector<double> values;
    };

    using Kind = std::variant<None, Uniform, Antisymmetric, Sinusoidal1D, Linear1D, PlaneWave2D, PerSite>;
    Kind kind = None{};
    double offset = 0.0;  ///< global shift added on top of the pattern

    std::vector<double> evaluate(std::span<const Eigen::Vector3d> positions) const;
};

enum class Side { Left, Right };

struct GuidedPlaneWave {
    Side from = Side::Left;
};

/// Paraxial Gaussian beam focused at `focus` and propagating along `axis`.
struct GaussianBeam {
    double waist = 1.0;
    Eigen::Vector3d focus = Eigen::Vector3d::Zero();
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

struct DriveField {
    std::variant<GuidedPlaneWave, GaussianBeam> kind = GuidedPlaneWave{};
    double amplitude = 1e-4;  ///< Rabi scale in rate units
    double laser_detuning = 0.0;

    void validate() const;
};

enum class Geometry { Chain, Square, Explicit };

struct ArrayConfig {
    Environment environment = Environment::Waveguide1D;
    Geometry geometry = Geometry::Chain;
    std::size_t count = 0;  ///< chain length
    std::size_t nx = 0, ny = 0;  ///< square lattice sides
    double spacing = 0.0;
    std::vector<Eigen::Vector3d> positions;  ///< explicit geometry
    std::optional<Eigen::Vector3cd> dipole;  ///< mandatory for free space
    double kp = 1.0;
    double gamma_prime = 0.0;
};

struct ArrayScene {
    ArrayConfig array;
    DetuningProfile detuning;
};

/// Chains start at x = 0 and grow along +x; square lattices are centred on the origin in the z = 0 plane.
EmitterArray build_array(const ArrayScene& config);

/// Reflect a chain about its centre; the detuning list comes out reversed.
EmitterArray mirror(const EmitterArray& array);

/// Copy of `array` with new detunings (size must match).
EmitterArray with_detunings(const EmitterArray& array, std::vector<double> detunings);

}  // namespace subsense
