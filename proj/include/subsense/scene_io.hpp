#pragma once

// TOML scene files.
//
//   [units]          rate_unit (s^-1), length_unit (m); optional
//   [array]          environment = "waveguide" | "free_space", geometry = "chain" | "square" | "explicit",
//                    count, nx, ny, spacing, positions = [[x, y, z], ...], dipole = [x, y, z] or
//                    [[re, im], [re, im], [re, im]], kp
//   [drive]          kind = "guided" | "gaussian", from = "left" | "right", waist, focus, axis,
//                    amplitude, laser_detuning
//   [detuning]       kind = "none" | "uniform" | "antisymmetric" | "sinusoidal" | "linear" |
//                    "plane_wave" | "per_site", value, delta0, amplitude, spatial_frequency, slope,
//                    k = [kx, ky] or "corner" (pi/a, pi/a), spatial_frequency = number or "chain"
//                    (pi / (N a)), values = [...], offset
//   [imperfections]  gamma_prime, sigma, motion = "gauss_hermite" | "monte_carlo", order, samples,
//                    seed, replicas, missing_fraction
//   [detection]      kind = "disk" | "on_axis", distance, radius, count
//
// Unknown keys are rejected so that typos do not silently fall back to defaults.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "subsense/core.hpp"
#include "subsense/spectra.hpp"

namespace subsense {

struct SceneSpec {
    ArrayScene config;
    DriveField drive;
    bool derived_waist = false;  ///< Gaussian waist left unset: 0.3 sqrt(N) a
    bool corner_k = false;       ///< plane-wave detuning at (pi/a, pi/a), following the spacing
    bool chain_period = false;   ///< sinusoidal detuning with spatial frequency pi / (N a)
    MotionModel motion;
    DetectionLayout detection;
    double missing_fraction = 0.0;
    std::optional<Units> units;
    std::string source;  ///< original text, hashed into run manifests
};

SceneSpec parse_scene(std::string_view text, std::string_view origin = "<scene>");
/// Throws ValidationError when the file cannot be read or parsed.
SceneSpec load_scene(const std::filesystem::path& path);

/// Resolve the spec into a Scene. Missing atoms need a seed; the remaining sites keep their order.
Scene instantiate(const SceneSpec& spec, std::optional<std::uint64_t> missing_seed = std::nullopt);

/// FNV-1a 64-bit digest of the scene text, as 16 hex digits.
std::string scene_hash(const SceneSpec& spec);

}  // namespace subsense
