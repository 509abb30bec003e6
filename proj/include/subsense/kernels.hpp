#pragma once

// Data-parallel inner loops of the coupling assembly.
//
// Each kernel has a scalar reference implementation and an AVX2+FMA variant;
// the variant is selected once at runtime from the CPU feature flags and can
// be overridden with SUBSENSE_ISA=scalar|avx2 or `set_isa`. Both variants are
// kept numerically equivalent (see tests/test_kernels.cpp).

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Core>

namespace subsense::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
Isa active_isa();
/// Throws ValidationError when the requested ISA is not available.
void set_isa(Isa isa);

class ScopedIsa {
public:
    explicit ScopedIsa(Isa isa) : previous_(active_isa()) { set_isa(isa); }
    ~ScopedIsa() { set_isa(previous_); }
    ScopedIsa(const ScopedIsa&) = delete;
    ScopedIsa& operator=(const ScopedIsa&) = delete;

private:
    Isa previous_;
};

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c);

/// Guided-mode couplings for axial separations: J = sin(k|x|)/2, Gamma = cos(k|x|).
void waveguide_coupling(std::span<const double> separation, double k, std::span<double> J,
                        std::span<double> Gamma);

/// Contracted free-space dipole couplings d*.G(r).d for separations (dx, dy, dz), in units of the
/// free-space decay rate. Separations must be non-zero.
void freespace_coupling(std::span<const double> dx, std::span<const double> dy, std::span<const double> dz,
                        const Eigen::Vector3cd& dipole, double k0, std::span<double> J, std::span<double> Gamma);

}  // namespace subsense::kernels
