#include <atomic>
#include <cstdlib>
#include <string>

#include "kernel_variants.hpp"
#include "subsense/errors.hpp"
#include "subsense/kernels.hpp"

namespace subsense::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SUBSENSE_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    Isa best = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
    if (const char* env = std::getenv("SUBSENSE_ISA")) {
        const std::string v(env);
        if (v == "scalar") return Isa::Scalar;
        if (v == "avx2" && best == Isa::Avx2) return Isa::Avx2;
    }
    return best;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

void check_sizes(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw ValidationError(std::string(what) + ": span size mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
    }
    return "unknown";
}

bool isa_supported(Isa isa) {
    return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!isa_supported(isa)) throw ValidationError("instruction set " + std::string(isa_name(isa)) + " not supported");
    current().store(isa, std::memory_order_relaxed);
}

void sincos(std::span<const double> x, std::span<double> s, std::span<double> c) {
    check_sizes(x.size(), s.size(), "sincos");
    check_sizes(x.size(), c.size(), "sincos");
#if defined(SUBSENSE_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) return detail::sincos_avx2(x.data(), x.size(), s.data(), c.data());
#endif
    detail::sincos_scalar(x.data(), x.size(), s.data(), c.data());
}

void waveguide_coupling(std::span<const double> separation, double k, std::span<double> J, std::span<double> Gamma) {
    check_sizes(separation.size(), J.size(), "waveguide_coupling");
    check_sizes(separation.size(), Gamma.size(), "waveguide_coupling");
#if defined(SUBSENSE_HAVE_AVX2)
    if (active_isa() == Isa::Avx2)
        return detail::waveguide_coupling_avx2(separation.data(), separation.size(), k, J.data(), Gamma.data());
#endif
    detail::waveguide_coupling_scalar(separation.data(), separation.size(), k, J.data(), Gamma.data());
}

void freespace_coupling(std::span<const double> dx, std::span<const double> dy, std::span<const double> dz,
                        const Eigen::Vector3cd& dipole, double k0, std::span<double> J, std::span<double> Gamma) {
    check_sizes(dx.size(), dy.size(), "freespace_coupling");
    check_sizes(dx.size(), dz.size(), "freespace_coupling");
    check_sizes(dx.size(), J.size(), "freespace_coupling");
    check_sizes(dx.size(), Gamma.size(), "freespace_coupling");
    const double dre[3] = {dipole.x().real(), dipole.y().real(), dipole.z().real()};
    const double dim[3] = {dipole.x().imag(), dipole.y().imag(), dipole.z().imag()};
#if defined(SUBSENSE_HAVE_AVX2)
    if (active_isa() == Isa::Avx2)
        return detail::freespace_coupling_avx2(dx.data(), dy.data(), dz.data(), dx.size(), dre, dim, k0, J.data(),
                                               Gamma.data());
#endif
    detail::freespace_coupling_scalar(dx.data(), dy.data(), dz.data(), dx.size(), dre, dim, k0, J.data(),
                                      Gamma.data());
}

}  // namespace subsense::kernels
