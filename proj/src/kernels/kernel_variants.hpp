#pragma once

// Raw entry points of the individual kernel variants. The AVX2 translation unit includes only
// this header so that no shared inline code is compiled for a wider instruction set than the host.

#include <cstddef>

namespace subsense::kernels::detail {

void sincos_scalar(const double* x, std::size_t n, double* s, double* c);
void waveguide_coupling_scalar(const double* x, std::size_t n, double k, double* J, double* G);
void freespace_coupling_scalar(const double* dx, const double* dy, const double* dz, std::size_t n,
                               const double* dre, const double* dim, double k0, double* J, double* G);

#if defined(SUBSENSE_HAVE_AVX2)
void sincos_avx2(const double* x, std::size_t n, double* s, double* c);
void waveguide_coupling_avx2(const double* x, std::size_t n, double k, double* J, double* G);
void freespace_coupling_avx2(const double* dx, const double* dy, const double* dz, std::size_t n,
                             const double* dre, const double* dim, double k0, double* J, double* G);
#endif

}  // namespace subsense::kernels::detail
