#include <cmath>

#include "kernel_variants.hpp"

namespace subsense::kernels::detail {

void sincos_scalar(const double* x, std::size_t n, double* s, double* c) {
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = std::sin(x[i]);
        c[i] = std::cos(x[i]);
    }
}

void waveguide_coupling_scalar(const double* x, std::size_t n, double k, double* J, double* G) {
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = k * std::abs(x[i]);
        J[i] = 0.5 * std::sin(phase);
        G[i] = std::cos(phase);
    }
}

// With u = k0 r and P = |r_hat . d|^2 the contracted tensor reduces to
//   J     = -3/4 [(1-P) cos(u)/u + (3P-1)(cos(u) + u sin(u))/u^3]
//   Gamma =  3/2 [(1-P) sin(u)/u + (3P-1)(sin(u) - u cos(u))/u^3]
// The bracket (sin u - u cos u)/u^3 cancels catastrophically for small u and is
// replaced by its Taylor series below u = 0.1.
void freespace_coupling_scalar(const double* dx, const double* dy, const double* dz, std::size_t n,
                               const double* dre, const double* dim, double k0, double* J, double* G) {
    for (std::size_t i = 0; i < n; ++i) {
        const double r2 = dx[i] * dx[i] + dy[i] * dy[i] + dz[i] * dz[i];
        const double r = std::sqrt(r2);
        const double pr = dx[i] * dre[0] + dy[i] * dre[1] + dz[i] * dre[2];
        const double pi = dx[i] * dim[0] + dy[i] * dim[1] + dz[i] * dim[2];
        const double P = (pr * pr + pi * pi) / r2;
        const double u = k0 * r;
        const double s = std::sin(u);
        const double c = std::cos(u);
        const double inv_u = 1.0 / u;
        const double inv_u3 = inv_u * inv_u * inv_u;
        double odd;
        if (u < 0.1) {
            const double u2 = u * u;
            odd = 1.0 / 3.0 + u2 * (-1.0 / 30.0 + u2 * (1.0 / 840.0 + u2 * (-1.0 / 45360.0 + u2 * (1.0 / 3991680.0))));
        } else {
            odd = (s - u * c) * inv_u3;
        }
        const double even = (c + u * s) * inv_u3;
        J[i] = -0.75 * ((1.0 - P) * c * inv_u + (3.0 * P - 1.0) * even);
        G[i] = 1.5 * ((1.0 - P) * s * inv_u + (3.0 * P - 1.0) * odd);
    }
}

}  // namespace subsense::kernels::detail
