// AVX2 + FMA variants. Compiled with -mavx2 -mfma; must only be reached through the runtime
// dispatcher after a CPU feature check.

#include <immintrin.h>

#include "kernel_variants.hpp"

namespace subsense::kernels::detail {

namespace {

constexpr std::size_t kLanes = 4;

// Cephes-style sin/cos: reduction by pi/4 with a three-part constant, then minimax
// polynomials on [-pi/4, pi/4].
constexpr double kFourOverPi = 1.27323954473516268615;
constexpr double kDP1 = 7.85398125648498535156E-1;
constexpr double kDP2 = 3.77489470793079817668E-8;
constexpr double kDP3 = 2.69515142907905952645E-15;

constexpr double kSin[6] = {1.58962301576546568060E-10, -2.50507477628578072866E-8, 2.75573136213857245213E-6,
                            -1.98412698295895385996E-4, 8.33333333332211858878E-3, -1.66666666666666307295E-1};
constexpr double kCos[6] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9, -2.75573141792967388112E-7,
                            2.48015872888517045348E-5,   -1.38888888888730564116E-3, 4.16666666666665929218E-2};

inline __m256d poly5(__m256d z, const double* c) {
    __m256d p = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 6; ++i) p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(c[i]));
    return p;
}

inline void sincos_pd(__m256d x, __m256d& s_out, __m256d& c_out) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d ax = _mm256_andnot_pd(sign_mask, x);
    const __m256d x_sign = _mm256_and_pd(sign_mask, x);

    __m256d y = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(kFourOverPi)));
    // make y even
    const __m256d half_y = _mm256_mul_pd(y, _mm256_set1_pd(0.5));
    const __m256d odd = _mm256_cmp_pd(_mm256_floor_pd(half_y), half_y, _CMP_NEQ_OQ);
    y = _mm256_add_pd(y, _mm256_and_pd(odd, _mm256_set1_pd(1.0)));
    // octant in {0, 2, 4, 6}
    const __m256d j8 = _mm256_sub_pd(
        y, _mm256_mul_pd(_mm256_set1_pd(8.0), _mm256_floor_pd(_mm256_mul_pd(y, _mm256_set1_pd(0.125)))));

    __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP1), ax);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP2), z);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(kDP3), z);
    const __m256d zz = _mm256_mul_pd(z, z);

    const __m256d ps = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), poly5(zz, kSin), z);
    const __m256d pc = _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), poly5(zz, kCos),
                                       _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0)));

    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d six = _mm256_set1_pd(6.0);
    const __m256d swap = _mm256_or_pd(_mm256_cmp_pd(j8, two, _CMP_EQ_OQ), _mm256_cmp_pd(j8, six, _CMP_EQ_OQ));
    const __m256d upper = _mm256_cmp_pd(j8, _mm256_set1_pd(4.0), _CMP_GE_OQ);

    __m256d s = _mm256_blendv_pd(ps, pc, swap);
    __m256d c = _mm256_blendv_pd(pc, ps, swap);
    // sin: negative in octants 4, 6 and for negative x
    s = _mm256_xor_pd(s, _mm256_and_pd(upper, sign_mask));
    s = _mm256_xor_pd(s, x_sign);
    // cos: negative in octants 2, 4
    const __m256d cneg = _mm256_or_pd(_mm256_cmp_pd(j8, two, _CMP_EQ_OQ),
                                      _mm256_cmp_pd(j8, _mm256_set1_pd(4.0), _CMP_EQ_OQ));
    c = _mm256_xor_pd(c, _mm256_and_pd(cneg, sign_mask));
    s_out = s;
    c_out = c;
}

}  // namespace

void sincos_avx2(const double* x, std::size_t n, double* s, double* c) {
    const std::size_t body = n - n % kLanes;
    for (std::size_t i = 0; i < body; i += kLanes) {
        __m256d vs, vc;
        sincos_pd(_mm256_loadu_pd(x + i), vs, vc);
        _mm256_storeu_pd(s + i, vs);
        _mm256_storeu_pd(c + i, vc);
    }
    if (body < n) sincos_scalar(x + body, n - body, s + body, c + body);
}

void waveguide_coupling_avx2(const double* x, std::size_t n, double k, double* J, double* G) {
    const std::size_t body = n - n % kLanes;
    const __m256d vk = _mm256_set1_pd(k);
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    const __m256d half = _mm256_set1_pd(0.5);
    for (std::size_t i = 0; i < body; i += kLanes) {
        const __m256d phase = _mm256_mul_pd(vk, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i)));
        __m256d vs, vc;
        sincos_pd(phase, vs, vc);
        _mm256_storeu_pd(J + i, _mm256_mul_pd(half, vs));
        _mm256_storeu_pd(G + i, vc);
    }
    if (body < n) waveguide_coupling_scalar(x + body, n - body, k, J + body, G + body);
}

void freespace_coupling_avx2(const double* dx, const double* dy, const double* dz, std::size_t n,
                             const double* dre, const double* dim, double k0, double* J, double* G) {
    const std::size_t body = n - n % kLanes;
    const __m256d rx = _mm256_set1_pd(dre[0]), ry = _mm256_set1_pd(dre[1]), rz = _mm256_set1_pd(dre[2]);
    const __m256d ix = _mm256_set1_pd(dim[0]), iy = _mm256_set1_pd(dim[1]), iz = _mm256_set1_pd(dim[2]);
    const __m256d vk = _mm256_set1_pd(k0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d three = _mm256_set1_pd(3.0);
    for (std::size_t i = 0; i < body; i += kLanes) {
        const __m256d x = _mm256_loadu_pd(dx + i);
        const __m256d y = _mm256_loadu_pd(dy + i);
        const __m256d z = _mm256_loadu_pd(dz + i);
        const __m256d r2 = _mm256_fmadd_pd(x, x, _mm256_fmadd_pd(y, y, _mm256_mul_pd(z, z)));
        const __m256d r = _mm256_sqrt_pd(r2);
        const __m256d pr = _mm256_fmadd_pd(x, rx, _mm256_fmadd_pd(y, ry, _mm256_mul_pd(z, rz)));
        const __m256d pi = _mm256_fmadd_pd(x, ix, _mm256_fmadd_pd(y, iy, _mm256_mul_pd(z, iz)));
        const __m256d P = _mm256_div_pd(_mm256_fmadd_pd(pr, pr, _mm256_mul_pd(pi, pi)), r2);
        const __m256d u = _mm256_mul_pd(vk, r);
        __m256d s, c;
        sincos_pd(u, s, c);
        const __m256d inv_u = _mm256_div_pd(one, u);
        const __m256d inv_u3 = _mm256_mul_pd(inv_u, _mm256_mul_pd(inv_u, inv_u));

        const __m256d u2 = _mm256_mul_pd(u, u);
        __m256d series = _mm256_set1_pd(1.0 / 3991680.0);
        series = _mm256_fmadd_pd(series, u2, _mm256_set1_pd(-1.0 / 45360.0));
        series = _mm256_fmadd_pd(series, u2, _mm256_set1_pd(1.0 / 840.0));
        series = _mm256_fmadd_pd(series, u2, _mm256_set1_pd(-1.0 / 30.0));
        series = _mm256_fmadd_pd(series, u2, _mm256_set1_pd(1.0 / 3.0));
        const __m256d direct = _mm256_mul_pd(_mm256_fnmadd_pd(u, c, s), inv_u3);
        const __m256d small = _mm256_cmp_pd(u, _mm256_set1_pd(0.1), _CMP_LT_OQ);
        const __m256d odd = _mm256_blendv_pd(direct, series, small);
        const __m256d even = _mm256_mul_pd(_mm256_fmadd_pd(u, s, c), inv_u3);

        const __m256d one_m_p = _mm256_sub_pd(one, P);
        const __m256d three_p_m1 = _mm256_fmsub_pd(three, P, one);
        const __m256d jv = _mm256_fmadd_pd(_mm256_mul_pd(one_m_p, c), inv_u, _mm256_mul_pd(three_p_m1, even));
        const __m256d gv = _mm256_fmadd_pd(_mm256_mul_pd(one_m_p, s), inv_u, _mm256_mul_pd(three_p_m1, odd));
        _mm256_storeu_pd(J + i, _mm256_mul_pd(_mm256_set1_pd(-0.75), jv));
        _mm256_storeu_pd(G + i, _mm256_mul_pd(_mm256_set1_pd(1.5), gv));
    }
    if (body < n) freespace_coupling_scalar(dx + body, dy + body, dz + body, n - body, dre, dim, k0, J + body, G + body);
}

}  // namespace subsense::kernels::detail
