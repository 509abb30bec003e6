#include "subsense/special.hpp"

#include <cmath>
#include <numbers>

#include "subsense/errors.hpp"

namespace subsense::special {

namespace {

using cplx = std::complex<double>;

constexpr double kInvSqrtPi = std::numbers::inv_sqrtpi;

cplx erf_series(cplx z) {
    const cplx z2 = z * z;
    cplx term = z;  // (-1)^n z^(2n+1) / n!
    cplx sum = z;
    for (int n = 1; n < 200; ++n) {
        term *= -z2 / static_cast<double>(n);
        const cplx add = term / static_cast<double>(2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 * kInvSqrtPi * sum;
}

// erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...)))), Re z > 0.
// Modified Lentz evaluation.
cplx erfc_continued_fraction(cplx z) {
    constexpr double tiny = 1e-300;
    cplx f = z;
    cplx C = f;
    cplx D = 0.0;
    for (int n = 1; n < 5000; ++n) {
        const double a = 0.5 * n;
        D = z + a * D;
        if (std::abs(D) < tiny) D = tiny;
        C = z + a / C;
        if (std::abs(C) < tiny) C = tiny;
        D = 1.0 / D;
        const cplx delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-16) return std::exp(-z * z) * kInvSqrtPi / f;
    }
    throw NumericalError("erfc continued fraction did not converge");
}

}  // namespace

std::complex<double> erfc(std::complex<double> z) {
    if (z.imag() == 0.0) return std::erfc(z.real());
    if (z.real() < 0.0) return 2.0 - erfc(-z);
    if (std::abs(z) < 2.5) return 1.0 - erf_series(z);
    return erfc_continued_fraction(z);
}

double erfi(double x) {
    if (std::abs(x) > 6.0) throw ValidationError("erfi argument outside supported range |x| <= 6");
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 400; ++n) {
        term *= x2 / static_cast<double>(n);
        const double add = term / static_cast<double>(2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-17 * std::abs(sum)) break;
    }
    return 2.0 * kInvSqrtPi * sum;
}

}  // namespace subsense::special
