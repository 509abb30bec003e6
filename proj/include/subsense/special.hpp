#pragma once

#include <complex>

namespace subsense::special {

/// Complementary error function of a complex argument.
/// Maclaurin series of erf for |z| < 2.5, Laplace continued fraction otherwise (right half-plane),
/// reflection erfc(z) = 2 - erfc(-z) for Re z < 0.
std::complex<double> erfc(std::complex<double> z);

/// Imaginary error function erfi(x) = -i erf(ix), real argument.
double erfi(double x);

}  // namespace subsense::special
