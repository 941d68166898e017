#pragma once

#include <complex>

namespace spikebayes::bessel {

// Bessel functions of the first and second kind, orders 0 and 1, for x > 0.
// Power series (extended precision) for x < 20, Hankel asymptotic expansion
// beyond; absolute error below 1e-12 on [1e-3, 1e3].
double j0(double x);
double j1(double x);
double y0(double x);
double y1(double x);

/// H_0^(1)(x) = J0(x) + i Y0(x)
std::complex<double> hankel1_0(double x);
/// H_1^(1)(x) = J1(x) + i Y1(x)
std::complex<double> hankel1_1(double x);

}  // namespace spikebayes::bessel
