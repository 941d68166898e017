#include "spikebayes/bessel.hpp"

#include <cmath>

#include "spikebayes/errors.hpp"

namespace spikebayes::bessel {

namespace {

constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;
constexpr long double kPi = 3.141592653589793238462643383279502884L;
constexpr double kSeriesCutoff = 20.0;

void check_argument(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument("bessel argument must be positive and finite");
}

struct SeriesPair {
    long double j;
    long double y;
};

// J0 and Y0 from their ascending series.
SeriesPair series_order0(long double x) {
    const long double q = x * x / 4.0L;
    long double term = 1.0L;  // (-q)^k / (k!)^2
    long double j = 1.0L;
    long double harmonic = 0.0L;
    long double ysum = 0.0L;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        harmonic += 1.0L / k;
        j += term;
        ysum -= harmonic * term;  // (-1)^{k+1} H_k q^k / (k!)^2
        if (std::fabs(term) * (1.0L + harmonic) < 1e-22L * std::fabs(j) && k > 2 * x) break;
    }
    const long double y = (2.0L / kPi) * ((std::log(x / 2.0L) + kEulerGamma) * j + ysum);
    return {j, y};
}

// J1 and Y1 from their ascending series.
SeriesPair series_order1(long double x) {
    const long double half = x / 2.0L;
    const long double q = half * half;
    long double term = half;  // (-q)^k (x/2) / (k! (k+1)!)
    long double j = term;
    long double psi_k1 = -kEulerGamma;        // psi(k+1)
    long double psi_k2 = 1.0L - kEulerGamma;  // psi(k+2)
    long double psum = (psi_k1 + psi_k2) * term;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<long double>(k) * (k + 1));
        psi_k1 += 1.0L / k;
        psi_k2 += 1.0L / (k + 1);
        j += term;
        psum += (psi_k1 + psi_k2) * term;
        if (std::fabs(term) * (std::fabs(psi_k1) + std::fabs(psi_k2) + 1.0L) < 1e-22L * std::fabs(j) && k > 2 * x)
            break;
    }
    const long double y = -1.0L / (kPi * half) + (2.0L / kPi) * std::log(half) * j - psum / kPi;
    return {j, y};
}

// Hankel asymptotic expansion for order nu in {0, 1}.
SeriesPair asymptotic(int nu, double x) {
    const double mu = 4.0 * nu * nu;
    double p = 0.0;
    double q = 0.0;
    double a = 1.0;  // a_k(nu) / x^k
    double last = INFINITY;
    for (int k = 0; k < 60; ++k) {
        if (k > 0) {
            const double odd = 2.0 * k - 1.0;
            a *= (mu - odd * odd) / (k * 8.0 * x);
        }
        const double mag = std::fabs(a);
        if (mag > last) break;  // asymptotic series started to diverge
        last = mag;
        const int sign = ((k / 2) % 2 == 0) ? 1 : -1;
        if (k % 2 == 0) {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if (mag < 1e-17) break;
    }
    const double chi = x - (0.5 * nu + 0.25) * M_PI;
    const double amp = std::sqrt(2.0 / (M_PI * x));
    return {amp * (p * std::cos(chi) - q * std::sin(chi)), amp * (p * std::sin(chi) + q * std::cos(chi))};
}

SeriesPair order0(double x) {
    check_argument(x);
    return x < kSeriesCutoff ? series_order0(x) : asymptotic(0, x);
}

SeriesPair order1(double x) {
    check_argument(x);
    return x < kSeriesCutoff ? series_order1(x) : asymptotic(1, x);
}

}  // namespace

double j0(double x) { return static_cast<double>(order0(x).j); }
double y0(double x) { return static_cast<double>(order0(x).y); }
double j1(double x) { return static_cast<double>(order1(x).j); }
double y1(double x) { return static_cast<double>(order1(x).y); }

std::complex<double> hankel1_0(double x) {
    const auto v = order0(x);
    return {static_cast<double>(v.j), static_cast<double>(v.y)};
}

std::complex<double> hankel1_1(double x) {
    const auto v = order1(x);
    return {static_cast<double>(v.j), static_cast<double>(v.y)};
}

}  // namespace spikebayes::bessel
