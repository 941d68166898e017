#include "spikebayes/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "spikebayes/errors.hpp"

namespace spikebayes {

double log_sum_exp(std::span<const double> x) {
    if (x.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(x.begin(), x.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

double log_mean_exp(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("log_mean_exp of an empty sample");
    return log_sum_exp(x) - std::log(static_cast<double>(x.size()));
}

double mean(std::span<const double> x) {
    if (x.empty()) throw InvalidArgument("mean of an empty sample");
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double integrated_autocorrelation_time(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 4) return 1.0;
    const double m = mean(x);
    std::vector<double> c(x.size());
    for (std::size_t i = 0; i < n; ++i) c[i] = x[i] - m;
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += c[i] * c[i + lag];
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return 1.0;
    // Geyer: sum consecutive pairs Gamma_k = rho_{2k} + rho_{2k+1} while positive, enforcing monotonicity.
    double tau = -1.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = (autocov(2 * k) + autocov(2 * k + 1)) / c0;
        if (!(pair > 0.0)) break;
        pair = std::min(pair, prev_pair);
        prev_pair = pair;
        tau += 2.0 * pair;
    }
    return std::max(tau, 1.0 / static_cast<double>(n));
}

double effective_sample_size(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return static_cast<double>(x.size()) / integrated_autocorrelation_time(x);
}

Estimate iid_estimate(std::span<const double> x) {
    const double n = static_cast<double>(x.size());
    return {mean(x), std::sqrt(variance(x) / n), n};
}

Estimate ergodic_estimate(std::span<const double> x) {
    const double ess = effective_sample_size(x);
    return {mean(x), ess > 0.0 ? std::sqrt(variance(x) / ess) : 0.0, ess};
}

}  // namespace spikebayes
