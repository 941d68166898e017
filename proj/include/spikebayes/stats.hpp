#pragma once

#include <cstddef>
#include <span>

namespace spikebayes {

/// Point estimate with a Monte Carlo standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    /// Effective sample size behind the standard error.
    double ess = 0.0;
};

double log_sum_exp(std::span<const double> x);
double log_mean_exp(std::span<const double> x);

double mean(std::span<const double> x);
/// Unbiased sample variance (0 for fewer than two values).
double variance(std::span<const double> x);

/// Integrated autocorrelation time via Geyer's initial monotone sequence; 1 for i.i.d. input.
double integrated_autocorrelation_time(std::span<const double> x);
double effective_sample_size(std::span<const double> x);

/// Mean of independent draws with the plain sqrt(var/n) standard error.
Estimate iid_estimate(std::span<const double> x);
/// Ergodic average of a Markov chain trace with autocorrelation-corrected standard error.
Estimate ergodic_estimate(std::span<const double> x);

}  // namespace spikebayes
