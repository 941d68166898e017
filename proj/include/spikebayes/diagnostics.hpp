#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spikebayes/posterior.hpp"

namespace spikebayes {

struct HellingerEstimate {
    /// Hellinger distance in [0, 1].
    double value = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t common_seed = 0;
    /// Set when Monte Carlo noise pushed the squared distance outside [0, 1].
    bool clamped = false;
    /// Second-order estimate of the O(1/n) bias of the squared distance from the
    /// evidence ratios being estimated on the same draws.
    double ratio_bias = 0.0;
};

/// Hellinger distance between two posteriors sharing a prior, from n common prior draws
/// generated with `seed`. Identical posteriors give exactly 0 and swapping the arguments
/// gives bit-identical results.
HellingerEstimate hellinger(const Posterior& p1, const Posterior& p2, std::size_t n, std::uint64_t seed);

/// Same estimator from log-likelihoods of the two posteriors evaluated on common prior draws.
HellingerEstimate hellinger_from_log_likelihoods(std::span<const double> ll1, std::span<const double> ll2);

struct CharfunEstimate {
    Scalar value;
    /// Standard error of the complex mean (sqrt of the summed component variances over n).
    double std_error = 0.0;
    std::size_t n_samples = 0;
};

/// Monte Carlo estimate of E exp(i Re <u, f>) over prior draws.
CharfunEstimate empirical_charfun(const PriorSpec& spec, const TestFunction& f, std::size_t n, Rng& rng);

/// exp(gamma * integral of (phi_Q(f(y)) - 1) dG(y)) for a Poisson count with unit weights.
/// The location integral uses quad_n Gauss-Legendre points per axis.
Scalar poisson_charfun_closed_form(const PriorSpec& spec, const TestFunction& f, std::size_t quad_n = 64);

struct StabilityPoint {
    /// Euclidean norm of z_n - z.
    double perturbation_size;
    HellingerEstimate distance;
};

/// d_H(posterior with data z_n, posterior with data z) for every z_n, all on one set of prior draws.
std::vector<StabilityPoint> stability_curve(const Posterior& p, const std::vector<Observation>& perturbed_data,
                                            std::size_t n, std::uint64_t seed);

struct ConsistencyPoint {
    std::size_t grid_n;
    HellingerEstimate distance;
};

/// d_H between the exact posterior and its grid-discretized versions, all on one set of prior draws.
/// The exact posterior must use a KernelForward.
std::vector<ConsistencyPoint> consistency_curve(const Posterior& p_exact, const std::vector<std::size_t>& grids,
                                                std::size_t n, std::uint64_t seed);

}  // namespace spikebayes
