#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "spikebayes/forward.hpp"
#include "spikebayes/prior.hpp"
#include "spikebayes/stats.hpp"

namespace spikebayes {

/// Gaussian noise N(0, Sigma) on the real embedding of the observation space
/// (R^{N_o}, or R^{2 N_o} = [Re; Im] for complex observations).
class NoiseModel {
public:
    static NoiseModel isotropic(std::size_t dim, double variance);
    static NoiseModel from_covariance(Eigen::MatrixXd covariance);
    /// Sigma^{-1} = 0: the potential vanishes and the likelihood is identically 1.
    static NoiseModel flat(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    bool is_flat() const noexcept { return flat_; }
    const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }

    /// Sigma^{-1/2} r via the Cholesky factor.
    Eigen::VectorXd whiten(const Eigen::VectorXd& r) const;
    /// r^T Sigma^{-1} r.
    double squared_norm(const Eigen::VectorXd& r) const;
    /// One draw of N(0, Sigma); zero vector for flat noise.
    Eigen::VectorXd sample(Rng& rng) const;

    bool operator==(const NoiseModel& other) const;

private:
    NoiseModel() = default;
    std::size_t dim_ = 0;
    bool flat_ = false;
    bool isotropic_ = false;
    double variance_ = 0.0;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd chol_lower_;
};

/// Stacks an observation into its real embedding: [Re z] or [Re z; Im z].
Eigen::VectorXd embed_observation(std::span<const Scalar> z, ScalarField field);
Observation unembed_observation(const Eigen::VectorXd& v, ScalarField field);

/// Prior, forward operator, noise and data.
class Posterior {
public:
    Posterior(PriorSpec prior, std::shared_ptr<const ForwardModel> forward, NoiseModel noise, Observation data);

    const PriorSpec& prior() const noexcept { return prior_; }
    const ForwardModel& forward() const noexcept { return *forward_; }
    const std::shared_ptr<const ForwardModel>& forward_ptr() const noexcept { return forward_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    const Observation& data() const noexcept { return data_; }

    Posterior with_data(Observation data) const;
    Posterior with_forward(std::shared_ptr<const ForwardModel> forward) const;

private:
    PriorSpec prior_;
    std::shared_ptr<const ForwardModel> forward_;
    NoiseModel noise_;
    Observation data_;
};

/// -1/2 |Sigma^{-1/2}(G(u) - z)|^2.
double log_likelihood(const Posterior& p, const DiscreteMeasure& u);

/// log_prior_density(u) + log_likelihood(u); -inf off the prior support.
double log_posterior_unnorm(const Posterior& p, const DiscreteMeasure& u);

struct EvidenceEstimate {
    double log_z;
    /// Delta-method standard error of log_z.
    double std_error;
    std::size_t n_samples;
};

/// Plain prior-sampling Monte Carlo estimate of log Z(z).
EvidenceEstimate estimate_evidence(const Posterior& p, std::size_t n_samples, Rng& rng);
/// Same estimator from precomputed log-likelihood values of prior draws.
EvidenceEstimate evidence_from_log_likelihoods(std::span<const double> log_likelihoods);

}  // namespace spikebayes
