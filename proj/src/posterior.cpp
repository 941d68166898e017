#include "spikebayes/posterior.hpp"

#include <cmath>
#include <limits>

#include "spikebayes/errors.hpp"

namespace spikebayes {

NoiseModel NoiseModel::isotropic(std::size_t dim, double variance) {
    if (dim == 0) throw InvalidArgument("noise dimension must be >= 1");
    if (!(variance > 0.0) || !std::isfinite(variance)) throw InvalidArgument("noise variance must be positive and finite");
    NoiseModel n;
    n.dim_ = dim;
    n.isotropic_ = true;
    n.variance_ = variance;
    n.covariance_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) * variance;
    n.chol_lower_ = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) *
                    std::sqrt(variance);
    return n;
}

NoiseModel NoiseModel::from_covariance(Eigen::MatrixXd covariance) {
    if (covariance.rows() == 0 || covariance.rows() != covariance.cols())
        throw DimensionMismatch("noise covariance must be a non-empty square matrix");
    if (!covariance.isApprox(covariance.transpose(), 1e-12)) throw InvalidArgument("noise covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) throw InvalidArgument("noise covariance must be positive definite");
    NoiseModel n;
    n.dim_ = static_cast<std::size_t>(covariance.rows());
    n.chol_lower_ = llt.matrixL();
    n.covariance_ = std::move(covariance);
    return n;
}

NoiseModel NoiseModel::flat(std::size_t dim) {
    if (dim == 0) throw InvalidArgument("noise dimension must be >= 1");
    NoiseModel n;
    n.dim_ = dim;
    n.flat_ = true;
    return n;
}

Eigen::VectorXd NoiseModel::whiten(const Eigen::VectorXd& r) const {
    if (static_cast<std::size_t>(r.size()) != dim_) throw DimensionMismatch("residual has wrong length for the noise model");
    if (flat_) return Eigen::VectorXd::Zero(r.size());
    if (isotropic_) return r / std::sqrt(variance_);
    return chol_lower_.triangularView<Eigen::Lower>().solve(r);
}

double NoiseModel::squared_norm(const Eigen::VectorXd& r) const {
    if (flat_) return 0.0;
    if (isotropic_) {
        if (static_cast<std::size_t>(r.size()) != dim_) throw DimensionMismatch("residual has wrong length for the noise model");
        return r.squaredNorm() / variance_;
    }
    return whiten(r).squaredNorm();
}

Eigen::VectorXd NoiseModel::sample(Rng& rng) const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
    if (flat_) return Eigen::VectorXd::Zero(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = standard_normal(rng);
    if (isotropic_) return z * std::sqrt(variance_);
    return chol_lower_.triangularView<Eigen::Lower>() * z;
}

bool NoiseModel::operator==(const NoiseModel& other) const {
    return dim_ == other.dim_ && flat_ == other.flat_ && isotropic_ == other.isotropic_ &&
           variance_ == other.variance_ && covariance_ == other.covariance_;
}

Eigen::VectorXd embed_observation(std::span<const Scalar> z, ScalarField field) {
    const auto n = static_cast<Eigen::Index>(z.size());
    Eigen::VectorXd v(field == ScalarField::complex ? 2 * n : n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = z[static_cast<std::size_t>(i)].real();
        if (field == ScalarField::complex) v(n + i) = z[static_cast<std::size_t>(i)].imag();
    }
    return v;
}

Observation unembed_observation(const Eigen::VectorXd& v, ScalarField field) {
    const Eigen::Index n = field == ScalarField::complex ? v.size() / 2 : v.size();
    Observation z(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        z[static_cast<std::size_t>(i)] = Scalar{v(i), field == ScalarField::complex ? v(n + i) : 0.0};
    return z;
}

Posterior::Posterior(PriorSpec prior, std::shared_ptr<const ForwardModel> forward, NoiseModel noise, Observation data)
    : prior_(std::move(prior)), forward_(std::move(forward)), noise_(std::move(noise)), data_(std::move(data)) {
    if (!forward_) throw InvalidArgument("posterior needs a forward operator");
    if (!(prior_.domain() == forward_->source_domain()))
        throw DimensionMismatch("prior domain differs from the forward operator's source domain");
    if (prior_.amp_dim() != forward_->amp_dim())
        throw DimensionMismatch("prior amplitude dimension differs from the forward operator");
    if (prior_.field() == ScalarField::complex && forward_->output_field() == ScalarField::real)
        throw DimensionMismatch("complex prior with a real-valued forward operator");
    if (data_.size() != forward_->n_obs()) throw DimensionMismatch("data length differs from the number of sensors");
    const std::size_t real_dim = forward_->output_field() == ScalarField::complex ? 2 * data_.size() : data_.size();
    if (noise_.dim() != real_dim) throw DimensionMismatch("noise dimension differs from the real observation dimension");
    if (forward_->output_field() == ScalarField::real) {
        for (const auto& z : data_)
            if (z.imag() != 0.0) throw DimensionMismatch("complex data for a real-valued forward operator");
    }
}

Posterior Posterior::with_data(Observation data) const { return Posterior(prior_, forward_, noise_, std::move(data)); }

Posterior Posterior::with_forward(std::shared_ptr<const ForwardModel> forward) const {
    return Posterior(prior_, std::move(forward), noise_, data_);
}

double log_likelihood(const Posterior& p, const DiscreteMeasure& u) {
    if (p.noise().is_flat()) return 0.0;
    Observation g = p.forward()(u);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= p.data()[i];
    return -0.5 * p.noise().squared_norm(embed_observation(g, p.forward().output_field()));
}

double log_posterior_unnorm(const Posterior& p, const DiscreteMeasure& u) {
    const double lp = log_prior_density(p.prior(), u);
    if (lp == -std::numeric_limits<double>::infinity()) return lp;
    return lp + log_likelihood(p, u);
}

EvidenceEstimate evidence_from_log_likelihoods(std::span<const double> ll) {
    if (ll.size() < 2) throw InvalidArgument("evidence estimate needs at least two samples");
    const double n = static_cast<double>(ll.size());
    const double shift = *std::max_element(ll.begin(), ll.end());
    double s = 0.0;
    double s2 = 0.0;
    for (double v : ll) {
        const double w = std::exp(v - shift);
        s += w;
        s2 += w * w;
    }
    const double m = s / n;
    const double var = std::max(0.0, (s2 - n * m * m) / (n - 1.0));
    return {shift + std::log(m), std::sqrt(var / n) / m, ll.size()};
}

EvidenceEstimate estimate_evidence(const Posterior& p, std::size_t n_samples, Rng& rng) {
    if (n_samples < 2) throw InvalidArgument("evidence estimate needs n_samples >= 2");
    std::vector<double> ll(n_samples);
    for (auto& v : ll) v = log_likelihood(p, sample_prior(p.prior(), rng));
    return evidence_from_log_likelihoods(ll);
}

}  // namespace spikebayes
