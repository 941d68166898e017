#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "spikebayes/measure.hpp"
#include "spikebayes/rng.hpp"

namespace spikebayes {

/// Law of the atom count K.
class CountLaw {
public:
    struct Poisson {
        double gamma;
        bool operator==(const Poisson&) const = default;
    };
    struct Fixed {
        std::size_t n;
        bool operator==(const Fixed&) const = default;
    };
    struct TruncatedPoisson {
        double gamma;
        std::size_t k_max;
        double log_norm;  // log sum_{n <= k_max} pois(n)
        bool operator==(const TruncatedPoisson&) const = default;
    };

    static CountLaw poisson(double gamma);
    static CountLaw fixed(std::size_t n);
    /// Poisson(gamma) conditioned on K <= k_max; k_max defaults to ceil(gamma + 10 sqrt(gamma)).
    static CountLaw truncated_poisson(double gamma, std::optional<std::size_t> k_max = std::nullopt);

    double log_pmf(std::size_t n) const;
    std::size_t sample(Rng& rng) const;
    double mean() const;
    /// Smallest cap that the law itself imposes, or the default Poisson truncation index.
    std::size_t default_cap() const;
    /// P(K > k).
    double tail_mass(std::size_t k) const;

    const auto& variant() const noexcept { return law_; }
    bool operator==(const CountLaw&) const = default;

private:
    explicit CountLaw(std::variant<Poisson, Fixed, TruncatedPoisson> law) : law_(law) {}
    std::variant<Poisson, Fixed, TruncatedPoisson> law_;
};

/// ceil(gamma + 10 sqrt(gamma)), raised if needed so that P(K > cap) < 1e-12.
std::size_t default_poisson_truncation(double gamma);

/// Law of an atom location Y on the domain.
class LocationLaw {
public:
    struct Uniform {
        bool operator==(const Uniform&) const = default;
    };
    /// Degenerate law at one point (density w.r.t. the point mass).
    struct Point {
        std::vector<double> y;
        bool operator==(const Point&) const = default;
    };
    /// Finite support; density w.r.t. counting measure on the nodes.
    struct Nodes {
        std::vector<std::vector<double>> points;
        std::vector<double> weights;
        bool operator==(const Nodes&) const = default;
    };
    /// Lebesgue density sampled by rejection from the uniform law under `pdf_max`.
    struct Density {
        std::string name;
        std::shared_ptr<const std::function<double(std::span<const double>)>> pdf;
        double pdf_max;
        bool operator==(const Density&) const = default;
    };

    static LocationLaw uniform(Domain domain);
    static LocationLaw point(Domain domain, std::vector<double> y);
    static LocationLaw nodes(Domain domain, std::vector<std::vector<double>> points,
                             std::vector<double> weights = {});
    /// Checks by tensor Gauss-Legendre quadrature that the density integrates to 1 within 1e-6.
    static LocationLaw density(Domain domain, std::string name,
                               std::function<double(std::span<const double>)> pdf, double pdf_max);
    /// Product of independent normals N(center_i, scale_i^2) truncated to the box.
    static LocationLaw truncated_gaussian(Domain domain, std::vector<double> center,
                                          std::vector<double> scale);

    const Domain& domain() const noexcept { return domain_; }
    void sample(Rng& rng, std::span<double> out) const;
    double log_density(std::span<const double> y) const;
    /// True when the law has a Lebesgue density (proposals may move continuously).
    bool continuous() const noexcept;

    const auto& variant() const noexcept { return law_; }
    bool operator==(const LocationLaw&) const = default;

private:
    using Law = std::variant<Uniform, Point, Nodes, Density>;
    LocationLaw(Domain domain, Law law) : domain_(std::move(domain)), law_(std::move(law)) {}
    Domain domain_;
    Law law_;
};

/// Law of an amplitude (mark) Q.
class MarkLaw {
public:
    struct Gaussian {
        std::vector<double> mean;
        std::vector<double> cov;       // row-major m x m
        std::vector<double> cov_chol;  // lower Cholesky factor, row-major
        double log_det;
        bool operator==(const Gaussian&) const = default;
    };
    struct LogNormal {
        double mu;
        double sigma2;
        bool operator==(const LogNormal&) const = default;
    };
    /// Scalar complex normal with mean, variance E|Q - mean|^2 and relation E(Q - mean)^2.
    struct ComplexGaussian {
        Scalar mean;
        double sigma2;
        Scalar relation;
        bool operator==(const ComplexGaussian&) const = default;
    };
    /// Finite set of amplitude vectors; density w.r.t. counting measure.
    struct Categorical {
        std::vector<std::vector<Scalar>> values;
        std::vector<double> probs;
        ScalarField field;
        bool operator==(const Categorical&) const = default;
    };

    static MarkLaw gaussian(std::vector<double> mean, std::vector<double> cov);
    static MarkLaw gaussian(double mean, double variance);
    static MarkLaw lognormal(double mu, double sigma2);
    static MarkLaw complex_gaussian(Scalar mean, double sigma2, Scalar relation = {0.0, 0.0});
    static MarkLaw categorical(std::vector<std::vector<Scalar>> values, std::vector<double> probs,
                               ScalarField field = ScalarField::real);

    std::size_t amp_dim() const;
    ScalarField field() const;
    void sample(Rng& rng, std::span<Scalar> out) const;
    double log_density(std::span<const Scalar> q) const;
    bool continuous() const noexcept;

    /// E||Q||_H when a closed form exists.
    std::optional<double> mean_norm() const;
    /// Typical amplitude scale (marginal standard deviation); drives default proposal steps.
    double scale() const;
    /// E exp(i Re(t, Q)_H), in closed form or by Gauss-Hermite quadrature (log-normal).
    Scalar characteristic(std::span<const Scalar> t) const;

    const auto& variant() const noexcept { return law_; }
    bool operator==(const MarkLaw&) const = default;

private:
    using Law = std::variant<Gaussian, LogNormal, ComplexGaussian, Categorical>;
    explicit MarkLaw(Law law) : law_(std::move(law)) {}
    Law law_;
};

/// Deterministic weights gamma_k applied to the k-th atom.
class Weights {
public:
    struct Unit {
        bool operator==(const Unit&) const = default;
    };
    struct Sequence {
        std::vector<double> values;
        bool operator==(const Sequence&) const = default;
    };
    /// gamma_k = ratio^k, truncated at k_max.
    struct Geometric {
        double ratio;
        std::size_t k_max;
        bool operator==(const Geometric&) const = default;
    };
    /// gamma_k = k^(-exponent), truncated at k_max.
    struct Power {
        double exponent;
        std::size_t k_max;
        bool operator==(const Power&) const = default;
    };

    static Weights unit() { return Weights(Unit{}); }
    static Weights sequence(std::vector<double> values);
    static Weights geometric(double ratio, std::size_t k_max);
    static Weights power(double exponent, std::size_t k_max);

    bool is_unit() const noexcept { return std::holds_alternative<Unit>(law_); }
    /// Weight of the k-th atom, k starting at 1.
    double operator()(std::size_t k) const;
    /// Truncation index (number of weights available); unbounded for unit weights.
    std::optional<std::size_t> k_max() const;
    /// sum_{k > k_max} |gamma_k| for the intended infinite sequence.
    double tail_sum() const;

    const auto& variant() const noexcept { return law_; }
    bool operator==(const Weights&) const = default;

private:
    using Law = std::variant<Unit, Sequence, Geometric, Power>;
    explicit Weights(Law law) : law_(std::move(law)) {}
    Law law_;
};

/// Point-process prior sum_{k<=K} gamma_k Q_k delta_{Y_k}.
class PriorSpec {
public:
    PriorSpec(CountLaw count, LocationLaw location, MarkLaw mark, Weights weights = Weights::unit());

    const CountLaw& count() const noexcept { return count_; }
    const LocationLaw& location() const noexcept { return location_; }
    const MarkLaw& mark() const noexcept { return mark_; }
    const Weights& weights() const noexcept { return weights_; }
    const Domain& domain() const noexcept { return location_.domain(); }
    std::size_t dim() const noexcept { return domain().dim(); }
    std::size_t amp_dim() const { return mark_.amp_dim(); }
    ScalarField field() const { return mark_.field(); }

    DiscreteMeasure empty_measure() const { return DiscreteMeasure(dim(), amp_dim(), field()); }

    bool operator==(const PriorSpec&) const = default;

private:
    CountLaw count_;
    LocationLaw location_;
    MarkLaw mark_;
    Weights weights_;
};

DiscreteMeasure sample_prior(const PriorSpec& spec, Rng& rng);

/// log[pmf_K(n) n! prod g(y_k) prod q(q_k)]; -inf off the support.
double log_prior_density(const PriorSpec& spec, const DiscreteMeasure& u);

/// E||u||_M = E[K] E||Q_1||_H for unit weights and a mark law with a closed-form mean norm.
double prior_mean_tv(const PriorSpec& spec);

struct WeightSummabilityReport {
    /// sum_{k <= k_max} |gamma_k| E||Q_k||
    double witness;
    /// sum_{k > k_max} |gamma_k| E||Q_k|| for the intended infinite sequence.
    double tail_bound;
    std::size_t k_max;
};

/// Requires non-unit weights and a closed-form mark mean norm.
WeightSummabilityReport weight_summability(const PriorSpec& spec);

}  // namespace spikebayes
