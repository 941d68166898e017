#include "spikebayes/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "spikebayes/errors.hpp"
#include "spikebayes/quadrature.hpp"

namespace spikebayes {

namespace {

// Likelihoods rescaled by their maximum; the scale cancels in L / Z.
std::vector<double> scaled_likelihoods(std::span<const double> ll) {
    const double top = *std::max_element(ll.begin(), ll.end());
    if (!std::isfinite(top)) throw Error("log-likelihoods must contain a finite maximum");
    std::vector<double> w(ll.size());
    for (std::size_t i = 0; i < ll.size(); ++i) w[i] = std::exp(ll[i] - top);
    return w;
}

// Log-likelihood matrix: one row per posterior, one column per common prior draw.
std::vector<std::vector<double>> common_log_likelihoods(const std::vector<const Posterior*>& posts, std::size_t n,
                                                        std::uint64_t seed) {
    const PriorSpec& prior = posts.front()->prior();
    for (const auto* p : posts)
        if (!(p->prior() == prior)) throw InvalidArgument("Hellinger distance requires posteriors sharing one prior");
    std::vector<std::vector<double>> ll(posts.size(), std::vector<double>(n));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const DiscreteMeasure u = sample_prior(prior, rng);
        for (std::size_t j = 0; j < posts.size(); ++j) ll[j][i] = log_likelihood(*posts[j], u);
    }
    return ll;
}

double observation_distance(const Observation& a, const Observation& b) {
    if (a.size() != b.size()) throw DimensionMismatch("observation lengths differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

HellingerEstimate hellinger_from_log_likelihoods(std::span<const double> ll1, std::span<const double> ll2) {
    if (ll1.size() != ll2.size()) throw DimensionMismatch("log-likelihood samples differ in length");
    const std::size_t n = ll1.size();
    if (n < 2) throw InvalidArgument("Hellinger estimate needs at least two draws");
    const std::vector<double> w1 = scaled_likelihoods(ll1);
    const std::vector<double> w2 = scaled_likelihoods(ll2);
    const double m1 = mean(w1);
    const double m2 = mean(w2);

    std::vector<double> sq(n);
    std::vector<double> cross(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = std::sqrt(w1[i] / m1) - std::sqrt(w2[i] / m2);
        sq[i] = diff * diff;
        cross[i] = std::sqrt(w1[i] * w2[i]);
    }
    double d2 = 0.5 * mean(sq);

    // D = 1 - M12 / sqrt(M1 M2); delta method on the three sample means.
    const double m12 = mean(cross);
    const double root = std::sqrt(m1 * m2);
    const double g12 = -1.0 / root;
    const double g1 = 0.5 * m12 / (m1 * root);
    const double g2 = 0.5 * m12 / (m2 * root);
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) phi[i] = g12 * cross[i] + (g1 * w1[i] + g2 * w2[i]);
    const double se_d2 = std::sqrt(variance(phi) / static_cast<double>(n));

    // Second-order bias: 1/(2n) sum H_jk Cov_jk.
    auto cov = [n](const std::vector<double>& a, double ma, const std::vector<double>& b, double mb) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += (a[i] - ma) * (b[i] - mb);
        return s / static_cast<double>(n - 1);
    };
    const double h_a1 = 0.5 / (m1 * root);
    const double h_a2 = 0.5 / (m2 * root);
    const double h_11 = -0.75 * m12 / (m1 * m1 * root);
    const double h_22 = -0.75 * m12 / (m2 * m2 * root);
    const double h_12 = -0.25 * m12 / (m1 * m2 * root);
    const double bias = (2.0 * h_a1 * cov(cross, m12, w1, m1) + 2.0 * h_a2 * cov(cross, m12, w2, m2) +
                         h_11 * cov(w1, m1, w1, m1) + h_22 * cov(w2, m2, w2, m2) + 2.0 * h_12 * cov(w1, m1, w2, m2)) /
                        (2.0 * static_cast<double>(n));

    HellingerEstimate out;
    out.n_samples = n;
    out.ratio_bias = bias;
    if (d2 < 0.0 || d2 > 1.0) {
        out.clamped = true;
        d2 = std::clamp(d2, 0.0, 1.0);
    }
    out.value = std::sqrt(d2);
    out.std_error = out.value > 0.0 ? std::min(se_d2 / (2.0 * out.value), std::sqrt(se_d2)) : std::sqrt(se_d2);
    return out;
}

HellingerEstimate hellinger(const Posterior& p1, const Posterior& p2, std::size_t n, std::uint64_t seed) {
    const auto ll = common_log_likelihoods({&p1, &p2}, n, seed);
    HellingerEstimate h = hellinger_from_log_likelihoods(ll[0], ll[1]);
    h.common_seed = seed;
    return h;
}

CharfunEstimate empirical_charfun(const PriorSpec& spec, const TestFunction& f, std::size_t n, Rng& rng) {
    if (n < 2) throw InvalidArgument("empirical characteristic functional needs n >= 2");
    if (f.amp_dim() != spec.amp_dim()) throw DimensionMismatch("test function and prior amplitude sizes differ");
    std::vector<double> re(n);
    std::vector<double> im(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = pair(sample_prior(spec, rng), f).real();
        re[i] = std::cos(t);
        im[i] = std::sin(t);
    }
    CharfunEstimate out;
    out.value = {mean(re), mean(im)};
    out.std_error = std::sqrt((variance(re) + variance(im)) / static_cast<double>(n));
    out.n_samples = n;
    return out;
}

Scalar poisson_charfun_closed_form(const PriorSpec& spec, const TestFunction& f, std::size_t quad_n) {
    const auto* poisson = std::get_if<CountLaw::Poisson>(&spec.count().variant());
    if (!poisson) throw UnsupportedLaw("closed-form characteristic functional needs a Poisson count law");
    if (!spec.weights().is_unit()) throw UnsupportedLaw("closed-form characteristic functional needs unit weights");
    if (f.amp_dim() != spec.amp_dim()) throw DimensionMismatch("test function and prior amplitude sizes differ");
    if (quad_n == 0) throw InvalidArgument("quad_n must be positive");

    const MarkLaw& mark = spec.mark();
    std::vector<Scalar> fy(spec.amp_dim());
    auto integrand = [&](std::span<const double> y) {
        f.evaluate(y, fy);
        return mark.characteristic(fy) - 1.0;
    };

    const Domain& domain = spec.domain();
    const std::size_t d = domain.dim();
    Scalar integral{0.0, 0.0};
    const auto& law = spec.location().variant();
    if (const auto* pt = std::get_if<LocationLaw::Point>(&law)) {
        integral = integrand(pt->y);
    } else if (const auto* nodes = std::get_if<LocationLaw::Nodes>(&law)) {
        for (std::size_t i = 0; i < nodes->points.size(); ++i) integral += nodes->weights[i] * integrand(nodes->points[i]);
    } else {
        std::vector<QuadratureRule> rules;
        for (std::size_t a = 0; a < d; ++a) rules.push_back(gauss_legendre(quad_n, domain.lower()[a], domain.upper()[a]));
        std::size_t total = 1;
        for (std::size_t a = 0; a < d; ++a) total *= quad_n;
        std::vector<double> y(d);
        for (std::size_t flat = 0; flat < total; ++flat) {
            double w = 1.0;
            std::size_t rem = flat;
            for (std::size_t a = d; a-- > 0;) {
                const std::size_t i = rem % quad_n;
                rem /= quad_n;
                y[a] = rules[a].nodes[i];
                w *= rules[a].weights[i];
            }
            integral += w * std::exp(spec.location().log_density(y)) * integrand(y);
        }
    }
    return std::exp(poisson->gamma * integral);
}

std::vector<StabilityPoint> stability_curve(const Posterior& p, const std::vector<Observation>& perturbed_data,
                                            std::size_t n, std::uint64_t seed) {
    std::vector<Posterior> variants;
    variants.reserve(perturbed_data.size());
    for (const auto& z : perturbed_data) variants.push_back(p.with_data(z));
    std::vector<const Posterior*> posts{&p};
    for (const auto& v : variants) posts.push_back(&v);
    const auto ll = common_log_likelihoods(posts, n, seed);

    std::vector<StabilityPoint> curve;
    for (std::size_t j = 0; j < perturbed_data.size(); ++j) {
        HellingerEstimate h = hellinger_from_log_likelihoods(ll[j + 1], ll[0]);
        h.common_seed = seed;
        curve.push_back({observation_distance(perturbed_data[j], p.data()), h});
    }
    return curve;
}

std::vector<ConsistencyPoint> consistency_curve(const Posterior& p_exact, const std::vector<std::size_t>& grids,
                                                std::size_t n, std::uint64_t seed) {
    auto base = std::dynamic_pointer_cast<const KernelForward>(p_exact.forward_ptr());
    if (!base) throw InvalidArgument("consistency curve needs an exact posterior with a kernel forward operator");
    std::vector<Posterior> variants;
    variants.reserve(grids.size());
    for (std::size_t g : grids) variants.push_back(p_exact.with_forward(std::make_shared<DiscretizedForward>(base, g)));
    std::vector<const Posterior*> posts{&p_exact};
    for (const auto& v : variants) posts.push_back(&v);
    const auto ll = common_log_likelihoods(posts, n, seed);

    std::vector<ConsistencyPoint> curve;
    for (std::size_t j = 0; j < grids.size(); ++j) {
        HellingerEstimate h = hellinger_from_log_likelihoods(ll[0], ll[j + 1]);
        h.common_seed = seed;
        curve.push_back({grids[j], h});
    }
    return curve;
}

}  // namespace spikebayes
