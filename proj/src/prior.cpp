#include "spikebayes/prior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "spikebayes/errors.hpp"
#include "spikebayes/quadrature.hpp"

namespace spikebayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double log_poisson(double gamma, std::size_t n) {
    const double dn = static_cast<double>(n);
    return dn * std::log(gamma) - gamma - std::lgamma(dn + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

void check_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

bool all_real(std::span<const Scalar> q) {
    return std::all_of(q.begin(), q.end(), [](Scalar c) { return c.imag() == 0.0; });
}

}  // namespace

// ---------------------------------------------------------------- CountLaw

namespace {

// P(K > k) for K ~ Poisson(gamma); terms decay super-geometrically past gamma.
double poisson_tail(double gamma, std::size_t k) {
    double s = 0.0;
    for (std::size_t n = k + 1; n < k + 10000; ++n) {
        const double term = std::exp(log_poisson(gamma, n));
        s += term;
        if (static_cast<double>(n) > gamma && term < 1e-300) break;
    }
    return s;
}

}  // namespace

std::size_t default_poisson_truncation(double gamma) {
    // ceil(gamma + 10 sqrt(gamma)), raised until the cut-off mass is below 1e-12.
    auto cap = static_cast<std::size_t>(std::ceil(gamma + 10.0 * std::sqrt(gamma)));
    while (poisson_tail(gamma, cap) >= 1e-12) ++cap;
    return cap;
}

CountLaw CountLaw::poisson(double gamma) {
    check_positive(gamma, "poisson gamma");
    return CountLaw(Poisson{gamma});
}

CountLaw CountLaw::fixed(std::size_t n) { return CountLaw(Fixed{n}); }

CountLaw CountLaw::truncated_poisson(double gamma, std::optional<std::size_t> k_max) {
    check_positive(gamma, "truncated poisson gamma");
    const std::size_t cap = k_max.value_or(default_poisson_truncation(gamma));
    double max_term = kNegInf;
    for (std::size_t n = 0; n <= cap; ++n) max_term = std::max(max_term, log_poisson(gamma, n));
    double s = 0.0;
    for (std::size_t n = 0; n <= cap; ++n) s += std::exp(log_poisson(gamma, n) - max_term);
    return CountLaw(TruncatedPoisson{gamma, cap, max_term + std::log(s)});
}

double CountLaw::log_pmf(std::size_t n) const {
    return std::visit(overloaded{
                          [n](const Poisson& p) { return log_poisson(p.gamma, n); },
                          [n](const Fixed& f) { return n == f.n ? 0.0 : kNegInf; },
                          [n](const TruncatedPoisson& t) {
                              return n <= t.k_max ? log_poisson(t.gamma, n) - t.log_norm : kNegInf;
                          },
                      },
                      law_);
}

std::size_t CountLaw::sample(Rng& rng) const {
    return std::visit(overloaded{
                          [&rng](const Poisson& p) {
                              return static_cast<std::size_t>(std::poisson_distribution<long>(p.gamma)(rng));
                          },
                          [](const Fixed& f) { return f.n; },
                          [&rng](const TruncatedPoisson& t) {
                              std::poisson_distribution<long> dist(t.gamma);
                              for (;;) {
                                  const auto n = static_cast<std::size_t>(dist(rng));
                                  if (n <= t.k_max) return n;
                              }
                          },
                      },
                      law_);
}

double CountLaw::mean() const {
    return std::visit(overloaded{
                          [](const Poisson& p) { return p.gamma; },
                          [](const Fixed& f) { return static_cast<double>(f.n); },
                          [](const TruncatedPoisson& t) {
                              double m = 0.0;
                              for (std::size_t n = 1; n <= t.k_max; ++n)
                                  m += static_cast<double>(n) * std::exp(log_poisson(t.gamma, n) - t.log_norm);
                              return m;
                          },
                      },
                      law_);
}

std::size_t CountLaw::default_cap() const {
    return std::visit(overloaded{
                          [](const Poisson& p) { return default_poisson_truncation(p.gamma); },
                          [](const Fixed& f) { return f.n; },
                          [](const TruncatedPoisson& t) { return t.k_max; },
                      },
                      law_);
}

double CountLaw::tail_mass(std::size_t k) const {
    return std::visit(overloaded{
                          [k](const Poisson& p) { return poisson_tail(p.gamma, k); },
                          [k](const Fixed& f) { return f.n > k ? 1.0 : 0.0; },
                          [k](const TruncatedPoisson& t) {
                              double s = 0.0;
                              for (std::size_t n = k + 1; n <= t.k_max; ++n)
                                  s += std::exp(log_poisson(t.gamma, n) - t.log_norm);
                              return s;
                          },
                      },
                      law_);
}

// ------------------------------------------------------------- LocationLaw

LocationLaw LocationLaw::uniform(Domain domain) { return LocationLaw(std::move(domain), Uniform{}); }

LocationLaw LocationLaw::point(Domain domain, std::vector<double> y) {
    if (!domain.contains(y)) throw InvalidArgument("point location law lies outside the domain");
    return LocationLaw(std::move(domain), Point{std::move(y)});
}

LocationLaw LocationLaw::nodes(Domain domain, std::vector<std::vector<double>> points,
                               std::vector<double> weights) {
    if (points.empty()) throw InvalidArgument("nodes location law needs at least one node");
    if (weights.empty()) weights.assign(points.size(), 1.0 / static_cast<double>(points.size()));
    if (weights.size() != points.size()) throw DimensionMismatch("nodes and weights differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!domain.contains(points[i])) throw InvalidArgument("location node outside the domain");
        if (!(weights[i] > 0.0)) throw InvalidArgument("location node weights must be positive");
        total += weights[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("location node weights must sum to 1");
    return LocationLaw(std::move(domain), Nodes{std::move(points), std::move(weights)});
}

LocationLaw LocationLaw::density(Domain domain, std::string name,
                                 std::function<double(std::span<const double>)> pdf, double pdf_max) {
    check_positive(pdf_max, "density upper bound");
    const std::size_t d = domain.dim();
    if (d > 3) throw UnsupportedLaw("density location laws are limited to d <= 3");
    // Composite Gauss-Legendre normalization check.
    const std::size_t panels = d == 1 ? 64 : (d == 2 ? 16 : 6);
    const std::size_t order = 8;
    std::vector<QuadratureRule> axis_rules;
    for (std::size_t i = 0; i < d; ++i) {
        QuadratureRule r;
        const double h = domain.width(i) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double a = domain.lower()[i] + h * static_cast<double>(p);
            const auto panel = gauss_legendre(order, a, a + h);
            r.nodes.insert(r.nodes.end(), panel.nodes.begin(), panel.nodes.end());
            r.weights.insert(r.weights.end(), panel.weights.begin(), panel.weights.end());
        }
        axis_rules.push_back(std::move(r));
    }
    const std::size_t per_axis = axis_rules[0].nodes.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= per_axis;
    std::vector<double> y(d);
    double integral = 0.0;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double w = 1.0;
        for (std::size_t i = 0; i < d; ++i) {
            const std::size_t idx = rem % per_axis;
            rem /= per_axis;
            y[i] = axis_rules[i].nodes[idx];
            w *= axis_rules[i].weights[idx];
        }
        const double v = pdf(y);
        if (!(v >= 0.0)) throw InvalidArgument("location density '" + name + "' is negative or NaN");
        integral += w * v;
    }
    if (std::abs(integral - 1.0) > 1e-6)
        throw InvalidArgument("location density '" + name + "' integrates to " + std::to_string(integral) +
                              ", not 1");
    auto fn = std::make_shared<const std::function<double(std::span<const double>)>>(std::move(pdf));
    return LocationLaw(std::move(domain), Density{std::move(name), std::move(fn), pdf_max});
}

LocationLaw LocationLaw::truncated_gaussian(Domain domain, std::vector<double> center,
                                            std::vector<double> scale) {
    const std::size_t d = domain.dim();
    if (center.size() != d || scale.size() != d)
        throw DimensionMismatch("truncated gaussian center/scale must have the domain dimension");
    double log_norm = 0.0;
    double pdf_max = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        check_positive(scale[i], "truncated gaussian scale");
        const double mass = normal_cdf((domain.upper()[i] - center[i]) / scale[i]) -
                            normal_cdf((domain.lower()[i] - center[i]) / scale[i]);
        if (!(mass > 0.0)) throw InvalidArgument("truncated gaussian has no mass on the domain");
        log_norm += std::log(mass * scale[i]) + 0.5 * kLog2Pi;
        const double nearest = std::clamp(center[i], domain.lower()[i], domain.upper()[i]);
        const double z = (nearest - center[i]) / scale[i];
        pdf_max *= std::exp(-0.5 * z * z);
    }
    pdf_max *= std::exp(-log_norm);
    auto pdf = [center, scale, log_norm](std::span<const double> y) {
        double e = -log_norm;
        for (std::size_t i = 0; i < y.size(); ++i) {
            const double z = (y[i] - center[i]) / scale[i];
            e -= 0.5 * z * z;
        }
        return std::exp(e);
    };
    return density(std::move(domain), "truncated_gaussian", std::move(pdf), pdf_max * (1.0 + 1e-12));
}

void LocationLaw::sample(Rng& rng, std::span<double> out) const {
    const std::size_t d = domain_.dim();
    auto draw_uniform = [&] {
        for (std::size_t i = 0; i < d; ++i) out[i] = domain_.lower()[i] + domain_.width(i) * uniform01(rng);
    };
    std::visit(overloaded{
                   [&](const Uniform&) { draw_uniform(); },
                   [&](const Point& p) { std::copy(p.y.begin(), p.y.end(), out.begin()); },
                   [&](const Nodes& n) {
                       std::discrete_distribution<std::size_t> pick(n.weights.begin(), n.weights.end());
                       const auto& y = n.points[pick(rng)];
                       std::copy(y.begin(), y.end(), out.begin());
                   },
                   [&](const Density& g) {
                       for (;;) {
                           draw_uniform();
                           if (uniform01(rng) * g.pdf_max <= (*g.pdf)(out)) return;
                       }
                   },
               },
               law_);
}

double LocationLaw::log_density(std::span<const double> y) const {
    if (!domain_.contains(y)) return kNegInf;
    return std::visit(overloaded{
                          [&](const Uniform&) { return -std::log(domain_.volume()); },
                          [&](const Point& p) {
                              return std::equal(p.y.begin(), p.y.end(), y.begin()) ? 0.0 : kNegInf;
                          },
                          [&](const Nodes& n) {
                              for (std::size_t i = 0; i < n.points.size(); ++i) {
                                  if (std::equal(n.points[i].begin(), n.points[i].end(), y.begin()))
                                      return std::log(n.weights[i]);
                              }
                              return kNegInf;
                          },
                          [&](const Density& g) {
                              const double v = (*g.pdf)(y);
                              return v > 0.0 ? std::log(v) : kNegInf;
                          },
                      },
                      law_);
}

bool LocationLaw::continuous() const noexcept {
    return std::holds_alternative<Uniform>(law_) || std::holds_alternative<Density>(law_);
}

// ----------------------------------------------------------------- MarkLaw

MarkLaw MarkLaw::gaussian(std::vector<double> mean, std::vector<double> cov) {
    const std::size_t m = mean.size();
    if (m == 0) throw InvalidArgument("gaussian mark needs m >= 1");
    if (cov.size() != m * m) throw DimensionMismatch("gaussian mark covariance must be m x m");
    std::vector<double> chol(m * m, 0.0);
    double log_det = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (std::abs(cov[i * m + j] - cov[j * m + i]) > 1e-12 * (1.0 + std::abs(cov[i * m + j])))
                throw InvalidArgument("gaussian mark covariance must be symmetric");
        }
    }
    for (std::size_t j = 0; j < m; ++j) {
        double diag = cov[j * m + j];
        for (std::size_t k = 0; k < j; ++k) diag -= chol[j * m + k] * chol[j * m + k];
        if (!(diag > 0.0)) throw InvalidArgument("gaussian mark covariance must be positive definite");
        chol[j * m + j] = std::sqrt(diag);
        log_det += std::log(diag);
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = cov[i * m + j];
            for (std::size_t k = 0; k < j; ++k) s -= chol[i * m + k] * chol[j * m + k];
            chol[i * m + j] = s / chol[j * m + j];
        }
    }
    return MarkLaw(Gaussian{std::move(mean), std::move(cov), std::move(chol), log_det});
}

MarkLaw MarkLaw::gaussian(double mean, double variance) {
    return gaussian(std::vector<double>{mean}, std::vector<double>{variance});
}

MarkLaw MarkLaw::lognormal(double mu, double sigma2) {
    if (!std::isfinite(mu)) throw InvalidArgument("lognormal mu must be finite");
    check_positive(sigma2, "lognormal sigma2");
    return MarkLaw(LogNormal{mu, sigma2});
}

MarkLaw MarkLaw::complex_gaussian(Scalar mean, double sigma2, Scalar relation) {
    check_positive(sigma2, "complex gaussian sigma2");
    if (std::abs(relation) > sigma2) throw InvalidArgument("complex gaussian requires |c^2| <= sigma^2");
    return MarkLaw(ComplexGaussian{mean, sigma2, relation});
}

MarkLaw MarkLaw::categorical(std::vector<std::vector<Scalar>> values, std::vector<double> probs,
                             ScalarField field) {
    if (values.empty()) throw InvalidArgument("categorical mark needs at least one value");
    if (probs.empty()) probs.assign(values.size(), 1.0 / static_cast<double>(values.size()));
    if (probs.size() != values.size()) throw DimensionMismatch("categorical values and probs differ in length");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].size() != values[0].size() || values[i].empty())
            throw DimensionMismatch("categorical mark values must share a nonzero dimension");
        if (field == ScalarField::real && !all_real(values[i]))
            throw DimensionMismatch("complex value in a real categorical mark");
        if (!(probs[i] > 0.0)) throw InvalidArgument("categorical probabilities must be positive");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-12) throw InvalidArgument("categorical probabilities must sum to 1");
    return MarkLaw(Categorical{std::move(values), std::move(probs), field});
}

std::size_t MarkLaw::amp_dim() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) { return g.mean.size(); },
                          [](const LogNormal&) { return std::size_t{1}; },
                          [](const ComplexGaussian&) { return std::size_t{1}; },
                          [](const Categorical& c) { return c.values[0].size(); },
                      },
                      law_);
}

ScalarField MarkLaw::field() const {
    if (const auto* c = std::get_if<Categorical>(&law_)) return c->field;
    return std::holds_alternative<ComplexGaussian>(law_) ? ScalarField::complex : ScalarField::real;
}

namespace {

// Covariance of (Re Q, Im Q) for the complex normal.
struct Real2x2 {
    double rr, ri, ii;
};

Real2x2 complex_normal_cov(const MarkLaw::ComplexGaussian& c) {
    return {0.5 * (c.sigma2 + c.relation.real()), 0.5 * c.relation.imag(), 0.5 * (c.sigma2 - c.relation.real())};
}

}  // namespace

void MarkLaw::sample(Rng& rng, std::span<Scalar> out) const {
    std::visit(overloaded{
                   [&](const Gaussian& g) {
                       const std::size_t m = g.mean.size();
                       std::vector<double> z(m);
                       for (auto& zi : z) zi = standard_normal(rng);
                       for (std::size_t i = 0; i < m; ++i) {
                           double s = g.mean[i];
                           for (std::size_t k = 0; k <= i; ++k) s += g.cov_chol[i * m + k] * z[k];
                           out[i] = Scalar{s, 0.0};
                       }
                   },
                   [&](const LogNormal& l) {
                       out[0] = Scalar{std::exp(l.mu + std::sqrt(l.sigma2) * standard_normal(rng)), 0.0};
                   },
                   [&](const ComplexGaussian& c) {
                       const auto cov = complex_normal_cov(c);
                       const double l11 = std::sqrt(cov.rr);
                       const double l21 = l11 > 0.0 ? cov.ri / l11 : 0.0;
                       const double l22 = std::sqrt(std::max(0.0, cov.ii - l21 * l21));
                       const double z1 = standard_normal(rng);
                       const double z2 = standard_normal(rng);
                       out[0] = c.mean + Scalar{l11 * z1, l21 * z1 + l22 * z2};
                   },
                   [&](const Categorical& c) {
                       std::discrete_distribution<std::size_t> pick(c.probs.begin(), c.probs.end());
                       const auto& v = c.values[pick(rng)];
                       std::copy(v.begin(), v.end(), out.begin());
                   },
               },
               law_);
}

double MarkLaw::log_density(std::span<const Scalar> q) const {
    if (q.size() != amp_dim()) throw DimensionMismatch("mark amplitude has wrong dimension");
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                if (!all_real(q)) return kNegInf;
                const std::size_t m = g.mean.size();
                std::vector<double> w(m);
                double quad = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    double s = q[i].real() - g.mean[i];
                    for (std::size_t k = 0; k < i; ++k) s -= g.cov_chol[i * m + k] * w[k];
                    w[i] = s / g.cov_chol[i * m + i];
                    quad += w[i] * w[i];
                }
                return -0.5 * (static_cast<double>(m) * kLog2Pi + g.log_det + quad);
            },
            [&](const LogNormal& l) {
                const double x = q[0].real();
                if (q[0].imag() != 0.0 || !(x > 0.0)) return kNegInf;
                const double z = std::log(x) - l.mu;
                return -std::log(x) - 0.5 * (kLog2Pi + std::log(l.sigma2)) - z * z / (2.0 * l.sigma2);
            },
            [&](const ComplexGaussian& c) {
                const auto cov = complex_normal_cov(c);
                const double det = cov.rr * cov.ii - cov.ri * cov.ri;
                if (!(det > 0.0)) throw UnsupportedLaw("degenerate complex gaussian (|c^2| = sigma^2) has no density");
                const double a = q[0].real() - c.mean.real();
                const double b = q[0].imag() - c.mean.imag();
                const double quad = (cov.ii * a * a - 2.0 * cov.ri * a * b + cov.rr * b * b) / det;
                return -kLog2Pi - 0.5 * std::log(det) - 0.5 * quad;
            },
            [&](const Categorical& c) {
                for (std::size_t i = 0; i < c.values.size(); ++i) {
                    if (std::equal(c.values[i].begin(), c.values[i].end(), q.begin())) return std::log(c.probs[i]);
                }
                return kNegInf;
            },
        },
        law_);
}

bool MarkLaw::continuous() const noexcept { return !std::holds_alternative<Categorical>(law_); }

std::optional<double> MarkLaw::mean_norm() const {
    return std::visit(
        overloaded{
            [](const Gaussian& g) -> std::optional<double> {
                const std::size_t m = g.mean.size();
                if (m == 1) {
                    const double mu = g.mean[0];
                    const double s = std::sqrt(g.cov[0]);
                    return s * std::sqrt(2.0 / M_PI) * std::exp(-mu * mu / (2.0 * s * s)) +
                           mu * std::erf(mu / (s * std::sqrt(2.0)));
                }
                // Centred isotropic case: chi distribution with m degrees of freedom.
                const bool centred = std::all_of(g.mean.begin(), g.mean.end(), [](double x) { return x == 0.0; });
                bool isotropic = true;
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < m; ++j)
                        if ((i == j && g.cov[i * m + j] != g.cov[0]) || (i != j && g.cov[i * m + j] != 0.0))
                            isotropic = false;
                if (!centred || !isotropic) return std::nullopt;
                const double dm = static_cast<double>(m);
                return std::sqrt(2.0 * g.cov[0]) * std::exp(std::lgamma(0.5 * (dm + 1.0)) - std::lgamma(0.5 * dm));
            },
            [](const LogNormal& l) -> std::optional<double> { return std::exp(l.mu + 0.5 * l.sigma2); },
            [](const ComplexGaussian& c) -> std::optional<double> {
                if (c.mean != Scalar{} || c.relation != Scalar{}) return std::nullopt;
                return 0.5 * std::sqrt(M_PI * c.sigma2);
            },
            [](const Categorical& c) -> std::optional<double> {
                double s = 0.0;
                for (std::size_t i = 0; i < c.values.size(); ++i) s += c.probs[i] * amplitude_norm(c.values[i]);
                return s;
            },
        },
        law_);
}

double MarkLaw::scale() const {
    return std::visit(overloaded{
                          [](const Gaussian& g) {
                              const std::size_t m = g.mean.size();
                              double tr = 0.0;
                              for (std::size_t i = 0; i < m; ++i) tr += g.cov[i * m + i];
                              return std::sqrt(tr / static_cast<double>(m));
                          },
                          [](const LogNormal& l) {
                              return std::sqrt(std::expm1(l.sigma2) * std::exp(2.0 * l.mu + l.sigma2));
                          },
                          [](const ComplexGaussian& c) { return std::sqrt(c.sigma2); },
                          [](const Categorical& c) {
                              const std::size_t m = c.values[0].size();
                              std::vector<Scalar> mean(m);
                              for (std::size_t i = 0; i < c.values.size(); ++i)
                                  for (std::size_t j = 0; j < m; ++j) mean[j] += c.probs[i] * c.values[i][j];
                              double var = 0.0;
                              for (std::size_t i = 0; i < c.values.size(); ++i)
                                  for (std::size_t j = 0; j < m; ++j) var += c.probs[i] * std::norm(c.values[i][j] - mean[j]);
                              return var > 0.0 ? std::sqrt(var) : 1.0;
                          },
                      },
                      law_);
}

Scalar MarkLaw::characteristic(std::span<const Scalar> t) const {
    if (t.size() != amp_dim()) throw DimensionMismatch("characteristic argument has wrong dimension");
    const Scalar i{0.0, 1.0};
    return std::visit(
        overloaded{
            [&](const Gaussian& g) {
                const std::size_t m = g.mean.size();
                double lin = 0.0;
                double quad = 0.0;
                for (std::size_t a = 0; a < m; ++a) {
                    lin += t[a].real() * g.mean[a];
                    for (std::size_t b = 0; b < m; ++b) quad += t[a].real() * g.cov[a * m + b] * t[b].real();
                }
                return std::exp(i * lin - 0.5 * quad);
            },
            [&](const LogNormal& l) {
                static const QuadratureRule rule = gauss_hermite_normal(160);
                const double s = std::sqrt(l.sigma2);
                Scalar acc{0.0, 0.0};
                for (std::size_t k = 0; k < rule.nodes.size(); ++k)
                    acc += rule.weights[k] * std::exp(i * (t[0].real() * std::exp(l.mu + s * rule.nodes[k])));
                return acc;
            },
            [&](const ComplexGaussian& c) {
                // Re(t conj q) = t_r q_r + t_i q_i.
                const auto cov = complex_normal_cov(c);
                const double tr = t[0].real();
                const double ti = t[0].imag();
                const double lin = tr * c.mean.real() + ti * c.mean.imag();
                const double quad = tr * tr * cov.rr + 2.0 * tr * ti * cov.ri + ti * ti * cov.ii;
                return std::exp(i * lin - 0.5 * quad);
            },
            [&](const Categorical& c) {
                Scalar acc{0.0, 0.0};
                for (std::size_t k = 0; k < c.values.size(); ++k)
                    acc += c.probs[k] * std::exp(i * inner(t, c.values[k]).real());
                return acc;
            },
        },
        law_);
}

// ----------------------------------------------------------------- Weights

Weights Weights::sequence(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("weight sequence must be non-empty");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidArgument("weights must be finite");
    return Weights(Sequence{std::move(values)});
}

Weights Weights::geometric(double ratio, std::size_t k_max) {
    if (!(std::abs(ratio) < 1.0) || ratio == 0.0)
        throw InvalidArgument("geometric weights need 0 < |ratio| < 1 for summability");
    return Weights(Geometric{ratio, k_max});
}

Weights Weights::power(double exponent, std::size_t k_max) {
    if (!(exponent > 1.0)) throw InvalidArgument("power weights need exponent > 1 for summability");
    if (k_max == 0) throw InvalidArgument("power weights need k_max >= 1");
    return Weights(Power{exponent, k_max});
}

double Weights::operator()(std::size_t k) const {
    return std::visit(overloaded{
                          [](const Unit&) { return 1.0; },
                          [k](const Sequence& s) { return k >= 1 && k <= s.values.size() ? s.values[k - 1] : 0.0; },
                          [k](const Geometric& g) { return k <= g.k_max ? std::pow(g.ratio, static_cast<double>(k)) : 0.0; },
                          [k](const Power& p) {
                              return k <= p.k_max ? std::pow(static_cast<double>(k), -p.exponent) : 0.0;
                          },
                      },
                      law_);
}

std::optional<std::size_t> Weights::k_max() const {
    return std::visit(overloaded{
                          [](const Unit&) -> std::optional<std::size_t> { return std::nullopt; },
                          [](const Sequence& s) -> std::optional<std::size_t> { return s.values.size(); },
                          [](const Geometric& g) -> std::optional<std::size_t> { return g.k_max; },
                          [](const Power& p) -> std::optional<std::size_t> { return p.k_max; },
                      },
                      law_);
}

double Weights::tail_sum() const {
    return std::visit(overloaded{
                          [](const Unit&) { return std::numeric_limits<double>::infinity(); },
                          [](const Sequence&) { return 0.0; },
                          [](const Geometric& g) {
                              const double r = std::abs(g.ratio);
                              return std::pow(r, static_cast<double>(g.k_max + 1)) / (1.0 - r);
                          },
                          [](const Power& p) {
                              // Integral bound: sum_{k > K} k^-p <= int_K^inf x^-p dx.
                              return std::pow(static_cast<double>(p.k_max), 1.0 - p.exponent) / (p.exponent - 1.0);
                          },
                      },
                      law_);
}

// --------------------------------------------------------------- PriorSpec

PriorSpec::PriorSpec(CountLaw count, LocationLaw location, MarkLaw mark, Weights weights)
    : count_(std::move(count)), location_(std::move(location)), mark_(std::move(mark)), weights_(std::move(weights)) {}

DiscreteMeasure sample_prior(const PriorSpec& spec, Rng& rng) {
    DiscreteMeasure u = spec.empty_measure();
    std::size_t n = spec.count().sample(rng);
    if (const auto cap = spec.weights().k_max()) n = std::min(n, *cap);
    std::vector<double> y(spec.dim());
    std::vector<Scalar> q(spec.amp_dim());
    const bool unit = spec.weights().is_unit();
    for (std::size_t k = 1; k <= n; ++k) {
        spec.location().sample(rng, y);
        spec.mark().sample(rng, q);
        if (!unit) {
            const double w = spec.weights()(k);
            for (auto& c : q) c *= w;
        }
        u.push_back(y, q);
    }
    return u;
}

double log_prior_density(const PriorSpec& spec, const DiscreteMeasure& u) {
    if (!spec.weights().is_unit()) throw UnsupportedLaw("log_prior_density requires unit weights");
    if (u.dim() != spec.dim() || u.amp_dim() != spec.amp_dim() || u.field() != spec.field())
        throw DimensionMismatch("measure does not match the prior's d, m or scalar field");
    const std::size_t n = u.size();
    double lp = spec.count().log_pmf(n);
    if (lp == kNegInf) return kNegInf;
    lp += std::lgamma(static_cast<double>(n) + 1.0);
    for (std::size_t k = 0; k < n; ++k) {
        lp += spec.location().log_density(u.location(k));
        if (lp == kNegInf) return kNegInf;
        lp += spec.mark().log_density(u.amplitude(k));
        if (lp == kNegInf) return kNegInf;
    }
    return lp;
}

double prior_mean_tv(const PriorSpec& spec) {
    if (!spec.weights().is_unit()) throw UnsupportedLaw("prior_mean_tv requires unit weights");
    const double mean_k = spec.count().mean();
    if (mean_k == 0.0) return 0.0;
    const auto norm = spec.mark().mean_norm();
    if (!norm) throw UnsupportedLaw("mark law has no closed-form mean norm; use a Monte Carlo estimate");
    return mean_k * *norm;
}

WeightSummabilityReport weight_summability(const PriorSpec& spec) {
    const auto k_max = spec.weights().k_max();
    if (!k_max) throw UnsupportedLaw("weight summability report requires a weight sequence");
    const auto norm = spec.mark().mean_norm();
    if (!norm) throw UnsupportedLaw("mark law has no closed-form mean norm");
    double witness = 0.0;
    for (std::size_t k = 1; k <= *k_max; ++k) witness += std::abs(spec.weights()(k)) * *norm;
    return {witness, spec.weights().tail_sum() * *norm, *k_max};
}

}  // namespace spikebayes
