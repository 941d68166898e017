#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "doctest.h"
#include "spikebayes/diagnostics.hpp"
#include "spikebayes/errors.hpp"

using namespace spikebayes;

namespace {

const Domain unit_interval({0.0}, {1.0});

std::shared_ptr<KernelForward> sensor_grid(std::size_t n, double sigma) {
    return std::make_shared<KernelForward>(
        KernelForward::gaussian_kernel(unit_interval, SensorSet::grid({0.0}, {1.0}, {n}), sigma));
}

PriorSpec poisson_gaussian(double gamma = 1.0, double mean = 0.0, double var = 1.0) {
    return PriorSpec(CountLaw::poisson(gamma), LocationLaw::uniform(unit_interval), MarkLaw::gaussian(mean, var));
}

struct Toy {
    double a;
    Posterior post;
};

Toy conjugate_toy(double z, double tau2, double s2) {
    const double sigma = 0.1;
    const double dist = 0.05;
    auto fwd = std::make_shared<KernelForward>(
        KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.5 + dist}}}, sigma));
    PriorSpec prior(CountLaw::fixed(1), LocationLaw::point(unit_interval, {0.5}), MarkLaw::gaussian(0.0, tau2));
    return {std::exp(-dist * dist / (2.0 * sigma * sigma)),
            Posterior(prior, fwd, NoiseModel::isotropic(1, s2), Observation{Scalar(z)})};
}

// Convolution example: two atoms, 10 sensors, kernel width 0.2, noise variance 0.25.
Posterior convolution_posterior(std::uint64_t seed) {
    const auto prior = PriorSpec(CountLaw::poisson(2.0), LocationLaw::uniform(unit_interval), MarkLaw::lognormal(0.0, 0.25));
    auto fwd = sensor_grid(10, 0.2);
    DiscreteMeasure truth(1, 1);
    truth.push_back(std::vector<double>{0.3}, 1.0);
    truth.push_back(std::vector<double>{0.65}, 1.3);
    Rng rng = make_rng(seed, "noise");
    Observation z = apply(*fwd, truth);
    for (auto& c : z) c += 0.5 * standard_normal(rng);
    return Posterior(prior, fwd, NoiseModel::isotropic(10, 0.25), z);
}

}  // namespace

TEST_CASE("Gaussian Hellinger oracle agrees with quadrature") {
    for (auto [m1, s1, m2, s2] : {std::array{0.0, 1.0, 0.5, 1.0}, std::array{0.3, 0.5, -0.2, 0.8}, std::array{1.0, 2.0, 1.0, 0.3}}) {
        const double closed = oracle::gaussian_hellinger(m1, s1, m2, s2);
        const double quad = oracle::hellinger_quadrature([&](double x) { return oracle::normal_pdf(x, m1, s1 * s1); },
                                                         [&](double x) { return oracle::normal_pdf(x, m2, s2 * s2); },
                                                         -20.0, 20.0);
        CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
    }
}

TEST_CASE("hellinger of a posterior with itself is exactly zero") {
    const auto p = convolution_posterior(1);
    const auto h = hellinger(p, p, 5000, 42);
    CHECK(h.value == 0.0);
    CHECK(h.std_error == 0.0);
    CHECK(h.n_samples == 5000);
    CHECK(h.common_seed == 42);
    CHECK_FALSE(h.clamped);
}

TEST_CASE("flat likelihoods give zero distance") {
    auto fwd = sensor_grid(3, 0.2);
    const Posterior a(poisson_gaussian(), fwd, NoiseModel::flat(3), Observation(3, Scalar(0.0)));
    const Posterior b(poisson_gaussian(), fwd, NoiseModel::flat(3), Observation(3, Scalar(7.0)));
    CHECK(hellinger(a, b, 1000, 3).value == 0.0);
}

TEST_CASE("hellinger is symmetric under a shared seed") {
    const auto p = convolution_posterior(2);
    const auto q = convolution_posterior(3).with_forward(p.forward_ptr());
    const auto q2 = Posterior(p.prior(), p.forward_ptr(), p.noise(), q.data());
    const auto ab = hellinger(p, q2, 20000, 7);
    const auto ba = hellinger(q2, p, 20000, 7);
    CHECK(ab.value == ba.value);
    CHECK(ab.std_error == ba.std_error);
    CHECK(ab.value > 0.0);
    CHECK(ab.value <= 1.0);
}

TEST_CASE("hellinger requires a shared prior") {
    auto fwd = sensor_grid(3, 0.2);
    const Posterior a(poisson_gaussian(1.0), fwd, NoiseModel::isotropic(3, 1.0), Observation(3, Scalar(0.0)));
    const Posterior b(poisson_gaussian(2.0), fwd, NoiseModel::isotropic(3, 1.0), Observation(3, Scalar(0.0)));
    CHECK_THROWS_AS(hellinger(a, b, 100, 1), InvalidArgument);
    CHECK_THROWS_AS(hellinger(a, a, 1, 1), InvalidArgument);
}

TEST_CASE("conjugate Hellinger matches the Gaussian closed form") {
    const double tau2 = 1.0;
    const double s2 = 0.25;
    for (auto [z1, z2] : {std::pair{0.0, 0.5}, std::pair{1.0, -0.3}, std::pair{0.2, 0.25}}) {
        const auto t1 = conjugate_toy(z1, tau2, s2);
        const auto t2 = conjugate_toy(z2, tau2, s2);
        const auto c1 = oracle::conjugate_posterior(z1, t1.a, tau2, s2);
        const auto c2 = oracle::conjugate_posterior(z2, t2.a, tau2, s2);
        const double expected = oracle::gaussian_hellinger(c1.mean, std::sqrt(c1.var), c2.mean, std::sqrt(c2.var));
        const auto h = hellinger(t1.post, t2.post, 100000, 11);
        CHECK(std::abs(h.value - expected) <= 4.0 * h.std_error);
        CHECK(std::abs(h.ratio_bias) < 1e-3);
    }
}

TEST_CASE("hellinger values are bounded and satisfy the triangle inequality") {
    auto fwd = sensor_grid(6, 0.15);
    const auto prior = poisson_gaussian(2.0, 0.5, 1.0);
    Rng rng(12);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Posterior> ps;
        for (int k = 0; k < 3; ++k) {
            Observation z(6);
            for (auto& c : z) c = 0.7 * normal(rng);
            ps.emplace_back(prior, fwd, NoiseModel::isotropic(6, 0.3), z);
        }
        const std::uint64_t seed = 1000 + rep;
        const auto d12 = hellinger(ps[0], ps[1], 20000, seed);
        const auto d23 = hellinger(ps[1], ps[2], 20000, seed);
        const auto d13 = hellinger(ps[0], ps[2], 20000, seed);
        for (const auto* h : {&d12, &d23, &d13}) {
            CHECK(h->value >= 0.0);
            CHECK(h->value <= 1.0);
        }
        const double se = std::max({d12.std_error, d23.std_error, d13.std_error});
        CHECK(d13.value <= d12.value + d23.value + 8.0 * se);
    }

    // Nearly disjoint posteriors stay within [0, 1].
    const auto far1 = conjugate_toy(-30.0, 100.0, 0.01);
    const auto far2 = conjugate_toy(30.0, 100.0, 0.01);
    const auto h = hellinger(far1.post, far2.post, 10000, 5);
    CHECK(h.value <= 1.0);
    CHECK(h.value > 0.99);
}

TEST_CASE("hellinger clamps numerically impossible inputs") {
    // A single dominant draw in each posterior, on different draws: squared distance is exactly 1.
    const std::vector<double> ll1{0.0, -1e6, -1e6, -1e6};
    const std::vector<double> ll2{-1e6, 0.0, -1e6, -1e6};
    const auto h = hellinger_from_log_likelihoods(ll1, ll2);
    CHECK(h.value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.value <= 1.0);
    CHECK_THROWS_AS(hellinger_from_log_likelihoods(ll1, std::vector<double>{0.0}), DimensionMismatch);
}

TEST_CASE("characteristic functional trivial cases") {
    Rng rng(13);
    const auto zero_f = TestFunction::constant(0.0);
    const auto spec = poisson_gaussian(3.0);
    const auto e0 = empirical_charfun(spec, zero_f, 1000, rng);
    CHECK(e0.value == Scalar(1.0));
    CHECK(e0.std_error == 0.0);
    CHECK(poisson_charfun_closed_form(spec, zero_f) == Scalar(1.0));

    const PriorSpec empty(CountLaw::fixed(0), LocationLaw::uniform(unit_interval), MarkLaw::gaussian(0.0, 1.0));
    CHECK(empirical_charfun(empty, TestFunction::sine(3.0), 1000, rng).value == Scalar(1.0));

    const auto tiny_gamma = poisson_gaussian(1e-12);
    CHECK(std::abs(poisson_charfun_closed_form(tiny_gamma, TestFunction::constant(5.0)) - 1.0) < 1e-11);

    CHECK_THROWS_AS(poisson_charfun_closed_form(empty, zero_f), UnsupportedLaw);
    CHECK_THROWS_AS(empirical_charfun(spec, zero_f, 1, rng), InvalidArgument);
}

TEST_CASE("characteristic functional modulus bound") {
    Rng rng(14);
    const std::vector<PriorSpec> specs{
        poisson_gaussian(2.0),
        PriorSpec(CountLaw::fixed(3), LocationLaw::uniform(unit_interval), MarkLaw::lognormal(0.0, 0.25)),
        PriorSpec(CountLaw::truncated_poisson(4.0, 6), LocationLaw::uniform(unit_interval), MarkLaw::gaussian(1.0, 0.5)),
    };
    for (const auto& spec : specs)
        for (const auto& f : {TestFunction::constant(1.0), TestFunction::sine(2.0), TestFunction::linear(0.2, {1.5})}) {
            const auto est = empirical_charfun(spec, f, 2000, rng);
            CHECK(std::abs(est.value) <= 1.0 + 4.0 * est.std_error);
        }
}

TEST_CASE("closed-form characteristic functional example") {
    const auto spec = poisson_gaussian(1.0);
    const Scalar closed = poisson_charfun_closed_form(spec, TestFunction::constant(1.0));
    const double expected = std::exp(std::exp(-0.5) - 1.0);
    CHECK(closed.real() == doctest::Approx(expected).epsilon(1e-14));
    CHECK(std::abs(closed.imag()) < 1e-15);
    CHECK(expected == doctest::Approx(0.6747).epsilon(1e-4));
    Rng rng(15);
    const auto est = empirical_charfun(spec, TestFunction::constant(1.0), 200000, rng);
    CHECK(std::abs(est.value - closed) <= 4.0 * est.std_error);
}

TEST_CASE("closed form matches quadrature and Monte Carlo for stock test functions") {
    const double gamma = 1.5;
    const double mu = 0.4;
    const double var = 0.8;
    const auto spec = poisson_gaussian(gamma, mu, var);
    const auto kernel = KernelForward::gaussian_kernel(unit_interval, SensorSet{{{0.3}}}, 0.2);
    const std::vector<std::pair<std::function<double(double)>, TestFunction>> cases{
        {[](double) { return 1.0; }, TestFunction::constant(1.0)},
        {[](double y) { return 0.5 - 2.0 * y; }, TestFunction::linear(0.5, {-2.0})},
        {[](double y) { return std::sin(oracle::kPi * 3.0 * y); }, TestFunction::sine(3.0)},
        {[](double y) { return 2.0 * std::exp(-(y - 0.6) * (y - 0.6) / (2.0 * 0.01)); },
         TestFunction::gaussian_bump({0.6}, 0.1, 2.0)},
        {[](double y) { return std::exp(-(y - 0.3) * (y - 0.3) / (2.0 * 0.04)); }, TestFunction::scalar([&kernel](std::span<const double> y) {
             std::vector<Scalar> row(1);
             kernel.kernel_row(0, y, row);
             return row[0].real();
         })},
    };
    Rng rng(16);
    for (const auto& [plain, f] : cases) {
        const double re = oracle::simpson([&](double y) { const double v = plain(y); return std::exp(-0.5 * var * v * v) * std::cos(mu * v) - 1.0; }, 0.0, 1.0);
        const double im = oracle::simpson([&](double y) { const double v = plain(y); return std::exp(-0.5 * var * v * v) * std::sin(mu * v); }, 0.0, 1.0);
        const Scalar oracle_value = std::exp(gamma * Scalar(re, im));
        const Scalar closed = poisson_charfun_closed_form(spec, f);
        CHECK(std::abs(closed - oracle_value) < 1e-10);
        const auto est = empirical_charfun(spec, f, 100000, rng);
        CHECK(std::abs(est.value - closed) <= 4.0 * est.std_error);
    }
}

TEST_CASE("stability curve edge cases") {
    const auto p = convolution_posterior(4);
    const Observation z = p.data();
    Observation bumped(z);
    bumped[0] += 0.5;
    const auto curve = stability_curve(p, {z, bumped, z}, 5000, 9);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].distance.value == 0.0);
    CHECK(curve[0].perturbation_size == 0.0);
    CHECK(curve[1].distance.value > 0.0);
    CHECK(curve[1].perturbation_size == doctest::Approx(0.5));
    CHECK(curve[2].distance.value == 0.0);
    const auto direct = hellinger(p.with_data(bumped), p, 5000, 9);
    CHECK(curve[1].distance.value == direct.value);
    CHECK_THROWS(stability_curve(p, {Observation(3, Scalar(0.0))}, 100, 1));
}

TEST_CASE("stability curve shrinks with the perturbation") {
    const auto p = convolution_posterior(5);
    std::vector<Observation> zs;
    for (int n = 1; n <= 8; ++n) {
        Observation zn = p.data();
        zn[0] += 1.0 / n;
        zs.push_back(zn);
    }
    const auto curve = stability_curve(p, zs, 20000, 10);
    for (std::size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].distance.value <= curve[i - 1].distance.value + 2.0 * curve[i].distance.std_error);
    CHECK(curve.back().distance.value < curve.front().distance.value / 4.0);
}

TEST_CASE("consistency curve edge cases") {
    auto fwd = sensor_grid(5, 0.1);
    const PriorSpec empty(CountLaw::fixed(0), LocationLaw::uniform(unit_interval), MarkLaw::gaussian(0.0, 1.0));
    const Posterior pe(empty, fwd, NoiseModel::isotropic(5, 0.1), Observation(5, Scalar(0.3)));
    for (const auto& pt : consistency_curve(pe, {2, 8, 32}, 1000, 1)) CHECK(pt.distance.value == 0.0);

    // Atoms on the nodes of every grid: discretized and exact likelihoods coincide.
    const PriorSpec on_grid(CountLaw::poisson(2.0), LocationLaw::nodes(unit_interval, {{0.0}, {0.25}, {0.5}, {1.0}}),
                            MarkLaw::gaussian(0.0, 1.0));
    const Posterior po(on_grid, fwd, NoiseModel::isotropic(5, 0.1), Observation{0.1, 0.9, 0.2, -0.3, 0.0});
    for (const auto& pt : consistency_curve(po, {4, 8, 64}, 5000, 2)) {
        CHECK(pt.distance.value <= 4.0 * pt.distance.std_error + 1e-7);
        CHECK(pt.distance.value < 1e-6);
    }

    const Posterior disc = po.with_forward(std::make_shared<DiscretizedForward>(fwd, 4));
    CHECK_THROWS_AS(consistency_curve(disc, {8}, 100, 1), InvalidArgument);
}

TEST_CASE("consistency curve decreases along doubling grids") {
    const auto p = convolution_posterior(6);
    const std::vector<std::size_t> grids{4, 8, 16, 32, 64, 128, 256};
    const auto curve = consistency_curve(p, grids, 20000, 3);
    REQUIRE(curve.size() == grids.size());
    CHECK(curve.back().distance.value < 0.01 + 4.0 * curve.back().distance.std_error);
    CHECK(curve.back().distance.value < curve.front().distance.value);
}
