#include <algorithm>
#include <cmath>

#include "../support/enumerated_chain.hpp"
#include "../support/oracles.hpp"
#include "doctest.h"
#include "spikebayes/errors.hpp"
#include "spikebayes/sampler.hpp"

using namespace spikebayes;

namespace {

const Domain unit_interval({0.0}, {1.0});

std::shared_ptr<KernelForward> sensors(std::vector<double> xs, double sigma) {
    SensorSet s;
    for (double x : xs) s.points.push_back({x});
    return std::make_shared<KernelForward>(KernelForward::gaussian_kernel(unit_interval, s, sigma));
}

Posterior flat_posterior(PriorSpec prior) {
    return Posterior(std::move(prior), sensors({0.5}, 0.1), NoiseModel::flat(1), Observation{Scalar(0.0)});
}

SamplerConfig birth_death_only(std::size_t n_iters, std::size_t thin) {
    SamplerConfig cfg;
    cfg.n_iters = n_iters;
    cfg.thin = thin;
    cfg.p_birth = 0.5;
    cfg.p_death = 0.5;
    cfg.p_move = 0.0;
    cfg.p_perturb = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("move probabilities with boundary reallocation") {
    SamplerConfig cfg;
    const auto zero = move_probabilities(cfg, 0, 5);
    CHECK(zero.birth == 1.0);
    CHECK(zero.death + zero.move_location + zero.perturb_amplitude == 0.0);
    const auto mid = move_probabilities(cfg, 2, 5);
    CHECK(mid.birth == 0.25);
    CHECK(mid.death == 0.25);
    CHECK(mid.move_location == 0.3);
    CHECK(mid.perturb_amplitude == 0.2);
    const auto top = move_probabilities(cfg, 5, 5);
    CHECK(top.birth == 0.0);
    CHECK(top.death == 0.5);
    CHECK(top.birth + top.death + top.move_location + top.perturb_amplitude == doctest::Approx(1.0));
    const auto none = move_probabilities(cfg, 0, 0);
    CHECK(none.birth + none.death + none.move_location + none.perturb_amplitude == 0.0);

    cfg.p_move = 0.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
    SamplerConfig bad;
    bad.thin = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK(move_kind_from_string(to_string(MoveKind::perturb_amplitude)) == MoveKind::perturb_amplitude);
}

TEST_CASE("birth is never proposed at the cap") {
    const auto post = flat_posterior(PriorSpec(CountLaw::poisson(5.0), LocationLaw::uniform(unit_interval),
                                               MarkLaw::gaussian(0.0, 1.0)));
    SamplerConfig cfg;
    cfg.k_max = 3;
    const RjmcmcSampler sampler(post, cfg);
    Rng rng(1);
    DiscreteMeasure u(1, 1);
    for (double y : {0.1, 0.5, 0.9}) u.push_back(std::vector<double>{y}, 0.5);
    const auto state = sampler.make_state(u);
    for (int i = 0; i < 5000; ++i) {
        const auto r = sampler.step(state, rng);
        CHECK(r.move != MoveKind::birth);
        CHECK(r.state.measure.size() <= 3);
    }
}

TEST_CASE("chains stay inside the domain and under the cap") {
    const auto post = Posterior(PriorSpec(CountLaw::poisson(5.0), LocationLaw::uniform(unit_interval),
                                          MarkLaw::gaussian(0.0, 1.0)),
                                sensors({0.0, 0.3, 0.6, 1.0}, 0.1), NoiseModel::isotropic(4, 0.1),
                                Observation{1.0, 0.0, 2.0, -1.0});
    SamplerConfig cfg;
    cfg.n_iters = 20000;
    cfg.k_max = 3;
    cfg.location_step = 0.4;
    Rng rng(2);
    std::size_t count = 0;
    const auto summary = run_chain(post, cfg, rng, [&](const ChainRecord& r) {
        ++count;
        CHECK(r.measure.size() <= 3);
        CHECK(r.measure.inside(unit_interval));
        CHECK(r.log_likelihood == doctest::Approx(log_likelihood(post, r.measure)).epsilon(1e-12));
    });
    CHECK(count == 20000);
    CHECK(summary.n_records == 20000);
    CHECK(summary.k_hist.size() == 4);
    CHECK(summary.truncated_mass == doctest::Approx(post.prior().count().tail_mass(3)));
}

TEST_CASE("detailed balance on an enumerated state space") {
    const enumerated::Space space;
    SamplerConfig cfg;
    const RjmcmcSampler sampler(space.post, cfg);
    REQUIRE(sampler.k_max() == 2);
    const std::size_t n_states = space.size();
    REQUIRE(n_states == 43);

    // The tuple mass agrees with the library density up to the n! ordering factor.
    const auto pi = space.stationary();
    double total = 0.0;
    for (const auto& t : space.tuples) {
        total += std::exp(log_posterior_unnorm(space.post, space.measure(t))) /
                 std::tgamma(static_cast<double>(t.size()) + 1.0);
    }
    for (std::size_t i = 0; i < n_states; ++i) {
        const auto& t = space.tuples[i];
        const double from_density = std::exp(log_posterior_unnorm(space.post, space.measure(t))) /
                                    std::tgamma(static_cast<double>(t.size()) + 1.0) / total;
        CHECK(pi[i] == doctest::Approx(from_density).epsilon(1e-13));
    }

    const auto P = space.transition_matrix(sampler);
    for (std::size_t i = 0; i < n_states; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_states; ++j) {
            row += P[i][j];
            CHECK(P[i][j] >= 0.0);
        }
        CHECK(row == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(enumerated::balance_violation(pi, P) <= 1e-10);

    double stat_err = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_states; ++i) s += pi[i] * P[i][j];
        stat_err = std::max(stat_err, std::abs(s - pi[j]));
    }
    CHECK(stat_err <= 1e-12);

    // The sampler's step() realizes the enumerated rows.
    std::vector<ChainState> states;
    for (const auto& t : space.tuples) states.push_back(sampler.make_state(space.measure(t)));
    Rng rng(3);
    const int draws = 200000;
    for (std::size_t i : {space.index_of({}), space.index_of({{1, 0}}), space.index_of({{0, 1}, {2, 0}})}) {
        std::vector<int> hits(n_states, 0);
        for (int d = 0; d < draws; ++d) {
            const auto r = sampler.step(states[i], rng);
            std::size_t j = n_states;
            for (std::size_t c = 0; c < n_states; ++c)
                if (states[c].measure == r.state.measure) j = c;
            REQUIRE(j < n_states);
            ++hits[j];
        }
        for (std::size_t j = 0; j < n_states; ++j) {
            const double p = P[i][j];
            const double se = std::sqrt(std::max(p * (1.0 - p), 1e-12) / draws);
            CHECK(std::abs(static_cast<double>(hits[j]) / draws - p) <= 5.0 * se);
        }
    }
}

TEST_CASE("conjugate toy posterior moments") {
    const double sigma = 0.1;
    const double dist = 0.05;
    const double tau2 = 1.0;
    const double s2 = 0.25;
    const double z = 1.0;
    const double a = std::exp(-dist * dist / (2.0 * sigma * sigma));
    const Posterior post(PriorSpec(CountLaw::fixed(1), LocationLaw::point(unit_interval, {0.5}), MarkLaw::gaussian(0.0, tau2)),
                         sensors({0.5 + dist}, sigma), NoiseModel::isotropic(1, s2), Observation{Scalar(z)});
    const auto truth = oracle::conjugate_posterior(z, a, tau2, s2);
    SamplerConfig cfg;
    cfg.n_iters = 200000;
    cfg.burn_in = 1000;
    cfg.amplitude_step = 0.8;
    std::vector<ChainRecord> chain;
    Rng rng(4);
    const auto summary = run_chain(post, cfg, rng, [&](const ChainRecord& r) { chain.push_back(r); });
    CHECK(summary.moves[static_cast<std::size_t>(MoveKind::birth)].proposed == 0);
    const auto m = posterior_expectation(chain, [](const DiscreteMeasure& u) { return u.amplitude(0)[0].real(); });
    CHECK(std::abs(m.value - truth.mean) <= 4.0 * m.std_error);
    const auto v = posterior_expectation(chain, [&](const DiscreteMeasure& u) {
        const double d = u.amplitude(0)[0].real() - truth.mean;
        return d * d;
    });
    CHECK(std::abs(v.value - truth.var) <= 4.0 * v.std_error);
    CHECK(std::abs(summary.mean_amplitude_sum.value - m.value) < 1e-12);
}

TEST_CASE("flat likelihood chain recovers prior moments") {
    const auto post = flat_posterior(PriorSpec(CountLaw::poisson(2.0), LocationLaw::uniform(unit_interval),
                                               MarkLaw::lognormal(0.0, 0.25)));
    Rng rng(5);
    SamplerConfig cfg = birth_death_only(400000, 2);
    cfg.burn_in = 1000;
    const auto summary = run_chain(post, cfg, rng);
    CHECK(summary.k_max == 18);
    CHECK(std::abs(summary.mean_k.value - 2.0) <= 4.0 * summary.mean_k.std_error);
    CHECK(std::abs(summary.mean_tv.value - 2.0 * std::exp(0.125)) <= 4.0 * summary.mean_tv.std_error);
    CHECK(summary.ess_log_likelihood > 0.0);
    CHECK(summary.moves[static_cast<std::size_t>(MoveKind::birth)].rate() > 0.3);
}

TEST_CASE("Geweke joint distribution test") {
    const PriorSpec prior(CountLaw::poisson(1.5), LocationLaw::uniform(unit_interval), MarkLaw::gaussian(1.0, 0.25));
    const auto fwd = sensors({0.1, 0.3, 0.5, 0.7, 0.9}, 0.15);
    const auto noise = NoiseModel::isotropic(5, 0.2);
    auto draw_data = [&](const DiscreteMeasure& u, Rng& rng) {
        const Eigen::VectorXd v = embed_observation(apply(*fwd, u), ScalarField::real) + noise.sample(rng);
        return unembed_observation(v, ScalarField::real);
    };
    SamplerConfig cfg;
    cfg.location_step = 0.1;
    cfg.amplitude_step = 0.3;

    const int n = 20000;
    Rng rng(6);
    std::vector<double> marginal_k;
    std::vector<double> marginal_q;
    for (int i = 0; i < n; ++i) {
        const auto u = sample_prior(prior, rng);
        marginal_k.push_back(static_cast<double>(u.size()));
        marginal_q.push_back(pair(u, TestFunction::constant(1.0)).real());
    }

    std::vector<double> succ_k;
    std::vector<double> succ_q;
    DiscreteMeasure u = sample_prior(prior, rng);
    for (int i = 0; i < n; ++i) {
        const Posterior post(prior, fwd, noise, draw_data(u, rng));
        const RjmcmcSampler sampler(post, cfg);
        ChainState s = sampler.make_state(u);
        for (int t = 0; t < 50; ++t) s = sampler.step(s, rng).state;
        u = s.measure;
        succ_k.push_back(static_cast<double>(u.size()));
        succ_q.push_back(pair(u, TestFunction::constant(1.0)).real());
    }
    auto agree = [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto ea = iid_estimate(a);
        const auto eb = ergodic_estimate(b);
        const double se = std::hypot(ea.std_error, eb.std_error);
        CHECK(std::abs(ea.value - eb.value) <= 4.0 * se);
    };
    agree(marginal_k, succ_k);
    agree(marginal_q, succ_q);
}

TEST_CASE("chains are deterministic given the seed") {
    const auto post = Posterior(PriorSpec(CountLaw::poisson(2.0), LocationLaw::uniform(unit_interval),
                                          MarkLaw::gaussian(0.0, 1.0)),
                                sensors({0.2, 0.8}, 0.2), NoiseModel::isotropic(2, 0.3), Observation{0.5, -0.4});
    SamplerConfig cfg;
    cfg.n_iters = 3000;
    cfg.thin = 3;
    auto collect = [&](std::uint64_t seed) {
        std::vector<ChainRecord> out;
        Rng rng = make_rng(seed, "chain-0");
        run_chain(post, cfg, rng, [&](const ChainRecord& r) { out.push_back(r); });
        return out;
    };
    const auto a = collect(11);
    const auto b = collect(11);
    const auto c = collect(12);
    REQUIRE(a.size() == 1000);
    CHECK(a.front().iter == 3);
    bool same = true;
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].measure == b[i].measure && a[i].log_likelihood == b[i].log_likelihood &&
               a[i].move == b[i].move && a[i].accepted == b[i].accepted;
        differs = differs || !(a[i].measure == c[i].measure);
    }
    CHECK(same);
    CHECK(differs);
}

TEST_CASE("empty post-burn-in chain") {
    const auto post = flat_posterior(PriorSpec(CountLaw::poisson(2.0), LocationLaw::uniform(unit_interval),
                                               MarkLaw::gaussian(0.0, 1.0)));
    SamplerConfig cfg;
    cfg.n_iters = 0;
    cfg.burn_in = 100;
    Rng rng(7);
    int records = 0;
    const auto summary = run_chain(post, cfg, rng, [&](const ChainRecord&) { ++records; });
    CHECK(records == 0);
    CHECK(summary.insufficient_samples);
    CHECK(summary.n_records == 0);
    CHECK_THROWS_AS(posterior_mean_k(std::vector<ChainRecord>{}), InvalidArgument);
}

TEST_CASE("pairing with the constant one is the amplitude sum") {
    const auto post = flat_posterior(PriorSpec(CountLaw::poisson(3.0), LocationLaw::uniform(unit_interval),
                                               MarkLaw::gaussian(0.5, 1.0)));
    SamplerConfig cfg;
    cfg.n_iters = 5000;
    Rng rng(8);
    std::vector<ChainRecord> chain;
    run_chain(post, cfg, rng, [&](const ChainRecord& r) { chain.push_back(r); });
    std::vector<double> sums;
    for (const auto& r : chain) {
        double s = 0.0;
        for (std::size_t k = 0; k < r.measure.size(); ++k) s += r.measure.amplitude(k)[0].real();
        sums.push_back(s);
    }
    const auto via_pair = posterior_pairing(chain, TestFunction::constant(1.0));
    const auto direct = ergodic_estimate(sums);
    CHECK(via_pair.value == doctest::Approx(direct.value).epsilon(1e-12));
    CHECK(via_pair.std_error == doctest::Approx(direct.std_error).epsilon(1e-9));
    CHECK(posterior_mean_k(chain).value >= 0.0);
}

TEST_CASE("intensity maps and local maxima") {
    const auto post = flat_posterior(PriorSpec(CountLaw::fixed(1), LocationLaw::point(unit_interval, {0.3}),
                                               MarkLaw::gaussian(0.0, 1.0)));
    SamplerConfig cfg;
    cfg.n_iters = 200;
    cfg.intensity_points = 101;
    Rng rng(9);
    std::vector<ChainRecord> chain;
    const auto summary = run_chain(post, cfg, rng, [&](const ChainRecord& r) { chain.push_back(r); });
    REQUIRE(summary.intensity.axes.size() == 1);
    CHECK(summary.intensity.axes[0].size() == 101);
    const auto peaks = find_local_maxima(summary.intensity, 3);
    REQUIRE(!peaks.empty());
    CHECK(std::abs(peaks[0].location[0] - 0.3) <= 0.011);
    const auto direct = posterior_intensity(chain, unit_interval, 101, 0.05);
    const auto dpeaks = find_local_maxima(direct, 1);
    REQUIRE(dpeaks.size() == 1);
    CHECK(std::abs(dpeaks[0].location[0] - 0.3) <= 0.011);

    IntensityMap two{{{0.0, 0.25, 0.5, 0.75, 1.0}}, {1.0, 0.5, 0.2, 3.0, 0.1}, 0.1};
    const auto m = find_local_maxima(two, 5);
    REQUIRE(m.size() == 2);
    CHECK(m[0].location[0] == 0.75);
    CHECK(m[1].location[0] == 0.0);
}
