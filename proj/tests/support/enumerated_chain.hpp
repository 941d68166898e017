#pragma once

// Transition matrix of the sampler on a frozen state space: 3 nodes, q in {-1, +1}, K <= 2.
// Proposals are enumerated here; acceptance probabilities come from the sampler.

#include <algorithm>
#include <cmath>
#include <memory>
#include <utility>
#include <vector>

#include "spikebayes/sampler.hpp"

namespace enumerated {

using namespace spikebayes;

using Atom = std::pair<std::size_t, std::size_t>;  // node index, value index

struct Space {
    std::vector<double> nodes{0.2, 0.5, 0.9};
    std::vector<double> node_w{0.2, 0.3, 0.5};
    std::vector<double> values{-1.0, 1.0};
    std::vector<double> value_p{0.4, 0.6};
    double gamma = 1.3;
    Posterior post;
    std::vector<std::vector<Atom>> tuples;

    Space()
        : post(PriorSpec(CountLaw::truncated_poisson(1.3, 2),
                         LocationLaw::nodes(Domain({0.0}, {1.0}), {{0.2}, {0.5}, {0.9}}, {0.2, 0.3, 0.5}),
                         MarkLaw::categorical({{Scalar(-1.0)}, {Scalar(1.0)}}, {0.4, 0.6})),
               std::make_shared<KernelForward>(
                   KernelForward::gaussian_kernel(Domain({0.0}, {1.0}), SensorSet{{{0.1}, {0.7}}}, 0.3)),
               NoiseModel::isotropic(2, 0.5), Observation{Scalar(0.4), Scalar(-0.3)}) {
        tuples.push_back({});
        std::vector<Atom> singles;
        for (std::size_t y = 0; y < 3; ++y)
            for (std::size_t q = 0; q < 2; ++q) singles.push_back({y, q});
        for (const auto& a : singles) tuples.push_back({a});
        for (const auto& a : singles)
            for (const auto& b : singles) tuples.push_back({a, b});
    }

    std::size_t size() const { return tuples.size(); }

    std::size_t index_of(const std::vector<Atom>& t) const {
        return static_cast<std::size_t>(std::find(tuples.begin(), tuples.end(), t) - tuples.begin());
    }

    DiscreteMeasure measure(const std::vector<Atom>& atoms) const {
        DiscreteMeasure u(1, 1);
        for (const auto& [y, q] : atoms) u.push_back(std::vector<double>{nodes[y]}, values[q]);
        return u;
    }

    // Ordered-tuple mass pmf(n) * prod node_w * value_p * L, normalized.
    std::vector<double> stationary() const {
        const double z0 = std::exp(-gamma) * (1.0 + gamma + gamma * gamma / 2.0);
        std::vector<double> pi;
        double total = 0.0;
        for (const auto& t : tuples) {
            double mass = std::exp(-gamma) * std::pow(gamma, static_cast<double>(t.size())) /
                          std::tgamma(static_cast<double>(t.size()) + 1.0) / z0;
            for (const auto& [y, q] : t) mass *= node_w[y] * value_p[q];
            mass *= std::exp(log_likelihood(post, measure(t)));
            pi.push_back(mass);
            total += mass;
        }
        for (auto& p : pi) p /= total;
        return pi;
    }

    std::vector<std::vector<double>> transition_matrix(const RjmcmcSampler& sampler) const {
        const std::size_t n_states = size();
        std::vector<ChainState> states;
        for (const auto& t : tuples) states.push_back(sampler.make_state(measure(t)));
        std::vector<std::vector<double>> P(n_states, std::vector<double>(n_states, 0.0));
        auto propose = [&](std::size_t i, const std::vector<Atom>& target, double prob, MoveKind kind) {
            const std::size_t j = index_of(target);
            const double alpha = std::min(1.0, std::exp(sampler.log_acceptance(states[i], states[j], kind)));
            P[i][j] += prob * alpha;
        };
        for (std::size_t i = 0; i < n_states; ++i) {
            const auto& t = tuples[i];
            const std::size_t n = t.size();
            const auto mp = move_probabilities(sampler.config(), n, sampler.k_max());
            if (mp.birth > 0.0)
                for (std::size_t y = 0; y < 3; ++y)
                    for (std::size_t q = 0; q < 2; ++q)
                        for (std::size_t slot = 0; slot <= n; ++slot) {
                            auto next = t;
                            next.insert(next.begin() + static_cast<std::ptrdiff_t>(slot), Atom{y, q});
                            propose(i, next, mp.birth * node_w[y] * value_p[q] / static_cast<double>(n + 1),
                                    MoveKind::birth);
                        }
            for (std::size_t k = 0; k < n; ++k) {
                auto dead = t;
                dead.erase(dead.begin() + static_cast<std::ptrdiff_t>(k));
                propose(i, dead, mp.death / static_cast<double>(n), MoveKind::death);
                for (std::size_t y = 0; y < 3; ++y) {
                    if (y == t[k].first) continue;
                    auto moved = t;
                    moved[k].first = y;
                    propose(i, moved, mp.move_location / static_cast<double>(n) / 2.0, MoveKind::move_location);
                }
                auto flipped = t;
                flipped[k].second = 1 - t[k].second;
                propose(i, flipped, mp.perturb_amplitude / static_cast<double>(n), MoveKind::perturb_amplitude);
            }
            double off = 0.0;
            for (std::size_t j = 0; j < n_states; ++j) off += P[i][j];
            P[i][i] += 1.0 - off;
        }
        return P;
    }
};

inline double balance_violation(const std::vector<double>& pi, const std::vector<std::vector<double>>& P) {
    double worst = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i)
        for (std::size_t j = 0; j < pi.size(); ++j) worst = std::max(worst, std::abs(pi[i] * P[i][j] - pi[j] * P[j][i]));
    return worst;
}

}  // namespace enumerated
