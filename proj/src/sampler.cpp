#include "spikebayes/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikebayes/errors.hpp"

namespace spikebayes {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::size_t default_intensity_points(std::size_t dim) {
    switch (dim) {
        case 1: return 201;
        case 2: return 51;
        case 3: return 21;
        default: return 11;
    }
}

// 8 bins per reporting point, capped at about 4M cells in total.
std::size_t histogram_bins(std::size_t points, std::size_t dim) {
    const auto cap = static_cast<std::size_t>(std::floor(std::pow(4194304.0, 1.0 / static_cast<double>(dim))));
    return std::max<std::size_t>(std::min(8 * points, cap), 2);
}

// Fine histogram of atom locations, smoothed separably with a Gaussian at the end.
class IntensityAccumulator {
public:
    IntensityAccumulator(const Domain& domain, std::size_t points_per_axis, double bandwidth)
        : domain_(domain), points_(points_per_axis), bins_(histogram_bins(points_per_axis, domain.dim())),
          bandwidth_(bandwidth) {
        if (points_ < 2) throw InvalidArgument("intensity map needs >= 2 points per axis");
        if (!(bandwidth_ > 0.0)) throw InvalidArgument("intensity bandwidth must be positive");
        std::size_t total = 1;
        for (std::size_t a = 0; a < domain_.dim(); ++a) total *= bins_;
        counts_.assign(total, 0.0);
    }

    void add(const DiscreteMeasure& u) {
        ++n_;
        for (std::size_t k = 0; k < u.size(); ++k) {
            const auto y = u.location(k);
            std::size_t flat = 0;
            for (std::size_t a = 0; a < domain_.dim(); ++a) {
                const double t = (y[a] - domain_.lower()[a]) / domain_.width(a) * static_cast<double>(bins_);
                const auto b = std::min(static_cast<std::size_t>(std::max(t, 0.0)), bins_ - 1);
                flat = flat * bins_ + b;
            }
            counts_[flat] += 1.0;
        }
    }

    IntensityMap finish() const {
        const std::size_t d = domain_.dim();
        IntensityMap map;
        map.bandwidth = bandwidth_;
        for (std::size_t a = 0; a < d; ++a) {
            std::vector<double> axis(points_);
            for (std::size_t i = 0; i < points_; ++i)
                axis[i] = domain_.lower()[a] + domain_.width(a) * static_cast<double>(i) / static_cast<double>(points_ - 1);
            map.axes.push_back(std::move(axis));
        }
        // Separable smoothing: contract one axis at a time from bins to report points.
        std::vector<double> current = counts_;
        std::vector<std::size_t> shape(d, bins_);
        for (std::size_t a = 0; a < d; ++a) {
            const double bw = bandwidth_;
            const double norm = 1.0 / (bw * std::sqrt(2.0 * M_PI));
            std::vector<double> weights(points_ * bins_);
            for (std::size_t i = 0; i < points_; ++i) {
                for (std::size_t b = 0; b < bins_; ++b) {
                    const double center = domain_.lower()[a] + domain_.width(a) * (static_cast<double>(b) + 0.5) /
                                                                   static_cast<double>(bins_);
                    const double z = (map.axes[a][i] - center) / bw;
                    weights[i * bins_ + b] = norm * std::exp(-0.5 * z * z);
                }
            }
            std::size_t outer = 1;
            for (std::size_t k = 0; k < a; ++k) outer *= shape[k];
            std::size_t inner = 1;
            for (std::size_t k = a + 1; k < d; ++k) inner *= shape[k];
            std::vector<double> next(outer * points_ * inner, 0.0);
            for (std::size_t o = 0; o < outer; ++o)
                for (std::size_t b = 0; b < bins_; ++b)
                    for (std::size_t in = 0; in < inner; ++in) {
                        const double c = current[(o * bins_ + b) * inner + in];
                        if (c == 0.0) continue;
                        for (std::size_t i = 0; i < points_; ++i)
                            next[(o * points_ + i) * inner + in] += weights[i * bins_ + b] * c;
                    }
            current = std::move(next);
            shape[a] = points_;
        }
        const double scale = n_ == 0 ? 0.0 : 1.0 / static_cast<double>(n_);
        for (auto& v : current) v *= scale;
        map.values = std::move(current);
        return map;
    }

private:
    Domain domain_;
    std::size_t points_;
    std::size_t bins_;
    double bandwidth_;
    std::vector<double> counts_;
    std::size_t n_ = 0;
};

}  // namespace

const char* to_string(MoveKind kind) {
    switch (kind) {
        case MoveKind::birth: return "birth";
        case MoveKind::death: return "death";
        case MoveKind::move_location: return "move_location";
        case MoveKind::perturb_amplitude: return "perturb_amplitude";
    }
    return "unknown";
}

MoveKind move_kind_from_string(const std::string& name) {
    for (std::size_t i = 0; i < kMoveKindCount; ++i) {
        const auto kind = static_cast<MoveKind>(i);
        if (name == to_string(kind)) return kind;
    }
    throw InvalidArgument("unknown move kind '" + name + "'");
}

void SamplerConfig::validate() const {
    const double ps[] = {p_birth, p_death, p_move, p_perturb};
    for (double p : ps)
        if (!(p >= 0.0)) throw InvalidArgument("move probabilities must be nonnegative");
    if (std::abs(p_birth + p_death + p_move + p_perturb - 1.0) > 1e-9)
        throw InvalidArgument("move probabilities must sum to 1");
    if (!(p_birth > 0.0) || !(p_death > 0.0)) throw InvalidArgument("birth and death probabilities must be positive");
    if (thin == 0) throw InvalidArgument("thin must be >= 1");
    if (location_step && !(*location_step > 0.0)) throw InvalidArgument("location_step must be positive");
    if (amplitude_step && !(*amplitude_step > 0.0)) throw InvalidArgument("amplitude_step must be positive");
    if (intensity_bandwidth && !(*intensity_bandwidth > 0.0)) throw InvalidArgument("intensity_bandwidth must be positive");
    if (intensity_points && *intensity_points < 2) throw InvalidArgument("intensity_points must be >= 2");
}

double MoveProbabilities::of(MoveKind kind) const {
    switch (kind) {
        case MoveKind::birth: return birth;
        case MoveKind::death: return death;
        case MoveKind::move_location: return move_location;
        case MoveKind::perturb_amplitude: return perturb_amplitude;
    }
    return 0.0;
}

MoveProbabilities move_probabilities(const SamplerConfig& cfg, std::size_t n_atoms, std::size_t k_max) {
    if (n_atoms == 0) {
        if (k_max == 0) return {0.0, 0.0, 0.0, 0.0};
        return {1.0, 0.0, 0.0, 0.0};
    }
    MoveProbabilities p{cfg.p_birth, cfg.p_death, cfg.p_move, cfg.p_perturb};
    if (n_atoms >= k_max) {
        p.death += p.birth;
        p.birth = 0.0;
    }
    return p;
}

// ------------------------------------------------------------ RjmcmcSampler

RjmcmcSampler::RjmcmcSampler(const Posterior& posterior, SamplerConfig cfg)
    : posterior_(posterior), cfg_(std::move(cfg)) {
    cfg_.validate();
    const PriorSpec& prior = posterior_.prior();
    if (!prior.weights().is_unit()) throw UnsupportedLaw("the sampler requires unit prior weights");
    k_max_ = cfg_.k_max.value_or(prior.count().default_cap());
    location_step_ = cfg_.location_step.value_or(0.05 * prior.domain().diameter());
    amplitude_step_ = cfg_.amplitude_step.value_or(0.1 * prior.mark().scale());
}

ChainState RjmcmcSampler::make_state(DiscreteMeasure u) const {
    const double lp = log_prior_density(posterior_.prior(), u);
    const double ll = lp == kNegInf ? kNegInf : log_likelihood(posterior_, u);
    return {std::move(u), ll, lp};
}

ChainState RjmcmcSampler::initial_state(Rng& rng) const {
    for (int attempt = 0; attempt < 10000; ++attempt) {
        DiscreteMeasure u = sample_prior(posterior_.prior(), rng);
        if (u.size() > k_max_) continue;
        ChainState s = make_state(std::move(u));
        if (std::isfinite(s.log_prior) && std::isfinite(s.log_likelihood)) return s;
    }
    throw InvalidArgument("could not draw an initial state with K <= k_max from the prior");
}

double RjmcmcSampler::log_acceptance(const ChainState& from, const ChainState& to, MoveKind move) const {
    if (to.log_prior == kNegInf) return kNegInf;
    const CountLaw& count = posterior_.prior().count();
    const std::size_t n = from.measure.size();
    const double dll = to.log_likelihood - from.log_likelihood;
    switch (move) {
        case MoveKind::birth: {
            if (to.measure.size() != n + 1) throw InvalidArgument("birth must add exactly one atom");
            const double pb = move_probabilities(cfg_, n, k_max_).birth;
            const double pd = move_probabilities(cfg_, n + 1, k_max_).death;
            if (pd == 0.0) return kNegInf;
            return count.log_pmf(n + 1) - count.log_pmf(n) + std::log(pd) - std::log(pb) + dll;
        }
        case MoveKind::death: {
            if (n == 0 || to.measure.size() != n - 1) throw InvalidArgument("death must remove exactly one atom");
            const double pd = move_probabilities(cfg_, n, k_max_).death;
            const double pb = move_probabilities(cfg_, n - 1, k_max_).birth;
            if (pb == 0.0) return kNegInf;
            return count.log_pmf(n - 1) - count.log_pmf(n) + std::log(pb) - std::log(pd) + dll;
        }
        case MoveKind::move_location:
        case MoveKind::perturb_amplitude:
            return (to.log_prior + to.log_likelihood) - (from.log_prior + from.log_likelihood);
    }
    return kNegInf;
}

StepResult RjmcmcSampler::step(const ChainState& state, Rng& rng) const {
    const PriorSpec& prior = posterior_.prior();
    const std::size_t n = state.measure.size();
    const MoveProbabilities probs = move_probabilities(cfg_, n, k_max_);

    const double pick = uniform01(rng);
    MoveKind kind = MoveKind::perturb_amplitude;
    if (pick < probs.birth) {
        kind = MoveKind::birth;
    } else if (pick < probs.birth + probs.death) {
        kind = MoveKind::death;
    } else if (pick < probs.birth + probs.death + probs.move_location) {
        kind = MoveKind::move_location;
    }
    if (probs.of(kind) == 0.0) return {state, kind, false};  // only when k_max == 0

    DiscreteMeasure proposal = state.measure;
    switch (kind) {
        case MoveKind::birth: {
            std::vector<double> y(prior.dim());
            std::vector<Scalar> q(prior.amp_dim());
            prior.location().sample(rng, y);
            prior.mark().sample(rng, q);
            proposal.insert(uniform_index(rng, n + 1), y, q);
            break;
        }
        case MoveKind::death:
            proposal.erase(uniform_index(rng, n));
            break;
        case MoveKind::move_location: {
            auto y = proposal.location(uniform_index(rng, n));
            const LocationLaw& law = prior.location();
            if (law.continuous()) {
                for (auto& c : y) c += location_step_ * standard_normal(rng);
                prior.domain().reflect(y);
            } else if (const auto* nodes = std::get_if<LocationLaw::Nodes>(&law.variant())) {
                const std::size_t count = nodes->points.size();
                if (count > 1) {
                    std::size_t current = count;
                    for (std::size_t i = 0; i < count; ++i)
                        if (std::equal(nodes->points[i].begin(), nodes->points[i].end(), y.begin())) current = i;
                    std::size_t next = uniform_index(rng, count - 1);
                    if (current < count && next >= current) ++next;
                    std::copy(nodes->points[next].begin(), nodes->points[next].end(), y.begin());
                }
            }
            break;
        }
        case MoveKind::perturb_amplitude: {
            auto q = proposal.amplitude(uniform_index(rng, n));
            const MarkLaw& law = prior.mark();
            if (law.continuous()) {
                for (auto& c : q) {
                    const double re = amplitude_step_ * standard_normal(rng);
                    const double im = prior.field() == ScalarField::complex ? amplitude_step_ * standard_normal(rng) : 0.0;
                    c += Scalar{re, im};
                }
            } else if (const auto* cat = std::get_if<MarkLaw::Categorical>(&law.variant())) {
                const std::size_t count = cat->values.size();
                if (count > 1) {
                    std::size_t current = count;
                    for (std::size_t i = 0; i < count; ++i)
                        if (std::equal(cat->values[i].begin(), cat->values[i].end(), q.begin())) current = i;
                    std::size_t next = uniform_index(rng, count - 1);
                    if (current < count && next >= current) ++next;
                    std::copy(cat->values[next].begin(), cat->values[next].end(), q.begin());
                }
            }
            break;
        }
    }

    ChainState candidate = make_state(std::move(proposal));
    const double log_a = log_acceptance(state, candidate, kind);
    if (log_a >= 0.0 || std::log(uniform01(rng)) < log_a) return {std::move(candidate), kind, true};
    return {state, kind, false};
}

StepResult step(const Posterior& p, const ChainState& state, const SamplerConfig& cfg, Rng& rng) {
    return RjmcmcSampler(p, cfg).step(state, rng);
}

// ----------------------------------------------------------------- run_chain

ChainSummary run_chain(const Posterior& p, const SamplerConfig& cfg, Rng& rng, const RecordSink& sink) {
    const RjmcmcSampler sampler(p, cfg);
    const Domain& domain = p.prior().domain();
    const std::size_t points = cfg.intensity_points.value_or(default_intensity_points(domain.dim()));
    IntensityAccumulator intensity(domain, points, cfg.intensity_bandwidth.value_or(sampler.location_step()));

    ChainSummary summary;
    summary.k_max = sampler.k_max();
    summary.truncated_mass = p.prior().count().tail_mass(sampler.k_max());
    summary.k_hist.assign(sampler.k_max() + 1, 0);

    std::vector<double> k_trace;
    std::vector<double> tv_trace;
    std::vector<double> ll_trace;
    std::vector<double> q_trace;
    const std::size_t expected = cfg.n_iters / cfg.thin;
    k_trace.reserve(expected);
    tv_trace.reserve(expected);
    ll_trace.reserve(expected);
    q_trace.reserve(expected);

    ChainState state = sampler.initial_state(rng);
    const std::size_t total = cfg.burn_in + cfg.n_iters;
    for (std::size_t t = 0; t < total; ++t) {
        StepResult r = sampler.step(state, rng);
        state = std::move(r.state);
        if (t < cfg.burn_in) continue;
        auto& stats = summary.moves[static_cast<std::size_t>(r.move)];
        ++stats.proposed;
        if (r.accepted) ++stats.accepted;
        if ((t - cfg.burn_in + 1) % cfg.thin != 0) continue;

        const std::size_t k = state.measure.size();
        ++summary.k_hist[k];
        k_trace.push_back(static_cast<double>(k));
        tv_trace.push_back(total_variation(state.measure));
        ll_trace.push_back(state.log_likelihood);
        double q_sum = 0.0;
        for (std::size_t j = 0; j < k; ++j) q_sum += state.measure.amplitude(j)[0].real();
        q_trace.push_back(q_sum);
        intensity.add(state.measure);
        if (sink) sink(ChainRecord{t + 1, state.measure, state.log_likelihood, r.move, r.accepted});
    }

    summary.n_records = k_trace.size();
    summary.insufficient_samples = summary.n_records < 2;
    if (!summary.insufficient_samples) {
        summary.mean_k = ergodic_estimate(k_trace);
        summary.mean_tv = ergodic_estimate(tv_trace);
        summary.mean_amplitude_sum = ergodic_estimate(q_trace);
        summary.ess_log_likelihood = effective_sample_size(ll_trace);
    }
    summary.intensity = intensity.finish();
    return summary;
}

// ------------------------------------------------------- posterior summaries

Estimate posterior_expectation(std::span<const ChainRecord> chain,
                               const std::function<double(const DiscreteMeasure&)>& statistic) {
    if (chain.empty()) throw InvalidArgument("posterior expectation of an empty chain");
    std::vector<double> trace;
    trace.reserve(chain.size());
    for (const auto& r : chain) trace.push_back(statistic(r.measure));
    return ergodic_estimate(trace);
}

Estimate posterior_mean_k(std::span<const ChainRecord> chain) {
    return posterior_expectation(chain, [](const DiscreteMeasure& u) { return static_cast<double>(u.size()); });
}

Estimate posterior_mean_tv(std::span<const ChainRecord> chain) {
    return posterior_expectation(chain, [](const DiscreteMeasure& u) { return total_variation(u); });
}

Estimate posterior_pairing(std::span<const ChainRecord> chain, const TestFunction& f) {
    return posterior_expectation(chain, [&f](const DiscreteMeasure& u) { return pair(u, f).real(); });
}

IntensityMap posterior_intensity(std::span<const ChainRecord> chain, const Domain& domain, std::size_t points_per_axis,
                                 double bandwidth) {
    if (chain.empty()) throw InvalidArgument("intensity map of an empty chain");
    IntensityAccumulator acc(domain, points_per_axis, bandwidth);
    for (const auto& r : chain) acc.add(r.measure);
    return acc.finish();
}

std::vector<LocalMaximum> find_local_maxima(const IntensityMap& map, std::size_t count) {
    const std::size_t d = map.axes.size();
    std::vector<std::size_t> shape(d);
    for (std::size_t a = 0; a < d; ++a) shape[a] = map.axes[a].size();
    std::vector<LocalMaximum> maxima;
    std::vector<std::size_t> idx(d);
    for (std::size_t flat = 0; flat < map.values.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t a = d; a-- > 0;) {
            idx[a] = rem % shape[a];
            rem /= shape[a];
        }
        const double v = map.values[flat];
        if (!(v > 0.0)) continue;
        bool is_max = true;
        // Axis neighbours: strictly greater than the lower neighbour, >= the upper one (breaks plateaus).
        std::size_t stride = 1;
        for (std::size_t a = d; a-- > 0 && is_max;) {
            if (idx[a] > 0 && !(v > map.values[flat - stride])) is_max = false;
            if (idx[a] + 1 < shape[a] && !(v >= map.values[flat + stride])) is_max = false;
            stride *= shape[a];
        }
        if (!is_max) continue;
        LocalMaximum m{std::vector<double>(d), v};
        for (std::size_t a = 0; a < d; ++a) m.location[a] = map.axes[a][idx[a]];
        maxima.push_back(std::move(m));
    }
    std::sort(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) { return a.value > b.value; });
    if (maxima.size() > count) maxima.resize(count);
    return maxima;
}

}  // namespace spikebayes
