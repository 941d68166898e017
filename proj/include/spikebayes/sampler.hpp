#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spikebayes/posterior.hpp"
#include "spikebayes/stats.hpp"

namespace spikebayes {

enum class MoveKind : std::uint8_t { birth = 0, death = 1, move_location = 2, perturb_amplitude = 3 };
inline constexpr std::size_t kMoveKindCount = 4;

const char* to_string(MoveKind kind);
MoveKind move_kind_from_string(const std::string& name);

struct SamplerConfig {
    std::size_t n_iters = 1000;
    std::size_t burn_in = 0;
    std::size_t thin = 1;
    double p_birth = 0.25;
    double p_death = 0.25;
    double p_move = 0.3;
    double p_perturb = 0.2;
    /// Random-walk standard deviation for locations; defaults to 0.05 * diam(domain).
    std::optional<double> location_step;
    /// Random-walk standard deviation for amplitudes; defaults to 0.1 * mark scale.
    std::optional<double> amplitude_step;
    /// Atom-count cap; defaults to the count law's truncation index.
    std::optional<std::size_t> k_max;
    std::uint64_t seed = 0;
    /// Points per axis of the reported intensity map.
    std::optional<std::size_t> intensity_points;
    /// Gaussian smoothing bandwidth of the intensity map; defaults to the location step.
    std::optional<double> intensity_bandwidth;

    void validate() const;
};

/// Move-kind probabilities at a given atom count after boundary reallocation.
struct MoveProbabilities {
    double birth;
    double death;
    double move_location;
    double perturb_amplitude;

    double of(MoveKind kind) const;
};

/// At K = 0 death and in-place moves go to birth; at K = k_max birth goes to death.
MoveProbabilities move_probabilities(const SamplerConfig& cfg, std::size_t n_atoms, std::size_t k_max);

struct ChainState {
    DiscreteMeasure measure;
    double log_likelihood;
    double log_prior;
};

struct StepResult {
    ChainState state;
    MoveKind move;
    bool accepted;
};

/// One stored draw of a chain.
struct ChainRecord {
    std::size_t iter;
    DiscreteMeasure measure;
    double log_likelihood;
    MoveKind move;
    bool accepted;
};

/// Reversible-jump Metropolis-Hastings kernel over atom configurations.
/// Births draw (y, q) from the prior laws and insert at a uniform slot; deaths remove a
/// uniform atom; location and amplitude moves are symmetric random walks.
class RjmcmcSampler {
public:
    RjmcmcSampler(const Posterior& posterior, SamplerConfig cfg);

    const Posterior& posterior() const noexcept { return posterior_; }
    const SamplerConfig& config() const noexcept { return cfg_; }
    std::size_t k_max() const noexcept { return k_max_; }
    double location_step() const noexcept { return location_step_; }
    double amplitude_step() const noexcept { return amplitude_step_; }

    ChainState make_state(DiscreteMeasure u) const;
    /// Prior draw with K <= k_max and finite target density.
    ChainState initial_state(Rng& rng) const;

    StepResult step(const ChainState& state, Rng& rng) const;

    /// Log Metropolis-Hastings acceptance ratio for a proposal of kind `move` from `from` to `to`.
    double log_acceptance(const ChainState& from, const ChainState& to, MoveKind move) const;

private:
    Posterior posterior_;
    SamplerConfig cfg_;
    std::size_t k_max_;
    double location_step_;
    double amplitude_step_;
};

/// Convenience wrapper constructing the kernel for a single step.
StepResult step(const Posterior& p, const ChainState& state, const SamplerConfig& cfg, Rng& rng);

/// Posterior-mean atom intensity on a tensor reporting grid.
struct IntensityMap {
    std::vector<std::vector<double>> axes;  // node coordinates per axis
    std::vector<double> values;             // row-major, last axis fastest
    double bandwidth = 0.0;
};

struct LocalMaximum {
    std::vector<double> location;
    double value;
};

/// Interior-or-boundary local maxima of an intensity map, highest first.
std::vector<LocalMaximum> find_local_maxima(const IntensityMap& map, std::size_t count);

struct MoveStats {
    std::size_t proposed = 0;
    std::size_t accepted = 0;
    double rate() const { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed); }
};

struct ChainSummary {
    std::size_t n_records = 0;
    bool insufficient_samples = false;
    std::array<MoveStats, kMoveKindCount> moves{};
    std::vector<std::size_t> k_hist;
    Estimate mean_k;
    Estimate mean_tv;
    /// Ergodic mean of sum_k Re q_k[0] (the pairing with f = e_1).
    Estimate mean_amplitude_sum;
    double ess_log_likelihood = 0.0;
    IntensityMap intensity;
    std::size_t k_max = 0;
    /// Prior mass P(K > k_max) cut off by the cap.
    double truncated_mass = 0.0;
};

using RecordSink = std::function<void(const ChainRecord&)>;

/// Runs burn_in + n_iters steps, passing every thin-th post-burn-in record to `sink`.
ChainSummary run_chain(const Posterior& p, const SamplerConfig& cfg, Rng& rng, const RecordSink& sink = {});

/// Ergodic average of a statistic over stored records, with autocorrelation-corrected SE.
Estimate posterior_expectation(std::span<const ChainRecord> chain,
                               const std::function<double(const DiscreteMeasure&)>& statistic);
Estimate posterior_mean_k(std::span<const ChainRecord> chain);
Estimate posterior_mean_tv(std::span<const ChainRecord> chain);
/// Real part of the pairing with f.
Estimate posterior_pairing(std::span<const ChainRecord> chain, const TestFunction& f);
IntensityMap posterior_intensity(std::span<const ChainRecord> chain, const Domain& domain, std::size_t points_per_axis,
                                 double bandwidth);

}  // namespace spikebayes
