#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "spikebayes/posterior.hpp"
#include "spikebayes/sampler.hpp"

namespace spikebayes {

enum class ExperimentKind { sample_prior, invert, evidence, hellinger, stability, consistency, recover };

const char* to_string(ExperimentKind kind);

struct ScenarioSpec {
    /// Empty means "draw the truth from the prior".
    std::optional<DiscreteMeasure> truth;
    bool zero_noise = false;
    /// Observed data file; when set the data are read instead of simulated.
    std::optional<std::filesystem::path> data_path;
};

/// Validated experiment configuration. Construction throws ConfigError naming the offending key.
struct ExperimentConfig {
    nlohmann::json raw;  // resolved document (overrides applied)
    std::string digest;  // FNV-1a of the resolved document without output_dir
    std::uint64_t seed = 0;
    std::filesystem::path output_dir;
    std::filesystem::path base_dir;  // relative paths resolve against this

    PriorSpec prior;
    std::shared_ptr<const ForwardModel> forward;
    NoiseModel noise;
    SamplerConfig sampler;
    ScenarioSpec scenario;
    ExperimentKind kind;
    nlohmann::json params;  // experiment section minus "kind"
};

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});

struct ConfigOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
};

/// Reads and validates a config file (IoError when unreadable, ConfigError when invalid).
ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

struct Scenario {
    std::optional<DiscreteMeasure> truth;
    Observation clean;  // G(truth); empty when the data were read from a file
    Observation data;
    std::uint64_t prior_seed = 0;
    std::uint64_t noise_seed = 0;
};

/// z = G(u) + xi with u from the config (or a prior draw) and xi from the "noise" sub-stream.
/// `stream_suffix` selects independent replicate streams ("prior<suffix>", "noise<suffix>").
Scenario generate_scenario(const ExperimentConfig& cfg, const std::string& stream_suffix = "");

nlohmann::json scenario_to_json(const Scenario& s, ScalarField field);
Scenario scenario_from_json(const nlohmann::json& j);

Posterior make_posterior(const ExperimentConfig& cfg, const Observation& data);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumeric = 2, kExitIo = 3 };

/// Runs the configured experiment and writes its artifacts plus manifest.json into output_dir.
/// Returns the list of artifact file names written.
std::vector<std::string> run_experiment(const ExperimentConfig& cfg);

}  // namespace spikebayes
