// spikebayes: config-driven runner.
//   spikebayes run <config.json> [--output-dir DIR] [--seed N]
//   spikebayes validate <config.json>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spikebayes/errors.hpp"
#include "spikebayes/experiment.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian inversion for sparse measures"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;

    auto* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", config_path, "config file")->required();
    auto* out_opt = run->add_option("--output-dir", output_dir, "override output_dir");
    auto* seed_opt = run->add_option("--seed", seed, "override the root seed");

    auto* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("config", config_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    spikebayes::ConfigOverrides overrides;
    if (*out_opt) overrides.output_dir = output_dir;
    if (*seed_opt) overrides.seed = seed;

    try {
        const auto cfg = spikebayes::load_config(config_path, overrides);
        if (*validate) {
            std::cout << config_path << ": ok (" << spikebayes::to_string(cfg.kind) << ", digest " << cfg.digest << ")\n";
            return spikebayes::kExitOk;
        }
        for (const auto& name : spikebayes::run_experiment(cfg)) std::cout << (cfg.output_dir / name).string() << "\n";
        return spikebayes::kExitOk;
    } catch (const spikebayes::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return spikebayes::kExitConfig;
    } catch (const spikebayes::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return spikebayes::kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return spikebayes::kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return spikebayes::kExitNumeric;
    }
}
