#pragma once

#include "securelat/sim.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace securelat::cli {

/// Invalid or unreadable configuration (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DataSource { Continuous, Discrete };

struct DataConfig {
    std::size_t samples = 5000;
    double sample_period_s = 0.01;
    double excitation_amplitude = 0.05;
    DataSource source = DataSource::Continuous;
    Vec initial_state = Vec::Zero(4);
    std::optional<std::string> dataset_path;
    /// "full", "auto" or a positive integer.
    std::string trunc = "full";
    int order_ns = 4;
    int window_ls = 4;
};

struct SynthesisConfig {
    std::optional<double> mu;           // defaults to the trigger sensitivity
    std::optional<int> delta_bar_steps;  // defaults to the delay bound
    int budget = 400;
};

struct SuiteConfig {
    std::optional<std::string> source_path;
    plant::VehicleParams vehicle;
    double process_noise_bound = 0.0;
    DataConfig data;
    /// Case-independent scenario settings; case_id is filled per run.
    sim::ScenarioConfig scenario = sim::reference_scenario(sim::CaseId::III);
    std::optional<std::string> model_path;
    bool model_inline = false;
    std::optional<std::uint64_t> seed;
    SynthesisConfig synthesis;
    /// Scenario used when --scenario is not given.
    std::string default_scenario = "all";
};

/// Reference defaults; no file needed.
SuiteConfig default_config();

/// Parses key = value lines grouped in [plant], [data], [model], [trigger], [observer], [control], [attack],
/// [sim] and [synthesis]. Unknown sections or keys and malformed values raise ConfigError.
SuiteConfig load_config(const std::string& path);

/// Scenario for one case, with attack and compensation rules applied.
sim::ScenarioConfig scenario_for(const SuiteConfig& cfg, sim::CaseId c, std::uint64_t seed);

}  // namespace securelat::cli
