#pragma once

#include <string>

#include "config.hpp"
#include "protocol.hpp"

namespace darkfed::exp {

inline constexpr const char* kVersion = "0.1.0";

struct RunManifest {
    std::string config_echo; // serialized resolved config; reparses to an equal config
    std::string version = kVersion;
    long long started_unix = 0; // wall-clock bookkeeping only; never written to output files
    std::string csv_path;
    std::string summary_path;
};

struct RunOutput {
    fl::SimulationResult sim;
    RunManifest manifest;
};

// Runs the configured experiment and writes the per-round CSV and the
// summary file. Output files are a pure function of (config, seed).
RunOutput run(const cfg::ExperimentConfig& config);

// Writes `round,acc,asr,admitted,mean_update_norm,max_update_norm` rows,
// floats with six decimals.
void write_round_csv(const std::vector<fl::RoundRecord>& records, const std::string& path);

void write_summary(const fl::SimulationResult& sim, const std::string& config_echo,
                   const std::string& path);

} // namespace darkfed::exp
