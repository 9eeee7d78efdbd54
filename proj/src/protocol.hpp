#pragma once

#include <cstdint>
#include <vector>

#include "config.hpp"
#include "datagen.hpp"
#include "mlp.hpp"

namespace darkfed::fl {

struct ClientUpdate {
    int client_id = 0;
    int round = 0;
    ParamVector delta;
};

using GlobalHistory = std::vector<ParamVector>;

struct RoundRecord {
    int round = 0;
    double acc_percent = 0.0;
    double asr_percent = 0.0;
    std::vector<int> admitted_client_ids;
    std::vector<double> update_norms;
    double aggregate_norm = 0.0;
};

// Uniform subset without replacement of size round_half_up(fraction * n_total),
// deterministic in (seed, round). Returned sorted.
std::vector<int> sample_clients(int n_total, double fraction, int round, std::uint64_t seed);

// E epochs of mini-batch SGD under hard cross-entropy from the global model;
// the shuffle is deterministic per (seed, epoch). Returns w' - w.
ClientUpdate benign_local_train(const nn::MlpSpec& spec, const ParamVector& global,
                                const data::LabeledDataset& shard, int epochs, int batch_size,
                                double eta, std::uint64_t seed, int client_id, int round);

// w + aggregated (Step III of the protocol).
ParamVector apply_round(const ParamVector& global, const ParamVector& aggregated);

struct SimulationResult {
    std::vector<RoundRecord> records; // round 0 baseline + one per attack round
    GlobalHistory history;            // global snapshots, length rounds+1
    ParamVector final_model;
    double clip_tau = 0.0;            // resolved norm-clipping threshold
    double baseline_acc = 0.0;        // ACC of the pre-trained model
};

// The full simulation: pre_rounds of attack-free FedAvg to converge the
// global model and calibrate the clipping threshold, then the configured
// attack/defense rounds with per-round metrics.
SimulationResult run_rounds(const cfg::ExperimentConfig& config);

} // namespace darkfed::fl
