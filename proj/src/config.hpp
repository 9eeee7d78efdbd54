#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "attack.hpp"
#include "datagen.hpp"

namespace darkfed::cfg {

enum class AttackKind { None, DarkFed, NaiveShadow, ModelReplacement };
enum class DefenseKind { FedAvg, NormClipping, Flame, Rflbat, FoolsGold };

AttackKind attack_kind_from_string(const std::string& s);
DefenseKind defense_kind_from_string(const std::string& s);
std::string to_string(AttackKind k);
std::string to_string(DefenseKind k);

struct DataConfig {
    int classes = 4;
    int dim = 16;
    int train_n = 512;
    int test_n = 256;
    double spread = 0.08;
    data::PartitionMode partition = data::PartitionMode::Iid;
    double dirichlet_alpha = 0.5;

    bool operator==(const DataConfig&) const = default;
};

struct BenignConfig {
    int epochs = 15;
    int batch = 64;
    double eta = 0.1;

    bool operator==(const BenignConfig&) const = default;
};

struct DefenseConfig {
    DefenseKind kind = DefenseKind::FedAvg;
    std::optional<double> clip_tau; // empty: calibrate from pre-training norms
    double flame_noise = 0.0;
    int rflbat_dims = 2;

    bool operator==(const DefenseConfig&) const = default;
};

struct OutputConfig {
    std::string dir; // resolved at parse time (key, else DARKFED_OUT_DIR, else ".")
    std::string prefix = "run";

    bool operator==(const OutputConfig&) const = default;
};

// Full run description. parse_config fills documented defaults for every key
// the file omits; unknown keys are rejected by name.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    int n_clients = 20;
    double attacker_fraction = 0.2;
    double sample_fraction = 0.2;
    int rounds = 30;
    int pre_rounds = 20;
    int threads = 1;

    DataConfig data;
    std::vector<int> hidden_dims = {64};
    data::TriggerSpec trigger;

    AttackKind attack_kind = AttackKind::DarkFed;
    attack::AttackConfig attack;
    data::ShadowKind shadow_kind = data::ShadowKind::Uniform;
    int shadow_n = 512;
    double poison_fraction = 0.5;
    double attack_scale = 1.0;
    bool scale_replacement = false;

    BenignConfig benign;
    DefenseConfig defense;
    OutputConfig output;

    bool operator==(const ExperimentConfig&) const = default;

    nn::MlpSpec model_spec() const;
    int attacker_count() const;
    void validate() const; // throws naming the offending key
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);

} // namespace darkfed::cfg
