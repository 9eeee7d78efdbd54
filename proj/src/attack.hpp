#pragma once

#include <cstdint>
#include <vector>

#include "datagen.hpp"
#include "mlp.hpp"
#include "vec.hpp"

namespace darkfed::attack {

// Knobs of the crafting loop. lambda weighs the three mimicry penalties,
// lambda1 the backdoor term, alpha is the similarity level the penalties
// steer cosines toward.
struct AttackConfig {
    double alpha = 0.0;
    double lambda = 0.5;
    double lambda1 = 1.0;
    int epochs = 15;
    int batch_size = 64;
    double eta = 0.3;
    double des_gamma = 0.5;
    double des_delta = 0.5;
    bool include_cd = true;       // the consistency penalty can be compiled out for reduction checks
    bool peers_live = true;       // false: peers read at their pre-epoch snapshots

    void validate() const;
    bool operator==(const AttackConfig&) const = default;
};

using GlobalHistory = std::vector<ParamVector>;

// Holt's linear (double exponential smoothing) forecast of the next global
// model, element-wise over the history. level starts at the first snapshot,
// trend at the first difference; a single snapshot forecasts itself.
ParamVector des_predict(const GlobalHistory& history, double gamma, double delta);

struct PenaltyTerm {
    double value = 0.0;
    ParamVector grad; // w.r.t. the local model
};

// ||w' - w||, gradient (w'-w)/||w'-w|| (zero at the origin).
PenaltyTerm loss_lnc(const ParamVector& local, const ParamVector& global);

// (cos(w'-w, what-w) - alpha)^2 with the prediction direction constant;
// contributes nothing when either direction is degenerate.
PenaltyTerm loss_lod(const ParamVector& local, const ParamVector& global, const ParamVector& predicted,
                     double alpha);

// Sum over peers of (cos(w'-w, w''-w) - alpha)^2, peers constant.
PenaltyTerm loss_lcd(const ParamVector& local, const std::vector<const ParamVector*>& peers,
                     const ParamVector& global, double alpha);

struct Objective {
    double loss = 0.0;
    ParamVector grad;
};

// Full crafting objective: soft cross-entropy to the global model's logits on
// the clean shadow batch, lambda1 x hard cross-entropy to the target on the
// poisoned batch, plus lambda x (L_nc + L_od + L_cd). Either batch may be
// empty, dropping its term.
Objective total_objective_grad(const nn::MlpSpec& spec, const ParamVector& local,
                               const ParamVector& global, const ParamVector& predicted,
                               const std::vector<const ParamVector*>& peers,
                               const nn::Batch& clean_batch, const nn::Batch& poison_batch,
                               const AttackConfig& cfg);

// Value-only twin of total_objective_grad, used by finite-difference checks.
double total_objective_value(const nn::MlpSpec& spec, const ParamVector& local,
                             const ParamVector& global, const ParamVector& predicted,
                             const std::vector<const ParamVector*>& peers,
                             const nn::Batch& clean_batch, const nn::Batch& poison_batch,
                             const AttackConfig& cfg);

// Joint crafting loop: every backdoor model starts at the global model, the
// predicted model comes from DES over the history, the shadow parts are
// sliced into aligned batches once, and models take turns doing SGD steps
// with peers read at their current states. Returns the m update deltas.
std::vector<ParamVector> craft_backdoor_updates(const nn::MlpSpec& spec, const ParamVector& global,
                                                const GlobalHistory& history,
                                                const data::ShadowSplit& shadow, int m,
                                                const AttackConfig& cfg);

// Classic model replacement: one backdoored model trained on the shadow data
// with the penalties off, its update scaled by n_selected/m_selected and
// replicated across the attackers.
std::vector<ParamVector> baseline_model_replacement(const nn::MlpSpec& spec, const ParamVector& global,
                                                    const data::ShadowSplit& shadow, int n_selected,
                                                    int m_selected, const AttackConfig& cfg);

// Shadow-dataset fine-tuning without mimicry: crafting with lambda = 0.
std::vector<ParamVector> baseline_naive_shadow(const nn::MlpSpec& spec, const ParamVector& global,
                                               const data::ShadowSplit& shadow, int m,
                                               const AttackConfig& cfg);

} // namespace darkfed::attack
