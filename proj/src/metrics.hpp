#pragma once

#include "datagen.hpp"
#include "mlp.hpp"

namespace darkfed::metrics {

struct EvalReport {
    double acc_percent = 0.0;
    double asr_percent = 0.0;
    std::vector<double> per_class_acc_percent;
    std::size_t n_eval = 0;
};

// 100 x fraction of argmax-correct predictions; argmax ties go to the lowest
// class index.
double accuracy(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test);

// Triggers every test input and reports 100 x fraction predicted as the
// target label. By the paper's convention samples whose true label already is
// the target are counted; exclude_target drops them first.
double asr(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test,
           const data::TriggerSpec& trigger, bool exclude_target = false);

EvalReport evaluate(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test,
                    const data::TriggerSpec& trigger);

} // namespace darkfed::metrics
