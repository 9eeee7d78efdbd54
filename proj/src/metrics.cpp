#include "metrics.hpp"

#include <stdexcept>

namespace darkfed::metrics {

namespace {

std::vector<int> predict(const nn::MlpSpec& spec, const ParamVector& params, const nn::Matrix& inputs) {
    nn::Matrix logits = nn::forward(spec, params, inputs);
    std::vector<int> pred(logits.rows);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        int best = 0;
        for (std::size_t c = 1; c < logits.cols; ++c)
            if (logits.at(r, c) > logits.at(r, best)) best = static_cast<int>(c);
        pred[r] = best;
    }
    return pred;
}

void require_labeled(const data::LabeledDataset& test, const char* where) {
    if (test.size() == 0)
        throw std::invalid_argument(std::string(where) + ": empty evaluation set");
    if (!test.labels)
        throw std::invalid_argument(std::string(where) + ": evaluation set must be labeled");
}

} // namespace

double accuracy(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test) {
    require_labeled(test, "accuracy");
    std::vector<int> pred = predict(spec, params, test.inputs);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == (*test.labels)[i]) ++correct;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(pred.size());
}

double asr(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test,
           const data::TriggerSpec& trigger, bool exclude_target) {
    require_labeled(test, "asr");

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < test.size(); ++i)
        if (!exclude_target || (*test.labels)[i] != trigger.target_label) keep.push_back(i);
    if (keep.empty())
        throw std::invalid_argument("asr: evaluation set empty after excluding target-label samples");

    nn::Matrix kept(keep.size(), test.dim());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        const double* src = test.inputs.data.data() + keep[i] * test.dim();
        std::copy(src, src + test.dim(), kept.data.begin() + i * test.dim());
    }
    nn::Matrix triggered = data::apply_trigger(kept, trigger);
    std::vector<int> pred = predict(spec, params, triggered);
    std::size_t hits = 0;
    for (int p : pred)
        if (p == trigger.target_label) ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

EvalReport evaluate(const nn::MlpSpec& spec, const ParamVector& params, const data::LabeledDataset& test,
                    const data::TriggerSpec& trigger) {
    require_labeled(test, "evaluate");
    EvalReport rep;
    rep.n_eval = test.size();
    rep.acc_percent = accuracy(spec, params, test);
    rep.asr_percent = asr(spec, params, test, trigger, false);

    const int C = spec.num_classes();
    std::vector<std::size_t> total(C, 0), correct(C, 0);
    std::vector<int> pred = predict(spec, params, test.inputs);
    for (std::size_t i = 0; i < pred.size(); ++i) {
        int y = (*test.labels)[i];
        ++total[y];
        if (pred[i] == y) ++correct[y];
    }
    rep.per_class_acc_percent.resize(C, 0.0);
    for (int c = 0; c < C; ++c)
        if (total[c] > 0)
            rep.per_class_acc_percent[c] = 100.0 * static_cast<double>(correct[c]) / static_cast<double>(total[c]);
    return rep;
}

} // namespace darkfed::metrics
