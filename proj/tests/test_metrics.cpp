#include <doctest.h>

#include <stdexcept>

#include "metrics.hpp"

using namespace darkfed;
using data::LabeledDataset;
using data::TriggerSpec;
using nn::Matrix;
using nn::MlpSpec;

namespace {

// Linear net whose logits equal a fixed bias row: predicts argmax(bias).
ParamVector constant_logit_params(const MlpSpec& spec, const std::vector<double>& bias) {
    ParamVector p(spec.param_count(), 0.0);
    std::copy(bias.begin(), bias.end(), p.end() - bias.size());
    return p;
}

LabeledDataset balanced_set(int classes, int per_class, int dim) {
    LabeledDataset d;
    d.inputs = Matrix(static_cast<std::size_t>(classes) * per_class, dim);
    d.labels = std::vector<int>(d.inputs.rows);
    for (std::size_t i = 0; i < d.inputs.rows; ++i) {
        (*d.labels)[i] = static_cast<int>(i) % classes;
        for (int j = 0; j < dim; ++j) d.inputs.at(i, j) = 0.1 * static_cast<double>(i % 7);
    }
    return d;
}

} // namespace

TEST_CASE("accuracy") {
    MlpSpec spec{{3, 4}};
    LabeledDataset d = balanced_set(4, 5, 3);

    SUBCASE("perfect predictions give 100") {
        // A one-sample set per class, classified by a huge bias on its label.
        LabeledDataset tiny;
        tiny.inputs = Matrix(10, 3);
        tiny.labels = std::vector<int>(10, 2);
        ParamVector p = constant_logit_params(spec, {0.0, 0.0, 50.0, 0.0});
        CHECK(metrics::accuracy(spec, p, tiny) == 100.0);
    }
    SUBCASE("constant logits break ties to class 0 on a balanced set") {
        ParamVector p(spec.param_count(), 0.0);
        CHECK(metrics::accuracy(spec, p, d) == 25.0);
    }
    SUBCASE("recount oracle on a random model") {
        MlpSpec deep{{3, 6, 4}};
        ParamVector p = nn::init_model(deep, 33);
        double acc = metrics::accuracy(deep, p, d);
        Matrix logits = nn::forward(deep, p, d.inputs);
        std::size_t correct = 0;
        for (std::size_t r = 0; r < logits.rows; ++r) {
            int best = 0;
            for (int c = 1; c < 4; ++c)
                if (logits.at(r, c) > logits.at(r, best)) best = c;
            if (best == (*d.labels)[r]) ++correct;
        }
        CHECK(acc == 100.0 * static_cast<double>(correct) / static_cast<double>(d.size()));
    }
    LabeledDataset empty;
    empty.labels = std::vector<int>{};
    CHECK_THROWS_AS(metrics::accuracy(spec, ParamVector(spec.param_count(), 0.0), empty),
                    std::invalid_argument);
}

TEST_CASE("attack success rate") {
    MlpSpec spec{{3, 4}};
    LabeledDataset d = balanced_set(4, 5, 3);
    TriggerSpec trigger;
    trigger.coordinates = {0};
    trigger.values = {1.0};
    trigger.target_label = 1;

    SUBCASE("constant peak at the target label gives 100") {
        ParamVector p = constant_logit_params(spec, {0.0, 9.0, 0.0, 0.0});
        CHECK(metrics::asr(spec, p, d, trigger) == 100.0);
    }
    SUBCASE("excluding the target errors out on a target-only set") {
        LabeledDataset only;
        only.inputs = Matrix(3, 3);
        only.labels = std::vector<int>(3, 1);
        ParamVector p(spec.param_count(), 0.0);
        CHECK_THROWS_AS(metrics::asr(spec, p, only, trigger, true), std::invalid_argument);
    }
    SUBCASE("a trigger-blind perfect classifier scores 100/C under the inclusive convention") {
        // One-hot class features on coordinates 1 and 2; the trigger writes
        // coordinate 0, which no weight reads, so predictions ignore it.
        LabeledDataset onehot;
        onehot.inputs = Matrix(8, 3);
        onehot.labels = std::vector<int>(8);
        MlpSpec s2{{3, 2}};
        ParamVector p2(s2.param_count(), 0.0);
        // features: coordinate 1 set for class 1, coordinate 2 set for class 0
        for (int i = 0; i < 8; ++i) {
            int y = i % 2;
            (*onehot.labels)[i] = y;
            onehot.inputs.at(i, y == 1 ? 1 : 2) = 1.0;
        }
        p2[1 * 2 + 1] = 5.0; // coord 1 -> logit of class 1
        p2[2 * 2 + 0] = 5.0; // coord 2 -> logit of class 0
        TriggerSpec t2;
        t2.coordinates = {0};
        t2.values = {1.0};
        t2.target_label = 1;
        REQUIRE(metrics::accuracy(s2, p2, onehot) == 100.0);
        CHECK(metrics::asr(s2, p2, onehot, t2) == 50.0); // 100 / C with C = 2
        // and the exclusive convention removes exactly the true-target half
        CHECK(metrics::asr(s2, p2, onehot, t2, true) == 0.0);
    }
}

TEST_CASE("evaluate report") {
    MlpSpec spec{{3, 4}};
    LabeledDataset d = balanced_set(4, 5, 3);
    TriggerSpec trigger;
    trigger.coordinates = {0};
    trigger.values = {1.0};
    trigger.target_label = 0;
    ParamVector p(spec.param_count(), 0.0);
    metrics::EvalReport rep = metrics::evaluate(spec, p, d, trigger);
    CHECK(rep.n_eval == d.size());
    CHECK(rep.acc_percent == 25.0);
    CHECK(rep.per_class_acc_percent[0] == 100.0);
    CHECK(rep.per_class_acc_percent[1] == 0.0);
    CHECK(rep.asr_percent >= 0.0);
    CHECK(rep.asr_percent <= 100.0);
}
