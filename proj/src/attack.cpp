#include "attack.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace darkfed::attack {

void AttackConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("attack: lambda must be >= 0");
    if (lambda1 < 0.0) throw std::invalid_argument("attack: lambda1 must be >= 0");
    if (epochs < 0) throw std::invalid_argument("attack: epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("attack: batch size must be >= 1");
    if (eta <= 0.0) throw std::invalid_argument("attack: eta must be positive");
    if (des_gamma <= 0.0 || des_gamma > 1.0) throw std::invalid_argument("attack: des_gamma outside (0,1]");
    if (des_delta <= 0.0 || des_delta > 1.0) throw std::invalid_argument("attack: des_delta outside (0,1]");
}

ParamVector des_predict(const GlobalHistory& history, double gamma, double delta) {
    if (history.empty())
        throw std::invalid_argument("des_predict: empty history");
    if (history.size() == 1)
        return history.front();

    const std::size_t d = history.front().size();
    for (const auto& w : history) vec::check_same_length(history.front(), w, "des_predict");

    ParamVector level = history[0];
    ParamVector trend = vec::sub(history[1], history[0]);
    for (std::size_t t = 1; t < history.size(); ++t) {
        ParamVector prev_level = level;
        for (std::size_t i = 0; i < d; ++i) {
            level[i] = gamma * history[t][i] + (1.0 - gamma) * (prev_level[i] + trend[i]);
            trend[i] = delta * (level[i] - prev_level[i]) + (1.0 - delta) * trend[i];
        }
    }
    return vec::add(level, trend);
}

PenaltyTerm loss_lnc(const ParamVector& local, const ParamVector& global) {
    vec::check_same_length(local, global, "loss_lnc");
    ParamVector u = vec::sub(local, global);
    double n = vec::norm2(u);
    PenaltyTerm t;
    t.value = n;
    if (n < vec::kDegenerateNormEps) {
        t.grad.assign(local.size(), 0.0);
    } else {
        t.grad = vec::scaled(u, 1.0 / n);
    }
    return t;
}

namespace {

// (cos(u, v) - alpha)^2 and its gradient w.r.t. u with v held constant.
// Degenerate directions contribute nothing.
PenaltyTerm cosine_penalty(const ParamVector& u, const ParamVector& v, double alpha) {
    PenaltyTerm t;
    t.grad.assign(u.size(), 0.0);
    auto c = vec::cosine(u, v);
    if (!c) return t;
    const double cos_uv = *c;
    const double diff = cos_uv - alpha;
    t.value = diff * diff;
    const double nu = vec::norm2(u);
    const double nv = vec::norm2(v);
    // d cos / d u = v/(|u||v|) - cos * u/|u|^2
    for (std::size_t i = 0; i < u.size(); ++i)
        t.grad[i] = 2.0 * diff * (v[i] / (nu * nv) - cos_uv * u[i] / (nu * nu));
    return t;
}

} // namespace

PenaltyTerm loss_lod(const ParamVector& local, const ParamVector& global, const ParamVector& predicted,
                     double alpha) {
    vec::check_same_length(local, global, "loss_lod");
    vec::check_same_length(predicted, global, "loss_lod");
    return cosine_penalty(vec::sub(local, global), vec::sub(predicted, global), alpha);
}

PenaltyTerm loss_lcd(const ParamVector& local, const std::vector<const ParamVector*>& peers,
                     const ParamVector& global, double alpha) {
    vec::check_same_length(local, global, "loss_lcd");
    PenaltyTerm total;
    total.grad.assign(local.size(), 0.0);
    ParamVector u = vec::sub(local, global);
    for (const ParamVector* peer : peers) {
        vec::check_same_length(*peer, global, "loss_lcd");
        PenaltyTerm t = cosine_penalty(u, vec::sub(*peer, global), alpha);
        total.value += t.value;
        vec::axpy(total.grad, 1.0, t.grad);
    }
    return total;
}

namespace {

struct CeTerms {
    double loss = 0.0;
    bool has_grad = false;
    ParamVector grad;
};

CeTerms clean_term(const nn::MlpSpec& spec, const ParamVector& local, const ParamVector& global,
                   const nn::Batch& clean_batch, bool want_grad) {
    CeTerms t;
    if (clean_batch.size() == 0) return t;
    nn::Matrix teacher = nn::forward(spec, global, clean_batch.inputs);
    nn::Matrix student = nn::forward(spec, local, clean_batch.inputs);
    t.loss = nn::soft_ce_loss(student, teacher);
    if (want_grad) {
        t.grad = nn::backprop_grad(spec, local, clean_batch, nn::LossKind::SoftTeacher, &teacher);
        t.has_grad = true;
    }
    return t;
}

CeTerms poison_term(const nn::MlpSpec& spec, const ParamVector& local, const nn::Batch& poison_batch,
                    bool want_grad) {
    CeTerms t;
    if (poison_batch.size() == 0) return t;
    if (!poison_batch.labels)
        throw std::invalid_argument("total_objective: poisoned batch must carry target labels");
    nn::Matrix logits = nn::forward(spec, local, poison_batch.inputs);
    t.loss = nn::hard_ce_loss(logits, *poison_batch.labels);
    if (want_grad) {
        t.grad = nn::backprop_grad(spec, local, poison_batch, nn::LossKind::HardTarget);
        t.has_grad = true;
    }
    return t;
}

} // namespace

Objective total_objective_grad(const nn::MlpSpec& spec, const ParamVector& local,
                               const ParamVector& global, const ParamVector& predicted,
                               const std::vector<const ParamVector*>& peers,
                               const nn::Batch& clean_batch, const nn::Batch& poison_batch,
                               const AttackConfig& cfg) {
    Objective obj;
    obj.grad.assign(local.size(), 0.0);

    CeTerms cl = clean_term(spec, local, global, clean_batch, true);
    obj.loss += cl.loss;
    if (cl.has_grad) vec::axpy(obj.grad, 1.0, cl.grad);

    CeTerms bk = poison_term(spec, local, poison_batch, true);
    obj.loss += cfg.lambda1 * bk.loss;
    if (bk.has_grad) vec::axpy(obj.grad, cfg.lambda1, bk.grad);

    if (cfg.lambda != 0.0) {
        PenaltyTerm nc = loss_lnc(local, global);
        PenaltyTerm od = loss_lod(local, global, predicted, cfg.alpha);
        obj.loss += cfg.lambda * (nc.value + od.value);
        vec::axpy(obj.grad, cfg.lambda, nc.grad);
        vec::axpy(obj.grad, cfg.lambda, od.grad);
        if (cfg.include_cd) {
            PenaltyTerm cd = loss_lcd(local, peers, global, cfg.alpha);
            obj.loss += cfg.lambda * cd.value;
            vec::axpy(obj.grad, cfg.lambda, cd.grad);
        }
    }
    return obj;
}

double total_objective_value(const nn::MlpSpec& spec, const ParamVector& local,
                             const ParamVector& global, const ParamVector& predicted,
                             const std::vector<const ParamVector*>& peers,
                             const nn::Batch& clean_batch, const nn::Batch& poison_batch,
                             const AttackConfig& cfg) {
    double loss = clean_term(spec, local, global, clean_batch, false).loss;
    loss += cfg.lambda1 * poison_term(spec, local, poison_batch, false).loss;
    if (cfg.lambda != 0.0) {
        loss += cfg.lambda * loss_lnc(local, global).value;
        loss += cfg.lambda * loss_lod(local, global, predicted, cfg.alpha).value;
        if (cfg.include_cd) loss += cfg.lambda * loss_lcd(local, peers, global, cfg.alpha).value;
    }
    return loss;
}

namespace {

// Slices a dataset into n_batches contiguous chunks whose sizes differ by at
// most one; chunk b may be empty when the dataset is smaller than n_batches.
nn::Batch slice_batch(const data::LabeledDataset& d, std::size_t b, std::size_t n_batches) {
    const std::size_t n = d.size();
    const std::size_t base = n / n_batches;
    const std::size_t extra = n % n_batches;
    const std::size_t begin = b * base + std::min(b, extra);
    const std::size_t count = base + (b < extra ? 1 : 0);

    nn::Batch batch;
    batch.inputs = nn::Matrix(count, d.dim());
    std::copy(d.inputs.data.begin() + begin * d.dim(), d.inputs.data.begin() + (begin + count) * d.dim(),
              batch.inputs.data.begin());
    if (d.labels)
        batch.labels = std::vector<int>(d.labels->begin() + begin, d.labels->begin() + begin + count);
    return batch;
}

} // namespace

std::vector<ParamVector> craft_backdoor_updates(const nn::MlpSpec& spec, const ParamVector& global,
                                                const GlobalHistory& history,
                                                const data::ShadowSplit& shadow, int m,
                                                const AttackConfig& cfg) {
    cfg.validate();
    if (m < 1)
        throw std::invalid_argument("craft_backdoor_updates: need at least one backdoor model");
    const std::size_t n_shadow = shadow.clean.size() + shadow.poisoned.size();
    if (n_shadow == 0)
        throw std::invalid_argument("craft_backdoor_updates: empty shadow dataset");

    ParamVector predicted = des_predict(history.empty() ? GlobalHistory{global} : history,
                                        cfg.des_gamma, cfg.des_delta);

    // Batches of the whole shadow set, realized as aligned slices of the
    // clean and poisoned parts so every step sees both loss terms.
    const std::size_t n_batches =
        (n_shadow + static_cast<std::size_t>(cfg.batch_size) - 1) / static_cast<std::size_t>(cfg.batch_size);
    std::vector<nn::Batch> clean_batches, poison_batches;
    for (std::size_t b = 0; b < n_batches; ++b) {
        clean_batches.push_back(slice_batch(shadow.clean, b, n_batches));
        poison_batches.push_back(slice_batch(shadow.poisoned, b, n_batches));
    }

    std::vector<ParamVector> models(m, global);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<ParamVector> snapshot;
        if (!cfg.peers_live) snapshot = models;
        for (int j = 0; j < m; ++j) {
            std::vector<const ParamVector*> peers;
            for (int p = 0; p < m; ++p)
                if (p != j) peers.push_back(cfg.peers_live ? &models[p] : &snapshot[p]);
            for (std::size_t b = 0; b < n_batches; ++b) {
                Objective obj = total_objective_grad(spec, models[j], global, predicted, peers,
                                                     clean_batches[b], poison_batches[b], cfg);
                models[j] = nn::sgd_step(models[j], obj.grad, cfg.eta);
            }
        }
    }

    std::vector<ParamVector> updates;
    updates.reserve(m);
    for (const auto& w : models) updates.push_back(vec::sub(w, global));
    return updates;
}

std::vector<ParamVector> baseline_model_replacement(const nn::MlpSpec& spec, const ParamVector& global,
                                                    const data::ShadowSplit& shadow, int n_selected,
                                                    int m_selected, const AttackConfig& cfg) {
    if (m_selected < 1)
        throw std::invalid_argument("baseline_model_replacement: need at least one attacker");
    if (n_selected < m_selected)
        throw std::invalid_argument("baseline_model_replacement: n_selected < m_selected");

    AttackConfig plain = cfg;
    plain.lambda = 0.0;
    std::vector<ParamVector> one = craft_backdoor_updates(spec, global, {global}, shadow, 1, plain);
    const double scale = static_cast<double>(n_selected) / static_cast<double>(m_selected);
    ParamVector boosted = vec::scaled(one.front(), scale);
    return std::vector<ParamVector>(m_selected, boosted);
}

std::vector<ParamVector> baseline_naive_shadow(const nn::MlpSpec& spec, const ParamVector& global,
                                               const data::ShadowSplit& shadow, int m,
                                               const AttackConfig& cfg) {
    AttackConfig plain = cfg;
    plain.lambda = 0.0;
    return craft_backdoor_updates(spec, global, {global}, shadow, m, plain);
}

} // namespace darkfed::attack
