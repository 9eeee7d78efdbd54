#include "protocol.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "attack.hpp"
#include "defenses.hpp"
#include "metrics.hpp"
#include "rng.hpp"

namespace darkfed::fl {

std::vector<int> sample_clients(int n_total, double fraction, int round, std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0)
        throw std::invalid_argument("sample_clients: fraction outside (0,1]");
    const int k = static_cast<int>(std::floor(fraction * n_total + 0.5));
    std::vector<int> ids(n_total);
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 eng(derive_seed(seed, {kSamplingStream, static_cast<std::uint64_t>(round)}));
    // Partial Fisher-Yates: the first k slots become the sample.
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> pick(i, n_total - 1);
        std::swap(ids[i], ids[pick(eng)]);
    }
    ids.resize(k);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ClientUpdate benign_local_train(const nn::MlpSpec& spec, const ParamVector& global,
                                const data::LabeledDataset& shard, int epochs, int batch_size,
                                double eta, std::uint64_t seed, int client_id, int round) {
    if (shard.size() == 0)
        throw std::invalid_argument("benign_local_train: empty dataset for client " +
                                    std::to_string(client_id));
    if (!shard.labels)
        throw std::invalid_argument("benign_local_train: unlabeled dataset");

    std::mt19937_64 eng(derive_seed(seed, {kBenignStream, static_cast<std::uint64_t>(client_id),
                                           static_cast<std::uint64_t>(round)}));
    const std::size_t n = shard.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    ParamVector w = global;
    for (int e = 0; e < epochs; ++e) {
        std::shuffle(order.begin(), order.end(), eng);
        for (std::size_t begin = 0; begin < n; begin += static_cast<std::size_t>(batch_size)) {
            const std::size_t count = std::min<std::size_t>(batch_size, n - begin);
            nn::Batch batch;
            batch.inputs = nn::Matrix(count, shard.dim());
            batch.labels = std::vector<int>(count);
            for (std::size_t i = 0; i < count; ++i) {
                const double* src = shard.inputs.data.data() + order[begin + i] * shard.dim();
                std::copy(src, src + shard.dim(), batch.inputs.data.begin() + i * shard.dim());
                (*batch.labels)[i] = (*shard.labels)[order[begin + i]];
            }
            ParamVector grad = nn::backprop_grad(spec, w, batch, nn::LossKind::HardTarget);
            w = nn::sgd_step(w, grad, eta);
        }
    }

    ClientUpdate up;
    up.client_id = client_id;
    up.round = round;
    up.delta = vec::sub(w, global);
    return up;
}

ParamVector apply_round(const ParamVector& global, const ParamVector& aggregated) {
    return vec::add(global, aggregated);
}

namespace {

// Trains the given benign clients, chunked over at most `threads` workers.
// Results land in client-id order regardless of completion order.
std::vector<ClientUpdate> train_benign_clients(const nn::MlpSpec& spec, const ParamVector& global,
                                               const std::vector<data::LabeledDataset>& shards,
                                               const std::vector<int>& ids,
                                               const cfg::ExperimentConfig& config, int global_round) {
    std::vector<ClientUpdate> updates(ids.size());
    const int threads = std::max(1, std::min<int>(config.threads, static_cast<int>(ids.size())));

    auto work = [&](std::size_t begin, std::size_t end, std::exception_ptr& err) {
        try {
            for (std::size_t i = begin; i < end; ++i)
                updates[i] = benign_local_train(spec, global, shards[ids[i]], config.benign.epochs,
                                                config.benign.batch, config.benign.eta, config.seed,
                                                ids[i], global_round);
        } catch (...) {
            err = std::current_exception();
        }
    };

    if (threads == 1) {
        std::exception_ptr err;
        work(0, ids.size(), err);
        if (err) std::rethrow_exception(err);
        return updates;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(threads);
    const std::size_t per = (ids.size() + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::size_t begin = std::min(ids.size(), t * per);
        const std::size_t end = std::min(ids.size(), begin + per);
        pool.emplace_back(work, begin, end, std::ref(errs[t]));
    }
    for (auto& th : pool) th.join();
    for (auto& err : errs)
        if (err) std::rethrow_exception(err);
    return updates;
}

double median_of(std::vector<double> xs) {
    if (xs.empty())
        throw std::invalid_argument("median of empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

SimulationResult run_rounds(const cfg::ExperimentConfig& config) {
    config.validate();
    const int sampled_per_round =
        static_cast<int>(std::floor(config.sample_fraction * config.n_clients + 0.5));
    if (sampled_per_round < 1)
        throw std::invalid_argument("config key 'sample_fraction': samples no client per round");
    if ((config.defense.kind == cfg::DefenseKind::Flame ||
         config.defense.kind == cfg::DefenseKind::Rflbat) &&
        sampled_per_round < 3)
        throw std::invalid_argument("config key 'defense.kind': clustering defenses need >= 3 sampled "
                                    "clients per round");

    const nn::MlpSpec spec = config.model_spec();
    spec.validate();

    // One draw covers train and test so both share the class centers.
    data::LabeledDataset pool =
        data::gen_blobs(config.data.classes, config.data.dim,
                        static_cast<std::size_t>(config.data.train_n) + config.data.test_n,
                        config.data.spread, derive_seed(config.seed, {kMainDataStream}));
    data::LabeledDataset train, test;
    {
        std::vector<std::size_t> head(config.data.train_n), tail(config.data.test_n);
        std::iota(head.begin(), head.end(), 0);
        std::iota(tail.begin(), tail.end(), config.data.train_n);
        train.inputs = nn::Matrix(head.size(), pool.dim());
        train.labels = std::vector<int>(head.size());
        for (std::size_t i = 0; i < head.size(); ++i) {
            const double* src = pool.inputs.data.data() + head[i] * pool.dim();
            std::copy(src, src + pool.dim(), train.inputs.data.begin() + i * pool.dim());
            (*train.labels)[i] = (*pool.labels)[head[i]];
        }
        test.inputs = nn::Matrix(tail.size(), pool.dim());
        test.labels = std::vector<int>(tail.size());
        for (std::size_t i = 0; i < tail.size(); ++i) {
            const double* src = pool.inputs.data.data() + tail[i] * pool.dim();
            std::copy(src, src + pool.dim(), test.inputs.data.begin() + i * pool.dim());
            (*test.labels)[i] = (*pool.labels)[tail[i]];
        }
    }

    std::vector<data::LabeledDataset> shards =
        data::partition_clients(train, config.n_clients, config.data.partition,
                                config.data.dirichlet_alpha, derive_seed(config.seed, {kPartitionStream}));

    ParamVector w = nn::init_model(spec, derive_seed(config.seed, {kInitStream}));

    const int attacker_total = config.attacker_count();
    data::ShadowSplit shadow;
    if (config.attack_kind != cfg::AttackKind::None && attacker_total > 0) {
        data::LabeledDataset ds = data::gen_shadow(config.shadow_kind, config.shadow_n, config.data.dim,
                                                   derive_seed(config.seed, {kShadowStream}));
        shadow = data::split_shadow(ds, config.poison_fraction, config.trigger,
                                    derive_seed(config.seed, {kShadowSplitStream}));
    }

    // Attack-free warm-up rounds: plain FedAvg, benign norms feed the
    // clipping threshold calibration.
    std::vector<double> pre_norms;
    for (int r = 1; r <= config.pre_rounds; ++r) {
        std::vector<int> sampled = sample_clients(config.n_clients, config.sample_fraction, r, config.seed);
        std::vector<ClientUpdate> ups = train_benign_clients(spec, w, shards, sampled, config, r);
        std::vector<defense::observed_update> obs;
        for (auto& u : ups) {
            pre_norms.push_back(vec::norm2(u.delta));
            obs.push_back({u.client_id, std::move(u.delta)});
        }
        w = apply_round(w, defense::agg_fedavg(obs).aggregate);
    }

    double clip_tau = 0.0;
    if (config.defense.kind == cfg::DefenseKind::NormClipping)
        clip_tau = config.defense.clip_tau ? *config.defense.clip_tau : median_of(pre_norms);

    SimulationResult result;
    result.history.push_back(w);

    RoundRecord base;
    base.round = 0;
    base.acc_percent = metrics::accuracy(spec, w, test);
    base.asr_percent = metrics::asr(spec, w, test, config.trigger);
    result.baseline_acc = base.acc_percent;
    result.records.push_back(base);
    result.clip_tau = clip_tau;

    std::map<int, ParamVector> foolsgold_history;

    for (int r = 1; r <= config.rounds; ++r) {
        const int g = config.pre_rounds + r;
        std::vector<int> sampled = sample_clients(config.n_clients, config.sample_fraction, g, config.seed);

        std::vector<int> benign_ids, attacker_ids;
        for (int id : sampled)
            (config.attack_kind != cfg::AttackKind::None && id < attacker_total ? attacker_ids
                                                                                : benign_ids)
                .push_back(id);

        std::vector<ClientUpdate> collected =
            train_benign_clients(spec, w, shards, benign_ids, config, g);

        if (!attacker_ids.empty()) {
            const int m = static_cast<int>(attacker_ids.size());
            std::vector<ParamVector> deltas;
            switch (config.attack_kind) {
                case cfg::AttackKind::DarkFed:
                    deltas = attack::craft_backdoor_updates(spec, w, result.history, shadow, m,
                                                            config.attack);
                    break;
                case cfg::AttackKind::NaiveShadow: {
                    deltas = attack::baseline_naive_shadow(spec, w, shadow, m, config.attack);
                    const double scale =
                        config.scale_replacement
                            ? static_cast<double>(sampled.size()) / static_cast<double>(m)
                            : config.attack_scale;
                    if (scale != 1.0)
                        for (auto& d : deltas) d = vec::scaled(d, scale);
                    break;
                }
                case cfg::AttackKind::ModelReplacement:
                    deltas = attack::baseline_model_replacement(
                        spec, w, shadow, static_cast<int>(sampled.size()), m, config.attack);
                    break;
                case cfg::AttackKind::None:
                    break;
            }
            for (int i = 0; i < m; ++i) {
                ClientUpdate up;
                up.client_id = attacker_ids[i];
                up.round = g;
                up.delta = std::move(deltas[i]);
                collected.push_back(std::move(up));
            }
        }

        std::sort(collected.begin(), collected.end(),
                  [](const ClientUpdate& a, const ClientUpdate& b) { return a.client_id < b.client_id; });

        RoundRecord rec;
        rec.round = r;
        std::vector<defense::observed_update> obs;
        for (auto& u : collected) {
            rec.update_norms.push_back(vec::norm2(u.delta));
            obs.push_back({u.client_id, std::move(u.delta)});
        }

        defense::AggregationOutcome outcome;
        switch (config.defense.kind) {
            case cfg::DefenseKind::FedAvg:
                outcome = defense::agg_fedavg(obs);
                break;
            case cfg::DefenseKind::NormClipping:
                outcome = defense::agg_norm_clipping(obs, clip_tau);
                break;
            case cfg::DefenseKind::Flame:
                outcome = defense::agg_flame(obs, config.defense.flame_noise,
                                             derive_seed(config.seed, {kFlameStream,
                                                                       static_cast<std::uint64_t>(g)}));
                break;
            case cfg::DefenseKind::Rflbat:
                outcome = defense::agg_rflbat(obs, config.defense.rflbat_dims,
                                              derive_seed(config.seed, {kRflbatStream,
                                                                        static_cast<std::uint64_t>(g)}));
                break;
            case cfg::DefenseKind::FoolsGold: {
                // Histories accumulate the submitted update before weighting,
                // so repeat offenders are judged on everything so far.
                for (const auto& o : obs) {
                    auto it = foolsgold_history.find(o.client_id);
                    if (it == foolsgold_history.end())
                        foolsgold_history.emplace(o.client_id, o.delta);
                    else
                        vec::axpy(it->second, 1.0, o.delta);
                }
                outcome = defense::agg_foolsgold(obs, foolsgold_history);
                break;
            }
        }

        w = apply_round(w, outcome.aggregate);
        result.history.push_back(w);

        rec.admitted_client_ids = outcome.admitted_ids;
        rec.aggregate_norm = vec::norm2(outcome.aggregate);
        rec.acc_percent = metrics::accuracy(spec, w, test);
        rec.asr_percent = metrics::asr(spec, w, test, config.trigger);
        result.records.push_back(std::move(rec));
    }

    result.final_model = w;
    return result;
}

} // namespace darkfed::fl
