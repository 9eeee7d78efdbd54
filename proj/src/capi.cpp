#include "darkfed.h"

#include <cstring>
#include <exception>
#include <new>
#include <stdexcept>
#include <string>

#include "config.hpp"
#include "experiment.hpp"

struct df_config {
    darkfed::cfg::ExperimentConfig cfg;
    std::string serialized; // cache backing df_config_serialize
};

struct df_result {
    darkfed::exp::RunOutput out;
};

namespace {

void put_error(char* errbuf, size_t errbuf_len, const char* msg) {
    if (!errbuf || errbuf_len == 0) return;
    std::strncpy(errbuf, msg, errbuf_len - 1);
    errbuf[errbuf_len - 1] = '\0';
}

template <typename Fn>
df_status guarded(Fn&& fn, char* errbuf, size_t errbuf_len, df_status runtime_status) {
    try {
        return fn();
    } catch (const std::invalid_argument& e) {
        put_error(errbuf, errbuf_len, e.what());
        return DF_ERR_CONFIG;
    } catch (const std::runtime_error& e) {
        put_error(errbuf, errbuf_len, e.what());
        return runtime_status;
    } catch (const std::bad_alloc&) {
        put_error(errbuf, errbuf_len, "out of memory");
        return DF_ERR_RUNTIME;
    } catch (const std::exception& e) {
        put_error(errbuf, errbuf_len, e.what());
        return DF_ERR_RUNTIME;
    }
}

} // namespace

extern "C" {

const char* df_version(void) { return darkfed::exp::kVersion; }

df_status df_config_parse_file(const char* path, df_config** out, char* errbuf, size_t errbuf_len) {
    if (!path || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return DF_ERR_ARG;
    }
    *out = nullptr;
    return guarded(
        [&]() {
            auto handle = new df_config{darkfed::cfg::parse_config_file(path), {}};
            *out = handle;
            return DF_OK;
        },
        errbuf, errbuf_len, DF_ERR_IO);
}

df_status df_config_parse_text(const char* text, df_config** out, char* errbuf, size_t errbuf_len) {
    if (!text || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return DF_ERR_ARG;
    }
    *out = nullptr;
    return guarded(
        [&]() {
            auto handle = new df_config{darkfed::cfg::parse_config_text(text), {}};
            *out = handle;
            return DF_OK;
        },
        errbuf, errbuf_len, DF_ERR_IO);
}

df_status df_config_set_seed(df_config* config, uint64_t seed) {
    if (!config) return DF_ERR_ARG;
    config->cfg.seed = seed;
    return DF_OK;
}

df_status df_config_set_output_dir(df_config* config, const char* dir) {
    if (!config || !dir || !*dir) return DF_ERR_ARG;
    config->cfg.output.dir = dir;
    return DF_OK;
}

const char* df_config_serialize(df_config* config) {
    if (!config) return nullptr;
    config->serialized = darkfed::cfg::serialize_config(config->cfg);
    return config->serialized.c_str();
}

void df_config_free(df_config* config) { delete config; }

df_status df_run(const df_config* config, df_result** out, char* errbuf, size_t errbuf_len) {
    if (!config || !out) {
        put_error(errbuf, errbuf_len, "null argument");
        return DF_ERR_ARG;
    }
    *out = nullptr;
    return guarded(
        [&]() {
            auto handle = new df_result{darkfed::exp::run(config->cfg)};
            *out = handle;
            return DF_OK;
        },
        errbuf, errbuf_len, DF_ERR_RUNTIME);
}

size_t df_result_rounds(const df_result* result) {
    return result ? result->out.sim.records.size() : 0;
}

df_status df_result_round_metrics(const df_result* result, size_t index, df_round_metrics* out) {
    if (!result || !out || index >= result->out.sim.records.size()) return DF_ERR_ARG;
    const darkfed::fl::RoundRecord& r = result->out.sim.records[index];
    out->round = r.round;
    out->acc_percent = r.acc_percent;
    out->asr_percent = r.asr_percent;
    out->admitted = static_cast<int>(r.admitted_client_ids.size());
    double mean = 0.0, mx = 0.0;
    for (double n : r.update_norms) {
        mean += n;
        if (n > mx) mx = n;
    }
    out->mean_update_norm = r.update_norms.empty() ? 0.0 : mean / r.update_norms.size();
    out->max_update_norm = mx;
    out->aggregate_norm = r.aggregate_norm;
    return DF_OK;
}

double df_result_final_acc(const df_result* result) {
    return result ? result->out.sim.records.back().acc_percent : 0.0;
}

double df_result_final_asr(const df_result* result) {
    return result ? result->out.sim.records.back().asr_percent : 0.0;
}

const char* df_result_csv_path(const df_result* result) {
    return result ? result->out.manifest.csv_path.c_str() : nullptr;
}

const char* df_result_summary_path(const df_result* result) {
    return result ? result->out.manifest.summary_path.c_str() : nullptr;
}

void df_result_free(df_result* result) { delete result; }

} // extern "C"
