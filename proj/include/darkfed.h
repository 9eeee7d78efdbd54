/* darkfed: data-free federated-learning backdoor simulation laboratory.
 *
 * C API over the simulation core. Handles are opaque; every fallible call
 * returns a df_status and, when a char buffer is supplied, a NUL-terminated
 * error message. Strings returned by accessor functions are owned by the
 * handle they came from and stay valid until that handle is freed.
 */
#ifndef DARKFED_H
#define DARKFED_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DARKFED_API __declspec(dllexport)
#else
#define DARKFED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum df_status {
    DF_OK = 0,
    DF_ERR_CONFIG = 1, /* config parse or validation failure */
    DF_ERR_RUNTIME = 2, /* simulation failure */
    DF_ERR_IO = 3, /* file system failure */
    DF_ERR_ARG = 4 /* null or out-of-range API argument */
} df_status;

typedef struct df_config df_config;
typedef struct df_result df_result;

typedef struct df_round_metrics {
    int round;
    double acc_percent;
    double asr_percent;
    int admitted;
    double mean_update_norm;
    double max_update_norm;
    double aggregate_norm;
} df_round_metrics;

DARKFED_API const char* df_version(void);

/* Parses the flat key = value experiment description. Unknown keys are
 * rejected by name; omitted keys take the documented defaults. */
DARKFED_API df_status df_config_parse_file(const char* path, df_config** out, char* errbuf,
                                           size_t errbuf_len);
DARKFED_API df_status df_config_parse_text(const char* text, df_config** out, char* errbuf,
                                           size_t errbuf_len);

DARKFED_API df_status df_config_set_seed(df_config* config, uint64_t seed);
DARKFED_API df_status df_config_set_output_dir(df_config* config, const char* dir);

/* Canonical serialized form; reparsing it yields an equal config. */
DARKFED_API const char* df_config_serialize(df_config* config);

DARKFED_API void df_config_free(df_config* config);

/* Runs pre-training plus the attack window and writes the per-round CSV and
 * the summary file into the configured output directory. */
DARKFED_API df_status df_run(const df_config* config, df_result** out, char* errbuf,
                             size_t errbuf_len);

/* Number of emitted records: round 0 baseline plus one per attack round. */
DARKFED_API size_t df_result_rounds(const df_result* result);
DARKFED_API df_status df_result_round_metrics(const df_result* result, size_t index,
                                              df_round_metrics* out);
DARKFED_API double df_result_final_acc(const df_result* result);
DARKFED_API double df_result_final_asr(const df_result* result);
DARKFED_API const char* df_result_csv_path(const df_result* result);
DARKFED_API const char* df_result_summary_path(const df_result* result);

DARKFED_API void df_result_free(df_result* result);

#ifdef __cplusplus
}
#endif

#endif /* DARKFED_H */
