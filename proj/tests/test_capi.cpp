// Exercises the shared-library surface exactly as an external consumer
// would: through darkfed.h only.
#include <cassert>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

#include "darkfed.h"

#define CHECK(cond)                                                              \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::fprintf(stderr, "FAILED %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            return 1;                                                            \
        }                                                                        \
    } while (0)

static const char* kSmokeConfig =
    "seed = 11\n"
    "n_clients = 6\n"
    "sample_fraction = 0.5\n"
    "attacker_fraction = 0.34\n"
    "rounds = 2\n"
    "pre_rounds = 1\n"
    "data.classes = 3\n"
    "data.dim = 5\n"
    "data.train_n = 60\n"
    "data.test_n = 24\n"
    "model.hidden = 6\n"
    "benign.epochs = 1\n"
    "benign.batch = 8\n"
    "attack.epochs = 1\n"
    "attack.batch = 8\n"
    "attack.shadow_n = 16\n"
    "trigger.coords = 0\n"
    "trigger.values = 1\n";

static std::string slurp(const char* path) {
    std::ifstream f(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

int main() {
    CHECK(std::strlen(df_version()) > 0);

    char err[256] = {0};
    df_config* config = nullptr;

    // parse errors surface a status and a message naming the key
    CHECK(df_config_parse_text("seed = 1\nbogus_key = 3\n", &config, err, sizeof(err)) ==
          DF_ERR_CONFIG);
    CHECK(std::strstr(err, "bogus_key") != nullptr);
    CHECK(config == nullptr);

    CHECK(df_config_parse_file("/nonexistent/path.cfg", &config, err, sizeof(err)) == DF_ERR_IO);

    CHECK(df_config_parse_text(nullptr, &config, err, sizeof(err)) == DF_ERR_ARG);

    // a valid config round-trips through its serialized form
    CHECK(df_config_parse_text(kSmokeConfig, &config, err, sizeof(err)) == DF_OK);
    CHECK(config != nullptr);
    const char* serialized = df_config_serialize(config);
    CHECK(serialized != nullptr);
    df_config* reparsed = nullptr;
    CHECK(df_config_parse_text(serialized, &reparsed, err, sizeof(err)) == DF_OK);
    CHECK(std::string(df_config_serialize(reparsed)) == serialized);
    df_config_free(reparsed);

    CHECK(df_config_set_seed(config, 11) == DF_OK);
    CHECK(df_config_set_output_dir(config, "capi_out_a") == DF_OK);

    df_result* result = nullptr;
    CHECK(df_run(config, &result, err, sizeof(err)) == DF_OK);
    CHECK(result != nullptr);

    CHECK(df_result_rounds(result) == 3); // baseline + 2 rounds
    df_round_metrics m;
    CHECK(df_result_round_metrics(result, 0, &m) == DF_OK);
    CHECK(m.round == 0);
    CHECK(m.acc_percent >= 0.0 && m.acc_percent <= 100.0);
    CHECK(m.admitted == 0);
    CHECK(df_result_round_metrics(result, 2, &m) == DF_OK);
    CHECK(m.round == 2);
    CHECK(m.admitted > 0);
    CHECK(df_result_round_metrics(result, 99, &m) == DF_ERR_ARG);

    CHECK(df_result_final_acc(result) >= 0.0);
    CHECK(df_result_csv_path(result) != nullptr);
    CHECK(df_result_summary_path(result) != nullptr);
    std::string csv_a = slurp(df_result_csv_path(result));
    CHECK(!csv_a.empty());

    // identical seed, fresh run: byte-identical CSV
    df_config_set_output_dir(config, "capi_out_b");
    df_result* rerun = nullptr;
    CHECK(df_run(config, &rerun, err, sizeof(err)) == DF_OK);
    CHECK(slurp(df_result_csv_path(rerun)) == csv_a);

    df_result_free(rerun);
    df_result_free(result);
    df_config_free(config);

    std::puts("capi_tests: all checks passed");
    return 0;
}
