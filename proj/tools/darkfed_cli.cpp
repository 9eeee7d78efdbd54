// Command-line front end over the darkfed C API.
//
//   darkfed run <config> [--out DIR] [--seed N] [--quiet]
//
// Exit codes: 0 success, 1 config error, 2 runtime error.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "darkfed.h"

int main(int argc, char** argv) {
    CLI::App app{"darkfed: data-free federated-learning backdoor simulation lab"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed_override = 0;
    bool have_seed = false;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
    run->add_option("config", config_path, "path to the experiment config")->required();
    run->add_option("--out", out_dir, "output directory (overrides output.dir)");
    run->add_option("--seed", seed_override, "seed override")->each([&](const std::string&) {
        have_seed = true;
    });
    run->add_flag("--quiet", quiet, "suppress per-round output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    char err[512] = {0};
    df_config* config = nullptr;
    df_status st = df_config_parse_file(config_path.c_str(), &config, err, sizeof(err));
    if (st != DF_OK) {
        std::fprintf(stderr, "config error: %s\n", err);
        return 1;
    }
    if (have_seed) df_config_set_seed(config, seed_override);
    if (!out_dir.empty()) df_config_set_output_dir(config, out_dir.c_str());

    df_result* result = nullptr;
    st = df_run(config, &result, err, sizeof(err));
    if (st != DF_OK) {
        std::fprintf(stderr, "%s: %s\n", st == DF_ERR_CONFIG ? "config error" : "run error", err);
        df_config_free(config);
        return st == DF_ERR_CONFIG ? 1 : 2;
    }

    if (!quiet) {
        std::printf("round,acc,asr,admitted\n");
        df_round_metrics m;
        for (size_t i = 0; i < df_result_rounds(result); ++i) {
            df_result_round_metrics(result, i, &m);
            std::printf("%d,%.2f,%.2f,%d\n", m.round, m.acc_percent, m.asr_percent, m.admitted);
        }
    }
    std::printf("final acc %.2f%%  asr %.2f%%\n", df_result_final_acc(result),
                df_result_final_asr(result));
    std::printf("wrote %s\n", df_result_csv_path(result));
    std::printf("wrote %s\n", df_result_summary_path(result));

    df_result_free(result);
    df_config_free(config);
    return 0;
}
