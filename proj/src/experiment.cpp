#include "experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace darkfed::exp {

namespace {

std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

} // namespace

void write_round_csv(const std::vector<fl::RoundRecord>& records, const std::string& path) {
    if (records.empty())
        throw std::invalid_argument("write_round_csv: no records");
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    f << "round,acc,asr,admitted,mean_update_norm,max_update_norm\n";
    for (const auto& r : records) {
        double mean_norm = 0.0, max_norm = 0.0;
        for (double n : r.update_norms) {
            mean_norm += n;
            max_norm = std::max(max_norm, n);
        }
        if (!r.update_norms.empty()) mean_norm /= static_cast<double>(r.update_norms.size());
        f << r.round << ',' << fixed6(r.acc_percent) << ',' << fixed6(r.asr_percent) << ','
          << r.admitted_client_ids.size() << ',' << fixed6(mean_norm) << ',' << fixed6(max_norm) << '\n';
    }
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

void write_summary(const fl::SimulationResult& sim, const std::string& config_echo,
                   const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open for writing: " + path);
    const fl::RoundRecord& last = sim.records.back();
    f << "final_acc = " << fixed6(last.acc_percent) << '\n';
    f << "final_asr = " << fixed6(last.asr_percent) << '\n';
    f << "baseline_acc = " << fixed6(sim.baseline_acc) << '\n';
    f << "rounds = " << last.round << '\n';
    f << "clip_tau = " << fixed6(sim.clip_tau) << '\n';
    f << "[config]\n";
    f << config_echo;
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

RunOutput run(const cfg::ExperimentConfig& config) {
    config.validate();

    RunOutput out;
    out.manifest.config_echo = cfg::serialize_config(config);
    out.manifest.started_unix = std::chrono::duration_cast<std::chrono::seconds>(
                                    std::chrono::system_clock::now().time_since_epoch())
                                    .count();

    std::filesystem::path dir(config.output.dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec && !std::filesystem::is_directory(dir))
        throw std::runtime_error("cannot create output directory: " + config.output.dir);
    out.manifest.csv_path = (dir / (config.output.prefix + "_rounds.csv")).string();
    out.manifest.summary_path = (dir / (config.output.prefix + "_summary.txt")).string();

    out.sim = fl::run_rounds(config);

    write_round_csv(out.sim.records, out.manifest.csv_path);
    write_summary(out.sim, out.manifest.config_echo, out.manifest.summary_path);
    return out;
}

} // namespace darkfed::exp
