#include <doctest.h>

#include <stdexcept>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "config.hpp"
#include "experiment.hpp"

using namespace darkfed;

TEST_CASE("minimal config resolves the documented defaults") {
    cfg::ExperimentConfig c = cfg::parse_config_text("seed = 7\n");
    CHECK(c.seed == 7);
    CHECK(c.n_clients == 20);
    CHECK(c.attacker_fraction == 0.2);
    CHECK(c.sample_fraction == 0.2);
    CHECK(c.attack.lambda == 0.5);
    CHECK(c.attack.alpha == 0.0);
    CHECK(c.attack.epochs == 15);
    CHECK(c.attack.batch_size == 64);
    CHECK(c.attack.lambda1 == 1.0);
    CHECK(c.attack_kind == cfg::AttackKind::DarkFed);
    CHECK(c.defense.kind == cfg::DefenseKind::FedAvg);
    CHECK(c.trigger.coordinates == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("unknown keys are rejected by name") {
    try {
        cfg::parse_config_text("seed = 1\nattacker_fractoin = 0.2\n");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("attacker_fractoin") != std::string::npos);
    }
}

TEST_CASE("missing seed is an error") {
    CHECK_THROWS_AS(cfg::parse_config_text("n_clients = 10\n"), std::invalid_argument);
}

TEST_CASE("constraint violations name the key") {
    try {
        cfg::parse_config_text("seed = 1\nsample_fraction = 1.5\n");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("sample_fraction") != std::string::npos);
    }
    try {
        cfg::parse_config_text("seed = 1\ntrigger.coords = 99\ntrigger.values = 0.5\n");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("trigger") != std::string::npos);
    }
}

TEST_CASE("serialize-parse round trip is the identity") {
    std::string text =
        "seed = 99\n"
        "n_clients = 12\n"
        "attacker_fraction = 0.25\n"
        "rounds = 7\n"
        "data.spread = 0.125\n"
        "model.hidden = 24,12\n"
        "attack.kind = naive\n"
        "attack.eta = 0.0125\n"
        "defense.kind = norm_clipping\n"
        "defense.clip_tau = 1.75\n"
        "output.prefix = trial\n";
    cfg::ExperimentConfig c = cfg::parse_config_text(text);
    cfg::ExperimentConfig back = cfg::parse_config_text(cfg::serialize_config(c));
    CHECK(back == c);

    // a second round trip reproduces the same bytes
    CHECK(cfg::serialize_config(back) == cfg::serialize_config(c));
}

TEST_CASE("comments, blank lines, duplicate keys") {
    cfg::ExperimentConfig c = cfg::parse_config_text(
        "# experiment\n"
        "seed = 3   # trailing comment\n"
        "\n"
        "rounds = 2\n");
    CHECK(c.seed == 3);
    CHECK(c.rounds == 2);

    CHECK_THROWS_AS(cfg::parse_config_text("seed = 1\nseed = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(cfg::parse_config_text("seed 1\n"), std::invalid_argument);
}

TEST_CASE("output directory falls back to the environment default") {
    setenv("DARKFED_OUT_DIR", "/tmp/darkfed_envdir", 1);
    cfg::ExperimentConfig c = cfg::parse_config_text("seed = 4\n");
    CHECK(c.output.dir == "/tmp/darkfed_envdir");
    unsetenv("DARKFED_OUT_DIR");

    cfg::ExperimentConfig d = cfg::parse_config_text("seed = 4\n");
    CHECK(d.output.dir == ".");

    cfg::ExperimentConfig e = cfg::parse_config_text("seed = 4\noutput.dir = /explicit\n");
    setenv("DARKFED_OUT_DIR", "/tmp/ignored", 1);
    CHECK(e.output.dir == "/explicit");
    unsetenv("DARKFED_OUT_DIR");
}

TEST_CASE("auto clip tau requires pre-rounds") {
    CHECK_THROWS_AS(
        cfg::parse_config_text("seed = 1\npre_rounds = 0\ndefense.kind = norm_clipping\n"),
        std::invalid_argument);
    cfg::ExperimentConfig ok = cfg::parse_config_text(
        "seed = 1\npre_rounds = 0\ndefense.kind = norm_clipping\ndefense.clip_tau = 2.0\n");
    CHECK(ok.defense.clip_tau.has_value());
}

TEST_CASE("run writes byte-stable outputs") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "darkfed_cfg_run";
    fs::remove_all(dir);

    std::string text =
        "seed = 5\n"
        "n_clients = 6\n"
        "sample_fraction = 0.5\n"
        "attacker_fraction = 0.0\n"
        "attack.kind = none\n"
        "rounds = 3\n"
        "pre_rounds = 1\n"
        "data.classes = 3\n"
        "data.dim = 5\n"
        "data.train_n = 60\n"
        "data.test_n = 30\n"
        "model.hidden = 6\n"
        "benign.epochs = 2\n"
        "benign.batch = 8\n"
        "trigger.coords = 0\n"
        "trigger.values = 1\n"
        "output.dir = " + (dir / "a").string() + "\n";
    cfg::ExperimentConfig c = cfg::parse_config_text(text);
    exp::RunOutput first = exp::run(c);

    CHECK(first.sim.records.size() == 4); // baseline + 3 rounds
    std::ifstream csv(first.manifest.csv_path);
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "round,acc,asr,admitted,mean_update_norm,max_update_norm");
    int data_rows = 0;
    std::string line;
    while (std::getline(csv, line))
        if (!line.empty()) ++data_rows;
    CHECK(data_rows == 4);

    c.output.dir = (dir / "b").string();
    exp::RunOutput second = exp::run(c);
    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    };
    CHECK(slurp(first.manifest.csv_path) == slurp(second.manifest.csv_path));

    // summary carries the final metrics and a config echo that reparses equal
    std::string summary = slurp(first.manifest.summary_path);
    CHECK(summary.find("final_acc = ") != std::string::npos);
    std::size_t at = summary.find("[config]\n");
    REQUIRE(at != std::string::npos);
    cfg::ExperimentConfig echoed = cfg::parse_config_text(summary.substr(at + 9));
    // output.dir differs between the two runs by construction; align and compare
    echoed.output.dir = c.output.dir;
    CHECK(echoed == c);
}

TEST_CASE("csv float formatting contract") {
    std::vector<fl::RoundRecord> recs(1);
    recs[0].round = 0;
    recs[0].acc_percent = 90.0;
    recs[0].asr_percent = 12.5;
    const std::string path =
        (std::filesystem::temp_directory_path() / "darkfed_fmt.csv").string();
    exp::write_round_csv(recs, path);
    std::ifstream f(path);
    std::string header, row;
    std::getline(f, header);
    std::getline(f, row);
    CHECK(row == "0,90.000000,12.500000,0,0.000000,0.000000");
}
