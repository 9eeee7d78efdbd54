#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace darkfed::cfg {

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::None;
    if (s == "darkfed") return AttackKind::DarkFed;
    if (s == "naive") return AttackKind::NaiveShadow;
    if (s == "model_replacement") return AttackKind::ModelReplacement;
    throw std::invalid_argument("attack.kind: unknown value '" + s + "'");
}

DefenseKind defense_kind_from_string(const std::string& s) {
    if (s == "fedavg") return DefenseKind::FedAvg;
    if (s == "norm_clipping") return DefenseKind::NormClipping;
    if (s == "flame") return DefenseKind::Flame;
    if (s == "rflbat") return DefenseKind::Rflbat;
    if (s == "foolsgold") return DefenseKind::FoolsGold;
    throw std::invalid_argument("defense.kind: unknown value '" + s + "'");
}

std::string to_string(AttackKind k) {
    switch (k) {
        case AttackKind::None: return "none";
        case AttackKind::DarkFed: return "darkfed";
        case AttackKind::NaiveShadow: return "naive";
        case AttackKind::ModelReplacement: return "model_replacement";
    }
    throw std::logic_error("bad AttackKind");
}

std::string to_string(DefenseKind k) {
    switch (k) {
        case DefenseKind::FedAvg: return "fedavg";
        case DefenseKind::NormClipping: return "norm_clipping";
        case DefenseKind::Flame: return "flame";
        case DefenseKind::Rflbat: return "rflbat";
        case DefenseKind::FoolsGold: return "foolsgold";
    }
    throw std::logic_error("bad DefenseKind");
}

nn::MlpSpec ExperimentConfig::model_spec() const {
    nn::MlpSpec spec;
    spec.layer_dims.push_back(data.dim);
    for (int h : hidden_dims) spec.layer_dims.push_back(h);
    spec.layer_dims.push_back(data.classes);
    return spec;
}

int ExperimentConfig::attacker_count() const {
    if (attack_kind == AttackKind::None) return 0;
    return static_cast<int>(std::floor(attacker_fraction * n_clients + 0.5));
}

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config key '" + key + "': " + what);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(key, "expected integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) fail(key, "expected number, got '" + v + "'");
        return out;
    } catch (const std::invalid_argument&) {
        fail(key, "expected number, got '" + v + "'");
    } catch (const std::out_of_range&) {
        fail(key, "number out of range: '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(key, "expected true/false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> parts;
    if (trim(v).empty()) return parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(trim(item));
    return parts;
}

std::string format_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, p);
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += format_double(xs[i]);
    }
    return out;
}

} // namespace

void ExperimentConfig::validate() const {
    auto check = [](bool ok, const char* key, const char* what) {
        if (!ok) fail(key, what);
    };
    check(n_clients >= 1, "n_clients", "must be >= 1");
    check(attacker_fraction >= 0.0 && attacker_fraction <= 1.0, "attacker_fraction", "must be in [0,1]");
    check(sample_fraction > 0.0 && sample_fraction <= 1.0, "sample_fraction", "must be in (0,1]");
    check(rounds >= 1, "rounds", "must be >= 1");
    check(pre_rounds >= 0, "pre_rounds", "must be >= 0");
    check(threads >= 1, "threads", "must be >= 1");

    check(data.classes >= 2, "data.classes", "must be >= 2");
    check(data.dim >= 1, "data.dim", "must be >= 1");
    check(data.train_n >= data.classes, "data.train_n", "must be >= data.classes");
    check(data.train_n >= n_clients, "data.train_n", "must be >= n_clients");
    check(data.test_n >= 1, "data.test_n", "must be >= 1");
    check(data.spread >= 0.0, "data.spread", "must be >= 0");
    check(data.dirichlet_alpha > 0.0, "data.dirichlet_alpha", "must be positive");

    for (int h : hidden_dims) check(h >= 1, "model.hidden", "dims must be >= 1");

    try {
        trigger.validate(data.dim, data.classes);
    } catch (const std::invalid_argument& e) {
        fail("trigger", e.what());
    }
    try {
        attack.validate();
    } catch (const std::invalid_argument& e) {
        fail("attack", e.what());
    }
    check(shadow_n >= 1, "attack.shadow_n", "must be >= 1");
    check(poison_fraction >= 0.0 && poison_fraction <= 1.0, "attack.poison_fraction", "must be in [0,1]");
    check(attack_scale > 0.0, "attack.scale", "must be positive");

    check(benign.epochs >= 0, "benign.epochs", "must be >= 0");
    check(benign.batch >= 1, "benign.batch", "must be >= 1");
    check(benign.eta > 0.0, "benign.eta", "must be positive");

    if (defense.clip_tau) check(*defense.clip_tau > 0.0, "defense.clip_tau", "must be positive or 'auto'");
    if (defense.kind == DefenseKind::NormClipping && !defense.clip_tau)
        check(pre_rounds >= 1, "defense.clip_tau", "'auto' needs pre_rounds >= 1 to calibrate");
    check(defense.flame_noise >= 0.0, "defense.flame_noise", "must be >= 0");
    check(defense.rflbat_dims >= 1, "defense.rflbat_dims", "must be >= 1");

    check(!output.prefix.empty(), "output.prefix", "must not be empty");
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config parse error at line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config parse error at line " + std::to_string(line_no) +
                                        ": empty key");
        if (kv.count(key))
            throw std::invalid_argument("config key '" + key + "': duplicated");
        kv[key] = value;
    }

    ExperimentConfig c;
    bool have_seed = false;

    auto take = [&](const char* key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (auto v = take("seed")) {
        c.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
        have_seed = true;
    }
    if (auto v = take("n_clients")) c.n_clients = static_cast<int>(parse_int("n_clients", *v));
    if (auto v = take("attacker_fraction")) c.attacker_fraction = parse_double("attacker_fraction", *v);
    if (auto v = take("sample_fraction")) c.sample_fraction = parse_double("sample_fraction", *v);
    if (auto v = take("rounds")) c.rounds = static_cast<int>(parse_int("rounds", *v));
    if (auto v = take("pre_rounds")) c.pre_rounds = static_cast<int>(parse_int("pre_rounds", *v));
    if (auto v = take("threads")) c.threads = static_cast<int>(parse_int("threads", *v));

    if (auto v = take("data.classes")) c.data.classes = static_cast<int>(parse_int("data.classes", *v));
    if (auto v = take("data.dim")) c.data.dim = static_cast<int>(parse_int("data.dim", *v));
    if (auto v = take("data.train_n")) c.data.train_n = static_cast<int>(parse_int("data.train_n", *v));
    if (auto v = take("data.test_n")) c.data.test_n = static_cast<int>(parse_int("data.test_n", *v));
    if (auto v = take("data.spread")) c.data.spread = parse_double("data.spread", *v);
    if (auto v = take("data.partition")) {
        if (*v == "iid")
            c.data.partition = data::PartitionMode::Iid;
        else if (*v == "dirichlet")
            c.data.partition = data::PartitionMode::Dirichlet;
        else
            fail("data.partition", "expected iid or dirichlet, got '" + *v + "'");
    }
    if (auto v = take("data.dirichlet_alpha")) c.data.dirichlet_alpha = parse_double("data.dirichlet_alpha", *v);

    if (auto v = take("model.hidden")) {
        c.hidden_dims.clear();
        for (const std::string& part : split_list(*v))
            c.hidden_dims.push_back(static_cast<int>(parse_int("model.hidden", part)));
    }

    if (auto v = take("trigger.coords")) {
        c.trigger.coordinates.clear();
        for (const std::string& part : split_list(*v))
            c.trigger.coordinates.push_back(static_cast<int>(parse_int("trigger.coords", part)));
    }
    if (auto v = take("trigger.values")) {
        c.trigger.values.clear();
        for (const std::string& part : split_list(*v))
            c.trigger.values.push_back(parse_double("trigger.values", part));
    }
    if (auto v = take("trigger.target_label"))
        c.trigger.target_label = static_cast<int>(parse_int("trigger.target_label", *v));

    if (auto v = take("attack.kind")) c.attack_kind = attack_kind_from_string(*v);
    if (auto v = take("attack.alpha")) c.attack.alpha = parse_double("attack.alpha", *v);
    if (auto v = take("attack.lambda")) c.attack.lambda = parse_double("attack.lambda", *v);
    if (auto v = take("attack.lambda1")) c.attack.lambda1 = parse_double("attack.lambda1", *v);
    if (auto v = take("attack.epochs")) c.attack.epochs = static_cast<int>(parse_int("attack.epochs", *v));
    if (auto v = take("attack.batch")) c.attack.batch_size = static_cast<int>(parse_int("attack.batch", *v));
    if (auto v = take("attack.eta")) c.attack.eta = parse_double("attack.eta", *v);
    if (auto v = take("attack.des_gamma")) c.attack.des_gamma = parse_double("attack.des_gamma", *v);
    if (auto v = take("attack.des_delta")) c.attack.des_delta = parse_double("attack.des_delta", *v);
    if (auto v = take("attack.peers")) {
        if (*v == "live")
            c.attack.peers_live = true;
        else if (*v == "snapshot")
            c.attack.peers_live = false;
        else
            fail("attack.peers", "expected live or snapshot, got '" + *v + "'");
    }
    if (auto v = take("attack.shadow")) {
        try {
            c.shadow_kind = data::shadow_kind_from_string(*v);
        } catch (const std::invalid_argument& e) {
            fail("attack.shadow", e.what());
        }
    }
    if (auto v = take("attack.shadow_n")) c.shadow_n = static_cast<int>(parse_int("attack.shadow_n", *v));
    if (auto v = take("attack.poison_fraction")) c.poison_fraction = parse_double("attack.poison_fraction", *v);
    if (auto v = take("attack.scale")) c.attack_scale = parse_double("attack.scale", *v);
    if (auto v = take("attack.scale_replacement"))
        c.scale_replacement = parse_bool("attack.scale_replacement", *v);

    if (auto v = take("benign.epochs")) c.benign.epochs = static_cast<int>(parse_int("benign.epochs", *v));
    if (auto v = take("benign.batch")) c.benign.batch = static_cast<int>(parse_int("benign.batch", *v));
    if (auto v = take("benign.eta")) c.benign.eta = parse_double("benign.eta", *v);

    if (auto v = take("defense.kind")) {
        try {
            c.defense.kind = defense_kind_from_string(*v);
        } catch (const std::invalid_argument& e) {
            fail("defense.kind", e.what());
        }
    }
    if (auto v = take("defense.clip_tau")) {
        if (*v == "auto")
            c.defense.clip_tau.reset();
        else
            c.defense.clip_tau = parse_double("defense.clip_tau", *v);
    }
    if (auto v = take("defense.flame_noise")) c.defense.flame_noise = parse_double("defense.flame_noise", *v);
    if (auto v = take("defense.rflbat_dims"))
        c.defense.rflbat_dims = static_cast<int>(parse_int("defense.rflbat_dims", *v));

    if (auto v = take("output.dir")) {
        c.output.dir = *v;
    } else {
        const char* env = std::getenv("DARKFED_OUT_DIR");
        c.output.dir = env && *env ? env : ".";
    }
    if (auto v = take("output.prefix")) c.output.prefix = *v;

    if (!kv.empty())
        throw std::invalid_argument("config key '" + kv.begin()->first + "': unknown key");
    if (!have_seed)
        throw std::invalid_argument("config key 'seed': required key missing");

    // Default trigger: an 8-coordinate saturated patch targeting class 0.
    if (c.trigger.coordinates.empty() && c.trigger.values.empty()) {
        int k = std::min(8, c.data.dim);
        for (int i = 0; i < k; ++i) {
            c.trigger.coordinates.push_back(i);
            c.trigger.values.push_back(1.0);
        }
    }

    c.validate();
    return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "seed = " << c.seed << '\n';
    out << "n_clients = " << c.n_clients << '\n';
    out << "attacker_fraction = " << format_double(c.attacker_fraction) << '\n';
    out << "sample_fraction = " << format_double(c.sample_fraction) << '\n';
    out << "rounds = " << c.rounds << '\n';
    out << "pre_rounds = " << c.pre_rounds << '\n';
    out << "threads = " << c.threads << '\n';
    out << "data.classes = " << c.data.classes << '\n';
    out << "data.dim = " << c.data.dim << '\n';
    out << "data.train_n = " << c.data.train_n << '\n';
    out << "data.test_n = " << c.data.test_n << '\n';
    out << "data.spread = " << format_double(c.data.spread) << '\n';
    out << "data.partition = " << (c.data.partition == data::PartitionMode::Iid ? "iid" : "dirichlet") << '\n';
    out << "data.dirichlet_alpha = " << format_double(c.data.dirichlet_alpha) << '\n';
    out << "model.hidden = " << join_ints(c.hidden_dims) << '\n';
    out << "trigger.coords = " << join_ints(c.trigger.coordinates) << '\n';
    out << "trigger.values = " << join_doubles(c.trigger.values) << '\n';
    out << "trigger.target_label = " << c.trigger.target_label << '\n';
    out << "attack.kind = " << to_string(c.attack_kind) << '\n';
    out << "attack.alpha = " << format_double(c.attack.alpha) << '\n';
    out << "attack.lambda = " << format_double(c.attack.lambda) << '\n';
    out << "attack.lambda1 = " << format_double(c.attack.lambda1) << '\n';
    out << "attack.epochs = " << c.attack.epochs << '\n';
    out << "attack.batch = " << c.attack.batch_size << '\n';
    out << "attack.eta = " << format_double(c.attack.eta) << '\n';
    out << "attack.des_gamma = " << format_double(c.attack.des_gamma) << '\n';
    out << "attack.des_delta = " << format_double(c.attack.des_delta) << '\n';
    out << "attack.peers = " << (c.attack.peers_live ? "live" : "snapshot") << '\n';
    out << "attack.shadow = " << data::to_string(c.shadow_kind) << '\n';
    out << "attack.shadow_n = " << c.shadow_n << '\n';
    out << "attack.poison_fraction = " << format_double(c.poison_fraction) << '\n';
    out << "attack.scale = " << format_double(c.attack_scale) << '\n';
    out << "attack.scale_replacement = " << (c.scale_replacement ? "true" : "false") << '\n';
    out << "benign.epochs = " << c.benign.epochs << '\n';
    out << "benign.batch = " << c.benign.batch << '\n';
    out << "benign.eta = " << format_double(c.benign.eta) << '\n';
    out << "defense.kind = " << to_string(c.defense.kind) << '\n';
    out << "defense.clip_tau = " << (c.defense.clip_tau ? format_double(*c.defense.clip_tau) : "auto") << '\n';
    out << "defense.flame_noise = " << format_double(c.defense.flame_noise) << '\n';
    out << "defense.rflbat_dims = " << c.defense.rflbat_dims << '\n';
    out << "output.dir = " << c.output.dir << '\n';
    out << "output.prefix = " << c.output.prefix << '\n';
    return out.str();
}

} // namespace darkfed::cfg
