#include "datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rng.hpp"

namespace darkfed::data {

void TriggerSpec::validate(int dim, int num_classes) const {
    if (coordinates.size() != values.size())
        throw std::invalid_argument("trigger: coordinates and values differ in length");
    std::vector<int> seen;
    for (int c : coordinates) {
        if (c < 0 || c >= dim)
            throw std::invalid_argument("trigger: coordinate " + std::to_string(c) +
                                        " out of range [0," + std::to_string(dim) + ")");
        if (std::find(seen.begin(), seen.end(), c) != seen.end())
            throw std::invalid_argument("trigger: duplicate coordinate " + std::to_string(c));
        seen.push_back(c);
    }
    for (double v : values)
        if (v < 0.0 || v > 1.0)
            throw std::invalid_argument("trigger: value outside [0,1]");
    if (target_label < 0 || target_label >= num_classes)
        throw std::invalid_argument("trigger: target label out of range");
}

ShadowKind shadow_kind_from_string(const std::string& s) {
    if (s == "gauss1") return ShadowKind::GaussI;
    if (s == "gauss2") return ShadowKind::GaussII;
    if (s == "uniform") return ShadowKind::Uniform;
    if (s == "real_surrogate") return ShadowKind::RealSurrogate;
    throw std::invalid_argument("unknown shadow kind '" + s + "'");
}

std::string to_string(ShadowKind k) {
    switch (k) {
        case ShadowKind::GaussI: return "gauss1";
        case ShadowKind::GaussII: return "gauss2";
        case ShadowKind::Uniform: return "uniform";
        case ShadowKind::RealSurrogate: return "real_surrogate";
    }
    throw std::logic_error("bad ShadowKind");
}

namespace {
double clip01(double x) { return std::min(1.0, std::max(0.0, x)); }
} // namespace

LabeledDataset gen_shadow(ShadowKind kind, std::size_t n, std::size_t d, std::uint64_t seed) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("gen_shadow: n and d must be >= 1");

    if (kind == ShadowKind::RealSurrogate) {
        // Desk-scale analogue of borrowing an unrelated real dataset: blobs
        // from a decorrelated seed and center set, labels dropped.
        LabeledDataset blobs = gen_blobs(4, d, n, 0.1, mix64(seed ^ 0x5555555555555555ULL));
        blobs.labels.reset();
        return blobs;
    }

    LabeledDataset out;
    out.inputs = Matrix(n, d);
    std::mt19937_64 eng(mix64(seed));
    if (kind == ShadowKind::Uniform) {
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (double& x : out.inputs.data) x = dist(eng);
    } else {
        const double sigma = (kind == ShadowKind::GaussI) ? 1.0 : 0.2;
        std::normal_distribution<double> dist(0.5, sigma);
        for (double& x : out.inputs.data) x = clip01(dist(eng));
    }
    return out;
}

LabeledDataset gen_blobs(int num_classes, std::size_t d, std::size_t n, double spread, std::uint64_t seed) {
    if (num_classes < 2)
        throw std::invalid_argument("gen_blobs: need at least 2 classes");
    if (n < static_cast<std::size_t>(num_classes))
        throw std::invalid_argument("gen_blobs: need n >= num_classes");
    if (d < 1)
        throw std::invalid_argument("gen_blobs: need d >= 1");
    if (spread < 0.0)
        throw std::invalid_argument("gen_blobs: spread must be non-negative");

    std::mt19937_64 eng(mix64(seed));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix centers(static_cast<std::size_t>(num_classes), d);
    for (double& x : centers.data) x = unif(eng);

    LabeledDataset out;
    out.inputs = Matrix(n, d);
    out.labels = std::vector<int>(n);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % num_classes);
        (*out.labels)[i] = label;
        for (std::size_t j = 0; j < d; ++j) {
            double x = centers.at(label, j);
            if (spread > 0.0) x += spread * noise(eng);
            out.inputs.at(i, j) = clip01(x);
        }
    }
    return out;
}

std::vector<double> apply_trigger(const std::vector<double>& x, const TriggerSpec& t) {
    std::vector<double> out = x;
    for (std::size_t k = 0; k < t.coordinates.size(); ++k) {
        int c = t.coordinates[k];
        if (c < 0 || static_cast<std::size_t>(c) >= x.size())
            throw std::invalid_argument("apply_trigger: coordinate out of range");
        out[c] = t.values[k];
    }
    return out;
}

Matrix apply_trigger(const Matrix& inputs, const TriggerSpec& t) {
    Matrix out = inputs;
    for (std::size_t k = 0; k < t.coordinates.size(); ++k) {
        int c = t.coordinates[k];
        if (c < 0 || static_cast<std::size_t>(c) >= inputs.cols)
            throw std::invalid_argument("apply_trigger: coordinate out of range");
        for (std::size_t r = 0; r < out.rows; ++r) out.at(r, c) = t.values[k];
    }
    return out;
}

ShadowSplit split_shadow(const LabeledDataset& shadow, double poison_fraction, const TriggerSpec& t,
                         std::uint64_t seed) {
    if (poison_fraction < 0.0 || poison_fraction > 1.0)
        throw std::invalid_argument("split_shadow: poison fraction outside [0,1]");
    const std::size_t n = shadow.size();
    const std::size_t n_poison = static_cast<std::size_t>(std::floor(poison_fraction * static_cast<double>(n)));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 eng(mix64(seed));
    std::shuffle(order.begin(), order.end(), eng);

    std::vector<bool> is_poison(n, false);
    for (std::size_t i = 0; i < n_poison; ++i) is_poison[order[i]] = true;

    ShadowSplit out;
    out.clean.inputs = Matrix(n - n_poison, shadow.dim());
    out.poisoned.inputs = Matrix(n_poison, shadow.dim());
    out.poisoned.labels = std::vector<int>(n_poison, t.target_label);

    std::size_t ci = 0, pi = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = shadow.inputs.data.data() + i * shadow.dim();
        if (is_poison[i]) {
            std::vector<double> x(row, row + shadow.dim());
            x = apply_trigger(x, t);
            std::copy(x.begin(), x.end(), out.poisoned.inputs.data.begin() + pi * shadow.dim());
            ++pi;
        } else {
            std::copy(row, row + shadow.dim(), out.clean.inputs.data.begin() + ci * shadow.dim());
            ++ci;
        }
    }
    return out;
}

namespace {

LabeledDataset take_rows(const LabeledDataset& d, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.inputs = Matrix(rows.size(), d.dim());
    if (d.labels) out.labels = std::vector<int>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = d.inputs.data.data() + rows[i] * d.dim();
        std::copy(src, src + d.dim(), out.inputs.data.begin() + i * d.dim());
        if (d.labels) (*out.labels)[i] = (*d.labels)[rows[i]];
    }
    return out;
}

} // namespace

std::vector<LabeledDataset> partition_clients(const LabeledDataset& dataset, int n_clients,
                                              PartitionMode mode, double dirichlet_alpha,
                                              std::uint64_t seed) {
    if (n_clients < 1)
        throw std::invalid_argument("partition_clients: need at least 1 client");
    if (dataset.size() == 0)
        throw std::invalid_argument("partition_clients: empty dataset");
    if (!dataset.labels)
        throw std::invalid_argument("partition_clients: dataset must be labeled");

    std::mt19937_64 eng(mix64(seed));
    std::vector<std::vector<std::size_t>> shards(n_clients);

    if (mode == PartitionMode::Iid) {
        std::vector<std::size_t> order(dataset.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), eng);
        for (std::size_t i = 0; i < order.size(); ++i)
            shards[i % n_clients].push_back(order[i]);
    } else {
        if (dirichlet_alpha <= 0.0)
            throw std::invalid_argument("partition_clients: dirichlet alpha must be positive");
        const int C = 1 + *std::max_element(dataset.labels->begin(), dataset.labels->end());
        std::vector<std::vector<std::size_t>> by_class(C);
        for (std::size_t i = 0; i < dataset.size(); ++i)
            by_class[(*dataset.labels)[i]].push_back(i);

        std::gamma_distribution<double> gamma(dirichlet_alpha, 1.0);
        for (int c = 0; c < C; ++c) {
            auto& idx = by_class[c];
            std::shuffle(idx.begin(), idx.end(), eng);

            std::vector<double> props(n_clients);
            double total = 0.0;
            for (double& p : props) {
                p = gamma(eng);
                total += p;
            }
            if (total <= 0.0) { // all-zero gamma draws are possible for tiny alpha
                props.assign(n_clients, 1.0);
                total = n_clients;
            }
            for (double& p : props) p /= total;

            // Largest-remainder apportionment of |class c| by the drawn proportions.
            const std::size_t nc = idx.size();
            std::vector<std::size_t> counts(n_clients);
            std::vector<std::pair<double, int>> rema(n_clients);
            std::size_t assigned = 0;
            for (int k = 0; k < n_clients; ++k) {
                double exact = props[k] * static_cast<double>(nc);
                counts[k] = static_cast<std::size_t>(std::floor(exact));
                assigned += counts[k];
                rema[k] = {exact - std::floor(exact), k};
            }
            std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
            for (std::size_t r = 0; assigned < nc; ++r, ++assigned) counts[rema[r].second]++;

            std::size_t pos = 0;
            for (int k = 0; k < n_clients; ++k)
                for (std::size_t j = 0; j < counts[k]; ++j) shards[k].push_back(idx[pos++]);
        }
        for (auto& s : shards) std::sort(s.begin(), s.end());
    }

    std::vector<LabeledDataset> out;
    out.reserve(n_clients);
    for (const auto& s : shards) out.push_back(take_rows(dataset, s));
    return out;
}

void write_csv(const LabeledDataset& dataset, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("write_csv: cannot open " + path);
    for (std::size_t j = 0; j < dataset.dim(); ++j) f << 'f' << j << ',';
    f << "label\n";
    f.precision(17);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        for (std::size_t j = 0; j < dataset.dim(); ++j) f << dataset.inputs.at(i, j) << ',';
        if (dataset.labels) f << (*dataset.labels)[i];
        f << '\n';
    }
    if (!f)
        throw std::runtime_error("write_csv: write failed for " + path);
}

LabeledDataset read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(f, line))
        throw std::runtime_error("read_csv: missing header in " + path);
    std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));

    std::vector<double> values;
    std::vector<int> labels;
    bool labeled = true;
    std::size_t n = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::getline(ss, cell, ','))
                throw std::runtime_error("read_csv: short row in " + path);
            values.push_back(std::stod(cell));
        }
        if (!std::getline(ss, cell, ','))
            cell.clear();
        if (cell.empty())
            labeled = false;
        else
            labels.push_back(std::stoi(cell));
        ++n;
    }
    LabeledDataset out;
    out.inputs = Matrix(n, d);
    out.inputs.data = std::move(values);
    if (labeled && labels.size() == n) out.labels = std::move(labels);
    return out;
}

} // namespace darkfed::data
