#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlp.hpp"

namespace darkfed::data {

using nn::Matrix;

// Feature matrix with optional integer labels in [0, C).
struct LabeledDataset {
    Matrix inputs;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return inputs.rows; }
    std::size_t dim() const { return inputs.cols; }
};

// A coordinate patch: the listed input coordinates are overwritten with the
// listed values, and triggered samples are relabeled to target_label.
struct TriggerSpec {
    std::vector<int> coordinates;
    std::vector<double> values;
    int target_label = 0;

    void validate(int dim, int num_classes) const;
    bool operator==(const TriggerSpec&) const = default;
};

enum class ShadowKind { GaussI, GaussII, Uniform, RealSurrogate };

ShadowKind shadow_kind_from_string(const std::string& s);
std::string to_string(ShadowKind k);

// Unlabeled synthetic shadow data, every entry in [0,1].
//   GaussI:  N(0.5, 1^2) clipped to [0,1]
//   GaussII: N(0.5, 0.2^2) clipped to [0,1]
//   Uniform: U(0,1)
//   RealSurrogate: labeled-blob features from an unrelated seed, labels dropped
LabeledDataset gen_shadow(ShadowKind kind, std::size_t n, std::size_t d, std::uint64_t seed);

// C Gaussian blobs with centers drawn once in [0,1]^d; samples clipped to
// [0,1]; labels cycle 0..C-1 so classes are balanced within one sample.
LabeledDataset gen_blobs(int num_classes, std::size_t d, std::size_t n, double spread, std::uint64_t seed);

std::vector<double> apply_trigger(const std::vector<double>& x, const TriggerSpec& t);
Matrix apply_trigger(const Matrix& inputs, const TriggerSpec& t);

struct ShadowSplit {
    LabeledDataset clean;    // D_sc, unlabeled
    LabeledDataset poisoned; // D_sp, triggered, every label = target
};

// floor(p*n) samples chosen at random are triggered and labeled with the
// target; the rest form the clean part. Sample count is conserved.
ShadowSplit split_shadow(const LabeledDataset& shadow, double poison_fraction, const TriggerSpec& t,
                         std::uint64_t seed);

enum class PartitionMode { Iid, Dirichlet };

// Disjoint client shards covering the dataset. Iid deals a shuffled order
// round-robin (sizes differ by at most 1); Dirichlet draws per-class client
// proportions from a symmetric Dirichlet(alpha) and apportions each class by
// largest remainder.
std::vector<LabeledDataset> partition_clients(const LabeledDataset& dataset, int n_clients,
                                              PartitionMode mode, double dirichlet_alpha,
                                              std::uint64_t seed);

// CSV round trip. Header row f0..f{d-1},label; the label cell is empty for
// unlabeled datasets.
void write_csv(const LabeledDataset& dataset, const std::string& path);
LabeledDataset read_csv(const std::string& path);

} // namespace darkfed::data
