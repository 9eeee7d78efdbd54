#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "datagen.hpp"

using namespace darkfed;
using data::LabeledDataset;
using data::ShadowKind;
using data::TriggerSpec;

namespace {

std::vector<std::pair<std::vector<double>, int>> rows_of(const LabeledDataset& d) {
    std::vector<std::pair<std::vector<double>, int>> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double* p = d.inputs.data.data() + i * d.dim();
        rows.push_back({std::vector<double>(p, p + d.dim()), d.labels ? (*d.labels)[i] : -1});
    }
    return rows;
}

} // namespace

TEST_CASE("gen_shadow ranges and statistics") {
    for (ShadowKind kind : {ShadowKind::GaussI, ShadowKind::GaussII, ShadowKind::Uniform,
                            ShadowKind::RealSurrogate}) {
        LabeledDataset d = data::gen_shadow(kind, 200, 8, 5);
        double lo = 1e9, hi = -1e9;
        for (double x : d.inputs.data) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
        CHECK_FALSE(d.labels.has_value());
    }

    SUBCASE("GaussII mean and clipped fraction against the normal-CDF oracle") {
        LabeledDataset d = data::gen_shadow(ShadowKind::GaussII, 10000, 100, 99);
        double sum = 0.0;
        std::size_t clipped = 0;
        for (double x : d.inputs.data) {
            sum += x;
            if (x == 0.0 || x == 1.0) ++clipped;
        }
        const double n = static_cast<double>(d.inputs.data.size());
        CHECK(std::abs(sum / n - 0.5) < 0.01);
        // fraction outside [0,1] for N(0.5, 0.2^2): 2*Phi(-2.5)
        const double expect = std::erfc(2.5 / std::sqrt(2.0));
        CHECK(std::abs(static_cast<double>(clipped) / n - expect) < 0.002);
    }

    SUBCASE("deterministic in seed") {
        LabeledDataset a = data::gen_shadow(ShadowKind::Uniform, 64, 4, 7);
        LabeledDataset b = data::gen_shadow(ShadowKind::Uniform, 64, 4, 7);
        CHECK(a.inputs.data == b.inputs.data);
    }

    CHECK_THROWS_AS(data::gen_shadow(ShadowKind::Uniform, 0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(data::gen_shadow(ShadowKind::Uniform, 4, 0, 1), std::invalid_argument);
}

TEST_CASE("gen_blobs") {
    SUBCASE("zero spread collapses samples onto class centers") {
        LabeledDataset d = data::gen_blobs(3, 5, 9, 0.0, 21);
        for (std::size_t i = 3; i < 9; ++i) {
            // same class as i-3, so identical feature rows
            for (std::size_t j = 0; j < 5; ++j)
                CHECK(d.inputs.at(i, j) == d.inputs.at(i - 3, j));
        }
    }
    SUBCASE("balanced labels") {
        LabeledDataset d = data::gen_blobs(4, 2, 100, 0.1, 3);
        std::vector<int> counts(4, 0);
        for (int y : *d.labels) ++counts[y];
        for (int c : counts) CHECK(c == 25);
    }
    SUBCASE("deterministic in seed") {
        LabeledDataset a = data::gen_blobs(4, 6, 40, 0.2, 11);
        LabeledDataset b = data::gen_blobs(4, 6, 40, 0.2, 11);
        CHECK(a.inputs.data == b.inputs.data);
        CHECK(*a.labels == *b.labels);
    }
    CHECK_THROWS_AS(data::gen_blobs(1, 4, 10, 0.1, 1), std::invalid_argument);
    CHECK_THROWS_AS(data::gen_blobs(4, 4, 3, 0.1, 1), std::invalid_argument);
}

TEST_CASE("apply_trigger") {
    TriggerSpec t;
    t.coordinates = {0, 1};
    t.values = {1.0, 1.0};
    t.target_label = 0;

    std::vector<double> x(6, 0.0);
    std::vector<double> once = data::apply_trigger(x, t);
    std::vector<double> twice = data::apply_trigger(once, t);
    CHECK(once == twice);
    CHECK(once == std::vector<double>{1.0, 1.0, 0.0, 0.0, 0.0, 0.0});

    TriggerSpec empty;
    CHECK(data::apply_trigger(x, empty) == x);

    TriggerSpec bad;
    bad.coordinates = {9};
    bad.values = {0.5};
    CHECK_THROWS_AS(data::apply_trigger(x, bad), std::invalid_argument);
}

TEST_CASE("split_shadow") {
    LabeledDataset shadow = data::gen_shadow(ShadowKind::Uniform, 100, 4, 17);
    TriggerSpec t;
    t.coordinates = {0};
    t.values = {1.0};
    t.target_label = 2;

    SUBCASE("p = 0 keeps everything clean") {
        data::ShadowSplit s = data::split_shadow(shadow, 0.0, t, 1);
        CHECK(s.poisoned.size() == 0);
        CHECK(s.clean.size() == 100);
        CHECK(s.clean.inputs.data == shadow.inputs.data);
    }
    SUBCASE("p = 1 poisons everything") {
        data::ShadowSplit s = data::split_shadow(shadow, 1.0, t, 1);
        CHECK(s.clean.size() == 0);
        CHECK(s.poisoned.size() == 100);
        for (int y : *s.poisoned.labels) CHECK(y == 2);
        for (std::size_t i = 0; i < 100; ++i) CHECK(s.poisoned.inputs.at(i, 0) == 1.0);
    }
    SUBCASE("p = 0.5 uses floor rounding and conserves counts") {
        data::ShadowSplit s = data::split_shadow(shadow, 0.5, t, 1);
        CHECK(s.poisoned.size() == 50);
        CHECK(s.clean.size() + s.poisoned.size() == shadow.size());
    }
    CHECK_THROWS_AS(data::split_shadow(shadow, 1.5, t, 1), std::invalid_argument);
}

TEST_CASE("partition_clients") {
    SUBCASE("iid sizes and exact partition") {
        LabeledDataset d = data::gen_blobs(4, 3, 1000, 0.1, 5);
        auto shards = data::partition_clients(d, 10, data::PartitionMode::Iid, 0.5, 9);
        REQUIRE(shards.size() == 10);
        for (const auto& s : shards) CHECK(s.size() == 100);

        auto all = rows_of(d);
        std::vector<std::pair<std::vector<double>, int>> merged;
        for (const auto& s : shards)
            for (auto& r : rows_of(s)) merged.push_back(std::move(r));
        std::sort(all.begin(), all.end());
        std::sort(merged.begin(), merged.end());
        CHECK(all == merged);
    }
    SUBCASE("dirichlet with huge alpha approaches global class proportions") {
        LabeledDataset d = data::gen_blobs(4, 3, 2000, 0.1, 5);
        auto shards = data::partition_clients(d, 8, data::PartitionMode::Dirichlet, 1e6, 13);
        for (const auto& s : shards) {
            REQUIRE(s.size() > 0);
            std::vector<double> prop(4, 0.0);
            for (int y : *s.labels) prop[y] += 1.0;
            for (double& p : prop) p /= static_cast<double>(s.size());
            for (double p : prop) CHECK(std::abs(p - 0.25) < 0.05);
        }
    }
    SUBCASE("dirichlet with small alpha is still an exact partition") {
        LabeledDataset d = data::gen_blobs(3, 2, 300, 0.1, 5);
        auto shards = data::partition_clients(d, 5, data::PartitionMode::Dirichlet, 0.3, 29);
        std::size_t total = 0;
        for (const auto& s : shards) total += s.size();
        CHECK(total == d.size());

        auto all = rows_of(d);
        std::vector<std::pair<std::vector<double>, int>> merged;
        for (const auto& s : shards)
            for (auto& r : rows_of(s)) merged.push_back(std::move(r));
        std::sort(all.begin(), all.end());
        std::sort(merged.begin(), merged.end());
        CHECK(all == merged);
    }
    LabeledDataset empty;
    empty.labels = std::vector<int>{};
    CHECK_THROWS_AS(data::partition_clients(empty, 4, data::PartitionMode::Iid, 0.5, 1),
                    std::invalid_argument);
}

TEST_CASE("dataset CSV round trip") {
    const std::string dir = (std::filesystem::temp_directory_path() / "darkfed_csv_test").string();
    std::filesystem::create_directories(dir);

    LabeledDataset labeled = data::gen_blobs(3, 4, 20, 0.2, 77);
    data::write_csv(labeled, dir + "/labeled.csv");
    LabeledDataset back = data::read_csv(dir + "/labeled.csv");
    CHECK(back.inputs.data == labeled.inputs.data);
    REQUIRE(back.labels.has_value());
    CHECK(*back.labels == *labeled.labels);

    LabeledDataset unlabeled = data::gen_shadow(ShadowKind::GaussI, 15, 3, 8);
    data::write_csv(unlabeled, dir + "/unlabeled.csv");
    LabeledDataset back2 = data::read_csv(dir + "/unlabeled.csv");
    CHECK(back2.inputs.data == unlabeled.inputs.data);
    CHECK_FALSE(back2.labels.has_value());
}
