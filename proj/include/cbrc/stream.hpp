#pragma once
// Classification datasets replayed as bandit streams.
//
// Round t shows instance (t mod num_instances) in file order. Under a drift
// schedule the true label of round t is (raw + t / period) mod K, so every
// class-to-arm mapping changes at each period boundary.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cbrc {

struct Dataset {
    std::string name;
    std::size_t num_instances = 0;
    std::size_t num_features = 0;
    std::size_t num_classes = 0;
    // Row-major num_instances x num_features, every column min-max scaled.
    std::vector<double> features;
    std::vector<std::size_t> labels;
    // Original label token of each class index, in first-seen order.
    std::vector<std::string> class_names;

    std::span<const double> row(std::size_t i) const noexcept {
        return {features.data() + i * num_features, num_features};
    }
};

struct CsvFormat {
    // Negative values count from the end: -1 is the last column.
    int label_column = -1;
    bool has_header = false;
    char delimiter = ',';
    // Stop after this many data rows (a prefix subsample).
    std::optional<std::size_t> max_rows;
};

// Per-column min-max scaling of a row-major matrix to [0, 1]; constant
// columns become all zeros.
std::vector<double> normalize(std::span<const double> raw, std::size_t num_features);

// Normalizes and densifies labels (first-seen order). Throws EmptyDataset,
// SingleClass or DimensionMismatch.
Dataset build_dataset(std::string name, std::span<const double> raw_features,
                      std::size_t num_features, std::span<const std::string> raw_labels);

// Throws IoError, ParseError (with line number), EmptyDataset, SingleClass.
Dataset load_dataset(const std::filesystem::path& path, const CsvFormat& format);

struct DriftSchedule {
    std::uint64_t period = 0;

    std::uint64_t epoch(std::uint64_t t) const noexcept { return t / period; }
    std::size_t relabel(std::size_t raw, std::uint64_t t, std::size_t num_classes) const noexcept {
        return static_cast<std::size_t>((raw + epoch(t)) % num_classes);
    }
};

struct StreamRound {
    std::uint64_t t = 0;
    std::span<const double> context;
    std::size_t true_label = 0;
};

StreamRound next_round(const Dataset& dataset, std::uint64_t t,
                       const std::optional<DriftSchedule>& drift = std::nullopt);

// 1 iff arm == round.true_label. Throws ArmOutOfRange for arm >= num_classes.
int reward(std::size_t arm, const StreamRound& round, std::size_t num_classes);

}  // namespace cbrc
