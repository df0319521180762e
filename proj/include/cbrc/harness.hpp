#pragma once
// Experiment grids: (policy x sparsity x seed) cells over one dataset stream,
// per-round mistake logs, and the mean +/- std summary per (dataset, policy).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cbrc/bandits.hpp"
#include "cbrc/stream.hpp"

namespace cbrc {

// (R, epsilon, gamma) from which the posterior scale is derived per cell.
struct ConfidenceParams {
    double r = 1.0;
    double epsilon = 1.0;
    double gamma = 0.5;
};

// Policy settings shared by every cell of a grid.
struct PolicyParams {
    double cts_scale = 0.25;
    // When set, overrides cts_scale with the value derived for the cell's d.
    std::optional<ConfidenceParams> confidence;
    double prior_success = 1.0;
    double prior_failure = 1.0;
    // Applied to wtsrc cells only.
    std::optional<std::size_t> window;
    bool update_on_failure = false;
};

struct ExperimentSpec {
    std::shared_ptr<const Dataset> dataset;
    std::vector<PolicyKind> policies;
    PolicyParams params;
    std::uint64_t horizon = 0;
    std::optional<DriftSchedule> drift;
    std::vector<std::uint64_t> seeds;
    std::vector<double> sparsities{0.95, 0.75, 0.50, 0.25};

    // Throws ConfigError.
    void validate() const;
};

// d = round((1 - sparsity) * N), clamped to [1, N].
std::size_t subset_size_for(double sparsity, std::size_t num_features);

struct Cell {
    PolicyKind policy = PolicyKind::Mab;
    double sparsity = 0.0;
    std::uint64_t seed = 0;
};

// Policy-major, then sparsity, then seed, in the order given by the spec.
std::vector<Cell> enumerate_cells(const ExperimentSpec& spec);

CbrcConfig cell_config(const ExperimentSpec& spec, const Cell& cell);

class RegretLog {
public:
    // Without subsets the log keeps arms, rewards and the mistake curve only.
    explicit RegretLog(bool keep_subsets = true) : keep_subsets_(keep_subsets) {}

    bool keeps_subsets() const noexcept { return keep_subsets_; }
    void reserve(std::size_t rounds);
    void record(std::span<const std::size_t> subset, std::size_t arm, int reward);

    // Number of rounds recorded.
    std::size_t size() const noexcept { return arms_.size(); }
    std::size_t arm(std::size_t t) const { return arms_.at(t); }
    int reward(std::size_t t) const { return rewards_.at(t); }
    std::span<const std::uint32_t> subset(std::size_t t) const;

    std::uint64_t cumulative_mistakes() const noexcept {
        return mistakes_.empty() ? 0 : mistakes_.back();
    }
    // Mistakes over the first `rounds` rounds.
    std::uint64_t mistakes_through(std::size_t rounds) const;
    // mistakes_through(rounds) / rounds, for rounds >= 1.
    double average_error(std::size_t rounds) const;
    double average_error() const { return average_error(size()); }

    bool operator==(const RegretLog&) const = default;

private:
    bool keep_subsets_ = true;
    std::vector<std::uint32_t> arms_;
    std::vector<std::uint8_t> rewards_;
    std::vector<std::uint64_t> mistakes_;
    std::vector<std::uint64_t> subset_offsets_{0};
    std::vector<std::uint32_t> subset_items_;
};

// The interaction loop: next_round -> select -> reward -> observe, T times.
RegretLog run_experiment(const Dataset& dataset, Policy& policy, std::uint64_t horizon,
                         const std::optional<DriftSchedule>& drift = std::nullopt,
                         bool keep_subsets = true);

// Builds the cell's policy from its seed and runs it. A numerical breakdown
// aborts the cell with a NotPositiveDefinite naming the cell.
RegretLog run_cell(const ExperimentSpec& spec, const Cell& cell, bool keep_subsets = true);

struct CellResult {
    Cell cell;
    std::size_t subset_size = 0;
    std::uint64_t horizon = 0;
    std::uint64_t mistakes = 0;

    double average_error() const {
        return static_cast<double>(mistakes) / static_cast<double>(horizon);
    }
};

struct GridOptions {
    unsigned threads = 1;
    // Per-cell (t, cumulative_mistakes) files are written here when set.
    std::optional<std::filesystem::path> curve_dir;
    std::uint64_t curve_stride = 1;
};

// Results come back in enumerate_cells order regardless of thread count.
std::vector<CellResult> run_grid(const ExperimentSpec& spec, const GridOptions& options = {});

struct ResultsRow {
    std::string dataset;
    std::string policy;
    double mean_error_pct = 0.0;
    double std_error_pct = 0.0;
    std::size_t cells = 0;
    std::uint64_t horizon = 0;
    std::string config_digest;

    bool operator==(const ResultsRow&) const = default;
};

// Mean and population std of final average errors, in percent. Inputs are
// sorted before reduction so the result does not depend on their order.
ResultsRow summarize(std::string dataset, std::string policy, std::span<const double> errors,
                     std::uint64_t horizon, std::string config_digest);
ResultsRow summarize_logs(std::string dataset, std::string policy,
                          std::span<const RegretLog> logs, std::string config_digest = {});

// One row per policy of the spec. Throws IncompleteGroup if a policy has fewer
// than sparsities x seeds cells, unless `partial` is set.
std::vector<ResultsRow> aggregate(const ExperimentSpec& spec, std::span<const CellResult> results,
                                  bool partial = false);

// 16 hex digits identifying every setting that shapes a policy's cells.
std::string config_digest(const ExperimentSpec& spec, PolicyKind policy);

// Results file: header plus one line per row, percentages to 2 decimals.
std::string format_results_csv(std::span<const ResultsRow> rows);
std::vector<ResultsRow> parse_results_csv(const std::string& text);
void write_results(const std::filesystem::path& path, std::span<const ResultsRow> rows);

// "x.xx ± y.yy" grid, datasets down, policies across.
std::string render_table(std::span<const ResultsRow> rows);

std::string curve_file_name(const std::string& dataset, const Cell& cell);
// Writes "t,cumulative_mistakes" rows every `stride` rounds plus the last one.
void write_curve(const std::filesystem::path& path, const RegretLog& log, std::uint64_t stride = 1);

}  // namespace cbrc
