#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cbrc/bandits.hpp"
#include "cbrc/harness.hpp"

namespace cbrc::cli {

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kRuntimeError = 2 };

// Environment variable naming the directory relative dataset paths resolve against.
inline constexpr const char* kDataRootEnv = "CBRC_DATA_ROOT";

struct RunConfig {
    std::filesystem::path dataset;
    int label_column = -1;
    bool header = false;
    std::optional<std::size_t> max_instances;

    std::vector<PolicyKind> policies;
    std::vector<double> sparsities{0.95, 0.75, 0.50, 0.25};
    // 0 picks the default: 10 passes over the data, or 3e6 rounds under drift.
    std::uint64_t horizon = 0;
    // 0 is a stationary stream.
    std::uint64_t drift_period = 0;
    std::size_t window = 0;

    double cts_scale = 0.25;
    std::optional<ConfidenceParams> confidence;
    double prior_success = 1.0;
    double prior_failure = 1.0;
    bool update_on_failure = false;

    std::vector<std::uint64_t> seeds{1};
    std::filesystem::path out_dir = "results";
    unsigned threads = 1;
    bool dump_curves = false;
    std::uint64_t curve_stride = 1;
};

// Parses the arguments following the "run" subcommand. Values from a
// --config file apply only where the same flag is absent. Returns nullopt
// after writing help to `out`. Throws UsageError or ConfigError.
std::optional<RunConfig> parse_run_config(const std::vector<std::string>& args,
                                          std::ostream& out);

// Throws ConfigError on constraint violations.
void validate(const RunConfig& config);

// Applies the data-root environment variable to a relative dataset path.
std::filesystem::path resolve_dataset_path(const std::filesystem::path& path);

ExperimentSpec make_spec(const RunConfig& config, std::shared_ptr<const Dataset> dataset);

// Full entry point: argv[1] is the subcommand. Returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cbrc::cli
