#include "cbrc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "cbrc/errors.hpp"

namespace cbrc::cli {

namespace {

constexpr std::uint64_t kNonStationaryHorizon = 3'000'000;
constexpr std::uint64_t kLongDriftPeriod = 500'000;
constexpr std::uint64_t kDeskHorizon = 30'000;
constexpr std::uint64_t kDeskDriftPeriod = 5'000;
constexpr std::uint64_t kStationaryPasses = 10;

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ',';
        out += p;
    }
    return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& item : raw) {
        std::size_t start = 0;
        for (;;) {
            const auto pos = item.find(',', start);
            std::string token = item.substr(start, pos - start);
            const auto b = token.find_first_not_of(" \t");
            const auto e = token.find_last_not_of(" \t");
            if (b != std::string::npos) out.push_back(token.substr(b, e - b + 1));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
    }
    return out;
}

template <class T>
T parse_scalar(const std::string& token, const char* key) {
    try {
        std::size_t used = 0;
        T value{};
        if constexpr (std::is_same_v<T, double>) {
            value = std::stod(token, &used);
        } else {
            if (!token.empty() && token.front() == '-') throw std::invalid_argument(token);
            value = static_cast<T>(std::stoull(token, &used));
        }
        if (used != token.size()) throw std::invalid_argument(token);
        return value;
    } catch (const std::logic_error&) {
        throw UsageError(std::string("--") + key + ": invalid value '" + token + "'");
    }
}

}  // namespace

std::optional<RunConfig> parse_run_config(const std::vector<std::string>& args,
                                          std::ostream& out) {
    RunConfig cfg;
    CLI::App app{"Run a contextual bandit with restricted context experiment grid", "cbrc run"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "Flat `key = value` file; flags given on the command line win")
        ->default_str("none");

    std::string dataset;
    std::vector<std::string> policies;
    std::vector<std::string> sparsities{"0.95", "0.75", "0.5", "0.25"};
    std::vector<std::string> seeds{"1"};
    std::size_t max_instances = 0;
    std::string preset = "none";
    double r = 0.0, epsilon = 0.0, gamma = 0.0;
    std::string out_dir = cfg.out_dir.string();
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());

    app.add_option("--dataset", dataset, "Dataset CSV file, one instance per line")->required();
    app.add_option("--label-col", cfg.label_column, "Label column index, negative counts from the end");
    app.add_flag("--header", cfg.header, "Skip the first non-empty line [off]");
    app.add_option("--max-instances", max_instances, "Keep only the first N instances (0 = all)");
    app.add_option("--policy", policies, "Policies: " + policy_names())
        ->required()
        ->delimiter(',')
        ->default_str("");
    app.add_option("--sparsity", sparsities, "Fractions of features not observed")
        ->delimiter(',')
        ->default_str(join(sparsities));
    app.add_option("--horizon", cfg.horizon,
                   "Rounds per cell (0 = 10 passes, or 3000000 under drift)");
    app.add_option("--drift-period", cfg.drift_period, "Label shift period in rounds (0 = stationary)");
    app.add_option("--preset", preset,
                   "Horizon/drift defaults: none, stationary, nonstationary, "
                   "desk-nonstationary");
    app.add_option("--window", cfg.window, "Feature-count window for wtsrc (required for wtsrc)");
    auto* scale_opt = app.add_option("--scale", cfg.cts_scale, "Posterior scale v");
    auto* r_opt = app.add_option("--R", r, "Reward noise bound R for the derived scale")->default_str("unset");
    auto* eps_opt = app.add_option("--epsilon", epsilon, "Epsilon in (0,1] for the derived scale")->default_str("unset");
    auto* gamma_opt = app.add_option("--gamma", gamma, "Gamma in (0,1) for the derived scale")->default_str("unset");
    app.add_option("--prior-success", cfg.prior_success, "Beta prior S0");
    app.add_option("--prior-failure", cfg.prior_failure, "Beta prior F0");
    app.add_flag("--update-on-failure", cfg.update_on_failure,
                 "Also update arm posteriors on reward 0 [off]");
    app.add_option("--seed,--seeds", seeds, "Seeds, one cell per seed")
        ->delimiter(',')
        ->default_str(join(seeds));
    app.add_option("--out", out_dir, "Output directory");
    app.add_option("--threads", threads, "Worker threads across cells");
    app.add_flag("--dump-curves", cfg.dump_curves, "Write per-cell (t, cumulative_mistakes) files [off]");
    app.add_option("--curve-stride", cfg.curve_stride, "Rounds between curve rows");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    cfg.dataset = dataset;
    if (max_instances > 0) cfg.max_instances = max_instances;
    cfg.out_dir = out_dir;
    cfg.threads = threads;

    cfg.policies.clear();
    for (const auto& name : split_list(policies)) {
        const auto kind = parse_policy_kind(name);
        if (!kind) {
            throw UsageError("unknown policy '" + name + "'; valid policies: " + policy_names());
        }
        cfg.policies.push_back(*kind);
    }

    cfg.sparsities.clear();
    for (const auto& s : split_list(sparsities)) {
        cfg.sparsities.push_back(parse_scalar<double>(s, "sparsity"));
    }
    cfg.seeds.clear();
    for (const auto& s : split_list(seeds)) {
        cfg.seeds.push_back(parse_scalar<std::uint64_t>(s, "seed"));
    }

    const std::size_t confidence_given = r_opt->count() + eps_opt->count() + gamma_opt->count();
    if (confidence_given > 0) {
        if (scale_opt->count() > 0) {
            throw ConfigError("--scale and --R/--epsilon/--gamma are mutually exclusive");
        }
        if (r_opt->count() == 0 || eps_opt->count() == 0 || gamma_opt->count() == 0) {
            throw ConfigError("--R, --epsilon and --gamma must be given together");
        }
        cfg.confidence = ConfidenceParams{r, epsilon, gamma};
    }

    if (preset == "none" || preset == "stationary") {
        // Stationary defaults already apply.
    } else if (preset == "nonstationary") {
        if (app.count("--horizon") == 0) cfg.horizon = kNonStationaryHorizon;
        if (app.count("--drift-period") == 0) cfg.drift_period = kLongDriftPeriod;
    } else if (preset == "desk-nonstationary") {
        if (app.count("--horizon") == 0) cfg.horizon = kDeskHorizon;
        if (app.count("--drift-period") == 0) cfg.drift_period = kDeskDriftPeriod;
    } else {
        throw UsageError("unknown preset '" + preset +
                         "'; valid presets: none, stationary, nonstationary, "
                         "desk-nonstationary");
    }

    validate(cfg);
    return cfg;
}

void validate(const RunConfig& c) {
    if (c.policies.empty()) throw ConfigError("policy: at least one policy is required");
    for (PolicyKind p : c.policies) {
        if (p == PolicyKind::Wtsrc && c.window == 0) {
            throw ConfigError("window: policy wtsrc requires --window > 0");
        }
    }
    if (c.sparsities.empty()) throw ConfigError("sparsity: at least one level is required");
    for (double s : c.sparsities) {
        if (!(s >= 0.0 && s < 1.0)) {
            throw ConfigError("sparsity: " + std::to_string(s) + " outside [0, 1)");
        }
    }
    if (c.seeds.empty()) throw ConfigError("seed: at least one seed is required");
    if (c.confidence) {
        // Throws ConfigError for out-of-range triples.
        cts_scale_from_confidence(c.confidence->r, c.confidence->epsilon, c.confidence->gamma, 1);
    } else if (!(c.cts_scale > 0.0)) {
        throw ConfigError("scale: must be positive");
    }
    if (!(c.prior_success > 0.0)) throw ConfigError("prior-success: must be positive");
    if (!(c.prior_failure > 0.0)) throw ConfigError("prior-failure: must be positive");
    if (c.threads == 0) throw ConfigError("threads: must be at least 1");
    if (c.curve_stride == 0) throw ConfigError("curve-stride: must be at least 1");
}

std::filesystem::path resolve_dataset_path(const std::filesystem::path& path) {
    if (path.is_absolute()) return path;
    if (const char* root = std::getenv(kDataRootEnv); root != nullptr && *root != '\0') {
        return std::filesystem::path(root) / path;
    }
    return path;
}

ExperimentSpec make_spec(const RunConfig& c, std::shared_ptr<const Dataset> dataset) {
    ExperimentSpec spec;
    spec.policies = c.policies;
    spec.params.cts_scale = c.cts_scale;
    spec.params.confidence = c.confidence;
    spec.params.prior_success = c.prior_success;
    spec.params.prior_failure = c.prior_failure;
    if (c.window > 0) spec.params.window = c.window;
    spec.params.update_on_failure = c.update_on_failure;
    if (c.drift_period > 0) spec.drift = DriftSchedule{c.drift_period};
    if (c.horizon > 0) {
        spec.horizon = c.horizon;
    } else if (spec.drift) {
        spec.horizon = kNonStationaryHorizon;
    } else {
        spec.horizon = kStationaryPasses * dataset->num_instances;
    }
    spec.seeds = c.seeds;
    spec.sparsities = c.sparsities;
    spec.dataset = std::move(dataset);
    return spec;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const std::string usage =
        "usage: cbrc run --dataset FILE --policy NAME[,NAME...] [options]\n"
        "       cbrc run --help\n";
    if (argc < 2) {
        err << usage;
        return kConfigError;
    }
    const std::string command = argv[1];
    if (command == "--help" || command == "-h" || command == "help") {
        out << usage;
        return kSuccess;
    }
    if (command != "run") {
        err << "error: unknown command '" << command << "'\n" << usage;
        return kConfigError;
    }

    RunConfig config;
    try {
        auto parsed = parse_run_config(std::vector<std::string>(argv + 2, argv + argc), out);
        if (!parsed) return kSuccess;
        config = std::move(*parsed);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const CLI::Error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        CsvFormat format;
        format.label_column = config.label_column;
        format.has_header = config.header;
        format.max_rows = config.max_instances;
        auto dataset = std::make_shared<const Dataset>(
            load_dataset(resolve_dataset_path(config.dataset), format));
        out << "dataset " << dataset->name << ": " << dataset->num_instances << " instances, "
            << dataset->num_features << " features, " << dataset->num_classes << " classes\n";

        ExperimentSpec spec;
        try {
            spec = make_spec(config, dataset);
            spec.validate();
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return kConfigError;
        }

        GridOptions grid;
        grid.threads = config.threads;
        if (config.dump_curves) grid.curve_dir = config.out_dir / "curves";
        grid.curve_stride = config.curve_stride;

        const auto results = run_grid(spec, grid);
        const auto rows = aggregate(spec, results);
        const auto path = config.out_dir / "results.csv";
        write_results(path, rows);
        out << render_table(rows) << "results written to " << path.string() << '\n';
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kSuccess;
}

}  // namespace cbrc::cli
