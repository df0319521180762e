#include "cbrc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "cbrc/errors.hpp"

namespace cbrc {

namespace {

std::string format_sparsity(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", s);
    return buf;
}

std::string describe(const Cell& cell) {
    return std::string(to_string(cell.policy)) + " sparsity=" + format_sparsity(cell.sparsity) +
           " seed=" + std::to_string(cell.seed);
}

}  // namespace

void ExperimentSpec::validate() const {
    if (!dataset) throw ConfigError("experiment has no dataset");
    if (policies.empty()) throw ConfigError("experiment has no policies");
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (seeds.empty()) throw ConfigError("experiment has no seeds");
    if (sparsities.empty()) throw ConfigError("experiment has no sparsity levels");
    for (double s : sparsities) {
        if (!(s >= 0.0 && s < 1.0)) {
            throw ConfigError("sparsity " + format_sparsity(s) + " outside [0, 1)");
        }
    }
    if (drift && drift->period == 0) throw ConfigError("drift period must be positive");
    for (PolicyKind p : policies) {
        if (p == PolicyKind::Wtsrc && (!params.window || *params.window == 0)) {
            throw ConfigError("wtsrc requires a positive window");
        }
    }
}

std::size_t subset_size_for(double sparsity, std::size_t num_features) {
    const double raw = std::round((1.0 - sparsity) * static_cast<double>(num_features));
    const auto d = static_cast<std::size_t>(std::max(raw, 1.0));
    return std::min(d, num_features);
}

std::vector<Cell> enumerate_cells(const ExperimentSpec& spec) {
    std::vector<Cell> cells;
    cells.reserve(spec.policies.size() * spec.sparsities.size() * spec.seeds.size());
    for (PolicyKind p : spec.policies) {
        for (double s : spec.sparsities) {
            for (std::uint64_t seed : spec.seeds) cells.push_back({p, s, seed});
        }
    }
    return cells;
}

CbrcConfig cell_config(const ExperimentSpec& spec, const Cell& cell) {
    CbrcConfig config;
    config.num_features = spec.dataset->num_features;
    config.num_arms = spec.dataset->num_classes;
    config.subset_size = cell.policy == PolicyKind::FullFeatures
                             ? config.num_features
                             : subset_size_for(cell.sparsity, config.num_features);
    config.prior_success = spec.params.prior_success;
    config.prior_failure = spec.params.prior_failure;
    config.update_on_failure = spec.params.update_on_failure;
    if (cell.policy == PolicyKind::Wtsrc) config.window = spec.params.window;
    if (const auto& conf = spec.params.confidence) {
        config.cts_scale =
            cts_scale_from_confidence(conf->r, conf->epsilon, conf->gamma, config.subset_size);
    } else {
        config.cts_scale = spec.params.cts_scale;
    }
    return config;
}

void RegretLog::reserve(std::size_t rounds) {
    arms_.reserve(rounds);
    rewards_.reserve(rounds);
    mistakes_.reserve(rounds);
    if (keep_subsets_) subset_offsets_.reserve(rounds + 1);
}

void RegretLog::record(std::span<const std::size_t> subset, std::size_t arm, int reward) {
    arms_.push_back(static_cast<std::uint32_t>(arm));
    rewards_.push_back(static_cast<std::uint8_t>(reward == 1 ? 1 : 0));
    mistakes_.push_back(cumulative_mistakes() + (reward == 1 ? 0 : 1));
    if (keep_subsets_) {
        for (std::size_t i : subset) subset_items_.push_back(static_cast<std::uint32_t>(i));
        subset_offsets_.push_back(subset_items_.size());
    }
}

std::span<const std::uint32_t> RegretLog::subset(std::size_t t) const {
    if (!keep_subsets_) throw std::logic_error("RegretLog: subsets were not recorded");
    const auto begin = subset_offsets_.at(t);
    const auto end = subset_offsets_.at(t + 1);
    return {subset_items_.data() + begin, static_cast<std::size_t>(end - begin)};
}

std::uint64_t RegretLog::mistakes_through(std::size_t rounds) const {
    if (rounds == 0) return 0;
    return mistakes_.at(rounds - 1);
}

double RegretLog::average_error(std::size_t rounds) const {
    if (rounds == 0) throw std::out_of_range("average_error over zero rounds");
    return static_cast<double>(mistakes_through(rounds)) / static_cast<double>(rounds);
}

RegretLog run_experiment(const Dataset& dataset, Policy& policy, std::uint64_t horizon,
                         const std::optional<DriftSchedule>& drift, bool keep_subsets) {
    RegretLog log(keep_subsets);
    log.reserve(static_cast<std::size_t>(horizon));
    for (std::uint64_t t = 0; t < horizon; ++t) {
        const StreamRound round = next_round(dataset, t, drift);
        const Decision decision = policy.select(round.context);
        const int r = reward(decision.arm, round, dataset.num_classes);
        policy.observe(decision, r);
        log.record(decision.context.subset, decision.arm, r);
    }
    return log;
}

RegretLog run_cell(const ExperimentSpec& spec, const Cell& cell, bool keep_subsets) {
    const CbrcConfig config = cell_config(spec, cell);
    auto policy = make_policy(cell.policy, config, cell.seed);
    try {
        return run_experiment(*spec.dataset, *policy, spec.horizon, spec.drift, keep_subsets);
    } catch (const NotPositiveDefinite& e) {
        throw NotPositiveDefinite("cell aborted (" + describe(cell) + "): " + e.what());
    }
}

std::vector<CellResult> run_grid(const ExperimentSpec& spec, const GridOptions& options) {
    spec.validate();
    const std::vector<Cell> cells = enumerate_cells(spec);
    std::vector<CellResult> results(cells.size());
    if (options.curve_dir) std::filesystem::create_directories(*options.curve_dir);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                const Cell& cell = cells[i];
                const RegretLog log = run_cell(spec, cell, /*keep_subsets=*/false);
                if (options.curve_dir) {
                    write_curve(*options.curve_dir / curve_file_name(spec.dataset->name, cell), log,
                                options.curve_stride);
                }
                results[i] = {cell, cell_config(spec, cell).subset_size, spec.horizon,
                              log.cumulative_mistakes()};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells.size());
                return;
            }
        }
    };

    const unsigned threads =
        std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

ResultsRow summarize(std::string dataset, std::string policy, std::span<const double> errors,
                     std::uint64_t horizon, std::string config_digest) {
    if (errors.empty()) throw IncompleteGroup(dataset + "/" + policy + ": no cells to aggregate");
    std::vector<double> sorted(errors.begin(), errors.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double sum = 0.0;
    for (double e : sorted) sum += e;
    const double mean = sum / n;
    double sq = 0.0;
    for (double e : sorted) sq += (e - mean) * (e - mean);
    const double std = std::sqrt(sq / n);
    return {std::move(dataset), std::move(policy), 100.0 * mean, 100.0 * std, sorted.size(),
            horizon,            std::move(config_digest)};
}

ResultsRow summarize_logs(std::string dataset, std::string policy,
                          std::span<const RegretLog> logs, std::string config_digest) {
    std::vector<double> errors;
    errors.reserve(logs.size());
    std::uint64_t horizon = logs.empty() ? 0 : logs.front().size();
    for (const auto& log : logs) {
        if (log.size() != horizon) {
            throw DimensionMismatch(dataset + "/" + policy + ": logs of different lengths");
        }
        errors.push_back(log.average_error());
    }
    return summarize(std::move(dataset), std::move(policy), errors, horizon,
                     std::move(config_digest));
}

std::vector<ResultsRow> aggregate(const ExperimentSpec& spec, std::span<const CellResult> results,
                                  bool partial) {
    const std::size_t expected = spec.sparsities.size() * spec.seeds.size();
    std::vector<ResultsRow> rows;
    for (PolicyKind p : spec.policies) {
        std::vector<double> errors;
        for (const auto& r : results) {
            if (r.cell.policy == p && r.horizon > 0) errors.push_back(r.average_error());
        }
        if (errors.size() < expected && !partial) {
            throw IncompleteGroup(spec.dataset->name + "/" + std::string(to_string(p)) + ": " +
                                  std::to_string(errors.size()) + " of " +
                                  std::to_string(expected) + " cells present");
        }
        if (errors.empty()) continue;
        rows.push_back(summarize(spec.dataset->name, std::string(to_string(p)), errors,
                                 spec.horizon, config_digest(spec, p)));
    }
    return rows;
}

std::string config_digest(const ExperimentSpec& spec, PolicyKind policy) {
    std::ostringstream canon;
    canon.precision(17);
    canon << "dataset=" << spec.dataset->name << ';' << spec.dataset->num_instances << 'x'
          << spec.dataset->num_features << 'x' << spec.dataset->num_classes
          << ";policy=" << to_string(policy) << ";horizon=" << spec.horizon
          << ";drift=" << (spec.drift ? spec.drift->period : 0);
    if (const auto& c = spec.params.confidence) {
        canon << ";R=" << c->r << ";eps=" << c->epsilon << ";gamma=" << c->gamma;
    } else {
        canon << ";v=" << spec.params.cts_scale;
    }
    canon << ";S0=" << spec.params.prior_success << ";F0=" << spec.params.prior_failure
          << ";uof=" << spec.params.update_on_failure;
    if (policy == PolicyKind::Wtsrc) canon << ";w=" << spec.params.window.value_or(0);
    canon << ";sparsity=";
    for (double s : spec.sparsities) canon << s << ',';
    canon << ";seeds=";
    for (auto s : spec.seeds) canon << s << ',';

    // FNV-1a, 64 bit.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canon.str()) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace cbrc
