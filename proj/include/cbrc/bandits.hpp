#pragma once
// Bandit policies for the contextual bandit with restricted context.
//
// A round runs in two stages: pick d of the N context features, then pick an
// arm from the context masked to those features. Feature choice is a
// combinatorial Beta-Bernoulli Thompson sampler over per-feature counters;
// arm choice is linear contextual Thompson sampling with one Gaussian
// posterior N(mean_k, v^2 B_k^-1) per arm. Arm models live in the full
// N-dimensional space and see zero-padded restricted contexts.
//
// RNG consumption order within a policy: feature-score draws (features in
// index order, or the random subset draw) come from the feature stream, then
// per-arm Gaussian draws (arms in index order) come from the arm stream.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cbrc/linalg.hpp"

namespace cbrc {

// Sorted, duplicate-free feature indices.
using FeatureSubset = std::vector<std::size_t>;

struct CbrcConfig {
    std::size_t num_features = 0;
    std::size_t num_arms = 0;
    std::size_t subset_size = 0;
    double cts_scale = 0.25;
    double prior_success = 1.0;
    double prior_failure = 1.0;
    // Present: counters only cover the last `window` rounds (WTSRC).
    std::optional<std::size_t> window;
    // Off: arm posteriors only move on reward 1.
    bool update_on_failure = false;

    bool windowed() const noexcept { return window.has_value(); }

    // Throws ConfigError on any violated constraint.
    void validate() const;
};

// v = R * sqrt((24 / epsilon) * d * ln(1 / gamma)). Throws ConfigError when the
// inputs are out of range or the result is not strictly positive.
double cts_scale_from_confidence(double r, double epsilon, double gamma, std::size_t d);

// ---------------------------------------------------------------------------
// Feature selection

class FeatureStats {
public:
    struct RoundRecord {
        FeatureSubset subset;
        bool success = false;
    };

    explicit FeatureStats(std::size_t num_features, std::optional<std::size_t> window = {});

    std::size_t num_features() const noexcept { return selections_.size(); }
    std::optional<std::size_t> window() const noexcept { return window_; }

    // n_i: rounds in which feature i was selected (inside the window, if any).
    std::span<const std::uint64_t> selections() const noexcept { return selections_; }
    // r^f_i: of those, rounds that paid reward 1.
    std::span<const std::uint64_t> successes() const noexcept { return successes_; }
    const std::deque<RoundRecord>& buffer() const noexcept { return buffer_; }

    // Counts the round for every feature in the subset and, in windowed mode,
    // records it and evicts anything older than the window.
    void observe(std::span<const std::size_t> subset, int reward);

    // Evicts buffered rounds beyond the window. No-op without a window.
    void window_advance();

    bool operator==(const FeatureStats&) const = default;

private:
    std::optional<std::size_t> window_;
    std::vector<std::uint64_t> selections_;
    std::vector<std::uint64_t> successes_;
    std::deque<RoundRecord> buffer_;
};

// Beta(a, b) via two gamma draws, clamped to the open interval (0, 1).
double sample_beta(double a, double b, Rng& rng);

// theta_i ~ Beta(S0 + r_i, F0 + n_i - r_i), features in index order.
std::vector<double> sample_feature_scores(const FeatureStats& stats, const CbrcConfig& config,
                                          Rng& rng);

// The d largest scores; ties go to the lower index. Throws InvalidSubsetSize.
FeatureSubset select_feature_subset(std::span<const double> scores, std::size_t d);

// Uniform d-subset of {0..n-1}, sorted. Throws InvalidSubsetSize.
FeatureSubset random_subset(std::size_t n, std::size_t d, Rng& rng);

// ---------------------------------------------------------------------------
// Arm selection

// Full context with every coordinate outside `subset` zeroed.
struct RestrictedContext {
    FeatureSubset subset;
    std::vector<double> values;

    bool operator==(const RestrictedContext&) const = default;
};

RestrictedContext restrict_context(std::span<const double> context, FeatureSubset subset);
RestrictedContext full_context(std::span<const double> context);

class ArmModel {
public:
    explicit ArmModel(std::size_t dim);

    std::size_t dim() const noexcept { return precision_.dim(); }
    const linalg::Matrix& precision() const noexcept { return precision_; }
    const linalg::Vector& response() const noexcept { return response_; }
    const linalg::Vector& mean() const noexcept { return mean_; }
    const linalg::InversePair& posterior() const noexcept { return posterior_; }
    std::size_t refactorizations() const noexcept { return refactorizations_; }

    // B += c c^T, g += c * reward, mean = B^-1 g.
    void update(const RestrictedContext& context, int reward);

    bool operator==(const ArmModel&) const = default;

private:
    linalg::Matrix precision_;
    linalg::Vector response_;
    linalg::Vector mean_;
    linalg::InversePair posterior_;
    std::size_t refactorizations_ = 0;
};

// Draws one posterior sample per arm and returns argmax of context . sample
// (lowest index on ties). Throws DimensionMismatch.
std::size_t cts_select_arm(const RestrictedContext& context, std::span<const ArmModel> arms,
                           double scale, Rng& rng);

// Applies the played round to the played arm. With update_on_failure off a
// zero reward leaves every arm untouched.
void cts_observe(std::size_t arm, const RestrictedContext& context, int reward,
                 std::span<ArmModel> arms, const CbrcConfig& config);

// ---------------------------------------------------------------------------
// Non-contextual Bernoulli Thompson sampling

class MabArmStats {
public:
    explicit MabArmStats(std::size_t num_arms, double prior_success = 1.0,
                         double prior_failure = 1.0);

    std::size_t num_arms() const noexcept { return successes_.size(); }
    std::span<const std::uint64_t> successes() const noexcept { return successes_; }
    std::span<const std::uint64_t> failures() const noexcept { return failures_; }
    double prior_success() const noexcept { return prior_success_; }
    double prior_failure() const noexcept { return prior_failure_; }

    void record(std::size_t arm, int reward);

private:
    double prior_success_;
    double prior_failure_;
    std::vector<std::uint64_t> successes_;
    std::vector<std::uint64_t> failures_;
};

std::size_t mab_step(const MabArmStats& stats, Rng& rng);
void mab_observe(std::size_t arm, int reward, MabArmStats& stats);

// ---------------------------------------------------------------------------
// Policies

enum class PolicyKind { Mab, FullFeatures, Tsrc, Wtsrc, RandomFix, RandomEi };

std::string_view to_string(PolicyKind kind) noexcept;
std::optional<PolicyKind> parse_policy_kind(std::string_view name) noexcept;
std::span<const PolicyKind> all_policy_kinds() noexcept;
// "mab, fullfeatures, ..." for diagnostics.
std::string policy_names();

// One arm decision together with the exact context it was made on. The
// context has an empty subset for policies that observe no features.
struct Decision {
    std::size_t arm = 0;
    RestrictedContext context;
};

class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string_view name() const = 0;
    // Chooses the observed features (if any) and an arm for this context.
    virtual Decision select(std::span<const double> context) = 0;
    // Feeds back the reward of the decision returned by the last select().
    virtual void observe(const Decision& decision, int reward) = 0;
};

// Builds a freshly initialized policy. `config.window` must be set for Wtsrc
// and absent for Tsrc. Throws ConfigError.
std::unique_ptr<Policy> make_policy(PolicyKind kind, const CbrcConfig& config,
                                    std::uint64_t seed);

// The two independent generators a policy derives from its seed.
Rng feature_stream(std::uint64_t seed);
Rng arm_stream(std::uint64_t seed);

}  // namespace cbrc
