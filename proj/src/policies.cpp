#include <array>
#include <string>

#include "cbrc/bandits.hpp"
#include "cbrc/errors.hpp"

namespace cbrc {

namespace {

constexpr std::array<PolicyKind, 6> kAllKinds = {
    PolicyKind::Mab,  PolicyKind::FullFeatures, PolicyKind::Tsrc,
    PolicyKind::Wtsrc, PolicyKind::RandomFix,   PolicyKind::RandomEi,
};

Rng derive_stream(std::uint64_t seed, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      stream};
    return Rng(seq);
}

class MabPolicy final : public Policy {
public:
    MabPolicy(const CbrcConfig& config, std::uint64_t seed)
        : stats_(config.num_arms, config.prior_success, config.prior_failure),
          rng_(arm_stream(seed)) {}

    std::string_view name() const override { return to_string(PolicyKind::Mab); }

    Decision select(std::span<const double>) override { return {mab_step(stats_, rng_), {}}; }

    void observe(const Decision& decision, int reward) override {
        mab_observe(decision.arm, reward, stats_);
    }

private:
    MabArmStats stats_;
    Rng rng_;
};

// Every contextual policy: CTS arm selection on a context restricted by one of
// four subset rules.
class ContextualPolicy final : public Policy {
public:
    ContextualPolicy(PolicyKind kind, const CbrcConfig& config, std::uint64_t seed)
        : kind_(kind),
          config_(config),
          arms_(config.num_arms, ArmModel(config.num_features)),
          features_(config.num_features, config.window),
          feature_rng_(feature_stream(seed)),
          arm_rng_(arm_stream(seed)) {
        if (kind_ == PolicyKind::RandomFix) {
            fixed_subset_ = random_subset(config_.num_features, config_.subset_size, feature_rng_);
        }
    }

    std::string_view name() const override { return to_string(kind_); }

    Decision select(std::span<const double> context) override {
        if (context.size() != config_.num_features) {
            throw DimensionMismatch("context of size " + std::to_string(context.size()) +
                                    ", policy expects " + std::to_string(config_.num_features));
        }
        RestrictedContext restricted;
        switch (kind_) {
            case PolicyKind::FullFeatures:
                restricted = full_context(context);
                break;
            case PolicyKind::Tsrc:
            case PolicyKind::Wtsrc: {
                const auto scores = sample_feature_scores(features_, config_, feature_rng_);
                restricted =
                    restrict_context(context, select_feature_subset(scores, config_.subset_size));
                break;
            }
            case PolicyKind::RandomFix:
                restricted = restrict_context(context, fixed_subset_);
                break;
            case PolicyKind::RandomEi:
                restricted = restrict_context(
                    context, random_subset(config_.num_features, config_.subset_size, feature_rng_));
                break;
            case PolicyKind::Mab:
                break;
        }
        const std::size_t arm = cts_select_arm(restricted, arms_, config_.cts_scale, arm_rng_);
        return {arm, std::move(restricted)};
    }

    void observe(const Decision& decision, int reward) override {
        cts_observe(decision.arm, decision.context, reward, arms_, config_);
        if (kind_ == PolicyKind::Tsrc || kind_ == PolicyKind::Wtsrc) {
            features_.observe(decision.context.subset, reward);
        }
    }

private:
    PolicyKind kind_;
    CbrcConfig config_;
    std::vector<ArmModel> arms_;
    FeatureStats features_;
    FeatureSubset fixed_subset_;
    Rng feature_rng_;
    Rng arm_rng_;
};

}  // namespace

std::string_view to_string(PolicyKind kind) noexcept {
    switch (kind) {
        case PolicyKind::Mab: return "mab";
        case PolicyKind::FullFeatures: return "fullfeatures";
        case PolicyKind::Tsrc: return "tsrc";
        case PolicyKind::Wtsrc: return "wtsrc";
        case PolicyKind::RandomFix: return "random-fix";
        case PolicyKind::RandomEi: return "random-ei";
    }
    return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) noexcept {
    for (PolicyKind k : kAllKinds) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::span<const PolicyKind> all_policy_kinds() noexcept { return kAllKinds; }

std::string policy_names() {
    std::string out;
    for (PolicyKind k : kAllKinds) {
        if (!out.empty()) out += ", ";
        out += to_string(k);
    }
    return out;
}

Rng feature_stream(std::uint64_t seed) { return derive_stream(seed, 0x5eed0001u); }
Rng arm_stream(std::uint64_t seed) { return derive_stream(seed, 0x5eed0002u); }

std::unique_ptr<Policy> make_policy(PolicyKind kind, const CbrcConfig& config,
                                    std::uint64_t seed) {
    config.validate();
    if (kind == PolicyKind::Wtsrc && !config.windowed()) {
        throw ConfigError("wtsrc requires a window size");
    }
    if (kind != PolicyKind::Wtsrc && config.windowed()) {
        throw ConfigError(std::string(to_string(kind)) + " does not take a window size");
    }
    if (kind == PolicyKind::Mab) return std::make_unique<MabPolicy>(config, seed);
    return std::make_unique<ContextualPolicy>(kind, config, seed);
}

}  // namespace cbrc
