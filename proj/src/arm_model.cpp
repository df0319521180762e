#include <numeric>
#include <string>

#include "cbrc/bandits.hpp"
#include "cbrc/errors.hpp"

namespace cbrc {

RestrictedContext restrict_context(std::span<const double> context, FeatureSubset subset) {
    RestrictedContext out{std::move(subset), std::vector<double>(context.size(), 0.0)};
    for (std::size_t i : out.subset) {
        if (i >= context.size()) {
            throw DimensionMismatch("feature index " + std::to_string(i) +
                                    " outside context of size " + std::to_string(context.size()));
        }
        out.values[i] = context[i];
    }
    return out;
}

RestrictedContext full_context(std::span<const double> context) {
    FeatureSubset all(context.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return {std::move(all), std::vector<double>(context.begin(), context.end())};
}

ArmModel::ArmModel(std::size_t dim)
    : precision_(linalg::Matrix::identity(dim)),
      response_(dim, 0.0),
      mean_(dim, 0.0),
      posterior_(linalg::InversePair::identity(dim)) {}

void ArmModel::update(const RestrictedContext& context, int reward) {
    const auto& c = context.values;
    if (c.size() != dim()) {
        throw DimensionMismatch("arm model of dimension " + std::to_string(dim()) +
                                " given context of size " + std::to_string(c.size()));
    }
    const auto& idx = context.subset;
    for (std::size_t a : idx) {
        if (c[a] == 0.0) continue;
        for (std::size_t b : idx) precision_(a, b) += c[a] * c[b];
    }
    if (reward != 0) {
        for (std::size_t a : idx) response_[a] += c[a] * reward;
    }

    try {
        linalg::rank_one_update(posterior_, c);
    } catch (const NotPositiveDefinite&) {
        posterior_ = linalg::InversePair::from_precision(precision_);
        ++refactorizations_;
    }
    mean_ = linalg::multiply(posterior_.inverse, response_);
}

std::size_t cts_select_arm(const RestrictedContext& context, std::span<const ArmModel> arms,
                           double scale, Rng& rng) {
    if (arms.empty()) throw DimensionMismatch("no arms to select from");
    const auto& c = context.values;
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t k = 0; k < arms.size(); ++k) {
        const ArmModel& arm = arms[k];
        if (arm.dim() != c.size()) {
            throw DimensionMismatch("context of size " + std::to_string(c.size()) +
                                    " for arm model of dimension " + std::to_string(arm.dim()));
        }
        const linalg::Vector sample =
            linalg::sample_mvn(arm.mean(), arm.posterior().factor, scale, rng);
        double score = 0.0;
        for (std::size_t i : context.subset) score += c[i] * sample[i];
        if (k == 0 || score > best_score) {
            best = k;
            best_score = score;
        }
    }
    return best;
}

void cts_observe(std::size_t arm, const RestrictedContext& context, int reward,
                 std::span<ArmModel> arms, const CbrcConfig& config) {
    if (arm >= arms.size()) {
        throw ArmOutOfRange("arm " + std::to_string(arm) + " of " + std::to_string(arms.size()));
    }
    if (reward != 1 && !config.update_on_failure) return;
    arms[arm].update(context, reward);
}

MabArmStats::MabArmStats(std::size_t num_arms, double prior_success, double prior_failure)
    : prior_success_(prior_success),
      prior_failure_(prior_failure),
      successes_(num_arms, 0),
      failures_(num_arms, 0) {}

void MabArmStats::record(std::size_t arm, int reward) {
    if (arm >= successes_.size()) {
        throw ArmOutOfRange("arm " + std::to_string(arm) + " of " +
                            std::to_string(successes_.size()));
    }
    if (reward == 1) {
        ++successes_[arm];
    } else {
        ++failures_[arm];
    }
}

std::size_t mab_step(const MabArmStats& stats, Rng& rng) {
    std::size_t best = 0;
    double best_theta = -1.0;
    for (std::size_t k = 0; k < stats.num_arms(); ++k) {
        const double theta =
            sample_beta(stats.prior_success() + static_cast<double>(stats.successes()[k]),
                        stats.prior_failure() + static_cast<double>(stats.failures()[k]), rng);
        if (theta > best_theta) {
            best = k;
            best_theta = theta;
        }
    }
    return best;
}

void mab_observe(std::size_t arm, int reward, MabArmStats& stats) { stats.record(arm, reward); }

}  // namespace cbrc
