#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cbrc/bandits.hpp"
#include "cbrc/errors.hpp"

namespace cbrc {

void CbrcConfig::validate() const {
    if (num_features == 0) throw ConfigError("num_features must be positive");
    if (num_arms < 2) throw ConfigError("num_arms must be at least 2");
    if (subset_size < 1 || subset_size > num_features) {
        throw ConfigError("subset_size must lie in [1, " + std::to_string(num_features) +
                          "], got " + std::to_string(subset_size));
    }
    if (!(cts_scale > 0.0) || !std::isfinite(cts_scale)) {
        throw ConfigError("cts_scale must be positive");
    }
    if (!(prior_success > 0.0)) throw ConfigError("prior_success must be positive");
    if (!(prior_failure > 0.0)) throw ConfigError("prior_failure must be positive");
    if (window && *window == 0) throw ConfigError("window must be positive");
}

double cts_scale_from_confidence(double r, double epsilon, double gamma, std::size_t d) {
    if (!(r > 0.0)) throw ConfigError("R must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
    if (d == 0) throw ConfigError("context dimension must be positive");
    const double v = r * std::sqrt((24.0 / epsilon) * static_cast<double>(d) * std::log(1.0 / gamma));
    if (!(v > 0.0)) throw ConfigError("gamma = 1 gives a zero posterior scale");
    return v;
}

FeatureStats::FeatureStats(std::size_t num_features, std::optional<std::size_t> window)
    : window_(window), selections_(num_features, 0), successes_(num_features, 0) {
    if (window_ && *window_ == 0) throw ConfigError("window must be positive");
}

void FeatureStats::observe(std::span<const std::size_t> subset, int reward) {
    const bool success = reward == 1;
    for (std::size_t i : subset) {
        if (i >= selections_.size()) {
            throw DimensionMismatch("feature index " + std::to_string(i) + " out of range");
        }
        ++selections_[i];
        if (success) ++successes_[i];
    }
    if (window_) {
        buffer_.push_back({FeatureSubset(subset.begin(), subset.end()), success});
        window_advance();
    }
}

void FeatureStats::window_advance() {
    if (!window_) return;
    while (buffer_.size() > *window_) {
        const RoundRecord& oldest = buffer_.front();
        for (std::size_t i : oldest.subset) {
            --selections_[i];
            if (oldest.success) --successes_[i];
        }
        buffer_.pop_front();
    }
}

double sample_beta(double a, double b, Rng& rng) {
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    double theta = (x + y > 0.0) ? x / (x + y) : 0.5;
    constexpr double lo = std::numeric_limits<double>::min();
    const double hi = std::nextafter(1.0, 0.0);
    return std::clamp(theta, lo, hi);
}

std::vector<double> sample_feature_scores(const FeatureStats& stats, const CbrcConfig& config,
                                          Rng& rng) {
    const auto n = stats.selections();
    const auto r = stats.successes();
    std::vector<double> scores(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double s = config.prior_success + static_cast<double>(r[i]);
        const double f = config.prior_failure + static_cast<double>(n[i] - r[i]);
        scores[i] = sample_beta(s, f, rng);
    }
    return scores;
}

FeatureSubset select_feature_subset(std::span<const double> scores, std::size_t d) {
    if (d < 1 || d > scores.size()) {
        throw InvalidSubsetSize("subset size " + std::to_string(d) + " outside [1, " +
                                std::to_string(scores.size()) + "]");
    }
    FeatureSubset idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto better = [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
    };
    if (d < idx.size()) {
        std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(d - 1), idx.end(),
                         better);
        idx.resize(d);
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

FeatureSubset random_subset(std::size_t n, std::size_t d, Rng& rng) {
    if (d < 1 || d > n) {
        throw InvalidSubsetSize("subset size " + std::to_string(d) + " outside [1, " +
                                std::to_string(n) + "]");
    }
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    FeatureSubset out;
    out.reserve(d);
    // Selection sampling keeps the input order, so the result is already sorted.
    std::sample(all.begin(), all.end(), std::back_inserter(out), d, rng);
    return out;
}

}  // namespace cbrc
