#include <doctest.h>

#include "cbrc/bandits.hpp"
#include "cbrc/errors.hpp"
#include "oracles.hpp"

using namespace cbrc;

namespace {

CbrcConfig config(std::size_t n, std::size_t k) {
    CbrcConfig c;
    c.num_features = n;
    c.num_arms = k;
    c.subset_size = n;
    return c;
}

// One success with c = a e0 on a fresh arm gives mean_0 = a / (1 + a^2);
// pick a in (0, 1] so that mean_0 hits the target.
ArmModel arm_with_first_mean(std::size_t n, double target) {
    ArmModel arm(n);
    if (target == 0.0) return arm;
    const double a = (1.0 - std::sqrt(1.0 - 4.0 * target * target)) / (2.0 * target);
    std::vector<double> v(n, 0.0);
    v[0] = a;
    arm.update(restrict_context(v, FeatureSubset{0}), 1);
    return arm;
}

}  // namespace

TEST_CASE("cts_select_arm with zero scale is a plain argmax") {
    Rng rng(1);
    const std::vector<double> ctx{1.0, 0.0};
    std::vector<ArmModel> arms{arm_with_first_mean(2, 0.5), arm_with_first_mean(2, 0.1)};
    REQUIRE(arms[0].mean()[0] == doctest::Approx(0.5));
    REQUIRE(arms[1].mean()[0] == doctest::Approx(0.1));
    CHECK(cts_select_arm(full_context(ctx), arms, 0.0, rng) == 0);

    std::vector<ArmModel> swapped{arms[1], arms[0]};
    CHECK(cts_select_arm(full_context(ctx), swapped, 0.0, rng) == 1);

    std::vector<ArmModel> fresh(4, ArmModel(2));
    CHECK(cts_select_arm(full_context(ctx), fresh, 0.0, rng) == 0);
}

TEST_CASE("cts_select_arm is uniform over symmetric fresh arms") {
    constexpr std::size_t arms_count = 4;
    constexpr int rounds = 100000;
    Rng rng(2);
    std::vector<ArmModel> arms(arms_count, ArmModel(3));
    const std::vector<double> ctx{1.0, 0.0, 0.0};
    const auto rc = full_context(ctx);
    std::vector<int> counts(arms_count, 0);
    for (int t = 0; t < rounds; ++t) ++counts[cts_select_arm(rc, arms, 1.0, rng)];
    for (int c : counts) CHECK(std::abs(c / double(rounds) - 1.0 / arms_count) <= 0.02);
}

TEST_CASE("cts_select_arm only reads coordinates inside the subset") {
    // Arm 1 has a large mean on feature 1, which is masked out.
    std::vector<ArmModel> arms(2, ArmModel(2));
    std::vector<double> boost{0.0, 1.0};
    for (int k = 0; k < 20; ++k) arms[1].update(restrict_context(boost, FeatureSubset{1}), 1);
    REQUIRE(arms[1].mean()[1] > 0.5);

    const std::vector<double> ctx{0.7, 1.0};
    Rng rng(3);
    CHECK(cts_select_arm(restrict_context(ctx, FeatureSubset{0}), arms, 0.0, rng) == 0);
    CHECK(cts_select_arm(restrict_context(ctx, FeatureSubset{1}), arms, 0.0, rng) == 1);
}

TEST_CASE("cts_select_arm dimension mismatch") {
    Rng rng(4);
    std::vector<ArmModel> arms(2, ArmModel(3));
    const std::vector<double> ctx{1.0, 0.0};
    CHECK_THROWS_AS(cts_select_arm(full_context(ctx), arms, 1.0, rng), DimensionMismatch);
}

TEST_CASE("cts_observe") {
    const auto cfg = config(2, 2);
    const std::vector<double> e0{1.0, 0.0};

    SUBCASE("reward 0 leaves every arm bit-identical") {
        std::vector<ArmModel> arms(2, ArmModel(2));
        // Give the arms some history first.
        const std::vector<double> c{0.3, 0.9};
        cts_observe(0, full_context(c), 1, arms, cfg);
        cts_observe(1, full_context(e0), 1, arms, cfg);
        const auto before = arms;
        cts_observe(0, full_context(c), 0, arms, cfg);
        cts_observe(1, full_context(e0), 0, arms, cfg);
        CHECK(arms == before);
    }

    SUBCASE("one success on a fresh arm") {
        std::vector<ArmModel> arms(2, ArmModel(2));
        cts_observe(0, full_context(e0), 1, arms, cfg);
        CHECK(arms[0].precision() == linalg::Matrix::from_rows({{2, 0}, {0, 1}}));
        CHECK(arms[0].response() == std::vector<double>{1.0, 0.0});
        CHECK(arms[0].mean()[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(arms[0].mean()[1] == 0.0);
        CHECK(arms[1] == ArmModel(2));
    }

    SUBCASE("update_on_failure moves the precision but not the response") {
        auto c2 = cfg;
        c2.update_on_failure = true;
        std::vector<ArmModel> arms(2, ArmModel(2));
        cts_observe(1, full_context(e0), 0, arms, c2);
        CHECK(arms[1].precision() == linalg::Matrix::from_rows({{2, 0}, {0, 1}}));
        CHECK(arms[1].response() == std::vector<double>{0.0, 0.0});
        CHECK(arms[1].mean() == std::vector<double>{0.0, 0.0});
    }

    SUBCASE("out of range arm") {
        std::vector<ArmModel> arms(2, ArmModel(2));
        CHECK_THROWS_AS(cts_observe(2, full_context(e0), 1, arms, cfg), ArmOutOfRange);
    }

    SUBCASE("context of the wrong size") {
        std::vector<ArmModel> arms(2, ArmModel(3));
        CHECK_THROWS_AS(cts_observe(0, full_context(e0), 1, arms, cfg), DimensionMismatch);
    }
}

TEST_CASE("ArmModel mean equals a direct solve after 500 successes") {
    constexpr std::size_t n = 6;
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ArmModel arm(n);
    oracle::Dense b = oracle::identity(n);
    std::vector<double> g(n, 0.0);
    for (int t = 0; t < 500; ++t) {
        const auto subset = random_subset(n, 3, rng);
        std::vector<double> full(n);
        for (double& v : full) v = u(rng);
        const auto rc = restrict_context(full, subset);
        arm.update(rc, 1);
        for (std::size_t i = 0; i < n; ++i) {
            g[i] += rc.values[i];
            for (std::size_t j = 0; j < n; ++j) b[i][j] += rc.values[i] * rc.values[j];
        }
    }
    const auto direct = oracle::solve(b, g);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(arm.mean()[i] - direct[i]) <= 1e-7);
        for (std::size_t j = 0; j < n; ++j) CHECK(arm.precision()(i, j) == doctest::Approx(b[i][j]));
    }
    CHECK(arm.response() == g);
}

TEST_CASE("restrict_context zeroes everything outside the subset") {
    const std::vector<double> ctx{0.1, 0.2, 0.3, 0.4};
    const auto rc = restrict_context(ctx, FeatureSubset{1, 3});
    CHECK(rc.values == std::vector<double>{0.0, 0.2, 0.0, 0.4});
    CHECK(rc.subset.size() == 2);
    CHECK_THROWS_AS(restrict_context(ctx, FeatureSubset{4}), DimensionMismatch);
    CHECK(full_context(ctx).subset == FeatureSubset{0, 1, 2, 3});
}

TEST_CASE("mab_step and mab_observe") {
    Rng rng(6);
    SUBCASE("strong arm dominates") {
        MabArmStats stats(2);
        for (int k = 0; k < 100; ++k) {
            stats.record(0, 1);
            stats.record(1, 0);
        }
        int first = 0;
        for (int t = 0; t < 10000; ++t) first += mab_step(stats, rng) == 0;
        CHECK(first / 10000.0 >= 0.99);
    }
    SUBCASE("fresh arms are chosen uniformly") {
        MabArmStats stats(4);
        std::vector<int> counts(4, 0);
        for (int t = 0; t < 100000; ++t) ++counts[mab_step(stats, rng)];
        for (int c : counts) CHECK(std::abs(c / 100000.0 - 0.25) <= 0.02);
    }
    SUBCASE("observe increments exactly one counter") {
        MabArmStats stats(3);
        mab_observe(2, 1, stats);
        CHECK(stats.successes()[2] == 1);
        CHECK(stats.failures()[2] == 0);
        mab_observe(2, 0, stats);
        CHECK(stats.failures()[2] == 1);
        CHECK(stats.successes()[0] == 0);
        CHECK_THROWS_AS(mab_observe(3, 1, stats), ArmOutOfRange);
    }
    SUBCASE("counters equal a recount of a random event log") {
        MabArmStats stats(5);
        std::uniform_int_distribution<std::size_t> arm(0, 4);
        std::bernoulli_distribution coin(0.3);
        std::vector<std::uint64_t> s(5, 0), f(5, 0);
        for (int t = 0; t < 10000; ++t) {
            const std::size_t k = arm(rng);
            const int r = coin(rng) ? 1 : 0;
            mab_observe(k, r, stats);
            (r ? s : f)[k] += 1;
        }
        for (std::size_t k = 0; k < 5; ++k) {
            CHECK(stats.successes()[k] == s[k]);
            CHECK(stats.failures()[k] == f[k]);
        }
    }
}
