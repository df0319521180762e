#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cbrc/cli.hpp"
#include "cbrc/errors.hpp"
#include "oracles.hpp"

using namespace cbrc;
using namespace cbrc::cli;

namespace {

namespace fs = std::filesystem;

const fs::path kFixtures = CBRC_FIXTURE_DIR;

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "cbrc");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

RunConfig parse(const std::vector<std::string>& args) {
    std::ostringstream sink;
    auto cfg = parse_run_config(args, sink);
    REQUIRE(cfg.has_value());
    return *cfg;
}

// A fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / name) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }

    fs::path write(const std::string& file, const std::string& text) const {
        std::ofstream(dir / file) << text;
        return dir / file;
    }
    fs::path synthetic_csv(const std::string& file) const {
        const auto data = oracle::synthetic(200, 6, 3, 3, 5);
        std::ostringstream csv;
        for (std::size_t i = 0; i < data.labels.size(); ++i) {
            for (std::size_t f = 0; f < data.num_features; ++f) {
                csv << data.features[i * data.num_features + f] << ',';
            }
            csv << data.labels[i] << '\n';
        }
        return write(file, csv.str());
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("run writes a results file") {
    Scratch s("cbrc_cli_happy");
    const auto csv = s.synthetic_csv("syn.csv");
    const auto r = run({"run", "--dataset", csv.string(), "--policy", "mab,tsrc,random-ei",
                        "--sparsity", "0.5", "--seeds", "1,2", "--horizon", "300", "--out",
                        (s.dir / "out").string(), "--threads", "2"});
    CHECK(r.code == kSuccess);
    CHECK(r.err.empty());
    CHECK(r.out.find(" ± ") != std::string::npos);
    const auto rows = parse_results_csv(slurp(s.dir / "out" / "results.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].dataset == "syn");
    CHECK(rows[0].policy == "mab");
    CHECK(rows[2].policy == "random-ei");
    CHECK(rows[1].cells == 2);
    CHECK(rows[1].horizon == 300);
}

TEST_CASE("curves are dumped on request") {
    Scratch s("cbrc_cli_curves");
    const auto csv = s.synthetic_csv("syn.csv");
    const auto r = run({"run", "--dataset", csv.string(), "--policy", "tsrc", "--sparsity",
                        "0.5", "--horizon", "50", "--out", (s.dir / "o").string(),
                        "--dump-curves", "--curve-stride", "10"});
    REQUIRE(r.code == kSuccess);
    CHECK(fs::exists(s.dir / "o" / "curves" / "syn__tsrc__sp50__seed1.csv"));
}

TEST_CASE("configuration errors exit with 1") {
    Scratch s("cbrc_cli_errors");
    const auto csv = s.synthetic_csv("syn.csv").string();

    SUBCASE("wtsrc without a window") {
        const auto r = run({"run", "--dataset", csv, "--policy", "wtsrc"});
        CHECK(r.code == kConfigError);
        CHECK(r.err.find("window") != std::string::npos);
    }
    SUBCASE("unknown policy lists the valid ones") {
        const auto r = run({"run", "--dataset", csv, "--policy", "nosuch"});
        CHECK(r.code == kConfigError);
        CHECK(r.err.find("nosuch") != std::string::npos);
        CHECK(r.err.find(policy_names()) != std::string::npos);
    }
    SUBCASE("unknown flag") {
        CHECK(run({"run", "--dataset", csv, "--policy", "mab", "--bogus"}).code == kConfigError);
    }
    SUBCASE("missing required flags") {
        CHECK(run({"run", "--policy", "mab"}).code == kConfigError);
        CHECK(run({"run", "--dataset", csv}).code == kConfigError);
    }
    SUBCASE("unknown subcommand") { CHECK(run({"walk"}).code == kConfigError); }
    SUBCASE("sparsity out of range") {
        CHECK(run({"run", "--dataset", csv, "--policy", "mab", "--sparsity", "1.0"}).code ==
              kConfigError);
    }
    SUBCASE("scale and confidence triple are exclusive") {
        const auto r = run({"run", "--dataset", csv, "--policy", "tsrc", "--scale", "0.1", "--R",
                            "1", "--epsilon", "0.5", "--gamma", "0.1"});
        CHECK(r.code == kConfigError);
        CHECK(r.err.find("mutually exclusive") != std::string::npos);
    }
    SUBCASE("incomplete confidence triple") {
        CHECK(run({"run", "--dataset", csv, "--policy", "tsrc", "--R", "1"}).code ==
              kConfigError);
    }
    SUBCASE("gamma = 1 is rejected") {
        CHECK(run({"run", "--dataset", csv, "--policy", "tsrc", "--R", "1", "--epsilon", "1",
                   "--gamma", "1"})
                  .code == kConfigError);
    }
    SUBCASE("unknown preset") {
        CHECK(run({"run", "--dataset", csv, "--policy", "mab", "--preset", "fast"}).code ==
              kConfigError);
    }
}

TEST_CASE("runtime errors exit with 2") {
    Scratch s("cbrc_cli_runtime");
    CHECK(run({"run", "--dataset", (s.dir / "missing.csv").string(), "--policy", "mab"}).code ==
          kRuntimeError);
    const auto r = run({"run", "--dataset", (kFixtures / "bad_token.csv").string(), "--policy",
                        "mab", "--out", (s.dir / "o").string()});
    CHECK(r.code == kRuntimeError);
    CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("help lists every flag with its default") {
    std::ostringstream out;
    CHECK_FALSE(parse_run_config({"--help"}, out).has_value());
    const auto help = out.str();
    for (const char* flag :
         {"--config", "--dataset", "--label-col", "--header", "--max-instances", "--policy",
          "--sparsity", "--horizon", "--drift-period", "--preset", "--window", "--scale", "--R",
          "--epsilon", "--gamma", "--prior-success", "--prior-failure", "--update-on-failure",
          "--seed", "--out", "--threads", "--dump-curves", "--curve-stride"}) {
        CHECK_MESSAGE(help.find(flag) != std::string::npos, flag);
    }
    for (const char* value : {"0.95,0.75,0.5,0.25", "0.25", "results", "unset", "[off]"}) {
        CHECK_MESSAGE(help.find(value) != std::string::npos, value);
    }
    const auto r = run({"run", "--help"});
    CHECK(r.code == kSuccess);
    CHECK(r.out.find("--policy") != std::string::npos);
}

TEST_CASE("config file values yield to command-line flags") {
    Scratch s("cbrc_cli_config");
    const auto cfg_path = s.write("run.conf",
                                  "dataset = data.csv\n"
                                  "policy = tsrc,mab\n"
                                  "sparsity = 0.5,0.25\n"
                                  "horizon = 1234\n"
                                  "scale = 0.5\n"
                                  "seeds = 3,4,5\n"
                                  "header = true\n");

    SUBCASE("file only") {
        const auto c = parse({"--config", cfg_path.string()});
        CHECK(c.dataset == "data.csv");
        CHECK(c.policies == std::vector<PolicyKind>{PolicyKind::Tsrc, PolicyKind::Mab});
        CHECK(c.sparsities == std::vector<double>{0.5, 0.25});
        CHECK(c.horizon == 1234);
        CHECK(c.cts_scale == 0.5);
        CHECK(c.seeds == std::vector<std::uint64_t>{3, 4, 5});
        CHECK(c.header);
    }
    SUBCASE("flags win") {
        const auto c = parse({"--config", cfg_path.string(), "--horizon", "99", "--policy",
                              "random-fix", "--scale", "0.1", "--seeds", "7"});
        CHECK(c.horizon == 99);
        CHECK(c.policies == std::vector<PolicyKind>{PolicyKind::RandomFix});
        CHECK(c.cts_scale == 0.1);
        CHECK(c.seeds == std::vector<std::uint64_t>{7});
        // Untouched keys still come from the file.
        CHECK(c.sparsities == std::vector<double>{0.5, 0.25});
        CHECK(c.dataset == "data.csv");
    }
    SUBCASE("flag before --config also wins") {
        const auto c = parse({"--horizon", "5", "--config", cfg_path.string()});
        CHECK(c.horizon == 5);
    }
    SUBCASE("bracketed lists") {
        const auto p = s.write("list.conf", "dataset = x.csv\npolicy = [mab, tsrc]\n");
        const auto c = parse({"--config", p.string()});
        CHECK(c.policies == std::vector<PolicyKind>{PolicyKind::Mab, PolicyKind::Tsrc});
    }
    SUBCASE("missing config file") {
        std::ostringstream sink;
        CHECK_THROWS(parse_run_config({"--config", (s.dir / "nope.conf").string()}, sink));
    }
}

TEST_CASE("defaults and presets") {
    SUBCASE("defaults") {
        const auto c = parse({"--dataset", "d.csv", "--policy", "mab"});
        CHECK(c.sparsities == std::vector<double>{0.95, 0.75, 0.5, 0.25});
        CHECK(c.seeds == std::vector<std::uint64_t>{1});
        CHECK(c.horizon == 0);
        CHECK(c.drift_period == 0);
        CHECK(c.cts_scale == 0.25);
        CHECK(c.label_column == -1);
        CHECK_FALSE(c.confidence.has_value());
        CHECK(c.threads >= 1);
    }
    SUBCASE("desk preset") {
        const auto c = parse({"--dataset", "d.csv", "--policy", "mab", "--preset",
                              "desk-nonstationary"});
        CHECK(c.horizon == 30000);
        CHECK(c.drift_period == 5000);
    }
    SUBCASE("preset yields to explicit flags") {
        const auto c = parse({"--dataset", "d.csv", "--policy", "mab", "--preset",
                              "nonstationary", "--horizon", "10"});
        CHECK(c.horizon == 10);
        CHECK(c.drift_period == 500000);
    }
    SUBCASE("confidence triple") {
        const auto c = parse({"--dataset", "d.csv", "--policy", "tsrc", "--R", "1", "--epsilon",
                              "0.5", "--gamma", "0.1"});
        REQUIRE(c.confidence.has_value());
        CHECK(c.confidence->r == 1.0);
        CHECK(c.confidence->epsilon == 0.5);
        CHECK(c.confidence->gamma == 0.1);
    }
}

TEST_CASE("make_spec") {
    const auto data = oracle::synthetic(40, 8, 2, 2, 1);
    const auto ds = std::make_shared<const Dataset>(
        build_dataset("d", data.features, data.num_features, data.labels));
    RunConfig c;
    c.policies = {PolicyKind::Tsrc, PolicyKind::Wtsrc};
    c.window = 17;

    auto spec = make_spec(c, ds);
    CHECK(spec.horizon == 400);
    CHECK_FALSE(spec.drift.has_value());
    CHECK(spec.params.window == 17u);

    c.drift_period = 100;
    spec = make_spec(c, ds);
    CHECK(spec.horizon == 3000000);
    REQUIRE(spec.drift.has_value());
    CHECK(spec.drift->period == 100);

    c.confidence = ConfidenceParams{1.0, 1.0, std::exp(-1.0)};
    spec = make_spec(c, ds);
    // 50% of 8 features gives d = 4.
    CHECK(cell_config(spec, {PolicyKind::Tsrc, 0.5, 1}).cts_scale ==
          doctest::Approx(std::sqrt(24.0 * 4.0)));
}

TEST_CASE("relative dataset paths resolve against the data root") {
    Scratch s("cbrc_cli_root");
    s.synthetic_csv("rooted.csv");
    ::setenv(kDataRootEnv, s.dir.c_str(), 1);
    CHECK(resolve_dataset_path("rooted.csv") == s.dir / "rooted.csv");
    CHECK(resolve_dataset_path("/abs/x.csv") == fs::path("/abs/x.csv"));
    const auto r = run({"run", "--dataset", "rooted.csv", "--policy", "mab", "--sparsity", "0.5",
                        "--horizon", "20", "--out", (s.dir / "o").string()});
    CHECK(r.code == kSuccess);
    ::unsetenv(kDataRootEnv);
    CHECK(resolve_dataset_path("rooted.csv") == fs::path("rooted.csv"));
}
