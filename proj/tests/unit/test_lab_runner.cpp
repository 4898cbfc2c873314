#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "kpz/lab/cli.hpp"
#include "kpz/lab/config.hpp"
#include "kpz/lab/report.hpp"
#include "kpz/lab/scenarios.hpp"

using namespace kpz;
using namespace kpz::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kpzlab_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

// Runs the CLI with stdout and stderr captured.
int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
    args.insert(args.begin(), "kpzlab");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream cap, err;
    auto* old_out = std::cout.rdbuf(cap.rdbuf());
    auto* old_err = std::cerr.rdbuf(err.rdbuf());
    const int code = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    if (out) *out = cap.str() + err.str();
    return code;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("key value files") {
    std::istringstream in("# comment\nGrid-Step = 0.1   # trailing\n\n  seed=9\nepsilons = 0.1, 0.05\n");
    const auto kv = KeyValueFile::parse(in, "inline");
    CHECK(kv.entries().at("grid_step") == "0.1");
    CHECK(kv.entries().at("seed") == "9");
    CHECK(kv.entries().size() == 3);

    std::istringstream broken("n = 5\nthis line has no equals sign\n");
    CHECK_CODE(KeyValueFile::parse(broken, "inline"), ErrorCode::ConfigInvalid);
    std::istringstream nokey(" = 5\n");
    CHECK_CODE(KeyValueFile::parse(nokey, "inline"), ErrorCode::ConfigInvalid);
    CHECK_CODE(KeyValueFile::load("/nonexistent/file.conf"), ErrorCode::ConfigInvalid);
    CHECK(normalise_key(" Z-Halfwidth ") == "z_halfwidth");
}

TEST_CASE("typed overrides") {
    ExperimentConfig cfg = default_config("local-brownian");
    std::istringstream in("seed = 99\nn = 64\nepsilons = 0.2, 0.1\nsandwich = false\nrefine = 3\ninitial = flat\n");
    cfg.apply(KeyValueFile::parse(in, "inline"));
    CHECK(cfg.seed() == 99u);
    CHECK(cfg.num("n") == 64.0);
    CHECK(cfg.list("epsilons") == std::vector<double>{0.2, 0.1});
    CHECK_FALSE(cfg.flag("sandwich"));
    CHECK(cfg.integer("refine") == 3);
    CHECK(cfg.str("initial") == "flat");
    CHECK(cfg.params()["seed"].is_number_unsigned());

    CHECK_CODE(cfg.set("no_such_key", "1"), ErrorCode::ConfigInvalid);
    CHECK_CODE(cfg.set("n", "lots"), ErrorCode::ConfigInvalid);
    CHECK_CODE(cfg.set("refine", "2.5"), ErrorCode::ConfigInvalid);
    CHECK_CODE(cfg.set("seed", "-1"), ErrorCode::ConfigInvalid);
    CHECK_CODE(cfg.set("sandwich", "maybe"), ErrorCode::ConfigInvalid);
    CHECK_CODE(cfg.set("epsilons", ","), ErrorCode::ConfigInvalid);
    cfg.set("grid_step", "-1");
    CHECK_CODE(cfg.positive("grid_step"), ErrorCode::ConfigInvalid);
    CHECK_CODE(default_config("nope"), ErrorCode::ConfigInvalid);
}

TEST_CASE("mu rules") {
    ExperimentConfig cfg = default_config("local-brownian");
    CHECK(cfg.mu_rule() == MuRule::EpsPower);
    CHECK(mu_for(cfg, 0.0625, 1.0, 1.0) == doctest::Approx(2.0));
    cfg.set("mu_rule", "fixed");
    cfg.set("mu", "0.7");
    CHECK(mu_for(cfg, 0.1, 1.0, 1.0) == 0.7);
    cfg.set("mu_rule", "r_rule");
    // r = (t^{2/3}/a)^{1/4}, mu = r / (4 t^{1/3})
    const double t = 8.0, a = 1.0, r = std::pow(4.0, 0.25);
    CHECK(mu_for(cfg, 0.1, t, a) == doctest::Approx(r / 8.0));
    cfg.set("mu_rule", "other");
    CHECK_CODE(cfg.mu_rule(), ErrorCode::ConfigInvalid);
}

TEST_CASE("every scenario is registered with the common keys") {
    const std::vector<std::string> names{"stationarity",       "local-brownian", "airy-sheet",       "long-time-coupling",
                                         "invariance-123",     "geometry",       "argmax-uniqueness"};
    CHECK(scenarios().size() == names.size());
    for (const auto& name : names) {
        REQUIRE(find_scenario(name) != nullptr);
        const auto cfg = default_config(name);
        for (const char* key : {"seed", "n", "grid_step", "halfwidth", "replications"}) CHECK(cfg.params().contains(key));
    }
    CHECK(find_scenario("missing") == nullptr);
}

TEST_CASE("check records") {
    CHECK(check_at_most("x", 1.0, 1.0).pass);
    CHECK_FALSE(check_below("x", 1.0, 1.0).pass);
    CHECK(check_at_least("x", 0.9, 0.9).pass);
    CHECK(check_within("x", 1.3, 0.7, 1.3).pass);
    CHECK_FALSE(check_within("x", 0.69, 0.7, 1.3).pass);
    CHECK_FALSE(check_within("x", NAN, 0.7, 1.3).pass);
    CHECK(check_equal("x", 0.0, 0.0).exact);
    CHECK_FALSE(check_at_most("x", 0.1, 0.2).exact);
}

TEST_CASE("geometry report is byte identical across runs and threads") {
    const ExperimentConfig cfg = default_config("geometry");
    const auto one = run_experiment(cfg, 1).to_json().dump(2);
    CHECK(one == run_experiment(cfg, 1).to_json().dump(2));
    CHECK(one == run_experiment(cfg, 2).to_json().dump(2));
    CHECK(one == run_experiment(cfg, 8).to_json().dump(2));
    const auto j = nlohmann::json::parse(one);
    CHECK(j["verdict"] == "PASS");
    CHECK(j["config"]["seed"] == 7);
    CHECK(j["seed_record"]["generator"] == "philox4x64-10");
    CHECK_FALSE(j.contains("wall_clock_seconds"));
    for (const auto& c : j["checks"]) CHECK(c["threshold_kind"] == "exact");
}

TEST_CASE("statistical scenario is thread invariant") {
    ExperimentConfig cfg = default_config("stationarity");
    cfg.set("n", "30");
    cfg.set("replications", "40");
    cfg.set("refine", "2");
    const auto one = run_experiment(cfg, 1).to_json().dump(2);
    CHECK(one == run_experiment(cfg, 3).to_json().dump(2));
    CHECK(one == run_experiment(cfg, 8).to_json().dump(2));
}

TEST_CASE("report artifacts") {
    ExperimentConfig cfg = default_config("stationarity");
    cfg.set("n", "30");
    cfg.set("replications", "40");
    cfg.set("refine", "2");
    const auto rep = run_experiment(cfg, 2);
    const fs::path dir = scratch("artifacts");
    write_report(rep, dir.string(), "csv", 2);
    CHECK(fs::exists(dir / "report.json"));
    CHECK(fs::exists(dir / "timing.json"));
    const auto j = nlohmann::json::parse(slurp(dir / "report.json"));
    REQUIRE(j["artifacts"].is_array());
    REQUIRE(!j["artifacts"].empty());
    for (const auto& a : j["artifacts"]) CHECK(fs::exists(dir / a.get<std::string>()));
    const auto timing = nlohmann::json::parse(slurp(dir / "timing.json"));
    CHECK(timing["threads"] == 2);
    CHECK(timing["wall_clock_seconds"].get<double>() >= 0.0);

    for (const auto& p : rep.plots) {
        const auto svg = render_svg(p);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
    }
    const fs::path first_csv = dir / j["artifacts"][0].get<std::string>();
    if (first_csv.extension() == ".csv") {
        const auto text = slurp(first_csv);
        CHECK(text.find(',') < text.find('\n'));
    }
}

TEST_CASE("cli exit codes") {
    std::string out;
    CHECK(run_cli({"list-scenarios"}, &out) == 0);
    CHECK(out.find("geometry") != std::string::npos);
    CHECK(run_cli({"experiment", "no-such-scenario"}, &out) == 2);
    CHECK(run_cli({"experiment", "geometry", "--bogus-flag"}, &out) == 2);
    CHECK(run_cli({}, &out) == 2);
    CHECK(run_cli({"--help"}, &out) == 0);
    CHECK(run_cli({"experiment", "geometry", "--seed", "x1"}, &out) == 2);
    CHECK(run_cli({"experiment", "geometry", "--config", "/nonexistent.conf"}, &out) == 2);
    CHECK(run_cli({"report", "/nonexistent/dir"}, &out) == 2);
}

TEST_CASE("cli experiment, report and single-shot commands") {
    const fs::path dir = scratch("cli");
    const fs::path conf = dir / "geo.conf";
    std::ofstream(conf) << "# smaller run\nreplications = 20\n";
    std::string out;
    const auto a = (dir / "a").string(), b = (dir / "b").string();
    CHECK(run_cli({"experiment", "geometry", "--seed", "7", "--config", conf.string(), "--out", a, "--threads", "1"},
                  &out) == 0);
    CHECK(run_cli({"experiment", "geometry", "--seed", "7", "--config", conf.string(), "--out", b, "--threads", "2"},
                  &out) == 0);
    CHECK(slurp(fs::path(a) / "report.json") == slurp(fs::path(b) / "report.json"));
    CHECK(nlohmann::json::parse(slurp(fs::path(a) / "report.json"))["config"]["replications"] == 20);

    CHECK(run_cli({"report", a}, &out) == 0);
    CHECK(out.find("overall: PASS") != std::string::npos);
    CHECK(out.find("tie_fixture_rightmost_argmax") != std::string::npos);

    // a gate that cannot pass gives exit 1
    const fs::path strict = dir / "strict.conf";
    std::ofstream(strict) << "replications = 100\nn = 30\nrefine = 2\nks_threshold = 0.0001\n";
    CHECK(run_cli({"experiment", "stationarity", "--config", strict.string(), "--out", (dir / "s").string()}, &out) ==
          1);
    CHECK(run_cli({"report", (dir / "s").string()}, &out) == 1);

    const auto land = (dir / "land").string();
    CHECK(run_cli({"sample-landscape", "--n", "20", "--grid-step", "0.5", "--out", land}, &out) == 0);
    CHECK(fs::exists(fs::path(land) / "slice.csv"));
    CHECK(run_cli({"sample-landscape", "--n", "20", "--grid-step", "0.5", "--format", "json", "--out", land}, &out) ==
          0);
    CHECK(nlohmann::json::parse(slurp(fs::path(land) / "slice.json"))["values"].size() == 5);

    const auto evo = (dir / "evo").string();
    CHECK(run_cli({"evolve", "--n", "20", "--grid-step", "0.1", "--out", evo}, &out) == 0);
    CHECK(slurp(fs::path(evo) / "profile.csv").find("x,h_t,Z_t") != std::string::npos);
    CHECK(run_cli({"evolve", "--format", "yaml", "--out", evo}, &out) == 2);
}
