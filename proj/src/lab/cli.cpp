#include "kpz/lab/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "kpz/error.hpp"
#include "kpz/kpz_semigroup.hpp"
#include "kpz/landscape.hpp"
#include "kpz/lab/config.hpp"
#include "kpz/lab/report.hpp"
#include "kpz/lab/scenarios.hpp"

namespace kpz::lab {

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
    std::string config, seed, n, grid_step, halfwidth, replications, out;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string format = "csv";
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--config", f.config, "key = value config file");
    app->add_option("--seed", f.seed, "master seed (u64)");
    app->add_option("--n", f.n, "LPP scaling parameter");
    app->add_option("--grid-step", f.grid_step, "spatial grid step");
    app->add_option("--halfwidth", f.halfwidth, "spatial halfwidth (0 = a + 4 t^(2/3))");
    app->add_option("--replications", f.replications, "Monte Carlo replications");
    app->add_option("--out", f.out, "output directory");
    app->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--format", f.format, "sample format")->check(CLI::IsMember({"json", "csv"}));
}

void apply_common(ExperimentConfig& cfg, const CommonFlags& f) {
    if (!f.config.empty()) cfg.apply(KeyValueFile::load(f.config));
    const std::pair<const char*, const std::string*> flags[] = {{"seed", &f.seed},
                                                                {"n", &f.n},
                                                                {"grid_step", &f.grid_step},
                                                                {"halfwidth", &f.halfwidth},
                                                                {"replications", &f.replications}};
    for (const auto& [key, value] : flags) {
        if (!value->empty()) cfg.set(key, *value);
    }
}

std::string out_dir(const CommonFlags& f, const std::string& name) {
    return f.out.empty() ? (fs::path("runs") / name).string() : f.out;
}

Grid centred(double step, double half) {
    const auto m = static_cast<long long>(std::ceil(half / step - 1e-9));
    return make_grid(-static_cast<double>(m) * step, step, 2 * std::max(1LL, m) + 1);
}

int cmd_sample_landscape(const CommonFlags& f) {
    ExperimentConfig cfg("sample-landscape", sample_landscape_defaults());
    apply_common(cfg, f);
    const Grid g = centred(cfg.positive("grid_step"), cfg.positive("halfwidth"));
    const auto refine = cfg.integer("refine");
    if (refine < 1) throw Error(ErrorCode::ConfigInvalid, "refine must be at least 1");
    const auto slice = sample_landscape_slice(cfg.positive("n"), cfg.num("s"), cfg.num("t"), g, g,
                                              RngKey{cfg.seed(), 0, 0}, static_cast<int>(refine));
    const fs::path dir(out_dir(f, "sample-landscape"));
    fs::create_directories(dir);
    const fs::path file = dir / (f.format == "json" ? "slice.json" : "slice.csv");
    std::ofstream os(file);
    if (f.format == "json") {
        os << to_json(slice).dump(1) << "\n";
    } else {
        write_csv(os, slice);
    }
    std::cout << "wrote " << file.string() << " (" << g.count << " x " << g.count << ")\n";
    return 0;
}

int cmd_evolve(const CommonFlags& f) {
    ExperimentConfig cfg("evolve", evolve_defaults());
    apply_common(cfg, f);
    const double n = cfg.positive("n"), t = cfg.positive("t"), a = cfg.positive("a"), gs = cfg.positive("grid_step");
    const double hw = cfg.num("halfwidth") > 0 ? cfg.num("halfwidth") : a + 4.0 * std::pow(t, 2.0 / 3.0);
    const auto refine = cfg.integer("refine");
    if (refine < 1) throw Error(ErrorCode::ConfigInvalid, "refine must be at least 1");
    const Grid zs = centred(gs, std::max(hw, std::abs(cfg.num("x0"))));
    const Grid xs = centred(gs, a);
    const RngKey key{cfg.seed(), 0, 0};
    CoupledLandscape land(n, 0.0, t, zs.front(), zs.back(), gs / static_cast<double>(refine), key, false);
    auto init = make_initial(initial_from_config(cfg, key.with_substream(1)), zs);
    auto prof = evolve_direct(land, init.realized, 0.0, {t}, xs)[0];
    prof.source = describe(init.spec) + " | " + prof.source;

    const fs::path dir(out_dir(f, "evolve"));
    fs::create_directories(dir);
    const fs::path file = dir / (f.format == "json" ? "profile.json" : "profile.csv");
    std::ofstream os(file);
    if (f.format == "json") {
        nlohmann::json j;
        j["config"] = cfg.params();
        j["source"] = prof.source;
        j["x"] = nlohmann::json::array();
        j["h_t"] = nlohmann::json::array();
        j["Z_t"] = nlohmann::json::array();
        for (std::size_t i = 0; i < xs.count; ++i) {
            j["x"].push_back(xs.point(i));
            j["h_t"].push_back(prof.h_t.values()[i].value());
            j["Z_t"].push_back(zs.point(prof.argmax[i]));
        }
        os << j.dump(1) << "\n";
    } else {
        write_csv(os, prof, zs);
    }
    std::cout << "wrote " << file.string() << " (" << describe(init.spec) << ", t=" << t << ")\n";
    return 0;
}

int cmd_experiment(const std::string& scenario, const CommonFlags& f) {
    ExperimentConfig cfg = default_config(scenario);
    apply_common(cfg, f);
    const auto rep = run_experiment(cfg, f.threads);
    const std::string dir = out_dir(f, scenario);
    write_report(rep, dir, f.format, f.threads);
    print_summary(rep.to_json(f.format), std::cout);
    std::cout << "report: " << (fs::path(dir) / "report.json").string() << "\n";
    return rep.passed() ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    const fs::path file = fs::path(dir) / "report.json";
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "no report.json in " + dir);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("unreadable report: ") + e.what());
    }
    return print_summary(j, std::cout) ? 0 : 1;
}

int cmd_list() {
    for (const auto& s : scenarios()) std::cout << s.name << "\t" << s.summary << "\n";
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"kpzlab: Brownian LPP experiments on the KPZ fixed point"};
    app.require_subcommand(1);

    CommonFlags f_land, f_evolve, f_exp;
    auto* land = app.add_subcommand("sample-landscape", "sample one landscape slice on a square grid");
    add_common(land, f_land);
    auto* evo = app.add_subcommand("evolve", "evolve one initial profile and write h_t with argmax locations");
    add_common(evo, f_evolve);
    std::string scenario;
    auto* exp = app.add_subcommand("experiment", "run a registered scenario and write its report");
    exp->add_option("scenario", scenario, "scenario name (see list-scenarios)")->required();
    add_common(exp, f_exp);
    std::string report_dir;
    auto* rep = app.add_subcommand("report", "print the summary table of a finished run");
    rep->add_option("dir", report_dir, "run directory")->required();
    auto* list = app.add_subcommand("list-scenarios", "list registered scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*land) return cmd_sample_landscape(f_land);
        if (*evo) return cmd_evolve(f_evolve);
        if (*exp) return cmd_experiment(scenario, f_exp);
        if (*rep) return cmd_report(report_dir);
        if (*list) return cmd_list();
    } catch (const Error& e) {
        std::cerr << "kpzlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "kpzlab: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace kpz::lab
