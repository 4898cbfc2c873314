// Acceptance gates. One PASS/FAIL line per criterion.
//   acceptance [--only <name>] [--threads N]

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "kpz/grid_ensemble.hpp"
#include "kpz/landscape.hpp"
#include "kpz/lab/report.hpp"
#include "kpz/lab/scenarios.hpp"
#include "kpz/lpp_core.hpp"

using namespace kpz;
using namespace kpz::lab;
namespace fs = std::filesystem;

namespace {

int g_threads = 1;

struct Outcome {
    bool pass = true;
    std::string detail;

    void fail(const std::string& why) {
        pass = false;
        if (!detail.empty()) detail += "; ";
        detail += why;
    }
    void note(const std::string& what) {
        if (!detail.empty()) detail += "; ";
        detail += what;
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

// A pinned rule for every check whose name starts with `prefix`.
struct Rule {
    std::string prefix;
    Comparison cmp;
    double lo;
    double hi;
    std::size_t min_count;
};

bool holds(const Rule& r, double v) {
    if (std::isnan(v)) return false;
    switch (r.cmp) {
        case Comparison::AtMost: return v <= r.lo;
        case Comparison::Below: return v < r.lo;
        case Comparison::AtLeast: return v >= r.lo;
        case Comparison::Within: return v >= r.lo && v <= r.hi;
        case Comparison::Equal: return v == r.lo;
    }
    return false;
}

// Every check must be covered by a rule and satisfy it; every rule must see enough checks.
void judge(const ExperimentReport& rep, const std::vector<Rule>& rules, Outcome& out) {
    std::vector<std::size_t> seen(rules.size(), 0);
    for (const auto& c : rep.checks) {
        bool matched = false;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            if (c.name.rfind(rules[i].prefix, 0) != 0) continue;
            matched = true;
            ++seen[i];
            if (!holds(rules[i], c.observed)) out.fail(c.name + "=" + fmt(c.observed));
            break;
        }
        if (!matched) out.fail("unexpected check " + c.name);
    }
    for (std::size_t i = 0; i < rules.size(); ++i)
        if (seen[i] < rules[i].min_count)
            out.fail(rules[i].prefix + " seen " + std::to_string(seen[i]) + "/" + std::to_string(rules[i].min_count));
    out.note(std::to_string(rep.checks.size()) + " checks");
}

ExperimentReport run_with(const std::string& scenario, const std::vector<std::pair<std::string, std::string>>& kv) {
    ExperimentConfig cfg = default_config(scenario);
    for (const auto& [k, v] : kv) cfg.set(k, v);
    return run_experiment(cfg, g_threads);
}

Outcome oracle_equivalence() {
    Outcome out;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 500; ++i) {
        const RngKey key{101, i, 0};
        // shape drawn from a separate substream of the same key
        const RngKey shape = key.with_substream(1);
        std::vector<double> u(6);
        fill_normals(shape, 0, u);
        auto pick = [&](std::size_t j, std::size_t m) {
            const double p = 0.5 * std::erfc(-u[j] / std::sqrt(2.0));
            return std::min<std::size_t>(m - 1, static_cast<std::size_t>(p * static_cast<double>(m)));
        };
        const std::size_t k = 1 + pick(0, 4), count = 2 + pick(1, 7);
        const auto ens = sample_line_ensemble(make_grid(0.0, 0.5, static_cast<long long>(count)),
                                              static_cast<long long>(k), key);
        const std::size_t sl = 1 + pick(2, k), el = 1 + pick(3, sl);
        std::size_t a = pick(4, count), b = pick(5, count);
        if (a > b) std::swap(a, b);
        const double dp = last_passage(ens, {a, sl}, {b, el}).value;
        worst = std::max(worst, std::abs(dp - brute_force_last_passage(ens, {a, sl}, {b, el})));
    }
    if (!(worst <= 1e-9)) out.fail("max diff " + fmt(worst));
    out.note("500 instances, max diff " + fmt(worst));
    return out;
}

Outcome metric_composition() {
    Outcome out;
    double worst = 0.0;
    const Grid grid = make_grid(-5.0, 0.05, 200);
    for (std::uint64_t i = 0; i < 100; ++i) {
        const auto ens = sample_line_ensemble(grid, 20, RngKey{202, i, 0});
        for (std::size_t q = 0; q < 10; ++q) {
            const std::size_t a = (i * 7 + q * 13) % 100, b = 100 + (i * 11 + q * 17) % 100;
            const std::size_t sl = 20 - q % 3, el = 1 + q % 4, mid = el + (sl - el) / 2;
            worst = std::max(worst, composition_identity_gap(ens, {a, sl}, {b, el}, mid));
        }
    }
    out.note("ensembles gap " + fmt(worst));
    double worst_split = 0.0;
    const Grid xg = make_grid(-0.5, 0.25, 5);
    const std::vector<std::array<double, 3>> splits{{0.0, 0.5, 1.0}, {0.0, 0.2, 1.0}, {0.2, 0.7, 1.5}, {0.0, 1.0, 2.0}};
    for (std::size_t j = 0; j < splits.size(); ++j) {
        const auto& [r, s, t] = splits[j];
        const auto rep = composition_across_times(50, r, s, t, xg, xg, RngKey{203, j, 0}, 2);
        worst_split = std::max(worst_split, rep.gap);
    }
    out.note("splits gap " + fmt(worst_split));
    if (!(worst <= 1e-9)) out.fail("ensemble gap " + fmt(worst));
    if (!(worst_split <= 1e-9)) out.fail("split gap " + fmt(worst_split));
    return out;
}

Outcome geometry_suite() {
    Outcome out;
    const auto rep = run_with("geometry", {{"n", "50"}, {"replications", "200"}, {"seed", "7"}});
    judge(rep, {{"evolution_identity_violations", Comparison::Equal, 0, 0, 1},
                {"argmax_monotonicity_violations", Comparison::Equal, 0, 0, 1},
                {"semigroup_violations", Comparison::Equal, 0, 0, 1},
                {"direct_sweep_vs_slice_violations", Comparison::Equal, 0, 0, 1},
                {"ensemble_composition_violations", Comparison::Equal, 0, 0, 1},
                {"slice_composition_violations", Comparison::Equal, 0, 0, 1},
                {"geodesic_monotonicity_violations", Comparison::Equal, 0, 0, 1},
                {"path_value_violations", Comparison::Equal, 0, 0, 1},
                {"attractiveness_violations", Comparison::Equal, 0, 0, 1},
                {"argmax_comparison_violations", Comparison::Equal, 0, 0, 1},
                {"sandwich_consistency_violations", Comparison::Equal, 0, 0, 1},
                {"slice_kernel_violations", Comparison::Equal, 0, 0, 1},
                {"tie_fixture_rightmost_argmax", Comparison::Equal, 4, 4, 1}},
          out);
    return out;
}

Outcome stationarity() {
    Outcome out;
    const auto rep = run_with("stationarity", {{"initial", "brownian"},
                                               {"drift", "0"},
                                               {"n", "200"},
                                               {"t", "1"},
                                               {"replications", "1000"},
                                               {"seed", "7"},
                                               {"offsets", "0.25, 0.5, 1.0"}});
    judge(rep, {{"variance_ratio", Comparison::Within, 0.85, 1.15, 3}, {"ks_gaussian", Comparison::Below, 0.08, 0, 3}},
          out);
    return out;
}

Outcome local_brownian() {
    Outcome out;
    const auto rep = run_with("local-brownian", {{"initial", "narrow_wedge"},
                                                 {"epsilons", "0.1, 0.05"},
                                                 {"holder_beta", "0.45"},
                                                 {"mu_rule", "eps_power"},
                                                 {"sandwich", "true"}});
    judge(rep, {{"variance_ratio", Comparison::Within, 0.7, 1.3, 6},
                {"holder_nonfinite", Comparison::Equal, 0, 0, 2},
                {"holder_mean_over_median", Comparison::Below, 2.0, 0, 2},
                {"sandwich_event_frequency", Comparison::AtLeast, 0.9, 0, 2},
                {"sandwich_violations", Comparison::Equal, 0, 0, 2}},
          out);
    return out;
}

Outcome airy_sheet_gate() {
    Outcome out;
    const auto rep = run_with("airy-sheet", {{"epsilons", "0.1"}, {"n", "200"}, {"replications", "1000"}});
    judge(rep, {{"parabola_identity", Comparison::AtMost, 1e-12, 0, 1},
                {"variance_ratio", Comparison::Within, 0.7, 1.3, 24},
                {"max_abs_cross_correlation", Comparison::Below, 0.15, 0, 1}},
          out);
    return out;
}

Outcome long_time_coupling() {
    Outcome out;
    const auto rep = run_with("long-time-coupling", {{"a", "1"},
                                                     {"eta", "0.5"},
                                                     {"t", "1, 4, 16"},
                                                     {"mu_rule", "r_rule"},
                                                     {"replications", "500"},
                                                     {"band", "2"}});
    // the nonincreasing band is two paired stderr, recomputed from the report
    for (const auto& c : rep.checks)
        if (c.name.rfind("exceedance_nonincreasing", 0) == 0 && !(c.observed <= c.threshold && c.threshold >= 0.0))
            out.fail(c.name + "=" + fmt(c.observed) + " band " + fmt(c.threshold));
    judge(rep, {{"mean_I_t_vs_4_mu_a_in_stderr", Comparison::AtMost, 2.0, 0, 3},
                {"exceedance_at_eta_large", Comparison::AtMost, 0.0, 0, 3},
                {"exceedance_nonincreasing", Comparison::AtMost, 1.0, 0, 2},
                {"exceedance_final_minus_first", Comparison::Below, 0.0, 0, 1},
                {"coupling_bound_violations", Comparison::Equal, 0, 0, 1}},
          out);
    return out;
}

Outcome invariance_123() {
    Outcome out;
    const auto rep = run_with("invariance-123", {{"gammas", "1, 2"}, {"replications", "1000"}});
    judge(rep, {{"ks_direct_vs_identity gamma=1", Comparison::Below, 0.05, 0, 1},
                {"ks_direct_vs_rescaled gamma=2", Comparison::Below, 0.12, 0, 1}},
          out);
    return out;
}

Outcome argmax_uniqueness() {
    Outcome out;
    const auto rep = run_with("argmax-uniqueness", {{"replications", "2000"}});
    judge(rep, {{"parabola_slope_abs", Comparison::AtMost, 1e-12, 0, 1},
                {"parabola_ez_abs", Comparison::AtMost, 1e-12, 0, 1},
                {"two_peak_kink", Comparison::AtLeast, 1.5, 0, 1},
                {"slope_minus_ez_in_stderr brownian_minus_parabola", Comparison::AtMost, 2.0, 0, 1},
                {"slope_minus_ez_in_stderr", Comparison::AtMost, 2.0, 0, 0},
                {"convexity_violations", Comparison::Equal, 0, 0, 1}},
          out);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome reproducibility() {
    Outcome out;
    const fs::path root = fs::temp_directory_path() / "kpz_acceptance_repro";
    fs::remove_all(root);
    const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> runs{
        {"geometry", {}},
        {"argmax-uniqueness", {{"replications", "400"}}},
        {"stationarity", {{"n", "50"}, {"replications", "100"}, {"refine", "4"}}},
        {"invariance-123", {{"n", "50"}, {"replications", "100"}, {"refine", "4"}}},
    };
    for (const auto& [name, kv] : runs) {
        ExperimentConfig cfg = default_config(name);
        for (const auto& [k, v] : kv) cfg.set(k, v);
        std::string first;
        for (int threads : {1, 2, 8}) {
            const fs::path dir = root / (name + "_" + std::to_string(threads));
            write_report(run_experiment(cfg, threads), dir.string(), "csv", threads);
            const auto text = slurp(dir / "report.json");
            if (threads == 1)
                first = text;
            else if (text != first)
                out.fail(name + " differs at " + std::to_string(threads) + " threads");
        }
    }
    out.note(std::to_string(runs.size()) + " scenarios at 1, 2, 8 threads");
    fs::remove_all(root);
    return out;
}

struct Criterion {
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance gates"};
    std::string only;
    app.add_option("--only", only, "run a single criterion");
    app.add_option("--threads", g_threads, "worker threads")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);
    if (g_threads <= 0) g_threads = 1;

    const std::vector<Criterion> all{
        {"oracle_equivalence", 5, oracle_equivalence},
        {"metric_composition", 30, metric_composition},
        {"geometry_suite", 120, geometry_suite},
        {"stationarity", 600, stationarity},
        {"local_brownian", 900, local_brownian},
        {"airy_sheet", 900, airy_sheet_gate},
        {"long_time_coupling", 1200, long_time_coupling},
        {"invariance_123", 600, invariance_123},
        {"argmax_uniqueness", 300, argmax_uniqueness},
        {"reproducibility", 600, reproducibility},
    };

    bool ok = true, found = false;
    for (const auto& c : all) {
        if (!only.empty() && c.name != only) continue;
        found = true;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (secs > c.budget_seconds) o.fail("over budget " + fmt(c.budget_seconds) + "s");
        std::printf("%s %s (%.1fs) %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs, o.detail.c_str());
        std::fflush(stdout);
        ok = ok && o.pass;
    }
    if (!found) {
        std::fprintf(stderr, "unknown criterion: %s\n", only.c_str());
        return 2;
    }
    return ok ? 0 : 1;
}
