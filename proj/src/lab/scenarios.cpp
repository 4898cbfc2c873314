#include "kpz/lab/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kpz/error.hpp"
#include "kpz/landscape.hpp"
#include "kpz/lpp_core.hpp"
#include "kpz/parallel.hpp"
#include "kpz/philox.hpp"
#include "kpz/stats.hpp"

namespace kpz::lab {

namespace {

using json = nlohmann::json;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

std::string tag(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

// Symmetric grid -m*step .. m*step covering [-half, half].
Grid centred_grid(double step, double half) {
    const auto m = static_cast<long long>(std::ceil(half / step - 1e-9));
    return make_grid(-static_cast<double>(m) * step, step, 2 * std::max(1LL, m) + 1);
}

// Number of grid steps in `value`; the value must be a multiple of `step`.
std::size_t steps_in(double value, double step, const std::string& what) {
    const double q = value / step;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-7 || r < 0) bad(what + " must be a nonnegative multiple of the grid step");
    return static_cast<std::size_t>(r);
}

std::size_t replications_of(const ExperimentConfig& cfg, std::size_t minimum = 2) {
    const long long r = cfg.integer("replications");
    if (r < static_cast<long long>(minimum)) bad("replications must be at least " + std::to_string(minimum));
    return static_cast<std::size_t>(r);
}

int refine_of(const ExperimentConfig& cfg, const std::string& key = "refine") {
    const long long r = cfg.integer(key);
    if (r < 1) bad(key + " must be at least 1");
    return static_cast<int>(r);
}

double auto_halfwidth(const ExperimentConfig& cfg, double a, double t) {
    const double h = cfg.num("halfwidth");
    if (h < 0) bad("halfwidth must be nonnegative (0 selects a + 4 t^(2/3))");
    return h > 0 ? h : a + 4.0 * std::pow(t, 2.0 / 3.0);
}

std::vector<double> positive_list(const ExperimentConfig& cfg, const std::string& key) {
    auto v = cfg.list(key);
    if (v.empty()) bad(key + " must not be empty");
    for (double x : v) {
        if (!(x > 0)) bad(key + " entries must be positive");
    }
    return v;
}

Estimate est(std::string name, double value, double se, std::size_t n) { return Estimate{std::move(name), value, se, n}; }

Estimate mean_est(std::string name, std::span<const double> v) {
    return est(std::move(name), mean(v), v.size() > 1 ? standard_error(v) : 0.0, v.size());
}

Estimate freq_est(std::string name, double count, std::size_t n) {
    const double f = count / static_cast<double>(n);
    return est(std::move(name), f, std::sqrt(f * (1.0 - f) / static_cast<double>(n)), n);
}

std::vector<double> hvalues(const EvolvedProfile& p) { return p.h_t.dense(); }

}  // namespace

InitialSpec initial_from_config(const ExperimentConfig& cfg, const RngKey& key) {
    const std::string kind = cfg.str("initial");
    if (kind == "narrow_wedge") return InitialSpec::narrow_wedge(cfg.num("x0"));
    if (kind == "flat") return InitialSpec::flat();
    if (kind == "brownian") return InitialSpec::brownian(cfg.num("drift"), key);
    if (kind == "power") {
        const double z = cfg.num("zeta");
        if (!(z >= 0 && z <= 1)) bad("zeta must lie in [0, 1]");
        return InitialSpec::power(z);
    }
    bad("initial must be narrow_wedge, flat, brownian or power");
}

// ---------------------------------------------------------------- defaults

namespace {

json stationarity_defaults() {
    return {{"seed", 7u},
            {"n", 200.0},
            {"t", 1.0},
            {"initial", "brownian"},
            {"x0", 0.0},
            {"drift", 0.0},
            {"zeta", 0.5},
            {"epsilons", json::array({1.0})},
            {"offsets", json::array({0.25, 0.5, 1.0})},
            {"grid_step", 0.05},
            {"refine", 16},
            {"a", 1.0},
            {"halfwidth", 0.0},
            {"replications", 1000},
            {"betas", json::array({0.1, 0.3, 0.45})},
            {"holder_beta", 0.45},
            {"holder_factor", 0.0},
            {"var_lo", 0.85},
            {"var_hi", 1.15},
            {"ks_threshold", 0.08},
            {"sandwich", false},
            {"mu_rule", "eps_power"},
            {"mu", 1.0},
            {"sandwich_refine", 8},
            {"sandwich_halfwidth", 0.0},
            {"sandwich_threshold", 0.9}};
}

json local_brownian_defaults() {
    json j = stationarity_defaults();
    j["seed"] = 11u;
    j["n"] = 50.0;
    j["t"] = 8.0;
    j["initial"] = "narrow_wedge";
    j["epsilons"] = json::array({0.1, 0.05});
    j["refine"] = 8;
    j["replications"] = 400;
    j["holder_factor"] = 2.0;
    j["var_lo"] = 0.7;
    j["var_hi"] = 1.3;
    j["ks_threshold"] = 0.0;
    j["sandwich"] = true;
    return j;
}

json airy_sheet_defaults() {
    return {{"seed", 13u},
            {"n", 200.0},
            {"epsilons", json::array({0.1})},
            {"grid_step", 0.25},
            {"halfwidth", 1.0},
            {"offsets", json::array({0.5, 1.0})},
            {"refine", 20},
            {"replications", 1000},
            {"betas", json::array({0.1, 0.3, 0.45})},
            {"var_lo", 0.7},
            {"var_hi", 1.3},
            {"rho_threshold", 0.15},
            {"parabola_tolerance", 1e-12}};
}

json long_time_defaults() {
    return {{"seed", 17u},
            {"n", 50.0},
            {"t", json::array({1.0, 4.0, 16.0})},
            {"a", 1.0},
            {"eta", 0.5},
            {"eta_large", 100.0},
            {"initial", "flat"},
            {"x0", 0.0},
            {"drift", 0.0},
            {"zeta", 0.5},
            {"grid_step", 0.05},
            {"refine", 8},
            {"halfwidth", 0.0},
            {"replications", 500},
            {"mu_rule", "r_rule"},
            {"mu", 1.0},
            {"band", 2.0}};
}

json invariance_defaults() {
    return {{"seed", 19u},
            {"n", 200.0},
            {"t", 1.0},
            {"gammas", json::array({1.0, 2.0})},
            {"initial", "flat"},
            {"x0", 0.0},
            {"drift", 0.0},
            {"zeta", 0.5},
            {"eval_x", 0.0},
            {"grid_step", 0.05},
            {"refine", 16},
            {"halfwidth", 0.0},
            {"replications", 1000},
            {"ks_threshold", 0.12},
            {"ks_identity_threshold", 0.05},
            {"same_n", true}};
}

json geometry_defaults() {
    return {{"seed", 7u},       {"n", 50.0},        {"t", 1.0},        {"split", 0.5},
            {"grid_step", 0.1}, {"refine", 2},      {"halfwidth", 2.0}, {"replications", 200},
            {"mu", 1.0},        {"a", 0.5},         {"zeta", 0.5},     {"endpoint_pairs", 20},
            {"tolerance", 1e-9}};
}

json argmax_defaults() {
    return {{"seed", 23u},
            {"n", 50.0},
            {"t", 1.0},
            {"halfwidth", 3.0},
            {"grid_step", 0.01},
            {"refine", 4},
            {"a_values", json::array({-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2})},
            {"replications", 2000},
            {"se_factor", 2.0},
            {"kink_threshold", 1.5},
            {"deterministic_step", 0.0025},
            {"exact_tolerance", 1e-12},
            {"landscape", true}};
}

}  // namespace

json sample_landscape_defaults() {
    return {{"seed", 1u},        {"n", 50.0},       {"s", 0.0},      {"t", 1.0},
            {"grid_step", 0.1},  {"halfwidth", 1.0}, {"refine", 4},  {"replications", 1}};
}

json evolve_defaults() {
    return {{"seed", 1u},         {"n", 50.0},  {"t", 1.0},          {"initial", "flat"}, {"x0", 0.0},
            {"drift", 0.0},       {"zeta", 0.5}, {"grid_step", 0.05}, {"halfwidth", 0.0}, {"a", 1.0},
            {"refine", 8},        {"replications", 1}};
}

const std::vector<ScenarioInfo>& scenarios() {
    static const std::vector<ScenarioInfo> list{
        {"stationarity", "Brownian initial data stays Brownian: increment variances and normality",
         stationarity_defaults, run_local_brownian},
        {"local-brownian", "local Brownian behaviour and Holder regularity of h_t, sandwich event frequency",
         local_brownian_defaults, run_local_brownian},
        {"airy-sheet", "variance additivity and decorrelation of Airy sheet increments", airy_sheet_defaults,
         run_airy_sheet},
        {"long-time-coupling", "coupling of h_t(.;h) and h_t(.;b) increments as t grows", long_time_defaults,
         run_long_time_coupling},
        {"invariance-123", "1:2:3 scaling invariance, rescaled against direct pipeline", invariance_defaults,
         run_invariance_123},
        {"geometry", "exact per-sample geometry checks (composition, semigroup, comparisons)", geometry_defaults,
         run_geometry_suite},
        {"argmax-uniqueness", "m(a) = E max(f(z) + a z) probe: slope at 0 against E Z", argmax_defaults,
         run_argmax_uniqueness},
    };
    return list;
}

const ScenarioInfo* find_scenario(const std::string& name) {
    for (const auto& s : scenarios()) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

ExperimentConfig default_config(const std::string& scenario) {
    const auto* s = find_scenario(scenario);
    if (!s) bad("unknown scenario '" + scenario + "'");
    return ExperimentConfig(scenario, s->defaults());
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads) {
    const auto* s = find_scenario(cfg.scenario());
    if (!s) bad("unknown scenario '" + cfg.scenario() + "'");
    const auto t0 = std::chrono::steady_clock::now();
    auto rep = s->run(cfg, threads);
    rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------- local Brownian / stationarity

ExperimentReport run_local_brownian(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), t = cfg.positive("t"), a = cfg.positive("a"), gs = cfg.positive("grid_step");
    const int refine = refine_of(cfg);
    const auto eps = positive_list(cfg, "epsilons");
    const auto offsets = positive_list(cfg, "offsets");
    const auto betas = cfg.list("betas");
    for (double b : betas) {
        if (!(b >= 0 && b <= 1)) bad("betas must lie in [0, 1]");
    }
    const double holder_beta = cfg.num("holder_beta");
    const std::size_t R = replications_of(cfg, 30);
    const std::uint64_t seed = cfg.seed();
    const std::string kind = cfg.str("initial");
    const bool wedge = kind == "narrow_wedge";
    const double x0 = cfg.num("x0");
    initial_from_config(cfg, {});  // validates the kind

    struct Layout {
        Grid xg, zg;
        std::size_t i0 = 0;
        std::vector<std::size_t> off;
        double fine = 0.0;
    };
    const double max_off = *std::max_element(offsets.begin(), offsets.end());
    const double H = auto_halfwidth(cfg, a, t);
    std::vector<Layout> lay(eps.size());
    for (std::size_t e = 0; e < eps.size(); ++e) {
        const double step = eps[e] * gs;
        const double A = std::max(a, eps[e] * max_off);
        lay[e].xg = centred_grid(step, A);
        lay[e].i0 = lay[e].xg.nearest_index(0.0);
        for (double o : offsets) lay[e].off.push_back(steps_in(o, gs, "offsets"));
        lay[e].zg = wedge ? centred_grid(step, std::max(A, std::abs(x0))) : centred_grid(step, std::max(A, H));
        lay[e].fine = step / refine;
    }

    const bool sandwich = cfg.flag("sandwich");
    Grid zs, xs;
    double fine_s = 0.0;
    std::vector<double> mus(eps.size());
    if (sandwich) {
        steps_in(a, gs, "a");
        const double Hs = cfg.num("sandwich_halfwidth") > 0 ? cfg.num("sandwich_halfwidth")
                                                            : a + 4.0 * std::pow(t, 2.0 / 3.0);
        zs = centred_grid(gs, std::max(Hs, std::abs(x0)));
        xs = centred_grid(gs, a);
        fine_s = gs / refine_of(cfg, "sandwich_refine");
        for (std::size_t e = 0; e < eps.size(); ++e) mus[e] = mu_for(cfg, eps[e], t, a);
    }

    const std::size_t E = eps.size(), O = offsets.size(), B = betas.size();
    std::vector<double> inc(R * E * O), hold(R * E * B), hold_gate(R * E);
    std::vector<SandwichResult> sw(R * E);

    parallel_for(R, threads, [&](std::size_t r) {
        for (std::size_t e = 0; e < E; ++e) {
            const auto& L = lay[e];
            CoupledLandscape land(n, 0.0, t, L.zg.front(), std::max(L.zg.back(), L.xg.back()), L.fine,
                                  RngKey{seed, r, 100 + e}, false);
            auto init = make_initial(initial_from_config(cfg, RngKey{seed, r, 200 + e}), L.zg);
            auto prof = evolve_direct(land, init.realized, 0.0, {t}, L.xg)[0];
            const auto h = hvalues(prof);
            const double scale = 1.0 / std::sqrt(eps[e]);
            for (std::size_t o = 0; o < O; ++o) inc[(r * E + e) * O + o] = scale * (h[L.i0 + L.off[o]] - h[L.i0]);
            for (std::size_t b = 0; b < B; ++b) hold[(r * E + e) * B + b] = holder_seminorm(prof.h_t, betas[b], a);
            hold_gate[r * E + e] = holder_seminorm(prof.h_t, holder_beta, a);
        }
        if (sandwich) {
            CoupledLandscape land(n, 0.0, t, zs.front(), zs.back(), fine_s, RngKey{seed, r, 1}, false);
            auto b = sample_two_sided_bm(zs, 2.0, 0.0, RngKey{seed, r, 2});
            auto init = make_initial(initial_from_config(cfg, RngKey{seed, r, 3}), zs);
            std::vector<SweepRequest> req{{init.realized.dense(), {t}}};
            for (std::size_t e = 0; e < E; ++e) {
                req.push_back({drifted(b, mus[e]).dense(), {t}});
                req.push_back({drifted(b, -mus[e]).dense(), {t}});
            }
            auto caps = land.sweep(zs, 0.0, xs, req);
            auto ph = profile_from_capture(caps[0][0], xs, "h");
            for (std::size_t e = 0; e < E; ++e) {
                auto pp = profile_from_capture(caps[1 + 2 * e][0], xs, "b+");
                auto pm = profile_from_capture(caps[2 + 2 * e][0], xs, "b-");
                sw[r * E + e] = sandwich_from_profiles(ph, pp, pm, a);
            }
        }
    });

    auto rep = make_report(cfg);
    SampleTable inc_table{"increments", {"replication", "eps", "x", "value"}, {}};
    SampleTable hold_table{"holder", {"replication", "eps", "beta", "seminorm"}, {}};
    SampleTable sw_table{"sandwich", {"replication", "eps", "mu", "event", "i_t", "sandwich_held"}, {}};
    Plot plot{"variance_profile", "increment variance of eps^-1/2 (h_t(eps x) - h_t(0))", "x", "variance", {}};
    PlotSeries target{"2|x|", {}, {}};
    for (double o : offsets) {
        target.x.push_back(o);
        target.y.push_back(2.0 * o);
    }

    for (std::size_t e = 0; e < E; ++e) {
        const std::string et = "eps=" + tag(eps[e]);
        std::vector<std::vector<double>> samples(O, std::vector<double>(R));
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t o = 0; o < O; ++o) {
                samples[o][r] = inc[(r * E + e) * O + o];
                inc_table.rows.push_back({double(r), eps[e], offsets[o], samples[o][r]});
            }
        }
        auto vp = increment_variance_profile(samples, offsets);
        PlotSeries series{et, {}, {}};
        for (std::size_t o = 0; o < O; ++o) {
            const std::string ot = et + " x=" + tag(offsets[o]);
            const double target_var = 2.0 * offsets[o];
            rep.estimates.push_back(est("variance " + ot, vp[o].variance, vp[o].stderr_, R));
            rep.checks.push_back(check_within("variance_ratio " + ot, vp[o].variance / target_var, cfg.num("var_lo"),
                                              cfg.num("var_hi")));
            const double ks = ks_gaussian(SampleSet(samples[o], ot), 0.0, target_var);
            if (cfg.num("ks_threshold") > 0) {
                rep.checks.push_back(check_below("ks_gaussian " + ot, ks, cfg.num("ks_threshold")));
            } else {
                rep.estimates.push_back(est("ks_gaussian " + ot, ks, 0.0, R));
            }
            series.x.push_back(offsets[o]);
            series.y.push_back(vp[o].variance);
        }
        plot.series.push_back(series);

        for (std::size_t b = 0; b < B; ++b) {
            std::vector<double> v(R);
            for (std::size_t r = 0; r < R; ++r) {
                v[r] = hold[(r * E + e) * B + b];
                hold_table.rows.push_back({double(r), eps[e], betas[b], v[r]});
            }
            rep.estimates.push_back(est("holder_median " + et + " beta=" + tag(betas[b]), median(v), 0.0, R));
            rep.estimates.push_back(mean_est("holder_mean " + et + " beta=" + tag(betas[b]), v));
        }
        if (cfg.num("holder_factor") > 0) {
            std::vector<double> v(R);
            std::size_t nonfinite = 0;
            for (std::size_t r = 0; r < R; ++r) {
                v[r] = hold_gate[r * E + e];
                if (!std::isfinite(v[r])) ++nonfinite;
            }
            const std::string bt = et + " beta=" + tag(holder_beta);
            rep.checks.push_back(check_equal("holder_nonfinite " + bt, double(nonfinite), 0.0));
            if (nonfinite == 0) {
                rep.checks.push_back(
                    check_below("holder_mean_over_median " + bt, mean(v) / median(v), cfg.num("holder_factor")));
            }
        }
        if (sandwich) {
            double events = 0, violations = 0;
            std::vector<double> it(R);
            for (std::size_t r = 0; r < R; ++r) {
                const auto& s = sw[r * E + e];
                events += s.event_held;
                violations += s.event_held && !s.sandwich_held;
                it[r] = s.i_t;
                sw_table.rows.push_back({double(r), eps[e], mus[e], double(s.event_held), s.i_t,
                                         double(s.sandwich_held)});
            }
            const std::string mt = et + " mu=" + tag(mus[e]);
            rep.checks.push_back(
                check_at_least("sandwich_event_frequency " + mt, events / double(R), cfg.num("sandwich_threshold")));
            rep.checks.push_back(check_equal("sandwich_violations " + mt, violations, 0.0));
            rep.estimates.push_back(freq_est("sandwich_event_frequency " + mt, events, R));
            rep.estimates.push_back(mean_est("mean_I_t " + mt, it));
            rep.estimates.push_back(est("4_mu_a " + mt, 4.0 * mus[e] * a, 0.0, R));
        }
    }
    plot.series.push_back(target);
    rep.samples.push_back(std::move(inc_table));
    rep.samples.push_back(std::move(hold_table));
    if (sandwich) rep.samples.push_back(std::move(sw_table));
    rep.plots.push_back(std::move(plot));
    return rep;
}

// ---------------------------------------------------------------- Airy sheet

ExperimentReport run_airy_sheet(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), gs = cfg.positive("grid_step"), hw = cfg.positive("halfwidth");
    const auto eps = positive_list(cfg, "epsilons");
    const auto offsets = positive_list(cfg, "offsets");
    const auto betas = cfg.list("betas");
    const int refine = refine_of(cfg);
    const std::size_t R = replications_of(cfg, 30);
    const std::uint64_t seed = cfg.seed();
    for (double o : offsets) {
        if (o > hw + 1e-12) bad("offsets must not exceed halfwidth");
    }

    // signed offsets including 0, in units of eps
    std::vector<double> pts{0.0};
    for (double o : offsets) {
        pts.push_back(o);
        pts.push_back(-o);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<long long> ks;
    for (double p : pts) ks.push_back((p < 0 ? -1 : 1) * static_cast<long long>(steps_in(std::abs(p), gs, "offsets")));
    std::vector<std::pair<std::size_t, std::size_t>> cells;  // indices into pts
    for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (pts[i] != 0.0 || pts[j] != 0.0) cells.emplace_back(i, j);
        }
    }
    std::vector<std::size_t> nonzero;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i] != 0.0) nonzero.push_back(i);
    }

    const std::size_t E = eps.size(), C = cells.size(), P = pts.size(), B = betas.size();
    std::vector<double> D(R * E * C), X(R * E * P), Y(R * E * P), hold(R * E * B), par(R * E);

    parallel_for(R, threads, [&](std::size_t r) {
        for (std::size_t e = 0; e < E; ++e) {
            const double step = eps[e] * gs;
            const Grid g = centred_grid(step, eps[e] * hw);
            const std::size_t i0 = g.nearest_index(0.0);
            CoupledLandscape land(n, 0.0, 1.0, g.front(), g.back(), step / refine, RngKey{seed, r, 100 + e}, true);
            auto sheet = airy_sheet(land.slice(0.0, g, 1.0, g));
            double worst = 0.0;
            for (std::size_t zi = 0; zi < g.count; ++zi) {
                for (std::size_t xi = 0; xi < g.count; ++xi) {
                    const double d = g.point(zi) - g.point(xi);
                    worst = std::max(worst, std::abs(sheet.at(zi, xi) - d * d - sheet.slice.at(zi, xi)));
                }
            }
            par[r * E + e] = worst;
            const double base = sheet.at(i0, i0);
            for (std::size_t c = 0; c < C; ++c) {
                D[(r * E + e) * C + c] =
                    sheet.at(i0 + ks[cells[c].first], i0 + ks[cells[c].second]) - base;
            }
            for (std::size_t p = 0; p < P; ++p) {
                X[(r * E + e) * P + p] = sheet.at(i0 + ks[p], i0) - base;
                Y[(r * E + e) * P + p] = sheet.at(i0, i0 + ks[p]) - base;
            }
            for (std::size_t b = 0; b < B; ++b) {
                hold[(r * E + e) * B + b] = holder_seminorm_2d(sheet.sheet, g, g, betas[b], eps[e] * hw);
            }
        }
    });

    auto rep = make_report(cfg);
    SampleTable table{"sheet_increments", {"replication", "eps", "x", "y", "value"}, {}};
    Plot plot{"sheet_variance", "Var of sheet increments against 2 eps (|x| + |y|)", "|x| + |y|",
              "variance / (2 eps)", {}};
    for (std::size_t e = 0; e < E; ++e) {
        const std::string et = "eps=" + tag(eps[e]);
        double worst = 0.0;
        for (std::size_t r = 0; r < R; ++r) worst = std::max(worst, par[r * E + e]);
        rep.checks.push_back(check_at_most("parabola_identity " + et, worst, cfg.num("parabola_tolerance"), true));

        PlotSeries series{et, {}, {}};
        std::vector<double> v(R);
        for (std::size_t c = 0; c < C; ++c) {
            const double x = pts[cells[c].first], y = pts[cells[c].second];
            for (std::size_t r = 0; r < R; ++r) {
                v[r] = D[(r * E + e) * C + c];
                table.rows.push_back({double(r), eps[e], x, y, v[r]});
            }
            auto vp = increment_variance_profile({v}, std::vector<double>{std::abs(x) + std::abs(y)});
            const double target = 2.0 * eps[e] * (std::abs(x) + std::abs(y));
            const std::string ct = et + " x=" + tag(x) + " y=" + tag(y);
            rep.checks.push_back(
                check_within("variance_ratio " + ct, vp[0].variance / target, cfg.num("var_lo"), cfg.num("var_hi")));
            rep.estimates.push_back(est("variance " + ct, vp[0].variance, vp[0].stderr_, R));
            series.x.push_back(std::abs(x) + std::abs(y));
            series.y.push_back(vp[0].variance / (2.0 * eps[e]));
        }
        // sort the series by abscissa for a readable polyline
        std::vector<std::size_t> order(series.x.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return series.x[i] < series.x[j]; });
        PlotSeries sorted{series.label, {}, {}};
        for (auto i : order) {
            sorted.x.push_back(series.x[i]);
            sorted.y.push_back(series.y[i]);
        }
        plot.series.push_back(sorted);

        double worst_rho = 0.0;
        std::vector<double> xs(R), ys(R);
        for (std::size_t pi : nonzero) {
            for (std::size_t qi : nonzero) {
                for (std::size_t r = 0; r < R; ++r) {
                    xs[r] = X[(r * E + e) * P + pi];
                    ys[r] = Y[(r * E + e) * P + qi];
                }
                const double rho = correlation(xs, ys);
                rep.estimates.push_back(
                    est("cross_correlation " + et + " x=" + tag(pts[pi]) + " y=" + tag(pts[qi]), rho,
                        (1.0 - rho * rho) / std::sqrt(double(R)), R));
                worst_rho = std::max(worst_rho, std::abs(rho));
            }
        }
        rep.checks.push_back(check_below("max_abs_cross_correlation " + et, worst_rho, cfg.num("rho_threshold")));

        for (std::size_t b = 0; b < B; ++b) {
            std::vector<double> hv(R);
            for (std::size_t r = 0; r < R; ++r) hv[r] = hold[(r * E + e) * B + b];
            rep.estimates.push_back(est("holder2d_median " + et + " beta=" + tag(betas[b]), median(hv), 0.0, R));
        }
    }
    PlotSeries ref{"|x| + |y|", {0.0, 2.0 * *std::max_element(offsets.begin(), offsets.end())}, {}};
    ref.y = ref.x;
    plot.series.push_back(ref);
    rep.samples.push_back(std::move(table));
    rep.plots.push_back(std::move(plot));
    return rep;
}

// ---------------------------------------------------------------- long-time coupling

ExperimentReport run_long_time_coupling(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), a = cfg.positive("a"), eta = cfg.positive("eta"),
                 gs = cfg.positive("grid_step");
    const double eta_large = cfg.positive("eta_large");
    const auto ts = positive_list(cfg, "t");
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (!(ts[i] > ts[i - 1])) bad("t list must be increasing");
    }
    const int refine = refine_of(cfg);
    const std::size_t R = replications_of(cfg, 30);
    const std::uint64_t seed = cfg.seed();
    initial_from_config(cfg, {});
    steps_in(a, gs, "a");

    const double tmax = ts.back();
    const double H = auto_halfwidth(cfg, a, tmax);
    const Grid zs = centred_grid(gs, std::max(H, std::abs(cfg.num("x0"))));
    const Grid xs = centred_grid(gs, a);
    const std::size_t i0 = xs.nearest_index(0.0);
    const std::size_t T = ts.size();
    std::vector<double> mus(T), rt(T);
    for (std::size_t i = 0; i < T; ++i) {
        rt[i] = std::pow(std::pow(ts[i], 2.0 / 3.0) / a, 0.25);
        mus[i] = mu_for(cfg, 0.0, ts[i], a);
    }

    struct Row {
        double sup = 0, i_t = 0;
        bool event_h = false, event_b = false, bound_ok = true;
    };
    std::vector<Row> rows(R * T);

    parallel_for(R, threads, [&](std::size_t r) {
        CoupledLandscape land(n, 0.0, tmax, zs.front(), zs.back(), gs / refine, RngKey{seed, r, 0}, false);
        auto b = sample_two_sided_bm(zs, 2.0, 0.0, RngKey{seed, r, 1});
        auto h = make_initial(initial_from_config(cfg, RngKey{seed, r, 2}), zs);
        std::vector<SweepRequest> req{{h.realized.dense(), ts}, {b.dense(), ts}};
        for (std::size_t i = 0; i < T; ++i) {
            req.push_back({drifted(b, mus[i]).dense(), {ts[i]}});
            req.push_back({drifted(b, -mus[i]).dense(), {ts[i]}});
        }
        auto caps = land.sweep(zs, 0.0, xs, req);
        for (std::size_t i = 0; i < T; ++i) {
            auto ph = profile_from_capture(caps[0][i], xs, "h");
            auto pb = profile_from_capture(caps[1][i], xs, "b");
            auto pp = profile_from_capture(caps[2 + 2 * i][0], xs, "b+");
            auto pm = profile_from_capture(caps[3 + 2 * i][0], xs, "b-");
            const auto& hv = caps[0][i].h;
            const auto& bv = caps[1][i].h;
            double sup = 0.0;
            for (std::size_t k = 0; k < xs.count; ++k) {
                sup = std::max(sup, std::abs((hv[k] - hv[i0]) - (bv[k] - bv[i0])));
            }
            auto sh = sandwich_from_profiles(ph, pp, pm, a);
            auto sb = sandwich_from_profiles(pb, pp, pm, a);
            Row& row = rows[r * T + i];
            row.sup = sup;
            row.i_t = sh.i_t;
            row.event_h = sh.event_held;
            row.event_b = sb.event_held;
            if (sh.event_held && sb.event_held) row.bound_ok = sup <= sh.i_t + 1e-9;
        }
    });

    auto rep = make_report(cfg);
    SampleTable table{"coupling", {"replication", "t", "sup_diff", "i_t", "event_h", "event_b"}, {}};
    Plot plot{"exceedance", "P(sup |dh - db| > eta sqrt(a)) against t", "t", "frequency", {}};
    PlotSeries fs{"eta=" + tag(eta), {}, {}};
    std::vector<double> freq(T), se(T);
    double bound_violations = 0;
    for (std::size_t i = 0; i < T; ++i) {
        const std::string tt = "t=" + tag(ts[i]);
        double exceed = 0, exceed_large = 0, events = 0;
        std::vector<double> it(R);
        for (std::size_t r = 0; r < R; ++r) {
            const Row& row = rows[r * T + i];
            exceed += row.sup > eta * std::sqrt(a);
            exceed_large += row.sup > eta_large * std::sqrt(a);
            events += row.event_h && row.event_b;
            bound_violations += !row.bound_ok;
            it[r] = row.i_t;
            table.rows.push_back({double(r), ts[i], row.sup, row.i_t, double(row.event_h), double(row.event_b)});
        }
        freq[i] = exceed / double(R);
        se[i] = std::sqrt(freq[i] * (1.0 - freq[i]) / double(R));
        rep.estimates.push_back(freq_est("exceedance_frequency " + tt, exceed, R));
        rep.estimates.push_back(est("r_t " + tt, rt[i], 0.0, R));
        rep.estimates.push_back(est("mu " + tt, mus[i], 0.0, R));
        rep.estimates.push_back(freq_est("coupling_event_frequency " + tt, events, R));
        rep.estimates.push_back(mean_est("mean_I_t " + tt, it));
        rep.estimates.push_back(est("4_mu_a " + tt, 4.0 * mus[i] * a, 0.0, R));
        rep.estimates.push_back(est("markov_bound " + tt, 4.0 * mus[i] * std::sqrt(a) / eta, 0.0, R));

        const double m = mean(it), s = standard_error(it);
        const double z = s > 0 ? std::abs(m - 4.0 * mus[i] * a) / s : (m == 4.0 * mus[i] * a ? 0.0 : INFINITY);
        rep.checks.push_back(check_at_most("mean_I_t_vs_4_mu_a_in_stderr " + tt, z, cfg.num("band")));
        rep.checks.push_back(check_at_most("exceedance_at_eta_large " + tt, exceed_large / double(R), 0.0));
        fs.x.push_back(ts[i]);
        fs.y.push_back(freq[i]);
    }
    for (std::size_t i = 1; i < T; ++i) {
        auto c = check_at_most("exceedance_nonincreasing t=" + tag(ts[i - 1]) + "->" + tag(ts[i]),
                               freq[i] - freq[i - 1], cfg.num("band") * std::hypot(se[i], se[i - 1]));
        c.note = "threshold is band x combined binomial stderr";
        rep.checks.push_back(c);
    }
    if (T > 1) rep.checks.push_back(check_below("exceedance_final_minus_first", freq[T - 1] - freq[0], 0.0));
    rep.checks.push_back(check_equal("coupling_bound_violations", bound_violations, 0.0));
    plot.series.push_back(fs);
    rep.samples.push_back(std::move(table));
    rep.plots.push_back(std::move(plot));
    return rep;
}

// ---------------------------------------------------------------- 1:2:3 invariance

namespace {

struct PipelineSpec {
    double n, t, step, half, x;
    int refine;
};

double run_pipeline(const PipelineSpec& p, const InitialSpec& spec, const RngKey& land_key) {
    const Grid zs = centred_grid(p.step, std::max(p.half, spec.kind == InitialKind::NarrowWedge
                                                              ? std::abs(spec.x0) + p.step
                                                              : 0.0));
    InitialSpec s = spec;
    if (s.kind == InitialKind::Custom) {
        // power profile rescaled; evaluated on this grid
        std::vector<double> v(zs.count);
        for (std::size_t i = 0; i < zs.count; ++i) v[i] = s.drift * std::pow(std::abs(zs.point(i)), s.zeta);
        s = InitialSpec::from_function(GridFunction::from_dense(zs, v));
    }
    const Grid xs = make_grid(p.x, p.step, 2);
    CoupledLandscape land(p.n, 0.0, p.t, std::min(zs.front(), xs.front()), std::max(zs.back(), xs.back()),
                          p.step / p.refine, land_key, false);
    auto init = make_initial(s, zs);
    auto caps = land.sweep(zs, 0.0, xs, {{init.realized.dense(), {p.t}}});
    return caps[0][0].h[0];
}

// S_gamma applied to the configured initial data. Power profiles are carried as a Custom spec whose
// drift field holds the prefactor gamma^{2 zeta - 1}.
InitialSpec scaled_initial(const ExperimentConfig& cfg, double gamma, const RngKey& key) {
    InitialSpec s = initial_from_config(cfg, key);
    switch (s.kind) {
        case InitialKind::NarrowWedge: s.x0 /= gamma * gamma; break;
        case InitialKind::Brownian: s.drift *= gamma; break;
        case InitialKind::Power: {
            InitialSpec c;
            c.kind = InitialKind::Custom;
            c.zeta = s.zeta;
            c.drift = std::pow(gamma, 2.0 * s.zeta - 1.0);
            return c;
        }
        default: break;
    }
    return s;
}

}  // namespace

ExperimentReport run_invariance_123(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), t = cfg.positive("t"), gs = cfg.positive("grid_step");
    const auto gammas = positive_list(cfg, "gammas");
    const int refine = refine_of(cfg);
    const std::size_t R = replications_of(cfg, 30);
    const std::uint64_t seed = cfg.seed();
    const double x = cfg.num("eval_x");
    const double H = auto_halfwidth(cfg, std::abs(x), t);
    const bool same_n = cfg.flag("same_n");
    initial_from_config(cfg, {});
    steps_in(std::abs(x), gs, "eval_x");

    const std::size_t G = gammas.size();
    const std::size_t cols = 1 + G * (same_n ? 2 : 1);
    std::vector<double> out(R * cols);
    parallel_for(R, threads, [&](std::size_t r) {
        const PipelineSpec direct{n, t, gs, H, x, refine};
        out[r * cols] = run_pipeline(direct, scaled_initial(cfg, 1.0, RngKey{seed, r, 1}), RngKey{seed, r, 0});
        for (std::size_t g = 0; g < G; ++g) {
            const double gm = gammas[g], g2 = gm * gm, g3 = g2 * gm;
            const PipelineSpec scaled{g3 * n, t / g3, gs / g2, H / g2, x / g2, refine};
            out[r * cols + 1 + g] =
                gm * run_pipeline(scaled, scaled_initial(cfg, gm, RngKey{seed, r, 11 + 2 * g}),
                                  RngKey{seed, r, 10 + 2 * g});
            if (same_n) {
                const PipelineSpec loose{n, t / g3, gs / g2, H / g2, x / g2, refine};
                out[r * cols + 1 + G + g] =
                    gm * run_pipeline(loose, scaled_initial(cfg, gm, RngKey{seed, r, 51 + 2 * g}),
                                      RngKey{seed, r, 50 + 2 * g});
            }
        }
    });

    auto rep = make_report(cfg);
    std::vector<std::string> names{"direct"};
    for (double gm : gammas) names.push_back("rescaled gamma=" + tag(gm));
    if (same_n) {
        for (double gm : gammas) names.push_back("same_n gamma=" + tag(gm));
    }
    SampleTable table{"pipelines", {"replication"}, {}};
    for (const auto& nm : names) table.columns.push_back(nm);
    for (std::size_t r = 0; r < R; ++r) {
        std::vector<double> row{double(r)};
        for (std::size_t c = 0; c < cols; ++c) row.push_back(out[r * cols + c]);
        table.rows.push_back(row);
    }
    auto column = [&](std::size_t c) {
        std::vector<double> v(R);
        for (std::size_t r = 0; r < R; ++r) v[r] = out[r * cols + c];
        return v;
    };
    const SampleSet direct(column(0), "direct");
    rep.estimates.push_back(mean_est("mean direct", direct.values));
    for (std::size_t g = 0; g < G; ++g) {
        const SampleSet scaled(column(1 + g), names[1 + g]);
        const double ks = ks_two_sample(direct, scaled);
        const bool identity = gammas[g] == 1.0;
        rep.checks.push_back(check_below("ks_direct_vs_" + std::string(identity ? "identity" : "rescaled") +
                                             " gamma=" + tag(gammas[g]),
                                         ks, cfg.num(identity ? "ks_identity_threshold" : "ks_threshold")));
        rep.estimates.push_back(mean_est("mean " + names[1 + g], scaled.values));
        if (same_n) {
            const SampleSet loose(column(1 + G + g), names[1 + G + g]);
            rep.estimates.push_back(est("ks_direct_vs_same_n gamma=" + tag(gammas[g]),
                                        ks_two_sample(direct, loose), 0.0, R));
            rep.estimates.push_back(mean_est("mean " + names[1 + G + g], loose.values));
        }
    }
    rep.samples.push_back(std::move(table));
    return rep;
}

// ---------------------------------------------------------------- geometry suite

namespace {

enum GeoCheck {
    kIdentity,
    kMonotone,
    kSemigroup,
    kDirect,
    kCompEnsemble,
    kCompSlices,
    kGeodesic,
    kPathValue,
    kAttractive,
    kComparison,
    kSandwich,
    kKernel,
    kGeoCount
};

const char* geo_names[kGeoCount] = {"evolution_identity_violations",   "argmax_monotonicity_violations",
                                    "semigroup_violations",            "direct_sweep_vs_slice_violations",
                                    "ensemble_composition_violations", "slice_composition_violations",
                                    "geodesic_monotonicity_violations", "path_value_violations",
                                    "attractiveness_violations",       "argmax_comparison_violations",
                                    "sandwich_consistency_violations", "slice_kernel_violations"};

struct GeoTally {
    std::array<double, kGeoCount> v{};
    double max_semigroup_gap = 0, max_comp_gap = 0, max_direct_gap = 0;
    double comparisons_tested = 0, sandwich_events = 0;
};

std::uint64_t below(PhiloxStream& g, std::uint64_t m) { return m == 0 ? 0 : g() % m; }

}  // namespace

ExperimentReport run_geometry_suite(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), t = cfg.positive("t"), split = cfg.positive("split"),
                 gs = cfg.positive("grid_step"), H = cfg.positive("halfwidth"), mu = cfg.num("mu"),
                 a = cfg.positive("a"), tol = cfg.positive("tolerance");
    const double zeta = cfg.num("zeta");
    if (!(split < t)) bad("split must lie strictly between 0 and t");
    if (!line_aligned(split, n)) bad("split * n must be an integer so the split sits on a line");
    if (!(zeta >= 0 && zeta <= 1)) bad("zeta must lie in [0, 1]");
    if (a > H) bad("a must not exceed halfwidth");
    const int refine = refine_of(cfg);
    const std::size_t R = replications_of(cfg, 1);
    const long long pairs = cfg.integer("endpoint_pairs");
    if (pairs < 0) bad("endpoint_pairs must be nonnegative");
    const std::uint64_t seed = cfg.seed();
    const Grid zg = centred_grid(gs, H);
    const Grid xg = zg;

    std::vector<GeoTally> tally(R);
    parallel_for(R, threads, [&](std::size_t r) {
        GeoTally& T = tally[r];
        CoupledLandscape L(n, 0.0, t, zg.front(), zg.back(), gs / refine, RngKey{seed, r, 0}, true);
        const auto S01 = L.slice(0.0, zg, t, xg);
        const Grid mid = L.full_grid(split, L.index_of(zg.front(), 0.0), L.index_of(xg.back(), t));
        const auto S0s = L.slice(0.0, zg, split, mid);
        const auto Sst = L.slice(split, mid, t, xg);

        // narrow wedge apex at the rightmost z that still reaches every x
        std::size_t apex = 0;
        const std::size_t reach = L.index_of(xg.front(), t);
        for (std::size_t k = 0; k < zg.count; ++k) {
            if (L.index_of(zg.point(k), 0.0) <= reach) apex = k;
        }
        auto b = sample_two_sided_bm(zg, 2.0, 0.0, RngKey{seed, r, 1});
        const auto bd = b.dense();
        std::vector<double> lifted(zg.count), ramp(zg.count);
        for (std::size_t k = 0; k < zg.count; ++k) {
            lifted[k] = bd[k] + std::exp(zg.point(k));
            ramp[k] = mu * zg.point(k);
        }
        std::vector<GridFunction> inits{make_initial(InitialSpec::flat(), zg).realized,
                                        b,
                                        make_initial(InitialSpec::power(zeta), zg).realized,
                                        drifted(b, mu),
                                        drifted(b, -mu),
                                        make_initial(InitialSpec::narrow_wedge(zg.point(apex)), zg).realized};
        const std::size_t finite_inits = 5;  // all but the wedge

        std::vector<EvolvedProfile> profs;
        for (const auto& h : inits) profs.push_back(evolve(h, S01));

        // evolution identity, rightmost argmax, monotone argmax
        for (std::size_t q = 0; q < inits.size(); ++q) {
            const auto hv = inits[q].dense();
            const auto pv = profs[q].h_t.dense();
            for (std::size_t xi = 0; xi < xg.count; ++xi) {
                const std::size_t z = profs[q].argmax[xi];
                bool ok = pv[xi] == hv[z] + S01.at(z, xi);
                for (std::size_t zi = 0; zi < zg.count && ok; ++zi) {
                    const double c = hv[zi] + S01.at(zi, xi);
                    if (c > pv[xi] || (zi > z && c == pv[xi])) ok = false;
                }
                T.v[kIdentity] += !ok;
                if (xi > 0 && profs[q].argmax[xi] < profs[q].argmax[xi - 1]) T.v[kMonotone] += 1;
            }
        }
        // semigroup and direct sweep agreement
        for (std::size_t q = 0; q < inits.size(); ++q) {
            if (q < finite_inits) {
                const double gap = semigroup_gap(inits[q], S0s, Sst, S01);
                T.max_semigroup_gap = std::max(T.max_semigroup_gap, gap);
                T.v[kSemigroup] += gap > tol;
            }
            auto d = evolve_direct(L, inits[q], 0.0, {t}, xg)[0];
            const auto dv = d.h_t.dense(), sv = profs[q].h_t.dense();
            for (std::size_t xi = 0; xi < xg.count; ++xi) {
                const double gap = std::abs(dv[xi] - sv[xi]);
                T.max_direct_gap = std::max(T.max_direct_gap, gap);
                T.v[kDirect] += gap > tol || d.argmax[xi] != profs[q].argmax[xi];
            }
        }
        // composition through the full middle grid
        for (std::size_t zi = 0; zi < zg.count; ++zi) {
            for (std::size_t xi = 0; xi < xg.count; ++xi) {
                double best = kNegInf;
                for (std::size_t m = 0; m < mid.count; ++m) {
                    const double u = S0s.at(zi, m), w = Sst.at(m, xi);
                    if (u == kNegInf || w == kNegInf) continue;
                    best = std::max(best, u + w);
                }
                const double direct = S01.at(zi, xi);
                if (best == kNegInf || direct == kNegInf) {
                    T.v[kCompSlices] += best != direct;
                } else {
                    const double gap = std::abs(best - direct);
                    T.max_comp_gap = std::max(T.max_comp_gap, gap);
                    T.v[kCompSlices] += gap > tol;
                }
            }
        }
        // raw ensemble: composition, geodesic ordering, path values
        const auto& ens = L.ensemble();
        const std::size_t W = ens.grid().count, K = ens.k();
        PhiloxStream rng({seed, 0}, r, 5, 0);
        for (long long p = 0; p < pairs; ++p) {
            std::size_t s1 = below(rng, W), s2 = below(rng, W);
            if (s1 > s2) std::swap(s1, s2);
            const std::size_t e1 = s1 + below(rng, W - s1);
            const std::size_t e2 = std::max(s2, e1) + below(rng, W - std::max(s2, e1));
            const std::size_t midline = 1 + below(rng, K);
            const double cg = composition_identity_gap(ens, {s1, K}, {e1, 1}, midline);
            T.max_comp_gap = std::max(T.max_comp_gap, cg);
            T.v[kCompEnsemble] += cg > tol;

            auto v1 = last_passage(ens, {s1, K}, {e1, 1}, true);
            auto v2 = last_passage(ens, {s2, K}, {e2, 1}, true);
            const auto& j1 = v1.path->jump_indices;
            const auto& j2 = v2.path->jump_indices;
            for (std::size_t q = 0; q < j1.size(); ++q) T.v[kGeodesic] += j1[q] > j2[q];
            for (const auto* v : {&v1, &v2}) {
                const auto& st = v == &v1 ? LppEndpoint{s1, K} : LppEndpoint{s2, K};
                const auto& en = v == &v1 ? LppEndpoint{e1, 1} : LppEndpoint{e2, 1};
                const double pv = path_value(ens, st, en, *v->path);
                T.v[kPathValue] += std::abs(pv - v->value) > 1e-12 * std::max(1.0, std::abs(v->value));
            }
        }
        // kernel entries against direct evaluation
        for (int k = 0; k < 3; ++k) {
            const std::size_t zi = below(rng, zg.count), xi = below(rng, xg.count);
            const double direct = L.value(zg.point(zi), 0.0, xg.point(xi), t);
            const double s = S01.at(zi, xi);
            if (s == kNegInf || direct == kNegInf) {
                T.v[kKernel] += s != direct;
            } else {
                T.v[kKernel] += std::abs(s - direct) > tol;
            }
        }
        // attractiveness on ordered pairs
        const GridFunction bl = GridFunction::from_dense(zg, lifted);
        const GridFunction lin = GridFunction::from_dense(zg, ramp);
        for (auto pr : {std::pair<const GridFunction*, const GridFunction*>{&inits[4], &inits[3]},
                        std::pair<const GridFunction*, const GridFunction*>{&inits[1], &bl},
                        std::pair<const GridFunction*, const GridFunction*>{&inits[0], &lin}}) {
            T.v[kAttractive] += !attractiveness_check(*pr.first, *pr.second, S01).held;
        }
        // argmax comparison over all ordered profile pairs
        for (std::size_t p = 0; p < profs.size(); ++p) {
            for (std::size_t q = 0; q < profs.size(); ++q) {
                if (p == q) continue;
                for (std::size_t xi = 0; xi < xg.count; ++xi) {
                    for (std::size_t yi = xi + 1; yi < xg.count; ++yi) {
                        auto v = argmax_comparison_check(profs[p], profs[q], xi, yi);
                        T.comparisons_tested += v.hypothesis_held;
                        T.v[kComparison] += v.hypothesis_held && !v.inequality_held;
                    }
                }
            }
        }
        // sandwich consistency
        for (std::size_t q : {0u, 1u, 2u, 5u}) {
            auto s = sandwich_from_profiles(profs[q], profs[3], profs[4], a);
            T.sandwich_events += s.event_held;
            T.v[kSandwich] += (s.event_held && !s.sandwich_held) || s.i_t < -tol;
        }
        auto zero = sandwich_from_profiles(profs[0], profs[1], profs[1], a);
        T.v[kSandwich] += zero.i_t != 0.0;
    });

    auto rep = make_report(cfg);
    GeoTally sum;
    for (const auto& T : tally) {
        for (int k = 0; k < kGeoCount; ++k) sum.v[k] += T.v[k];
        sum.max_semigroup_gap = std::max(sum.max_semigroup_gap, T.max_semigroup_gap);
        sum.max_comp_gap = std::max(sum.max_comp_gap, T.max_comp_gap);
        sum.max_direct_gap = std::max(sum.max_direct_gap, T.max_direct_gap);
        sum.comparisons_tested += T.comparisons_tested;
        sum.sandwich_events += T.sandwich_events;
    }
    for (int k = 0; k < kGeoCount; ++k) rep.checks.push_back(check_equal(geo_names[k], sum.v[k], 0.0));

    // tie fixture: equal candidates, the rightmost source wins
    {
        LandscapeSlice s;
        s.z_grid = make_grid(0.0, 1.0, 3);
        s.x_grid = make_grid(0.0, 1.0, 2);
        s.values = {0.0, 0.0, 1.0, 1.0, 1.0, 1.0};
        const auto p = evolve(GridFunction::from_dense(s.z_grid, std::vector<double>{0.0, 0.0, 0.0}), s);
        rep.checks.push_back(check_equal("tie_fixture_rightmost_argmax", double(p.argmax[0] + p.argmax[1]), 4.0));
    }
    rep.estimates.push_back(est("max_semigroup_gap", sum.max_semigroup_gap, 0.0, R));
    rep.estimates.push_back(est("max_composition_gap", sum.max_comp_gap, 0.0, R));
    rep.estimates.push_back(est("max_direct_sweep_gap", sum.max_direct_gap, 0.0, R));
    rep.estimates.push_back(est("comparison_hypotheses_tested", sum.comparisons_tested, 0.0, R));
    rep.estimates.push_back(est("sandwich_events", sum.sandwich_events, 0.0, R));
    return rep;
}

// ---------------------------------------------------------------- argmax uniqueness

ExperimentReport run_argmax_uniqueness(const ExperimentConfig& cfg, int threads) {
    const double n = cfg.positive("n"), t = cfg.positive("t"), H = cfg.positive("halfwidth"),
                 gs = cfg.positive("grid_step"), det_step = cfg.positive("deterministic_step");
    const double exact = cfg.positive("exact_tolerance");
    const auto a_values = cfg.list("a_values");
    const int refine = refine_of(cfg);
    const std::size_t R = replications_of(cfg, 100);
    const std::uint64_t seed = cfg.seed();
    const Grid window = centred_grid(gs, H);
    const double se_factor = cfg.positive("se_factor");

    auto rep = make_report(cfg);
    SampleTable table{"m_curve", {"variant", "a", "m_hat", "stderr"}, {}};
    Plot plot{"m_curve", "m(a) = E max_z (f(z) + a z)", "a", "m(a) - m(0)", {}};
    auto record = [&](const MCurve& m, double id, const std::string& label) {
        PlotSeries s{label, {}, {}};
        const double m0 = m.m_hat[m.a_values.size() / 2];
        for (std::size_t k = 0; k < m.a_values.size(); ++k) {
            table.rows.push_back({id, m.a_values[k], m.m_hat[k], m.stderr_[k]});
            s.x.push_back(m.a_values[k]);
            s.y.push_back(m.m_hat[k] - m0);
        }
        plot.series.push_back(s);
        rep.estimates.push_back(est("slope " + label, m.slope, 0.0, m.replications));
        rep.estimates.push_back(est("ez_hat " + label, m.ez_hat, m.ez_stderr, m.replications));
        rep.estimates.push_back(est("slope_minus_ez " + label, m.slope_minus_ez, m.slope_minus_ez_stderr,
                                    m.replications));
        rep.estimates.push_back(est("kink " + label, m.kink, 0.0, m.replications));
    };

    // deterministic parabola
    {
        const Grid g = centred_grid(det_step, H);
        auto m = m_curve(
            g,
            [&](const RngKey&) {
                std::vector<double> f(g.count);
                for (std::size_t i = 0; i < g.count; ++i) f[i] = -g.point(i) * g.point(i);
                return f;
            },
            a_values, 100, RngKey{seed, 0, 0}, threads);
        record(m, 0, "parabola");
        rep.checks.push_back(check_at_most("parabola_slope_abs", std::abs(m.slope), exact, true));
        rep.checks.push_back(check_at_most("parabola_ez_abs", std::abs(m.ez_hat), exact, true));
        double worst = 0;
        for (std::size_t k = 0; k < m.a_values.size(); ++k) {
            worst = std::max(worst, std::abs(m.m_hat[k] - m.a_values[k] * m.a_values[k] / 4.0));
        }
        rep.estimates.push_back(est("parabola_max_abs_m_minus_a2_over_4", worst, 0.0, 100));
    }
    // two peaks of equal height at +-1
    {
        auto m = m_curve(
            window,
            [&](const RngKey&) {
                std::vector<double> f(window.count);
                for (std::size_t i = 0; i < window.count; ++i) {
                    const double z = window.point(i);
                    f[i] = -4.0 * std::min((z - 1) * (z - 1), (z + 1) * (z + 1));
                }
                return f;
            },
            a_values, 100, RngKey{seed, 0, 0}, threads);
        record(m, 1, "two_peak");
        rep.checks.push_back(check_at_least("two_peak_kink", m.kink, cfg.num("kink_threshold"), true));
    }
    auto stochastic_gates = [&](const MCurve& m, const std::string& label) {
        const double z = m.slope_minus_ez_stderr > 0 ? std::abs(m.slope_minus_ez) / m.slope_minus_ez_stderr
                                                     : (m.slope_minus_ez == 0 ? 0.0 : INFINITY);
        rep.checks.push_back(check_at_most("slope_minus_ez_in_stderr " + label, z, se_factor));
        rep.checks.push_back(check_equal("convexity_violations " + label, m.convex ? 0.0 : 1.0, 0.0));
    };
    // Brownian minus parabola
    {
        auto m = m_curve(
            window,
            [&](const RngKey& k) {
                auto b = sample_two_sided_bm(window, 2.0, 0.0, k).dense();
                for (std::size_t i = 0; i < window.count; ++i) b[i] -= window.point(i) * window.point(i);
                return b;
            },
            a_values, R, RngKey{seed, 0, 1}, threads);
        record(m, 2, "brownian_minus_parabola");
        stochastic_gates(m, "brownian_minus_parabola");
    }
    // Brownian plus a landscape column
    if (cfg.flag("landscape")) {
        auto m = m_curve(
            window,
            [&](const RngKey& k) {
                auto b = sample_two_sided_bm(window, 2.0, 0.0, k).dense();
                CoupledLandscape land(n, 0.0, t, window.front(), window.back(), gs / refine, k.with_substream(3),
                                      false);
                auto col = land.column_to(window, 0.0, 0.0, t);
                for (std::size_t i = 0; i < window.count; ++i) b[i] += col[i];
                return b;
            },
            a_values, R, RngKey{seed, 0, 2}, threads);
        record(m, 3, "brownian_plus_landscape");
        stochastic_gates(m, "brownian_plus_landscape");
    }
    rep.samples.push_back(std::move(table));
    rep.plots.push_back(std::move(plot));
    return rep;
}

}  // namespace kpz::lab
