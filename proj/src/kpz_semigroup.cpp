#include "kpz/kpz_semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace kpz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;

bool close_time(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }

std::size_t window_index(const Grid& g, double x) {
    if (!g.covers(x)) {
        std::ostringstream os;
        os << "point " << x << " outside the x grid";
        throw Error(ErrorCode::WindowTooSmall, os.str());
    }
    return g.nearest_index(x);
}

}  // namespace

InitialSpec InitialSpec::narrow_wedge(double x0) {
    InitialSpec s;
    s.kind = InitialKind::NarrowWedge;
    s.x0 = x0;
    return s;
}

InitialSpec InitialSpec::flat() { return InitialSpec{}; }

InitialSpec InitialSpec::brownian(double drift, const RngKey& key, double diffusion) {
    InitialSpec s;
    s.kind = InitialKind::Brownian;
    s.drift = drift;
    s.key = key;
    s.diffusion = diffusion;
    return s;
}

InitialSpec InitialSpec::power(double zeta) {
    InitialSpec s;
    s.kind = InitialKind::Power;
    s.zeta = zeta;
    return s;
}

InitialSpec InitialSpec::from_function(GridFunction f) {
    InitialSpec s;
    s.kind = InitialKind::Custom;
    s.custom = std::move(f);
    return s;
}

std::string describe(const InitialSpec& spec) {
    std::ostringstream os;
    switch (spec.kind) {
        case InitialKind::NarrowWedge: os << "narrow_wedge(" << spec.x0 << ")"; break;
        case InitialKind::Flat: os << "flat"; break;
        case InitialKind::Brownian:
            os << "brownian(drift=" << spec.drift << ",diffusion=" << spec.diffusion << ";" << spec.key.describe()
               << ")";
            break;
        case InitialKind::Power: os << "power(" << spec.zeta << ")"; break;
        case InitialKind::Custom: os << "custom"; break;
    }
    return os.str();
}

InitialCondition make_initial(const InitialSpec& spec, const Grid& z_grid) {
    switch (spec.kind) {
        case InitialKind::NarrowWedge: {
            if (!z_grid.covers(spec.x0)) throw Error(ErrorCode::ApexOffGrid, "narrow wedge apex outside grid");
            std::vector<ExtendedValue> v(z_grid.count, ExtendedValue::minus_infinity());
            v[z_grid.nearest_index(spec.x0)] = ExtendedValue::finite(0.0);
            return {spec, GridFunction(z_grid, std::move(v))};
        }
        case InitialKind::Flat:
            return {spec, GridFunction(z_grid, std::vector<ExtendedValue>(z_grid.count, ExtendedValue::finite(0.0)))};
        case InitialKind::Brownian:
            return {spec, sample_two_sided_bm(z_grid, spec.diffusion, spec.drift, spec.key)};
        case InitialKind::Power: {
            if (!(spec.zeta >= 0.0 && spec.zeta <= 1.0)) throw Error(ErrorCode::BadExponent, "zeta must be in [0,1]");
            std::vector<ExtendedValue> v;
            v.reserve(z_grid.count);
            for (std::size_t i = 0; i < z_grid.count; ++i) {
                // std::pow(0, 0) == 1, which is the convention wanted here
                v.push_back(ExtendedValue::finite(std::pow(std::abs(z_grid.point(i)), spec.zeta)));
            }
            return {spec, GridFunction(z_grid, std::move(v))};
        }
        case InitialKind::Custom:
            if (!spec.custom || !same_grid(spec.custom->grid(), z_grid)) {
                throw Error(ErrorCode::GridMismatch, "custom profile is not on the z grid");
            }
            return {spec, *spec.custom};
    }
    throw Error(ErrorCode::ContractViolation, "unknown initial kind");
}

EvolvedProfile evolve(const GridFunction& h, const LandscapeSlice& slice) {
    if (!same_grid(h.grid(), slice.z_grid)) throw Error(ErrorCode::GridMismatch, "initial profile not on slice z grid");
    const std::size_t nz = slice.z_grid.count, nx = slice.x_grid.count;
    auto hv = h.dense();
    std::vector<double> out(nx);
    std::vector<std::size_t> arg(nx);
    for (std::size_t xi = 0; xi < nx; ++xi) {
        double best = kNegInf;
        bool found = false;
        for (std::size_t zi = 0; zi < nz; ++zi) {
            const double L = slice.at(zi, xi);
            if (hv[zi] == kNegInf || L == kNegInf) continue;
            const double v = hv[zi] + L;
            if (v >= best) {
                best = v;
                arg[xi] = zi;
                found = true;
            }
        }
        if (!found) {
            std::ostringstream os;
            os << "no finite source for x=" << slice.x_grid.point(xi);
            throw Error(ErrorCode::AllMinusInfinityColumn, os.str());
        }
        out[xi] = best;
    }
    return {GridFunction::from_dense(slice.x_grid, out), std::move(arg), "slice " + slice.seed_record};
}

EvolvedProfile evolve(const InitialCondition& h, const LandscapeSlice& slice) {
    auto p = evolve(h.realized, slice);
    p.source = describe(h.spec) + " | " + p.source;
    return p;
}

EvolvedProfile profile_from_capture(const SweepCapture& cap, const Grid& x_grid, const std::string& source) {
    std::vector<std::size_t> arg(cap.h.size());
    for (std::size_t i = 0; i < cap.h.size(); ++i) {
        if (cap.h[i] == kNegInf || cap.origin[i] < 0) {
            std::ostringstream os;
            os << "no finite source for x=" << x_grid.point(i);
            throw Error(ErrorCode::AllMinusInfinityColumn, os.str());
        }
        arg[i] = static_cast<std::size_t>(cap.origin[i]);
    }
    return {GridFunction::from_dense(x_grid, cap.h), std::move(arg), source};
}

std::vector<EvolvedProfile> evolve_direct(const CoupledLandscape& landscape, const GridFunction& h, double s,
                                          const std::vector<double>& times, const Grid& x_grid) {
    auto caps = landscape.sweep(h.grid(), s, x_grid, {SweepRequest{h.dense(), times}});
    std::vector<EvolvedProfile> out;
    for (const auto& c : caps[0]) out.push_back(profile_from_capture(c, x_grid, "sweep " + landscape.key().describe()));
    return out;
}

void write_csv(std::ostream& os, const EvolvedProfile& p, const Grid& z_grid) {
    std::ostringstream o;
    o.precision(17);
    o << "x,h_t,Z_t\n";
    const Grid& g = p.h_t.grid();
    for (std::size_t i = 0; i < g.count; ++i) {
        o << g.point(i) << ',' << p.h_t.values()[i].value() << ',' << z_grid.point(p.argmax[i]) << '\n';
    }
    os << o.str();
}

double semigroup_gap(const GridFunction& h, const LandscapeSlice& rs, const LandscapeSlice& st,
                     const LandscapeSlice& rt) {
    if (!rs.source || rs.source != st.source || rs.source != rt.source) {
        throw Error(ErrorCode::ContractViolation, "slices do not share one ensemble");
    }
    if (!close_time(rs.s, rt.s) || !close_time(rs.t, st.s) || !close_time(st.t, rt.t)) {
        throw Error(ErrorCode::ContractViolation, "slice times do not chain");
    }
    if (!same_grid(rs.x_grid, st.z_grid) || !same_grid(rs.z_grid, rt.z_grid) || !same_grid(st.x_grid, rt.x_grid)) {
        throw Error(ErrorCode::GridMismatch, "slice grids do not chain");
    }
    if (!line_aligned(rs.t, rs.params.n)) throw Error(ErrorCode::MisalignedSplit, "split time not on a line");
    auto two = evolve(evolve(h, rs).h_t, st);
    auto one = evolve(h, rt);
    double gap = 0.0;
    for (std::size_t i = 0; i < one.h_t.size(); ++i) {
        gap = std::max(gap, std::abs(two.h_t.values()[i].value() - one.h_t.values()[i].value()));
    }
    return gap;
}

ComparisonVerdict argmax_comparison_check(const EvolvedProfile& h, const EvolvedProfile& ht, std::size_t xi,
                                          std::size_t yi) {
    if (!same_grid(h.h_t.grid(), ht.h_t.grid())) throw Error(ErrorCode::GridMismatch, "profiles on different grids");
    if (!(xi < yi) || yi >= h.h_t.size()) throw Error(ErrorCode::BadOrder, "need x < y on the grid");
    ComparisonVerdict v;
    v.hypothesis_held = h.argmax[yi] <= ht.argmax[xi];
    const double lhs = h.h_t.values()[yi].value() - h.h_t.values()[xi].value();
    const double rhs = ht.h_t.values()[yi].value() - ht.h_t.values()[xi].value();
    v.slack = rhs - lhs;
    v.inequality_held = v.slack >= -kTol;
    return v;
}

ComparisonVerdict argmax_comparison_check(const GridFunction& h, const GridFunction& ht, const LandscapeSlice& slice,
                                          std::size_t xi, std::size_t yi) {
    if (!same_grid(h.grid(), ht.grid())) throw Error(ErrorCode::GridMismatch, "profiles on different grids");
    return argmax_comparison_check(evolve(h, slice), evolve(ht, slice), xi, yi);
}

bool increments_ordered(const GridFunction& h, const GridFunction& ht, double tol) {
    if (!same_grid(h.grid(), ht.grid())) throw Error(ErrorCode::GridMismatch, "profiles on different grids");
    auto a = h.dense();
    auto b = ht.dense();
    const std::size_t n = a.size();
    bool all_finite = true;
    for (std::size_t i = 0; i < n; ++i) all_finite &= std::isfinite(a[i]) && std::isfinite(b[i]);
    if (all_finite) {
        double run = kNegInf;
        for (std::size_t y = 0; y < n; ++y) {
            const double d = b[y] - a[y];
            if (run - d > tol) return false;
            run = std::max(run, d);
        }
        return true;
    }
    // h(y) + h~(x) <= h~(y) + h(x) for x < y, -inf absorbing
    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = x + 1; y < n; ++y) {
            const double lhs = a[y] + b[x];
            const double rhs = b[y] + a[x];
            if (lhs == kNegInf) continue;
            if (rhs == kNegInf || lhs - rhs > tol) return false;
        }
    }
    return true;
}

AttractivenessVerdict increment_order_violation(const EvolvedProfile& lower, const EvolvedProfile& upper,
                                                std::size_t from, std::size_t to) {
    const auto& a = lower.h_t.values();
    const auto& b = upper.h_t.values();
    to = std::min(to, a.size() - 1);
    AttractivenessVerdict v;
    double run = kNegInf;
    for (std::size_t y = from; y <= to; ++y) {
        const double d = b[y].value() - a[y].value();
        if (y > from) v.max_violation = std::max(v.max_violation, run - d);
        run = std::max(run, d);
    }
    v.held = v.max_violation <= kTol;
    return v;
}

AttractivenessVerdict attractiveness_check(const GridFunction& h, const GridFunction& ht, const LandscapeSlice& slice) {
    if (!increments_ordered(h, ht)) {
        throw Error(ErrorCode::HypothesisFailed, "initial increments are not ordered");
    }
    return increment_order_violation(evolve(h, slice), evolve(ht, slice));
}

GridFunction drifted(const GridFunction& b, double mu) {
    std::vector<ExtendedValue> v = b.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].is_finite()) v[i] = ExtendedValue::finite(v[i].value() + mu * b.grid().point(i));
    }
    return GridFunction(b.grid(), std::move(v));
}

SandwichResult sandwich_from_profiles(const EvolvedProfile& h, const EvolvedProfile& plus,
                                      const EvolvedProfile& minus, double a) {
    const Grid& g = h.h_t.grid();
    if (!same_grid(g, plus.h_t.grid()) || !same_grid(g, minus.h_t.grid())) {
        throw Error(ErrorCode::GridMismatch, "profiles on different grids");
    }
    const std::size_t ia = window_index(g, a);
    const std::size_t ima = window_index(g, -a);
    const std::size_t i0 = window_index(g, 0.0);
    auto val = [](const EvolvedProfile& p, std::size_t i) { return p.h_t.values()[i].value(); };
    auto delta = [&](const EvolvedProfile& p, std::size_t i) { return val(p, i) - val(p, i0); };

    SandwichResult r;
    r.event_held = h.argmax[ia] <= plus.argmax[ima] && h.argmax[ima] >= minus.argmax[ia];
    r.i_t = delta(plus, ia) - delta(minus, ia) + delta(minus, ima) - delta(plus, ima);
    if (r.event_held) {
        auto lo = increment_order_violation(minus, h, ima, ia);
        auto hi = increment_order_violation(h, plus, ima, ia);
        r.max_violation = std::max(lo.max_violation, hi.max_violation);
        r.sandwich_held = lo.held && hi.held;
    }
    return r;
}

SandwichResult sandwich_event(const GridFunction& h, const GridFunction& b, double mu, double a,
                              const LandscapeSlice& slice) {
    if (!slice.x_grid.covers(a) || !slice.x_grid.covers(-a)) {
        throw Error(ErrorCode::WindowTooSmall, "+-a outside the slice x grid");
    }
    auto ph = evolve(h, slice);
    auto pp = evolve(drifted(b, mu), slice);
    auto pm = evolve(drifted(b, -mu), slice);
    return sandwich_from_profiles(ph, pp, pm, a);
}

std::vector<double> argmax_tail(std::span<const EvolvedProfile> samples, const Grid& z_grid, std::size_t xi,
                                std::span<const double> thresholds, double t) {
    std::vector<double> out(thresholds.size(), 0.0);
    if (samples.empty()) return out;
    const double scale = std::pow(t, 2.0 / 3.0);
    for (const auto& p : samples) {
        if (xi >= p.argmax.size()) throw Error(ErrorCode::IndexOutOfRange, "x index");
        const double z = std::abs(z_grid.point(p.argmax[xi]));
        for (std::size_t k = 0; k < thresholds.size(); ++k) {
            if (z > thresholds[k] * scale) out[k] += 1.0;
        }
    }
    for (double& v : out) v /= static_cast<double>(samples.size());
    return out;
}

}  // namespace kpz
