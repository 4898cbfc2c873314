#include "kpz/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "kpz/lpp_core.hpp"

namespace kpz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxMaterialized = 4e8;

nlohmann::json grid_json(const Grid& g) {
    return {{"origin", g.origin}, {"step", g.step}, {"count", g.count}};
}

}  // namespace

ScalingParams::ScalingParams(double n_) : n(n_) {
    if (!(n_ >= 1.0) || !std::isfinite(n_)) {
        throw Error(ErrorCode::ContractViolation, "scaling parameter n must be >= 1");
    }
}

double ScalingParams::cube_root() const { return std::cbrt(n); }
double ScalingParams::sixth_root() const { return std::pow(n, 1.0 / 6.0); }
long long ScalingParams::lines_per_unit_time() const { return static_cast<long long>(std::floor(n)); }
double ScalingParams::space_map(double x, double s) const { return s + 2.0 * x / cube_root(); }
long long ScalingParams::line_map(double s) const { return -floor_sn(s, n); }

long long floor_sn(double s, double n) {
    const double v = s * n;
    return static_cast<long long>(std::floor(v + 1e-9 * std::max(1.0, std::abs(v))));
}

bool line_aligned(double s, double n) {
    const double v = s * n;
    return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::abs(v));
}

double rescale_to_landscape(double raw, double n, double x, double s, double y, double t) {
    if (!(s < t)) throw Error(ErrorCode::BadTimeOrder, "need s < t");
    if (!(n >= 1.0)) throw Error(ErrorCode::ContractViolation, "n must be >= 1");
    const double n6 = std::pow(n, 1.0 / 6.0);
    return n6 * (raw - 2.0 * (t - s) * std::sqrt(n) - 2.0 * (y - x) * n6);
}

ExtendedValue LandscapeSlice::entry(std::size_t zi, std::size_t xi) const {
    if (zi >= z_grid.count || xi >= x_grid.count) throw Error(ErrorCode::IndexOutOfRange, "slice entry");
    return ExtendedValue::from_double(at(zi, xi));
}

void write_csv(std::ostream& os, const LandscapeSlice& slice) {
    std::ostringstream o;
    o.precision(17);
    o << "# n=" << slice.params.n << " s=" << slice.s << " t=" << slice.t << " z_grid=" << slice.z_grid.origin << ':'
      << slice.z_grid.step << ':' << slice.z_grid.count << " x_grid=" << slice.x_grid.origin << ':'
      << slice.x_grid.step << ':' << slice.x_grid.count << " rng=" << slice.seed_record << '\n';
    o << "z_index,x_index,z,x,value\n";
    for (std::size_t zi = 0; zi < slice.z_grid.count; ++zi) {
        for (std::size_t xi = 0; xi < slice.x_grid.count; ++xi) {
            o << zi << ',' << xi << ',' << slice.z_grid.point(zi) << ',' << slice.x_grid.point(xi) << ',';
            double v = slice.at(zi, xi);
            if (std::isfinite(v)) {
                o << v;
            } else {
                o << "-inf";
            }
            o << '\n';
        }
    }
    os << o.str();
}

nlohmann::json to_json(const LandscapeSlice& slice) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t zi = 0; zi < slice.z_grid.count; ++zi) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t xi = 0; xi < slice.x_grid.count; ++xi) {
            double v = slice.at(zi, xi);
            if (std::isfinite(v)) {
                row.push_back(v);
            } else {
                row.push_back("-inf");
            }
        }
        rows.push_back(std::move(row));
    }
    return {{"n", slice.params.n},          {"s", slice.s},
            {"t", slice.t},                 {"z_grid", grid_json(slice.z_grid)},
            {"x_grid", grid_json(slice.x_grid)}, {"seed_record", slice.seed_record},
            {"values", std::move(rows)}};
}

CoupledLandscape::CoupledLandscape(double n, double s_min, double s_max, double lo, double hi, double fine_step,
                                   RngKey key, bool materialize)
    : params_(n), s_min_(s_min), s_max_(s_max), lo_(lo), hi_(hi), fine_step_(fine_step), key_(key) {
    if (!(s_min < s_max)) throw Error(ErrorCode::BadTimeOrder, "need s_min < s_max");
    if (!(fine_step > 0.0)) throw Error(ErrorCode::NonPositiveStep, "landscape resolution must be positive");
    if (!(lo <= hi)) throw Error(ErrorCode::WindowTooSmall, "empty spatial window");
    delta_ = 2.0 * fine_step_ / params_.cube_root();
    k_ = static_cast<std::size_t>(floor_sn(s_max, n) - floor_sn(s_min, n) + 1);
    const auto shift = std::llround((s_max - s_min) / delta_);
    width_ = static_cast<std::size_t>(shift + std::llround((hi - lo) / fine_step_) + 1);
    if (width_ < 2) width_ = 2;
    if (materialize) {
        if (static_cast<double>(k_) * static_cast<double>(width_) > kMaxMaterialized) {
            throw Error(ErrorCode::ContractViolation, "ensemble too large to hold in memory");
        }
        auto ens = std::make_shared<const LineEnsemble>(
            sample_line_ensemble(ensemble_grid(), static_cast<long long>(k_), key_));
        ens_ = ens;
        token_ = ens;
    } else {
        token_ = std::make_shared<const int>(0);
    }
}

Grid CoupledLandscape::ensemble_grid() const {
    return Grid{params_.space_map(lo_, s_min_), delta_, width_};
}

std::size_t CoupledLandscape::line_of(double s) const {
    const double tol = 1e-9 * std::max(1.0, std::abs(s_max_));
    if (s < s_min_ - tol || s > s_max_ + tol) {
        throw Error(ErrorCode::WindowTooSmall, "time outside landscape range");
    }
    return static_cast<std::size_t>(floor_sn(s_max_, params_.n) - floor_sn(s, params_.n) + 1);
}

std::size_t CoupledLandscape::index_of(double x, double s) const {
    line_of(s);
    const long long i = std::llround((s - s_min_) / delta_) + std::llround((x - lo_) / fine_step_);
    if (i < 0 || i >= static_cast<long long>(width_)) {
        std::ostringstream os;
        os << "point x=" << x << " at time " << s << " falls outside the ensemble window";
        throw Error(ErrorCode::WindowTooSmall, os.str());
    }
    return static_cast<std::size_t>(i);
}

Grid CoupledLandscape::full_grid(double s, std::size_t i_lo, std::size_t i_hi) const {
    line_of(s);
    if (i_hi <= i_lo || i_hi >= width_) throw Error(ErrorCode::WindowTooSmall, "bad index range for full grid");
    const long long shift = std::llround((s - s_min_) / delta_);
    const double origin = lo_ + static_cast<double>(static_cast<long long>(i_lo) - shift) * fine_step_;
    return Grid{origin, fine_step_, i_hi - i_lo + 1};
}

const LineEnsemble& CoupledLandscape::ensemble() const {
    if (!ens_) throw Error(ErrorCode::ContractViolation, "landscape was built without a stored ensemble");
    return *ens_;
}

void CoupledLandscape::fill_line(std::size_t j, std::size_t from, std::span<double> out) const {
    if (from + out.size() > width_) throw Error(ErrorCode::IndexOutOfRange, "line range");
    if (ens_) {
        auto l = ens_->line(j).subspan(from, out.size());
        std::copy(l.begin(), l.end(), out.begin());
        return;
    }
    if (j < 1 || j > k_) throw Error(ErrorCode::LineOutOfRange, "line " + std::to_string(j));
    if (from == 0) {
        sample_brownian_line(key_, j, delta_, out);
        return;
    }
    std::vector<double> full(from + out.size());
    sample_brownian_line(key_, j, delta_, full);
    std::copy(full.begin() + static_cast<std::ptrdiff_t>(from), full.end(), out.begin());
}

double CoupledLandscape::value(double x, double s, double y, double t) const {
    if (!(s < t)) throw Error(ErrorCode::BadTimeOrder, "need s < t");
    const std::size_t ix = index_of(x, s);
    const std::size_t iy = index_of(y, t);
    if (ix > iy) return kNegInf;
    const double raw = last_passage(ensemble(), {ix, line_of(s)}, {iy, line_of(t)}).value;
    return rescale_to_landscape(raw, params_.n, x, s, y, t);
}

namespace {

struct LineBlock {
    std::size_t base = 0;
    std::size_t w = 0;
    std::size_t top = 0;     // line of the later time
    std::size_t bottom = 0;  // line of the earlier time
    std::vector<double> data;

    std::span<const double> line(std::size_t j) const { return {data.data() + (j - top) * w, w}; }
};

LineBlock gather(const CoupledLandscape& L, std::size_t top, std::size_t bottom, std::size_t base, std::size_t hi) {
    LineBlock b;
    b.base = base;
    b.w = hi - base + 1;
    b.top = top;
    b.bottom = bottom;
    b.data.resize((bottom - top + 1) * b.w);
    for (std::size_t j = top; j <= bottom; ++j) {
        L.fill_line(j, base, {b.data.data() + (j - top) * b.w, b.w});
    }
    return b;
}

}  // namespace

LandscapeSlice CoupledLandscape::slice(double s, const Grid& z_grid, double t, const Grid& x_grid) const {
    if (!(s < t)) throw Error(ErrorCode::BadTimeOrder, "need s < t");
    std::vector<std::size_t> iz(z_grid.count), ix(x_grid.count);
    for (std::size_t k = 0; k < z_grid.count; ++k) iz[k] = index_of(z_grid.point(k), s);
    for (std::size_t k = 0; k < x_grid.count; ++k) ix[k] = index_of(x_grid.point(k), t);
    const std::size_t ls = line_of(s), lt = line_of(t);
    const std::size_t base = iz.front();
    const std::size_t hi = std::max(ix.back(), base);
    LineBlock block = gather(*this, lt, ls, base, hi);

    LandscapeSlice out;
    out.s = s;
    out.t = t;
    out.z_grid = z_grid;
    out.x_grid = x_grid;
    out.params = params_;
    out.seed_record = key_.describe();
    out.source = token_;
    out.values.assign(z_grid.count * x_grid.count, kNegInf);
    const double n = params_.n;

    if (z_grid.count <= x_grid.count) {
        std::vector<double> v;
        for (std::size_t k = 0; k < z_grid.count; ++k) {
            if (iz[k] > hi) continue;
            const std::size_t off = iz[k] - base;
            v.assign(block.w - off, kNegInf);
            v[0] = 0.0;
            for (std::size_t j = ls;; --j) {
                sweep_line(block.line(j).subspan(off), v);
                if (j == lt) break;
            }
            for (std::size_t m = 0; m < x_grid.count; ++m) {
                if (ix[m] < iz[k]) continue;
                out.values[k * x_grid.count + m] =
                    rescale_to_landscape(v[ix[m] - iz[k]], n, z_grid.point(k), s, x_grid.point(m), t);
            }
        }
    } else {
        std::vector<double> w;
        for (std::size_t m = 0; m < x_grid.count; ++m) {
            if (ix[m] < base) continue;
            const std::size_t len = ix[m] - base + 1;
            w.assign(len, kNegInf);
            w[len - 1] = 0.0;
            for (std::size_t j = lt; j <= ls; ++j) sweep_line_backward(block.line(j).subspan(0, len), w);
            for (std::size_t k = 0; k < z_grid.count; ++k) {
                if (iz[k] > ix[m]) continue;
                out.values[k * x_grid.count + m] =
                    rescale_to_landscape(w[iz[k] - base], n, z_grid.point(k), s, x_grid.point(m), t);
            }
        }
    }
    return out;
}

std::vector<double> CoupledLandscape::column_to(const Grid& z_grid, double s, double x, double t) const {
    if (!(s < t)) throw Error(ErrorCode::BadTimeOrder, "need s < t");
    std::vector<std::size_t> iz(z_grid.count);
    for (std::size_t k = 0; k < z_grid.count; ++k) iz[k] = index_of(z_grid.point(k), s);
    const std::size_t ixx = index_of(x, t);
    const std::size_t ls = line_of(s), lt = line_of(t);
    std::vector<double> out(z_grid.count, kNegInf);
    if (ixx < iz.front()) return out;
    const std::size_t base = iz.front();
    const std::size_t len = ixx - base + 1;
    std::vector<double> w(len, kNegInf), buf(len);
    w[len - 1] = 0.0;
    for (std::size_t j = lt; j <= ls; ++j) {
        fill_line(j, base, buf);
        sweep_line_backward(buf, w);
    }
    for (std::size_t k = 0; k < z_grid.count; ++k) {
        if (iz[k] > ixx) continue;
        out[k] = rescale_to_landscape(w[iz[k] - base], params_.n, z_grid.point(k), s, x, t);
    }
    return out;
}

std::vector<std::vector<SweepCapture>> CoupledLandscape::sweep(const Grid& z_grid, double s, const Grid& x_grid,
                                                               const std::vector<SweepRequest>& requests) const {
    if (z_grid.step < fine_step_ * (1.0 - 1e-9)) {
        throw Error(ErrorCode::GridMismatch, "z grid is finer than the landscape resolution");
    }
    const double n = params_.n;
    const double n6 = params_.sixth_root();
    const std::size_t ls = line_of(s);
    std::vector<std::size_t> iz(z_grid.count);
    for (std::size_t k = 0; k < z_grid.count; ++k) iz[k] = index_of(z_grid.point(k), s);

    // distinct capture times across requests
    std::size_t last_line = ls;
    std::size_t hi = iz.back();
    for (const auto& r : requests) {
        if (r.initial.size() != z_grid.count) throw Error(ErrorCode::GridMismatch, "initial profile length");
        for (std::size_t q = 0; q < r.times.size(); ++q) {
            if (!(r.times[q] > s)) throw Error(ErrorCode::BadTimeOrder, "capture time must exceed start time");
            if (q > 0 && r.times[q] < r.times[q - 1]) throw Error(ErrorCode::BadTimeOrder, "capture times unsorted");
            last_line = std::min(last_line, line_of(r.times[q]));
            hi = std::max(hi, index_of(x_grid.back(), r.times[q]));
        }
    }
    const std::size_t base = iz.front();
    const std::size_t w = hi - base + 1;

    struct State {
        std::vector<double> v;
        std::vector<std::int64_t> o;
        std::size_t next = 0;
    };
    std::vector<State> st(requests.size());
    std::vector<std::vector<SweepCapture>> out(requests.size());
    for (std::size_t r = 0; r < requests.size(); ++r) {
        st[r].v.assign(w, kNegInf);
        st[r].o.assign(w, -1);
        for (std::size_t k = 0; k < z_grid.count; ++k) {
            const double h = requests[r].initial[k];
            if (h == kNegInf) continue;
            st[r].v[iz[k] - base] = h / n6 + 2.0 * z_grid.point(k) * n6;
            st[r].o[iz[k] - base] = static_cast<std::int64_t>(k);
        }
        out[r].reserve(requests[r].times.size());
    }

    std::vector<double> buf(w);
    for (std::size_t j = ls; j >= last_line; --j) {
        bool needed = false;
        for (std::size_t r = 0; r < requests.size(); ++r) needed |= st[r].next < requests[r].times.size();
        if (!needed) break;
        fill_line(j, base, buf);
        for (std::size_t r = 0; r < requests.size(); ++r) {
            auto& S = st[r];
            const auto& times = requests[r].times;
            if (S.next >= times.size()) continue;
            sweep_line(buf, S.v, S.o);
            while (S.next < times.size() && line_of(times[S.next]) == j) {
                const double t = times[S.next];
                SweepCapture cap;
                cap.t = t;
                cap.h.resize(x_grid.count);
                cap.origin.resize(x_grid.count);
                const double centre = 2.0 * (t - s) * std::sqrt(n);
                for (std::size_t m = 0; m < x_grid.count; ++m) {
                    const double x = x_grid.point(m);
                    const std::size_t i = index_of(x, t) - base;
                    const double v = S.v[i];
                    cap.h[m] = v == kNegInf ? kNegInf : n6 * (v - centre - 2.0 * x * n6);
                    cap.origin[m] = S.o[i];
                }
                out[r].push_back(std::move(cap));
                ++S.next;
            }
        }
        if (j == 1) break;
    }
    return out;
}

LandscapeSlice sample_landscape_slice(double n, double s, double t, const Grid& z_grid, const Grid& x_grid,
                                      const RngKey& key, int refine) {
    if (!(s < t)) throw Error(ErrorCode::BadTimeOrder, "need s < t");
    if (refine < 1) throw Error(ErrorCode::ContractViolation, "refine must be >= 1");
    const double fine = std::min(z_grid.step, x_grid.step) / refine;
    const double lo = std::min(z_grid.front(), x_grid.front());
    const double hi = std::max(z_grid.back(), x_grid.back());
    CoupledLandscape L(n, s, t, lo, hi, fine, key, true);
    return L.slice(s, z_grid, t, x_grid);
}

AirySheetSample airy_sheet(const LandscapeSlice& slice) {
    if (std::abs(slice.s) > 1e-12 || std::abs(slice.t - 1.0) > 1e-12) {
        throw Error(ErrorCode::WrongTimes, "Airy sheet needs a slice from time 0 to time 1");
    }
    AirySheetSample out{slice, {}};
    out.sheet.resize(slice.values.size());
    for (std::size_t zi = 0; zi < slice.z_grid.count; ++zi) {
        for (std::size_t xi = 0; xi < slice.x_grid.count; ++xi) {
            const double d = slice.z_grid.point(zi) - slice.x_grid.point(xi);
            out.sheet[zi * slice.x_grid.count + xi] = slice.at(zi, xi) + d * d;
        }
    }
    return out;
}

std::vector<LandscapeSlice> disjoint_time_slices(double n, const std::vector<std::pair<double, double>>& intervals,
                                                 const Grid& z_grid, const Grid& x_grid, const RngKey& key,
                                                 int refine) {
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        if (!(intervals[i].first < intervals[i].second)) throw Error(ErrorCode::BadTimeOrder, "interval order");
        for (std::size_t j = 0; j < i; ++j) {
            const double a = std::max(intervals[i].first, intervals[j].first);
            const double b = std::min(intervals[i].second, intervals[j].second);
            if (a < b) throw Error(ErrorCode::OverlappingIntervals, "time intervals overlap");
        }
    }
    std::vector<LandscapeSlice> out;
    out.reserve(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        out.push_back(sample_landscape_slice(n, intervals[i].first, intervals[i].second, z_grid, x_grid,
                                             key.with_substream(key.substream_id + i), refine));
    }
    return out;
}

CompositionReport composition_across_times(double n, double r, double s, double t, const Grid& x_grid,
                                           const Grid& y_grid, const RngKey& key, int refine,
                                           std::optional<Grid> middle) {
    if (!(r < s && s < t)) throw Error(ErrorCode::BadTimeOrder, "need r < s < t");
    if (!line_aligned(s, n)) throw Error(ErrorCode::MisalignedSplit, "split time does not fall on a line");
    if (refine < 1) throw Error(ErrorCode::ContractViolation, "refine must be >= 1");
    double fine = std::min(x_grid.step, y_grid.step) / refine;
    double lo = std::min(x_grid.front(), y_grid.front());
    double hi = std::max(x_grid.back(), y_grid.back());
    if (middle) {
        lo = std::min(lo, middle->front());
        hi = std::max(hi, middle->back());
    }
    CoupledLandscape L(n, r, t, lo, hi, fine, key, true);
    Grid mid = middle ? *middle : L.full_grid(s, L.index_of(x_grid.front(), r), L.index_of(y_grid.back(), t));
    auto a = L.slice(r, x_grid, s, mid);
    auto b = L.slice(s, mid, t, y_grid);
    auto c = L.slice(r, x_grid, t, y_grid);
    double gap = 0.0;
    for (std::size_t xi = 0; xi < x_grid.count; ++xi) {
        for (std::size_t yi = 0; yi < y_grid.count; ++yi) {
            double best = kNegInf;
            for (std::size_t zi = 0; zi < mid.count; ++zi) best = std::max(best, a.at(xi, zi) + b.at(zi, yi));
            const double direct = c.at(xi, yi);
            if (direct == kNegInf && best == kNegInf) continue;
            gap = std::max(gap, std::abs(direct - best));
        }
    }
    return {gap, mid};
}

}  // namespace kpz
