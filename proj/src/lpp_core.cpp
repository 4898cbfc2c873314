#include "kpz/lpp_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kpz {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_endpoint(const LineEnsemble& ens, LppEndpoint p) {
    if (p.line < 1 || p.line > ens.k()) {
        throw Error(ErrorCode::LineOutOfRange, "line " + std::to_string(p.line) + " outside 1.." + std::to_string(ens.k()));
    }
    if (p.space_index >= ens.grid().count) {
        throw Error(ErrorCode::IndexOutOfRange, "space index " + std::to_string(p.space_index));
    }
}

void check_pair(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end) {
    check_endpoint(ens, start);
    check_endpoint(ens, end);
    if (start.space_index > end.space_index || start.line < end.line) {
        throw Error(ErrorCode::BadOrder, "start must be left of and not above end");
    }
}

// Forward sweep restricted to [lo, hi]; returns v over that range on end_line.
std::vector<double> forward(const LineEnsemble& ens, LppEndpoint start, std::size_t end_line, std::size_t hi,
                            std::vector<std::vector<double>>* keep) {
    const std::size_t lo = start.space_index;
    const std::size_t w = hi - lo + 1;
    std::vector<double> v(w, kNegInf);
    v[0] = 0.0;
    for (std::size_t j = start.line;; --j) {
        auto line = ens.line(j).subspan(lo, w);
        sweep_line(line, v);
        if (keep) keep->push_back(v);
        if (j == end_line) break;
    }
    return v;
}

}  // namespace

void sweep_line(std::span<const double> line, std::span<double> v) {
    double run = kNegInf;
    const std::size_t w = v.size();
    for (std::size_t i = 0; i < w; ++i) {
        const double c = v[i] - line[i];
        run = c > run ? c : run;
        v[i] = line[i] + run;
    }
}

void sweep_line(std::span<const double> line, std::span<double> v, std::span<std::int64_t> origin) {
    double run = kNegInf;
    std::int64_t ro = -1;
    const std::size_t w = v.size();
    for (std::size_t i = 0; i < w; ++i) {
        const double c = v[i] - line[i];
        if (c > run || (c == run && origin[i] > ro)) {
            run = c;
            ro = origin[i];
        }
        v[i] = line[i] + run;
        origin[i] = ro;
    }
}

void sweep_line_backward(std::span<const double> line, std::span<double> w) {
    double run = kNegInf;
    for (std::size_t i = w.size(); i-- > 0;) {
        const double c = line[i] + w[i];
        run = c > run ? c : run;
        w[i] = run - line[i];
    }
}

LppValue last_passage(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, bool with_path) {
    check_pair(ens, start, end);
    auto v = forward(ens, start, end.line, end.space_index, nullptr);
    LppValue out;
    out.value = v.back();
    if (with_path) out.path = geodesic(ens, start, end);
    return out;
}

std::vector<double> last_passage_profile(const LineEnsemble& ens, LppEndpoint start, std::size_t end_line) {
    check_endpoint(ens, start);
    check_endpoint(ens, {start.space_index, end_line});
    if (start.line < end_line) throw Error(ErrorCode::BadOrder, "end line above start line");
    const std::size_t n = ens.grid().count;
    auto v = forward(ens, start, end_line, n - 1, nullptr);
    std::vector<double> out(n, kNegInf);
    std::copy(v.begin(), v.end(), out.begin() + static_cast<std::ptrdiff_t>(start.space_index));
    return out;
}

std::vector<double> last_passage_profile_to(const LineEnsemble& ens, std::size_t start_line, LppEndpoint end) {
    check_endpoint(ens, end);
    check_endpoint(ens, {end.space_index, start_line});
    if (start_line < end.line) throw Error(ErrorCode::BadOrder, "start line above end line");
    const std::size_t w = end.space_index + 1;
    std::vector<double> acc(w, kNegInf);
    acc[w - 1] = 0.0;
    for (std::size_t j = end.line; j <= start_line; ++j) {
        sweep_line_backward(ens.line(j).subspan(0, w), acc);
    }
    std::vector<double> out(ens.grid().count, kNegInf);
    std::copy(acc.begin(), acc.end(), out.begin());
    return out;
}

GeodesicPath geodesic(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end) {
    check_pair(ens, start, end);
    std::vector<std::vector<double>> layers;
    forward(ens, start, end.line, end.space_index, &layers);
    // layers[q] holds V on line start.line - q.
    const std::size_t lo = start.space_index;
    const std::size_t jumps = start.line - end.line;
    GeodesicPath path;
    path.jump_indices.assign(jumps, 0);
    std::size_t x = end.space_index;
    for (std::size_t q = jumps; q-- > 0;) {
        // drop from line (start.line - q) onto line (start.line - q - 1)
        const auto& prev = layers[q];
        auto line = ens.line(start.line - q - 1);
        double best = kNegInf;
        std::size_t arg = lo;
        for (std::size_t i = lo; i <= x; ++i) {
            const double c = prev[i - lo] - line[i];
            if (c >= best) {
                best = c;
                arg = i;
            }
        }
        path.jump_indices[q] = arg;
        x = arg;
    }
    return path;
}

double path_value(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, const GeodesicPath& path) {
    check_pair(ens, start, end);
    const std::size_t jumps = start.line - end.line;
    if (path.jump_indices.size() != jumps) throw Error(ErrorCode::ContractViolation, "path length mismatch");
    double total = 0.0;
    std::size_t enter = start.space_index;
    for (std::size_t q = 0; q <= jumps; ++q) {
        const std::size_t exit = q < jumps ? path.jump_indices[q] : end.space_index;
        if (exit < enter || exit > end.space_index) throw Error(ErrorCode::ContractViolation, "jump indices not monotone");
        auto line = ens.line(start.line - q);
        total += line[exit] - line[enter];
        enter = exit;
    }
    return total;
}

namespace {

double enumerate(const LineEnsemble& ens, std::size_t line, std::size_t enter, std::size_t stop_line,
                 std::size_t end_index) {
    auto l = ens.line(line);
    if (line == stop_line) return l[end_index] - l[enter];
    double best = kNegInf;
    for (std::size_t exit = enter; exit <= end_index; ++exit) {
        double v = (l[exit] - l[enter]) + enumerate(ens, line - 1, exit, stop_line, end_index);
        best = std::max(best, v);
    }
    return best;
}

}  // namespace

double brute_force_last_passage(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end) {
    check_pair(ens, start, end);
    const double width = static_cast<double>(end.space_index - start.space_index + 1);
    const double jumps = static_cast<double>(start.line - end.line);
    // multisets of `jumps` jump points among `width` positions
    const double paths = std::exp(std::lgamma(width + jumps) - std::lgamma(jumps + 1.0) - std::lgamma(width));
    if (paths > 1e6 * (1.0 + 1e-9)) {
        throw Error(ErrorCode::InstanceTooLarge, "brute force over " + std::to_string(paths) + " paths");
    }
    return enumerate(ens, start.line, start.space_index, end.line, end.space_index);
}

double composition_identity_gap(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, std::size_t mid_line) {
    check_pair(ens, start, end);
    if (mid_line < end.line || mid_line > start.line) {
        throw Error(ErrorCode::BadOrder, "mid line outside [end.line, start.line]");
    }
    const double whole = last_passage(ens, start, end).value;
    auto left = last_passage_profile(ens, start, mid_line);
    auto right = last_passage_profile_to(ens, mid_line, end);
    double best = kNegInf;
    for (std::size_t z = start.space_index; z <= end.space_index; ++z) {
        best = std::max(best, left[z] + right[z]);
    }
    return std::abs(whole - best);
}

}  // namespace kpz
