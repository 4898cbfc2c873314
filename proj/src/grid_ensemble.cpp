#include "kpz/grid_ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "kpz/philox.hpp"

namespace kpz {

std::size_t Grid::nearest_index(double x) const {
    double r = std::round((x - origin) / step);
    if (!(r > 0.0)) return 0;
    if (r >= static_cast<double>(count - 1)) return count - 1;
    return static_cast<std::size_t>(r);
}

bool Grid::covers(double x) const {
    double half = 0.5 * step * (1.0 + 1e-9);
    return x >= front() - half && x <= back() + half;
}

Grid make_grid(double origin, double step, long long count) {
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw Error(ErrorCode::NonPositiveStep, "grid step must be positive");
    }
    if (count < 2) throw Error(ErrorCode::CountTooSmall, "grid needs at least 2 points");
    if (!std::isfinite(origin)) throw Error(ErrorCode::ContractViolation, "grid origin not finite");
    return Grid{origin, step, static_cast<std::size_t>(count)};
}

bool same_grid(const Grid& a, const Grid& b) {
    if (a.count != b.count) return false;
    double scale = std::max({1.0, std::abs(a.origin), std::abs(a.back())});
    return std::abs(a.origin - b.origin) <= 1e-12 * scale &&
           std::abs(a.step - b.step) <= 1e-12 * a.step;
}

ExtendedValue ExtendedValue::finite(double v) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::ContractViolation, "finite extended value must be a finite number");
    }
    return ExtendedValue(Tag::Finite, v);
}

ExtendedValue ExtendedValue::from_double(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return minus_infinity();
    return finite(v);
}

double ExtendedValue::value() const {
    if (tag_ != Tag::Finite) throw Error(ErrorCode::ContractViolation, "value of MINUS_INFINITY");
    return value_;
}

double ExtendedValue::as_double() const {
    return tag_ == Tag::Finite ? value_ : -std::numeric_limits<double>::infinity();
}

bool ExtendedValue::operator<(const ExtendedValue& o) const {
    if (tag_ == Tag::MinusInfinity) return o.tag_ == Tag::Finite;
    if (o.tag_ == Tag::MinusInfinity) return false;
    return value_ < o.value_;
}

GridFunction::GridFunction(Grid grid, std::vector<ExtendedValue> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.count) {
        throw Error(ErrorCode::ContractViolation, "grid function length does not match grid");
    }
    bool any = std::any_of(values_.begin(), values_.end(), [](const ExtendedValue& v) { return v.is_finite(); });
    if (!any) throw Error(ErrorCode::ContractViolation, "grid function has no finite value");
}

GridFunction GridFunction::from_dense(Grid grid, std::span<const double> values) {
    std::vector<ExtendedValue> v;
    v.reserve(values.size());
    for (double x : values) v.push_back(ExtendedValue::from_double(x));
    return GridFunction(grid, std::move(v));
}

ExtendedValue GridFunction::eval(std::size_t i) const {
    if (i >= values_.size()) throw Error(ErrorCode::IndexOutOfRange, "index " + std::to_string(i));
    return values_[i];
}

std::vector<double> GridFunction::dense() const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i].as_double();
    return out;
}

GridFunction GridFunction::shift_values(double c) const {
    std::vector<ExtendedValue> v = values_;
    for (auto& e : v) {
        if (e.is_finite()) e = ExtendedValue::finite(e.value() + c);
    }
    return GridFunction(grid_, std::move(v));
}

void write_csv(std::ostream& os, const GridFunction& f) {
    std::ostringstream line;
    line.precision(17);
    os << "x,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        line.str("");
        line << f.grid().point(i) << ',';
        if (f.values()[i].is_finite()) {
            line << f.values()[i].value();
        } else {
            line << "-inf";
        }
        os << line.str() << '\n';
    }
}

std::string RngKey::describe() const {
    std::ostringstream os;
    os << "philox4x64-10 seed=" << master_seed << " stream=" << stream_id << " substream=" << substream_id;
    return os.str();
}

void fill_normals(const RngKey& key, std::uint64_t lane, std::span<double> out) {
    PhiloxStream eng({key.master_seed, 0}, key.stream_id, key.substream_id, lane);
    boost::random::normal_distribution<double> normal;
    for (double& x : out) x = normal(eng);
}

void sample_brownian_line(const RngKey& key, std::uint64_t lane, double step, std::span<double> out) {
    if (out.empty()) return;
    PhiloxStream eng({key.master_seed, 0}, key.stream_id, key.substream_id, lane);
    boost::random::normal_distribution<double> normal;
    const double sd = std::sqrt(step);
    double acc = 0.0;
    out[0] = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
        acc += sd * normal(eng);
        out[i] = acc;
    }
}

LineEnsemble::LineEnsemble(Grid grid, std::size_t k, std::vector<double> data, std::string seed_record)
    : grid_(grid), k_(k), data_(std::move(data)), seed_record_(std::move(seed_record)) {
    if (k_ < 1) throw Error(ErrorCode::BadK, "ensemble needs at least one line");
    if (data_.size() != k_ * grid_.count) {
        throw Error(ErrorCode::ContractViolation, "ensemble storage size mismatch");
    }
}

LineEnsemble LineEnsemble::from_lines(Grid grid, const std::vector<std::vector<double>>& lines) {
    if (lines.empty()) throw Error(ErrorCode::BadK, "ensemble needs at least one line");
    std::vector<double> data;
    data.reserve(lines.size() * grid.count);
    for (const auto& l : lines) {
        if (l.size() != grid.count) throw Error(ErrorCode::ContractViolation, "line length mismatch");
        data.insert(data.end(), l.begin(), l.end());
    }
    return LineEnsemble(grid, lines.size(), std::move(data), "explicit");
}

std::span<const double> LineEnsemble::line(std::size_t j) const {
    if (j < 1 || j > k_) throw Error(ErrorCode::LineOutOfRange, "line " + std::to_string(j));
    return {data_.data() + (j - 1) * grid_.count, grid_.count};
}

LineEnsemble sample_line_ensemble(const Grid& grid, long long k, const RngKey& key) {
    if (k < 1) throw Error(ErrorCode::BadK, "k must be at least 1");
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> data(kk * grid.count);
    for (std::size_t j = 1; j <= kk; ++j) {
        sample_brownian_line(key, j, grid.step, {data.data() + (j - 1) * grid.count, grid.count});
    }
    return LineEnsemble(grid, kk, std::move(data), key.describe());
}

GridFunction sample_two_sided_bm(const Grid& grid, double diffusion, double drift, const RngKey& key) {
    if (!(diffusion >= 0.0)) throw Error(ErrorCode::ContractViolation, "diffusion must be nonnegative");
    if (!grid.covers(0.0)) throw Error(ErrorCode::OriginNotOnGrid, "grid does not contain 0");
    const std::size_t pin = grid.nearest_index(0.0);
    const double x0 = grid.point(pin);
    std::vector<double> v(grid.count, 0.0);
    if (diffusion > 0.0) {
        std::vector<double> right(grid.count - pin);
        std::vector<double> left(pin + 1);
        sample_brownian_line(key, 0, diffusion * grid.step, right);
        sample_brownian_line(key, 1, diffusion * grid.step, left);
        for (std::size_t i = pin; i < grid.count; ++i) v[i] = right[i - pin];
        for (std::size_t i = 0; i < pin; ++i) v[i] = left[pin - i];
    }
    for (std::size_t i = 0; i < grid.count; ++i) v[i] += drift * (grid.point(i) - x0);
    v[pin] = 0.0;
    return GridFunction::from_dense(grid, v);
}

}  // namespace kpz
