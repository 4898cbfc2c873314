#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "kpz/error.hpp"

namespace kpz {

/// Uniform lattice origin + i*step, 0 <= i < count.
struct Grid {
    double origin = 0.0;
    double step = 1.0;
    std::size_t count = 2;

    double point(std::size_t i) const { return origin + static_cast<double>(i) * step; }
    double front() const { return origin; }
    double back() const { return point(count - 1); }

    // Index of the point closest to x, clamped to the grid.
    std::size_t nearest_index(double x) const;
    // True when x is within step/2 of the closed hull of the points.
    bool covers(double x) const;

    bool operator==(const Grid& other) const = default;
};

Grid make_grid(double origin, double step, long long count);

// Grids that agree up to a relative rounding tolerance.
bool same_grid(const Grid& a, const Grid& b);

class ExtendedValue {
public:
    enum class Tag { Finite, MinusInfinity };

    static ExtendedValue finite(double v);
    static ExtendedValue minus_infinity() { return ExtendedValue(Tag::MinusInfinity, 0.0); }
    // -inf maps to MINUS_INFINITY; NaN and +inf are rejected.
    static ExtendedValue from_double(double v);

    Tag tag() const { return tag_; }
    bool is_finite() const { return tag_ == Tag::Finite; }
    double value() const;
    double as_double() const;

    bool operator==(const ExtendedValue& o) const {
        return tag_ == o.tag_ && (tag_ == Tag::MinusInfinity || value_ == o.value_);
    }
    bool operator<(const ExtendedValue& o) const;

private:
    ExtendedValue(Tag tag, double v) : tag_(tag), value_(v) {}

    Tag tag_;
    double value_;
};

class GridFunction {
public:
    GridFunction(Grid grid, std::vector<ExtendedValue> values);
    // Dense form, -inf entries become MINUS_INFINITY.
    static GridFunction from_dense(Grid grid, std::span<const double> values);

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<ExtendedValue>& values() const { return values_; }

    ExtendedValue eval(std::size_t i) const;
    std::vector<double> dense() const;
    GridFunction shift_values(double c) const;

private:
    Grid grid_;
    std::vector<ExtendedValue> values_;
};

void write_csv(std::ostream& os, const GridFunction& f);

/// (master_seed, stream_id, substream_id) names one independent family of streams.
struct RngKey {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t substream_id = 0;

    RngKey with_substream(std::uint64_t sub) const { return {master_seed, stream_id, sub}; }
    std::string describe() const;
    bool operator==(const RngKey&) const = default;
};

// Standard normals for (key, lane), drawn in order.
void fill_normals(const RngKey& key, std::uint64_t lane, std::span<double> out);

// Cumulative Brownian walk pinned to 0 at index 0, variance `step` per increment.
void sample_brownian_line(const RngKey& key, std::uint64_t lane, double step, std::span<double> out);

class LineEnsemble {
public:
    LineEnsemble(Grid grid, std::size_t k, std::vector<double> data, std::string seed_record);
    static LineEnsemble from_lines(Grid grid, const std::vector<std::vector<double>>& lines);

    const Grid& grid() const { return grid_; }
    std::size_t k() const { return k_; }
    // Line j, 1-based; j = 1 is the top line.
    std::span<const double> line(std::size_t j) const;
    const std::string& seed_record() const { return seed_record_; }

private:
    Grid grid_;
    std::size_t k_;
    std::vector<double> data_;
    std::string seed_record_;
};

// Line j uses lane j of `key`.
LineEnsemble sample_line_ensemble(const Grid& grid, long long k, const RngKey& key);

GridFunction sample_two_sided_bm(const Grid& grid, double diffusion, double drift, const RngKey& key);

}  // namespace kpz
