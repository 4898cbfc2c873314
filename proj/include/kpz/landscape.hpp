#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kpz/grid_ensemble.hpp"

namespace kpz {

struct ScalingParams {
    double n = 1.0;

    explicit ScalingParams(double n_);
    ScalingParams() = default;

    double cube_root() const;                      // n^{1/3}
    double sixth_root() const;                     // n^{1/6}
    long long lines_per_unit_time() const;         // floor(n)
    double space_map(double x, double s) const;    // s + 2x/n^{1/3}
    long long line_map(double s) const;            // -floor(s n)
};

// floor(s*n) with a small guard against representation error.
long long floor_sn(double s, double n);

double rescale_to_landscape(double raw, double n, double x, double s, double y, double t);

/// L[z][x] = L(z,s;x,t) on a pair of grids, all entries from one ensemble.
struct LandscapeSlice {
    double s = 0.0;
    double t = 1.0;
    Grid z_grid;
    Grid x_grid;
    std::vector<double> values;  // row-major in z; -inf marks "no admissible path"
    ScalingParams params;
    std::string seed_record;
    std::shared_ptr<const void> source;  // identity of the underlying ensemble

    double at(std::size_t zi, std::size_t xi) const { return values[zi * x_grid.count + xi]; }
    ExtendedValue entry(std::size_t zi, std::size_t xi) const;
};

void write_csv(std::ostream& os, const LandscapeSlice& slice);
nlohmann::json to_json(const LandscapeSlice& slice);

struct AirySheetSample {
    LandscapeSlice slice;
    std::vector<double> sheet;  // sheet[z][x] = L[z][x] + (z - x)^2

    double at(std::size_t zi, std::size_t xi) const { return sheet[zi * slice.x_grid.count + xi]; }
};

/// One profile read off a sweep: heights on the x grid and the rightmost source index.
struct SweepCapture {
    double t = 0.0;
    std::vector<double> h;
    std::vector<std::int64_t> origin;  // z-grid index, -1 if no source reaches x
};

struct SweepRequest {
    std::vector<double> initial;  // dense values on the z grid, -inf allowed
    std::vector<double> times;    // capture times, ascending
};

/// Line ensemble laid out for the time range [s_min, s_max] and spatial window [lo, hi].
/// Point x at time s sits at ensemble index round((s - s_min)/delta) + round((x - lo)/fine_step)
/// on line floor(s_max n) - floor(s n) + 1, where delta = 2 fine_step / n^{1/3}.
class CoupledLandscape {
public:
    CoupledLandscape(double n, double s_min, double s_max, double lo, double hi, double fine_step, RngKey key,
                     bool materialize);

    const ScalingParams& params() const { return params_; }
    double s_min() const { return s_min_; }
    double s_max() const { return s_max_; }
    double fine_step() const { return fine_step_; }
    double ensemble_step() const { return delta_; }
    const RngKey& key() const { return key_; }
    std::size_t line_count() const { return k_; }
    std::size_t width() const { return width_; }
    Grid ensemble_grid() const;

    std::size_t line_of(double s) const;
    std::size_t index_of(double x, double s) const;
    // Landscape grid at time s whose points hit ensemble indices i_lo..i_hi.
    Grid full_grid(double s, std::size_t i_lo, std::size_t i_hi) const;

    bool materialized() const { return ens_ != nullptr; }
    const LineEnsemble& ensemble() const;
    std::shared_ptr<const void> source() const { return token_; }
    void fill_line(std::size_t j, std::size_t from, std::span<double> out) const;

    double value(double x, double s, double y, double t) const;
    LandscapeSlice slice(double s, const Grid& z_grid, double t, const Grid& x_grid) const;
    // L(z,s;x,t) for every z on z_grid.
    std::vector<double> column_to(const Grid& z_grid, double s, double x, double t) const;

    // Evolves several initial profiles through the same lines in one pass.
    std::vector<std::vector<SweepCapture>> sweep(const Grid& z_grid, double s, const Grid& x_grid,
                                                 const std::vector<SweepRequest>& requests) const;

private:
    ScalingParams params_;
    double s_min_, s_max_, lo_, hi_, fine_step_, delta_;
    RngKey key_;
    std::size_t k_ = 0;
    std::size_t width_ = 0;
    std::shared_ptr<const LineEnsemble> ens_;
    std::shared_ptr<const void> token_;
};

LandscapeSlice sample_landscape_slice(double n, double s, double t, const Grid& z_grid, const Grid& x_grid,
                                      const RngKey& key, int refine = 1);

AirySheetSample airy_sheet(const LandscapeSlice& slice);

std::vector<LandscapeSlice> disjoint_time_slices(double n, const std::vector<std::pair<double, double>>& intervals,
                                                 const Grid& z_grid, const Grid& x_grid, const RngKey& key,
                                                 int refine = 1);

struct CompositionReport {
    double gap = 0.0;
    Grid middle;
};

CompositionReport composition_across_times(double n, double r, double s, double t, const Grid& x_grid,
                                           const Grid& y_grid, const RngKey& key, int refine = 1,
                                           std::optional<Grid> middle = std::nullopt);

bool line_aligned(double s, double n);

}  // namespace kpz
