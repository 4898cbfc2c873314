#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "kpz/grid_ensemble.hpp"

namespace kpz {

struct LppEndpoint {
    std::size_t space_index = 0;
    std::size_t line = 1;
};

/// jump_indices[q] is where the path drops from line (start.line - q) to the line below it.
struct GeodesicPath {
    std::vector<std::size_t> jump_indices;
};

struct LppValue {
    double value = 0.0;
    std::optional<GeodesicPath> path;
};

// Paths run from start.line down to end.line, nondecreasing in space.
LppValue last_passage(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, bool with_path = false);

// Entry j = last_passage(start, (j, end_line)); -inf for j < start.space_index.
std::vector<double> last_passage_profile(const LineEnsemble& ens, LppEndpoint start, std::size_t end_line);

// Entry j = last_passage((j, start_line), end); -inf for j > end.space_index.
std::vector<double> last_passage_profile_to(const LineEnsemble& ens, std::size_t start_line, LppEndpoint end);

GeodesicPath geodesic(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end);

double path_value(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, const GeodesicPath& path);

double brute_force_last_passage(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end);

double composition_identity_gap(const LineEnsemble& ens, LppEndpoint start, LppEndpoint end, std::size_t mid_line);

// One forward step: v <- line + running max of (v - line). v holds -inf where no path arrives.
void sweep_line(std::span<const double> line, std::span<double> v);

// Same, carrying the rightmost origin of each maximizer (-1 where v is -inf).
void sweep_line(std::span<const double> line, std::span<double> v, std::span<std::int64_t> origin);

// One backward step: w <- -line + running max from the right of (line + w).
void sweep_line_backward(std::span<const double> line, std::span<double> w);

}  // namespace kpz
