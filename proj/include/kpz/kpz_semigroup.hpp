#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpz/grid_ensemble.hpp"
#include "kpz/landscape.hpp"

namespace kpz {

enum class InitialKind { NarrowWedge, Flat, Brownian, Power, Custom };

struct InitialSpec {
    InitialKind kind = InitialKind::Flat;
    double x0 = 0.0;         // narrow wedge apex
    double drift = 0.0;      // Brownian drift
    double diffusion = 2.0;  // Brownian diffusion coefficient
    RngKey key{};
    double zeta = 0.0;       // power exponent
    std::optional<GridFunction> custom;

    static InitialSpec narrow_wedge(double x0);
    static InitialSpec flat();
    static InitialSpec brownian(double drift, const RngKey& key, double diffusion = 2.0);
    static InitialSpec power(double zeta);
    static InitialSpec from_function(GridFunction f);
};

std::string describe(const InitialSpec& spec);

struct InitialCondition {
    InitialSpec spec;
    GridFunction realized;
};

InitialCondition make_initial(const InitialSpec& spec, const Grid& z_grid);

struct EvolvedProfile {
    GridFunction h_t;
    std::vector<std::size_t> argmax;  // rightmost maximizing z index per x
    std::string source;
};

EvolvedProfile evolve(const GridFunction& h, const LandscapeSlice& slice);
EvolvedProfile evolve(const InitialCondition& h, const LandscapeSlice& slice);

// Same semigroup computed by injecting h into the line ensemble and sweeping once.
std::vector<EvolvedProfile> evolve_direct(const CoupledLandscape& landscape, const GridFunction& h, double s,
                                          const std::vector<double>& times, const Grid& x_grid);

EvolvedProfile profile_from_capture(const SweepCapture& cap, const Grid& x_grid, const std::string& source);

void write_csv(std::ostream& os, const EvolvedProfile& p, const Grid& z_grid);

double semigroup_gap(const GridFunction& h, const LandscapeSlice& slice_r_s, const LandscapeSlice& slice_s_t,
                     const LandscapeSlice& slice_r_t);

struct ComparisonVerdict {
    bool hypothesis_held = false;
    bool inequality_held = true;
    double slack = 0.0;  // rhs - lhs
};

ComparisonVerdict argmax_comparison_check(const EvolvedProfile& h, const EvolvedProfile& h_tilde, std::size_t xi,
                                          std::size_t yi);
ComparisonVerdict argmax_comparison_check(const GridFunction& h, const GridFunction& h_tilde,
                                          const LandscapeSlice& slice, std::size_t xi, std::size_t yi);

struct AttractivenessVerdict {
    bool held = true;
    double max_violation = 0.0;
};

// h(y) - h(x) <= h~(y) - h~(x) for all x < y, with -inf absorbing.
bool increments_ordered(const GridFunction& h, const GridFunction& h_tilde, double tol = 1e-9);

AttractivenessVerdict attractiveness_check(const GridFunction& h, const GridFunction& h_tilde,
                                           const LandscapeSlice& slice);
AttractivenessVerdict increment_order_violation(const EvolvedProfile& lower, const EvolvedProfile& upper,
                                                std::size_t from = 0, std::size_t to = SIZE_MAX);

struct SandwichResult {
    bool event_held = false;
    double i_t = 0.0;
    bool sandwich_held = true;
    double max_violation = 0.0;
};

GridFunction drifted(const GridFunction& b, double mu);

SandwichResult sandwich_event(const GridFunction& h, const GridFunction& b, double mu, double a,
                              const LandscapeSlice& slice);
// Same verdict from profiles already evolved on one landscape: h, b^{+mu}, b^{-mu}.
SandwichResult sandwich_from_profiles(const EvolvedProfile& h, const EvolvedProfile& plus,
                                      const EvolvedProfile& minus, double a);

std::vector<double> argmax_tail(std::span<const EvolvedProfile> samples, const Grid& z_grid, std::size_t xi,
                                std::span<const double> thresholds, double t);

}  // namespace kpz
