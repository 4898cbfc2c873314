#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpz/grid_ensemble.hpp"

namespace kpz {

struct SampleSet {
    std::vector<double> values;
    std::string label;
    std::string seed_record;

    explicit SampleSet(std::vector<double> v, std::string label_ = {}, std::string seed = {});
};

double ks_two_sample(const SampleSet& a, const SampleSet& b);
double ks_gaussian(const SampleSet& a, double mean, double variance);

// sup over grid pairs in [-a, a] of |f(x) - f(y)| / |x - y|^beta
double holder_seminorm(const GridFunction& f, double beta, double a);
// Two-parameter version on [-a, a]^2 with the sup metric; values row-major in z.
double holder_seminorm_2d(std::span<const double> values, const Grid& z_grid, const Grid& x_grid, double beta,
                          double a);
double modulus_of_continuity(const GridFunction& f, double delta, double a);

double mean(std::span<const double> v);
double sample_variance(std::span<const double> v);
double correlation(std::span<const double> a, std::span<const double> b);
double median(std::vector<double> v);
double standard_error(std::span<const double> v);

struct Estimate {
    std::string name;
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

nlohmann::json to_json(const Estimate& e);

struct MCurve {
    std::vector<double> a_values;  // sorted
    std::vector<double> m_hat;
    std::vector<double> stderr_;
    double ez_hat = 0.0;
    double ez_stderr = 0.0;
    // probe at the smallest positive a
    double a_probe = 0.0;
    double slope = 0.0;          // (m(a) - m(-a)) / 2a
    double slope_minus_ez = 0.0; // paired per replication
    double slope_minus_ez_stderr = 0.0;
    double kink = 0.0;           // right slope minus left slope at 0
    double worst_convexity = 0.0;  // min over interior a of (chord - m_hat) / stderr, +inf when stderr is 0
    bool convex = true;
    std::size_t replications = 0;
};

// f on the window grid for one replication key
using MSampler = std::function<std::vector<double>(const RngKey&)>;

// Replication r uses key (master_seed, r, key.substream_id).
MCurve m_curve(const Grid& window, const MSampler& sampler, std::vector<double> a_values, std::size_t replications,
               const RngKey& key, int threads = 1);

struct VarianceEstimate {
    double offset = 0.0;
    double variance = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

std::vector<VarianceEstimate> increment_variance_profile(const std::vector<std::vector<double>>& samples,
                                                         std::span<const double> offsets);

}  // namespace kpz
