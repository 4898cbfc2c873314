#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kpz/lab/config.hpp"
#include "kpz/stats.hpp"

namespace kpz::lab {

enum class Comparison { AtMost, Below, AtLeast, Within, Equal };

/// One gate. Thresholds are artifact calibrations unless `exact` is set.
struct CheckRecord {
    std::string name;
    double observed = 0.0;
    Comparison cmp = Comparison::AtMost;
    double threshold = 0.0;
    double threshold_hi = 0.0;  // upper end for Within
    bool exact = false;
    bool pass = false;
    std::string note;
};

CheckRecord check_at_most(std::string name, double observed, double threshold, bool exact = false);
CheckRecord check_below(std::string name, double observed, double threshold, bool exact = false);
CheckRecord check_at_least(std::string name, double observed, double threshold, bool exact = false);
CheckRecord check_within(std::string name, double observed, double lo, double hi);
CheckRecord check_equal(std::string name, double observed, double expected);  // exact count comparisons

struct SampleTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

struct Plot {
    std::string name;
    std::string title;
    std::string x_label, y_label;
    std::vector<PlotSeries> series;
};

struct ExperimentReport {
    std::string scenario;
    nlohmann::json config;
    nlohmann::json seed_record;
    std::vector<CheckRecord> checks;
    std::vector<Estimate> estimates;
    std::vector<SampleTable> samples;
    std::vector<Plot> plots;
    double wall_clock_seconds = 0.0;

    bool passed() const;
    // Deterministic content: no wall clock, thread count or paths.
    nlohmann::json to_json(const std::string& format = "csv") const;
};

ExperimentReport make_report(const ExperimentConfig& cfg);

std::vector<std::string> artifact_names(const ExperimentReport& r, const std::string& format);

// Writes report.json, samples/, plots/ and timing.json under dir.
void write_report(const ExperimentReport& r, const std::string& dir, const std::string& format, int threads);

std::string render_svg(const Plot& p);

// Human-readable table; returns true when every check passed.
bool print_summary(const nlohmann::json& report, std::ostream& os);

}  // namespace kpz::lab
