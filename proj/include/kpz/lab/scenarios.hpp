#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "kpz/lab/config.hpp"
#include "kpz/kpz_semigroup.hpp"
#include "kpz/lab/report.hpp"

namespace kpz::lab {

using ScenarioFn = ExperimentReport (*)(const ExperimentConfig&, int threads);

struct ScenarioInfo {
    std::string name;
    std::string summary;
    nlohmann::json (*defaults)();
    ScenarioFn run;
};

const std::vector<ScenarioInfo>& scenarios();
const ScenarioInfo* find_scenario(const std::string& name);

// Defaults for a registered scenario; CONFIG_INVALID for unknown names.
ExperimentConfig default_config(const std::string& scenario);

// Runs the scenario and stamps the wall clock.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int threads);

ExperimentReport run_local_brownian(const ExperimentConfig& cfg, int threads);
ExperimentReport run_airy_sheet(const ExperimentConfig& cfg, int threads);
ExperimentReport run_long_time_coupling(const ExperimentConfig& cfg, int threads);
ExperimentReport run_invariance_123(const ExperimentConfig& cfg, int threads);
ExperimentReport run_geometry_suite(const ExperimentConfig& cfg, int threads);
ExperimentReport run_argmax_uniqueness(const ExperimentConfig& cfg, int threads);

// Parameter sets of the two single-shot subcommands.
nlohmann::json sample_landscape_defaults();
nlohmann::json evolve_defaults();

InitialSpec initial_from_config(const ExperimentConfig& cfg, const RngKey& key);

}  // namespace kpz::lab
