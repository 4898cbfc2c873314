#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace kpz::lab {

/// Flat `key = value` text; `#` starts a comment. Keys are normalised to snake_case.
class KeyValueFile {
public:
    static KeyValueFile parse(std::istream& in, const std::string& origin);
    static KeyValueFile load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

std::string normalise_key(const std::string& key);

enum class MuRule { Fixed, EpsPower, RRule };

/// Scenario parameters, typed by the scenario's defaults. Echoed verbatim into reports.
class ExperimentConfig {
public:
    ExperimentConfig(std::string scenario, nlohmann::json defaults);

    // Applies text overrides; unknown keys and malformed values raise CONFIG_INVALID.
    void apply(const KeyValueFile& overrides);
    void set(const std::string& key, const std::string& value);
    void set_json(const std::string& key, nlohmann::json value);

    const std::string& scenario() const { return scenario_; }
    const nlohmann::json& params() const { return params_; }

    double num(const std::string& key) const;
    long long integer(const std::string& key) const;
    std::uint64_t seed() const;
    bool flag(const std::string& key) const;
    std::string str(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;

    double positive(const std::string& key) const;
    MuRule mu_rule() const;

private:
    const nlohmann::json& at(const std::string& key) const;

    std::string scenario_;
    nlohmann::json params_;
};

// mu for the configured rule; eps for EpsPower, (t, a) for RRule.
double mu_for(const ExperimentConfig& cfg, double eps, double t, double a);

}  // namespace kpz::lab
