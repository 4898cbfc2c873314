#include "kpz/lab/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kpz/error.hpp"

namespace kpz::lab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

double parse_double(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        bad("'" + key + "' expects a number, got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) bad("'" + key + "' expects a number, got '" + text + "'");
    return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        bad("'" + key + "' expects an integer, got '" + text + "'");
    }
    if (used != text.size()) bad("'" + key + "' expects an integer, got '" + text + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    if (text.empty() || text[0] == '-') bad("'" + key + "' expects an unsigned integer");
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        bad("'" + key + "' expects an unsigned integer, got '" + text + "'");
    }
    if (used != text.size()) bad("'" + key + "' expects an unsigned integer, got '" + text + "'");
    return v;
}

}  // namespace

std::string normalise_key(const std::string& key) {
    std::string k = trim(key);
    for (char& c : k) {
        if (c == '-') c = '_';
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return k;
}

KeyValueFile KeyValueFile::parse(std::istream& in, const std::string& origin) {
    KeyValueFile f;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) bad(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = normalise_key(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) bad(origin + ":" + std::to_string(lineno) + ": empty key");
        f.kv_[key] = value;
    }
    return f;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open config file '" + path + "'");
    return parse(in, path);
}

void KeyValueFile::set(const std::string& key, const std::string& value) { kv_[normalise_key(key)] = trim(value); }

ExperimentConfig::ExperimentConfig(std::string scenario, nlohmann::json defaults)
    : scenario_(std::move(scenario)), params_(std::move(defaults)) {}

void ExperimentConfig::apply(const KeyValueFile& overrides) {
    for (const auto& [k, v] : overrides.entries()) set(k, v);
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
    const std::string key = normalise_key(raw_key);
    if (!params_.contains(key)) bad("unknown key '" + key + "' for scenario " + scenario_);
    nlohmann::json& slot = params_[key];
    if (slot.is_boolean()) {
        if (value == "true" || value == "1" || value == "yes") {
            slot = true;
        } else if (value == "false" || value == "0" || value == "no") {
            slot = false;
        } else {
            bad("'" + key + "' expects true/false");
        }
    } else if (slot.is_number_unsigned()) {
        slot = parse_u64(key, value);
    } else if (slot.is_number_integer()) {
        slot = parse_integer(key, value);
    } else if (slot.is_number()) {
        slot = parse_double(key, value);
    } else if (slot.is_array()) {
        nlohmann::json arr = nlohmann::json::array();
        std::stringstream ss(value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            arr.push_back(parse_double(key, item));
        }
        if (arr.empty()) bad("'" + key + "' expects a comma separated list of numbers");
        slot = arr;
    } else {
        slot = value;
    }
}

void ExperimentConfig::set_json(const std::string& raw_key, nlohmann::json value) {
    const std::string key = normalise_key(raw_key);
    if (!params_.contains(key)) bad("unknown key '" + key + "' for scenario " + scenario_);
    params_[key] = std::move(value);
}

const nlohmann::json& ExperimentConfig::at(const std::string& key) const {
    if (!params_.contains(key)) bad("scenario " + scenario_ + " has no key '" + key + "'");
    return params_.at(key);
}

double ExperimentConfig::num(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) bad("'" + key + "' is not a number");
    return v.get<double>();
}

long long ExperimentConfig::integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) bad("'" + key + "' is not an integer");
    return v.get<long long>();
}

std::uint64_t ExperimentConfig::seed() const {
    const auto& v = at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) bad("seed must be unsigned");
    return v.get<std::uint64_t>();
}

bool ExperimentConfig::flag(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_boolean()) bad("'" + key + "' is not a boolean");
    return v.get<bool>();
}

std::string ExperimentConfig::str(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) bad("'" + key + "' is not text");
    return v.get<std::string>();
}

std::vector<double> ExperimentConfig::list(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) bad("'" + key + "' is not a list");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(e.get<double>());
    return out;
}

double ExperimentConfig::positive(const std::string& key) const {
    const double v = num(key);
    if (!(v > 0.0)) bad("'" + key + "' must be positive");
    return v;
}

MuRule ExperimentConfig::mu_rule() const {
    const std::string r = str("mu_rule");
    if (r == "fixed") return MuRule::Fixed;
    if (r == "eps_power") return MuRule::EpsPower;
    if (r == "r_rule") return MuRule::RRule;
    bad("mu_rule must be fixed, eps_power or r_rule");
}

double mu_for(const ExperimentConfig& cfg, double eps, double t, double a) {
    switch (cfg.mu_rule()) {
        case MuRule::Fixed: return cfg.num("mu");
        case MuRule::EpsPower: return std::pow(eps, -0.25);
        case MuRule::RRule: {
            const double r = std::pow(std::pow(t, 2.0 / 3.0) / a, 0.25);
            return r / (4.0 * std::cbrt(t));
        }
    }
    return 0.0;
}

}  // namespace kpz::lab
