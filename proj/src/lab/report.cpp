#include "kpz/lab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "kpz/error.hpp"

namespace kpz::lab {

namespace fs = std::filesystem;

namespace {

const char* cmp_name(Comparison c) {
    switch (c) {
        case Comparison::AtMost: return "<=";
        case Comparison::Below: return "<";
        case Comparison::AtLeast: return ">=";
        case Comparison::Within: return "in";
        case Comparison::Equal: return "==";
    }
    return "?";
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

nlohmann::json number_or_text(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigInvalid, "cannot write " + p.string());
    out << text;
}

}  // namespace

CheckRecord check_at_most(std::string name, double observed, double threshold, bool exact) {
    CheckRecord c{std::move(name), observed, Comparison::AtMost, threshold, 0.0, exact, false, {}};
    c.pass = observed <= threshold;
    return c;
}

CheckRecord check_below(std::string name, double observed, double threshold, bool exact) {
    CheckRecord c{std::move(name), observed, Comparison::Below, threshold, 0.0, exact, false, {}};
    c.pass = observed < threshold;
    return c;
}

CheckRecord check_at_least(std::string name, double observed, double threshold, bool exact) {
    CheckRecord c{std::move(name), observed, Comparison::AtLeast, threshold, 0.0, exact, false, {}};
    c.pass = observed >= threshold;
    return c;
}

CheckRecord check_within(std::string name, double observed, double lo, double hi) {
    CheckRecord c{std::move(name), observed, Comparison::Within, lo, hi, false, false, {}};
    c.pass = observed >= lo && observed <= hi;
    return c;
}

CheckRecord check_equal(std::string name, double observed, double expected) {
    CheckRecord c{std::move(name), observed, Comparison::Equal, expected, 0.0, true, false, {}};
    c.pass = observed == expected;
    return c;
}

bool ExperimentReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

ExperimentReport make_report(const ExperimentConfig& cfg) {
    ExperimentReport r;
    r.scenario = cfg.scenario();
    r.config = cfg.params();
    r.config["scenario"] = cfg.scenario();
    r.seed_record = {{"master_seed", cfg.params().value("seed", std::uint64_t{0})},
                     {"generator", "philox4x64-10"},
                     {"key_layout", "(master_seed, replication, purpose)"}};
    return r;
}

std::vector<std::string> artifact_names(const ExperimentReport& r, const std::string& format) {
    std::vector<std::string> names{"report.json", "timing.json"};
    for (const auto& s : r.samples) names.push_back("samples/" + s.name + (format == "json" ? ".json" : ".csv"));
    for (const auto& p : r.plots) names.push_back("plots/" + p.name + ".svg");
    return names;
}

nlohmann::json ExperimentReport::to_json(const std::string& format) const {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["config"] = config;
    j["seed_record"] = seed_record;
    nlohmann::json cj = nlohmann::json::array();
    for (const auto& c : checks) {
        nlohmann::json e;
        e["name"] = c.name;
        e["observed"] = number_or_text(c.observed);
        e["comparison"] = cmp_name(c.cmp);
        if (c.cmp == Comparison::Within) {
            e["threshold"] = {c.threshold, c.threshold_hi};
        } else {
            e["threshold"] = c.threshold;
        }
        e["threshold_kind"] = c.exact ? "exact" : "artifact calibration";
        e["verdict"] = c.pass ? "PASS" : "FAIL";
        if (!c.note.empty()) e["note"] = c.note;
        cj.push_back(e);
    }
    j["checks"] = cj;
    nlohmann::json ej = nlohmann::json::array();
    for (const auto& e : estimates) {
        nlohmann::json x = kpz::to_json(e);
        x["value"] = number_or_text(e.value);
        x["stderr"] = number_or_text(e.stderr_);
        ej.push_back(x);
    }
    j["estimates"] = ej;
    j["timing"] = {{"file", "timing.json"}};
    j["artifacts"] = artifact_names(*this, format);
    j["verdict"] = passed() ? "PASS" : "FAIL";
    return j;
}

std::string render_svg(const Plot& p) {
    const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : p.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!(xmin < xmax)) { xmin -= 1; xmax += 1; }
    if (!(ymin < ymax)) { ymin -= 1; ymax += 1; }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
       << p.title << "</text>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = xmin + k * (xmax - xmin) / 4, yv = ymin + k * (ymax - ymin) / 4;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << short_fmt(xv)
           << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << short_fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << p.x_label << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << p.y_label << "</text>\n";
    for (std::size_t si = 0; si < p.series.size(); ++si) {
        const auto& s = p.series[si];
        const char* col = colors[si % 6];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            os << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (si + 1) << "\" fill=\"" << col
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_report(const ExperimentReport& r, const std::string& dir, const std::string& format, int threads) {
    const fs::path root(dir);
    fs::create_directories(root);
    if (!r.samples.empty()) fs::create_directories(root / "samples");
    if (!r.plots.empty()) fs::create_directories(root / "plots");

    for (const auto& s : r.samples) {
        if (format == "json") {
            nlohmann::json j;
            j["columns"] = s.columns;
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& row : s.rows) {
                nlohmann::json jr = nlohmann::json::array();
                for (double v : row) jr.push_back(number_or_text(v));
                rows.push_back(jr);
            }
            j["rows"] = rows;
            write_text(root / "samples" / (s.name + ".json"), j.dump(1) + "\n");
        } else {
            std::string text;
            for (std::size_t i = 0; i < s.columns.size(); ++i) text += (i ? "," : "") + s.columns[i];
            text += "\n";
            for (const auto& row : s.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) {
                    if (i) text += ",";
                    text += std::isfinite(row[i]) ? fmt(row[i]) : (row[i] < 0 ? "-inf" : "nan");
                }
                text += "\n";
            }
            write_text(root / "samples" / (s.name + ".csv"), text);
        }
    }
    for (const auto& p : r.plots) write_text(root / "plots" / (p.name + ".svg"), render_svg(p));

    write_text(root / "report.json", r.to_json(format).dump(2) + "\n");
    nlohmann::json timing = {{"wall_clock_seconds", r.wall_clock_seconds}, {"threads", threads}};
    write_text(root / "timing.json", timing.dump(2) + "\n");
}

bool print_summary(const nlohmann::json& report, std::ostream& os) {
    bool all = true;
    os << "scenario: " << report.value("scenario", std::string("?")) << "\n";
    os << std::left << std::setw(48) << "check" << std::setw(16) << "observed" << std::setw(26) << "threshold"
       << "verdict\n";
    for (const auto& c : report.at("checks")) {
        std::string obs = c.at("observed").is_number() ? short_fmt(c.at("observed").get<double>())
                                                       : c.at("observed").get<std::string>();
        std::string thr = c.at("comparison").get<std::string>() + " ";
        if (c.at("threshold").is_array()) {
            thr += "[" + short_fmt(c.at("threshold")[0].get<double>()) + ", " +
                   short_fmt(c.at("threshold")[1].get<double>()) + "]";
        } else {
            thr += short_fmt(c.at("threshold").get<double>());
        }
        const std::string verdict = c.at("verdict").get<std::string>();
        all = all && verdict == "PASS";
        os << std::left << std::setw(48) << c.at("name").get<std::string>() << std::setw(16) << obs << std::setw(26)
           << thr << verdict << "\n";
    }
    if (report.contains("estimates") && !report.at("estimates").empty()) {
        os << "\n" << std::left << std::setw(48) << "estimate" << std::setw(16) << "value" << "stderr\n";
        for (const auto& e : report.at("estimates")) {
            auto show = [](const nlohmann::json& v) {
                return v.is_number() ? short_fmt(v.get<double>()) : v.get<std::string>();
            };
            os << std::left << std::setw(48) << e.at("name").get<std::string>() << std::setw(16) << show(e.at("value"))
               << show(e.at("stderr")) << "\n";
        }
    }
    os << "overall: " << (all ? "PASS" : "FAIL") << "\n";
    return all;
}

}  // namespace kpz::lab
