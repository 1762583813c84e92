#include "report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace gmclab {

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string jquote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

// numbers inside JSON must stay parseable: NaN is emitted as null
std::string jnum(double v) {
    if (std::isnan(v)) return "null";
    return fmt(v);
}

}  // namespace

bool RunReport::all_pass() const {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

void RunReport::add(const std::string& name, const std::string& provenance, double oracle,
                    double estimate, double se, double tolerance, bool pass) {
    ReportRow row;
    row.name = name;
    row.provenance = provenance;
    row.oracle = oracle;
    row.estimate = estimate;
    row.se = se;
    row.tolerance = tolerance;
    row.pass = pass;
    row.repro = "gmclab " + kind + " (canonical config in report.json)";
    rows.push_back(row);
}

std::string report_to_csv(const RunReport& report) {
    std::string out = "name,provenance,oracle,estimate,se,tolerance,pass,repro\n";
    for (const auto& r : report.rows) {
        out += r.name + "," + r.provenance + "," + fmt(r.oracle) + "," + fmt(r.estimate) + "," +
               fmt(r.se) + "," + fmt(r.tolerance) + "," + (r.pass ? "1" : "0") + ",\"" + r.repro +
               "\"\n";
    }
    return out;
}

std::string report_to_json(const RunReport& report) {
    std::string out = "{";
    out += "\"all_pass\":" + std::string(report.all_pass() ? "true" : "false");
    out += ",\"config\":" + report.config_json;
    out += ",\"environment\":" + jquote(report.environment);
    out += ",\"kind\":" + jquote(report.kind);
    out += ",\"rows\":[";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        if (i) out += ",";
        out += "{\"estimate\":" + jnum(r.estimate);
        out += ",\"name\":" + jquote(r.name);
        out += ",\"oracle\":" + jnum(r.oracle);
        out += ",\"pass\":" + std::string(r.pass ? "true" : "false");
        out += ",\"provenance\":" + jquote(r.provenance);
        out += ",\"repro\":" + jquote(r.repro);
        out += ",\"se\":" + jnum(r.se);
        out += ",\"tolerance\":" + jnum(r.tolerance) + "}";
    }
    out += "]}";
    return out;
}

std::string report_to_markdown(const RunReport& report) {
    std::string out = "# " + report.kind + " report\n\n";
    out += report.all_pass() ? "All checks passed.\n\n" : "FAILURES present.\n\n";
    out += "| check | oracle | estimate | se | tol | pass |\n";
    out += "|---|---|---|---|---|---|\n";
    for (const auto& r : report.rows)
        out += "| " + r.name + " | " + fmt(r.oracle) + " | " + fmt(r.estimate) + " | " + fmt(r.se) +
               " | " + fmt(r.tolerance) + " | " + (r.pass ? "yes" : "NO") + " |\n";
    return out;
}

void write_report_files(const RunReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + name + " under " + out_dir);
        f << content;
    };
    write("report.csv", report_to_csv(report));
    write("report.json", report_to_json(report));
    write("report.md", report_to_markdown(report));
}

RunReport report_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    RunReport rep;
    rep.kind = j.at("kind").get<std::string>();
    rep.config_json = j.at("config").dump();
    rep.environment = j.at("environment").get<std::string>();
    for (const auto& r : j.at("rows")) {
        ReportRow row;
        row.name = r.at("name").get<std::string>();
        row.provenance = r.at("provenance").get<std::string>();
        auto num = [](const nlohmann::json& v) {
            return v.is_null() ? std::nan("") : v.get<double>();
        };
        row.oracle = num(r.at("oracle"));
        row.estimate = num(r.at("estimate"));
        row.se = num(r.at("se"));
        row.tolerance = num(r.at("tolerance"));
        row.pass = r.at("pass").get<bool>();
        row.repro = r.at("repro").get<std::string>();
        rep.rows.push_back(row);
    }
    return rep;
}

std::string environment_stamp() {
    std::string s = "gmclab 1.0.0";
#if defined(__clang__)
    s += "; clang " + std::to_string(__clang_major__);
#elif defined(__GNUC__)
    s += "; gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__);
#endif
#if defined(__linux__)
    s += "; linux";
#elif defined(__APPLE__)
    s += "; darwin";
#endif
    return s;
}

}  // namespace gmclab
