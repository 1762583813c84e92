#pragma once

#include <string>
#include <vector>

namespace gmclab {

struct ReportRow {
    std::string name;
    std::string provenance;  // oracle kind backing the check
    double oracle = 0.0;
    double estimate = 0.0;
    double se = 0.0;         // NaN when not a Monte Carlo row
    double tolerance = 0.0;
    bool pass = false;
    std::string repro;       // deterministic reproduction command
};

struct RunReport {
    std::string kind;
    std::string config_json;  // canonical echo
    std::string environment;  // static stamp, no timestamps
    std::vector<ReportRow> rows;

    bool all_pass() const;
    void add(const std::string& name, const std::string& provenance, double oracle,
             double estimate, double se, double tolerance, bool pass);
};

// byte-stable emitters: sorted keys, floats at 12 significant digits
std::string report_to_csv(const RunReport& report);
std::string report_to_json(const RunReport& report);
std::string report_to_markdown(const RunReport& report);

// writes report.csv / report.json / report.md under out_dir
void write_report_files(const RunReport& report, const std::string& out_dir);

// parses report_to_json output back into a report (round-trip check)
RunReport report_from_json(const std::string& text);

std::string environment_stamp();

}  // namespace gmclab
