#include "pmu/table_io.hpp"

#include <charconv>
#include <cmath>

#include <json.hpp>

#include "pmu/version.hpp"

namespace pmu {

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

std::string provenance_line(const std::string& config_hash) {
    return std::string("# ") + kProjectName + " " + kVersion + " config=" + config_hash;
}

void write_table(std::ostream& out, const ResultTable& table, const RunConfig& cfg) {
    if (cfg.format == OutputFormat::csv) {
        out << provenance_line(cfg.config_hash) << "\n";
        out << "axis,sweep_value,detector,metric,value,std_error,trials";
        if (cfg.timings) out << ",wall_seconds";
        out << "\n";
        for (const auto& row : table.rows) {
            out << table.axis << ',' << format_double(row.sweep_value) << ',' << row.detector
                << ',' << row.metric << ',' << format_double(row.value) << ','
                << format_double(row.std_error) << ',' << row.trials;
            if (cfg.timings) out << ',' << format_double(row.wall_seconds);
            out << "\n";
        }
        return;
    }
    for (const auto& row : table.rows) {
        nlohmann::json j{{"axis", table.axis},
                         {"sweep_value", row.sweep_value},
                         {"detector", row.detector},
                         {"metric", row.metric},
                         {"value", row.value},
                         {"std_error", row.std_error},
                         {"trials", row.trials}};
        if (cfg.timings) j["wall_seconds"] = row.wall_seconds;
        out << j.dump() << "\n";
    }
}

void write_reports(std::ostream& out, const std::vector<NamedReport>& reports,
                   const RunConfig& cfg) {
    if (cfg.format == OutputFormat::csv) {
        out << provenance_line(cfg.config_hash) << "\n";
        out << "detector,statistic,threshold,decision,r,delta_used,calibration,kappa\n";
        for (const auto& [name, rep] : reports) {
            out << name << ',' << format_double(rep.statistic) << ','
                << format_double(rep.threshold) << ','
                << (rep.unbalanced ? "unbalanced" : "balanced") << ','
                << format_double(rep.r) << ',' << format_double(rep.delta_used) << ','
                << to_string(rep.calibration) << ',' << format_double(rep.kappa) << "\n";
        }
        return;
    }
    for (const auto& [name, rep] : reports) {
        nlohmann::json j{{"detector", name},
                         {"statistic", rep.statistic},
                         {"threshold", rep.threshold},
                         {"decision", rep.unbalanced ? "unbalanced" : "balanced"},
                         {"r", rep.r},
                         {"delta_used", rep.delta_used},
                         {"calibration", to_string(rep.calibration)},
                         {"kappa", rep.kappa}};
        out << j.dump() << "\n";
    }
}

}  // namespace pmu
