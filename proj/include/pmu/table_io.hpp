#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pmu/config.hpp"
#include "pmu/detection.hpp"
#include "pmu/experiments.hpp"

namespace pmu {

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// A detection report together with the detector-spec name it ran as.
struct NamedReport {
    std::string name;
    DetectionReport report;
};

/// "# pmu-imbalance <version> config=<hash>" provenance comment.
std::string provenance_line(const std::string& config_hash);

void write_table(std::ostream& out, const ResultTable& table, const RunConfig& cfg);
void write_reports(std::ostream& out, const std::vector<NamedReport>& reports,
                   const RunConfig& cfg);

}  // namespace pmu
