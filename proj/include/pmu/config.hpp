#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmu/experiments.hpp"

namespace pmu {

/// Configuration problem that maps to exit code 2.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class OutputFormat { csv, jsonl };

/// Fully resolved run configuration: the experiment plus output options.
struct RunConfig {
    ExperimentSpec spec;
    std::optional<double> tau;     // explicit detection threshold
    std::string output_path = "-";
    OutputFormat format = OutputFormat::csv;
    bool timings = false;          // include wall_seconds in serialized output
    int verbosity = 1;
    std::string config_hash;       // FNV-1a of the user-specified keys
};

/// Accumulates key=value pairs from a config file and command-line overrides
/// (last writer wins), then resolves them into a RunConfig. Unknown keys are
/// rejected. Reals accept a "pi" suffix ("0.25pi", "-pi", "120pi"); lists are
/// comma-separated.
class ConfigBuilder {
  public:
    /// Parses "[section]" headers and "key = value" lines; '#' starts a comment.
    void load_file(const std::string& path);

    /// Parses the same syntax from a string (section headers allowed).
    void load_string(const std::string& text, const std::string& origin = "<string>");

    /// One "section.key=value" override.
    void set(const std::string& assignment);

    RunConfig build() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

/// "0.25pi" -> 0.25*pi, "pi" -> pi, plain reals pass through.
double parse_real(const std::string& text, const std::string& key);

std::vector<double> parse_real_list(const std::string& text, const std::string& key);

/// FNV-1a over the canonical (sorted) key=value serialization, hex encoded.
std::string hash_entries(const std::map<std::string, std::string>& entries);

}  // namespace pmu
