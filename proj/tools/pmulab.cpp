// Command-line front-end: detect / sweep / calibrate / scenario-dump.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmu/commands.hpp"
#include "pmu/version.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions* opts) {
    cmd->add_option("-c,--config", opts->config_path, "configuration file");
    cmd->add_option("-s,--set", opts->overrides,
                    "override a config key, e.g. --set scenario.beta=2");
}

int build_config(const CommonOptions& opts, pmu::RunConfig* out) {
    try {
        pmu::ConfigBuilder builder;
        if (!opts.config_path.empty()) builder.load_file(opts.config_path);
        for (const auto& assignment : opts.overrides) builder.set(assignment);
        *out = builder.build();
        return pmu::kExitOk;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return pmu::kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string(pmu::kProjectName) +
                 ": imbalance detection from PMU sequence measurements"};
    app.set_version_flag("--version", std::string(pmu::kProjectName) + " " + pmu::kVersion);
    app.require_subcommand(1);

    CommonOptions detect_opts, sweep_opts, cal_opts, dump_opts;
    bool cal_empirical = false;

    CLI::App* detect = app.add_subcommand("detect", "run the detectors on one realization");
    add_common(detect, &detect_opts);
    CLI::App* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over the configured axis");
    add_common(sweep, &sweep_opts);
    CLI::App* calibrate = app.add_subcommand("calibrate", "print detector thresholds");
    add_common(calibrate, &cal_opts);
    calibrate->add_flag("--empirical", cal_empirical,
                        "also calibrate empirical H0-quantile thresholds");
    CLI::App* dump = app.add_subcommand("scenario-dump", "print the resolved scenario");
    add_common(dump, &dump_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? pmu::kExitOk : pmu::kExitValidation;
    }

    pmu::RunConfig cfg;
    if (detect->parsed()) {
        if (int rc = build_config(detect_opts, &cfg)) return rc;
        return pmu::cmd_detect(cfg, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
        if (int rc = build_config(sweep_opts, &cfg)) return rc;
        return pmu::cmd_sweep(cfg, std::cout, std::cerr);
    }
    if (calibrate->parsed()) {
        if (int rc = build_config(cal_opts, &cfg)) return rc;
        return pmu::cmd_calibrate(cfg, cal_empirical, std::cout, std::cerr);
    }
    if (int rc = build_config(dump_opts, &cfg)) return rc;
    return pmu::cmd_scenario_dump(cfg, std::cout, std::cerr);
}
