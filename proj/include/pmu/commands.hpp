#pragma once

#include <ostream>

#include "pmu/config.hpp"

namespace pmu {

// Exit codes shared by every subcommand: 0 success, 2 validation error,
// 3 runtime failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRuntime = 3;

/// One realization, all configured detectors, one report row each.
int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Dispatches on the sweep axis: tau -> false-alarm curve, snr_db with
/// estimators -> frequency MSE, anything else -> detection-probability sweep
/// (paired with the harmonic generator when the scenario lists harmonics).
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Prints the analytic threshold with its kappa metadata; with_empirical adds
/// the empirically calibrated thresholds of the configured detectors.
int cmd_calibrate(const RunConfig& cfg, bool with_empirical, std::ostream& out,
                  std::ostream& err);

/// Prints the fully resolved scenario including the derived sequence phasors.
int cmd_scenario_dump(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace pmu
