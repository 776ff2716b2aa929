#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmu/detection.hpp"

namespace pmu {

/// A detector together with the frequency mode it runs under.
struct DetectorSpec {
    Detector detector = Detector::glrt;
    FreqMode freq_mode = FreqMode::suboptimal;

    std::string name() const;  // e.g. "glrt:known", "vuf"
};

enum class SweepAxis { beta, epsilon, window_count, snr_db, tau };
enum class FreqEstimator { suboptimal, ml_h0, ml_h1 };

/// Monte-Carlo experiment description. The base scenario is the near-balanced
/// reference system; beta scales V_c against V_a and epsilon offsets phi_c from
/// the balanced +2*pi/3 position, following the single-phase imbalance
/// convention of the studies this reproduces.
struct ExperimentSpec {
    ThreePhaseScenario base;      // defaults to baseline_scenario()
    double beta = 1.0;            // V_c = beta * V_a unless the axis overrides it
    double epsilon = 0.0;         // phi_c = phi_a + 2*pi/3 + epsilon
    SweepAxis axis = SweepAxis::beta;
    std::vector<double> values;
    int trials = 5000;
    double pfa = 0.15;
    double r = 0.03;
    std::vector<DetectorSpec> detectors;            // default set if empty
    std::vector<FreqEstimator> estimators;          // for the MSE study
    GridSpec grid{};                                // ml_grid searches
    std::uint64_t seed = 1;
    int threads = 1;
    int calibration_multiplier = 4;  // H0 quantile uses multiplier * trials draws

    void validate() const;
};

struct ResultRow {
    double sweep_value = 0.0;
    std::string detector;   // detector spec name or estimator name
    std::string metric;     // "pd", "pfa", "pfa_theory", "mse", ...
    double value = 0.0;
    double std_error = 0.0;
    long trials = 0;
    double wall_seconds = 0.0;
};

struct ResultTable {
    std::string axis;            // config name of the sweep axis
    std::vector<ResultRow> rows;
};

/// The near-balanced reference scenario: V_a = 1, V_b = 1.03, V_c = beta,
/// phi_a = pi/4, phi_b = phi_a - 2*pi/3 - 0.03*pi, phi_c = phi_a + 2*pi/3 + eps,
/// N = 48, K = 12, delta = 0.1*2*pi, omega0 = 2*pi*60.
ThreePhaseScenario baseline_scenario();

/// Applies the single-phase imbalance convention to a copy of the scenario.
ThreePhaseScenario apply_single_phase_imbalance(ThreePhaseScenario s, double beta,
                                                double epsilon);

/// Perfectly balanced variant (all magnitudes V_a, exact 120-degree phases);
/// this is the null against which empirical thresholds are calibrated, matching
/// the C_- = 0 assumption of the analytic threshold formula.
ThreePhaseScenario perfectly_balanced(ThreePhaseScenario s);

/// Detection probability versus the sweep axis at constant false-alarm rate.
/// Thresholds are calibrated per sweep point: analytically for known-deviation
/// GLRT variants, from the empirical H0 quantile for everything else.
ResultTable run_pd_sweep(const ExperimentSpec& spec);

/// Empirical Pr(statistic > tau) on an H0 scenario, with the analytic
/// exp(-tau_tilde^2) companion rows. Axis must be tau.
ResultTable run_pe_curve(const ExperimentSpec& spec);

/// MSE of the normalized deviation estimate gamma*delta_hat/omega0 versus SNR.
ResultTable run_freq_mse(const ExperimentSpec& spec);

/// run_pd_sweep with and without the harmonic generator, emitting paired
/// pd_sinusoidal / pd_harmonic rows. Uses (1, 0.2, 0, 0.5) when the base
/// scenario carries no harmonic list.
ResultTable run_harmonics_study(const ExperimentSpec& spec);

/// Per-detector thresholds for one sweep point, without the detection pass.
/// Metric is "threshold_analytic" or "threshold_empirical".
std::vector<ResultRow> calibrate_point(const ExperimentSpec& spec, double value);

std::string to_string(SweepAxis a);
std::string to_string(FreqEstimator e);

/// splitmix64-style mix used for per-trial seeding; exposed for tests.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d);

}  // namespace pmu
