#pragma once

#include <complex>
#include <string>

#include "pmu/estimation.hpp"

namespace pmu {

enum class Detector { glrt, glrt_snh, vuf };
enum class FreqMode { known, suboptimal, ml_grid };
enum class Calibration { analytic, empirical };

/// How the detectors obtain the frequency deviation they operate at.
/// ml_grid maximizes the H1-concentrated likelihood over the grid.
struct FreqSelection {
    FreqMode mode = FreqMode::suboptimal;
    double known_delta = 0.0;  // used when mode == known
    GridSpec grid{};           // used when mode == ml_grid

    static FreqSelection known(double delta) { return {FreqMode::known, delta, {}}; }
    static FreqSelection estimated() { return {FreqMode::suboptimal, 0.0, {}}; }
};

struct DetectionReport {
    Detector detector = Detector::glrt;
    double statistic = 0.0;
    double threshold = 0.0;
    bool unbalanced = false;   // decision: statistic > threshold
    double r = 0.0;
    double delta_used = 0.0;   // rad/s; NaN for VUF
    Calibration calibration = Calibration::analytic;
    double kappa = 0.0;        // NaN for VUF
};

/// GLRT for |C_-| <= r vs |C_-| > r:  T = sqrt(kappa) * (|C_-^(uc)| - r) > tau.
/// Requires r >= 0 and tau >= 0; nonpositive statistics always decide balanced.
DetectionReport glrt(const SequenceMeasurements& meas, const NoiseCovariance& cov, double r,
                     const FreqSelection& freq, double tau,
                     Calibration calibration = Calibration::analytic);

/// GLRT under the simple null (perfect balance): T = sqrt(kappa) * |C_-^(uc)|.
DetectionReport glrt_snh(const SequenceMeasurements& meas, const NoiseCovariance& cov,
                         const FreqSelection& freq, double tau,
                         Calibration calibration = Calibration::analytic);

/// Voltage unbalance factor on the raw sequences:
///   T = mean_k |V_-[k]| / mean_k |V_+[k]|.
/// Throws std::domain_error when the positive sequence is identically zero.
DetectionReport vuf(const SequenceMeasurements& meas, double tau,
                    Calibration calibration = Calibration::empirical);

/// Threshold reaching a target false-alarm probability for the known-deviation
/// GLRT: tau = max(0, sqrt(-ln pfa) - sqrt(kappa)*r). Requires pfa in (0,1).
double analytic_threshold(double pfa, double kappa, double r);

/// False-alarm probability of the known-deviation GLRT at threshold tau:
///   P_e(tau) = exp(-(tau + sqrt(kappa)*r)^2).
/// With r = 0 this is also the asymptotic GLRT-SNH expression.
double theoretical_pfa(double tau, double kappa, double r);

/// Detection probability of the known-deviation GLRT when the true negative
/// phasor is c_minus_true, via the first-order Marcum Q function:
///   P_d = Q_1(sqrt(2*kappa)*|C_-|, sqrt(2)*(tau + sqrt(kappa)*r)).
double rician_pd(double tau, double kappa, double r, std::complex<double> c_minus_true);

/// Marcum Q function of order 1, Q_1(a, b), to ~1e-10 absolute.
double marcum_q1(double a, double b);

std::string to_string(Detector d);
std::string to_string(FreqMode m);
std::string to_string(Calibration c);

}  // namespace pmu
