#include "pmu/detection.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pmu {

namespace {

double resolve_delta(const SequenceMeasurements& meas, const NoiseCovariance& cov, double r,
                     const FreqSelection& freq) {
    switch (freq.mode) {
        case FreqMode::known:
            return freq.known_delta;
        case FreqMode::suboptimal:
            return suboptimal_frequency(meas);
        case FreqMode::ml_grid:
            // The unbalanced-hypothesis search; the same estimate is plugged
            // into both sides of the test, mirroring the suboptimal pathway.
            return ml_frequency(meas, cov, r, Hypothesis::h1_unbalanced, freq.grid);
    }
    throw std::logic_error("unreachable freq mode");
}

void check_tau(double tau) {
    if (!(tau >= 0.0)) throw std::invalid_argument("detector threshold must be nonnegative");
}

}  // namespace

DetectionReport glrt(const SequenceMeasurements& meas, const NoiseCovariance& cov, double r,
                     const FreqSelection& freq, double tau, Calibration calibration) {
    if (!(r >= 0.0)) throw std::invalid_argument("glrt: r must be nonnegative");
    check_tau(tau);
    const double delta = resolve_delta(meas, cov, r, freq);
    const FrequencyContext ctx = build_context(delta, meas, cov);
    const std::complex<double> cuc = unconstrained_cminus(ctx);

    DetectionReport report;
    report.detector = Detector::glrt;
    report.statistic = std::sqrt(ctx.kappa) * (std::abs(cuc) - r);
    report.threshold = tau;
    report.unbalanced = report.statistic > tau;
    report.r = r;
    report.delta_used = delta;
    report.calibration = calibration;
    report.kappa = ctx.kappa;
    return report;
}

DetectionReport glrt_snh(const SequenceMeasurements& meas, const NoiseCovariance& cov,
                         const FreqSelection& freq, double tau, Calibration calibration) {
    DetectionReport report = glrt(meas, cov, 0.0, freq, tau, calibration);
    report.detector = Detector::glrt_snh;
    return report;
}

DetectionReport vuf(const SequenceMeasurements& meas, double tau, Calibration calibration) {
    check_tau(tau);
    const double denom = meas.pos.cwiseAbs().mean();
    const double numer = meas.neg.cwiseAbs().mean();
    if (denom == 0.0)
        throw std::domain_error("vuf: positive sequence is identically zero");

    DetectionReport report;
    report.detector = Detector::vuf;
    report.statistic = numer / denom;
    report.threshold = tau;
    report.unbalanced = report.statistic > tau;
    report.r = 0.0;
    report.delta_used = std::numeric_limits<double>::quiet_NaN();
    report.calibration = calibration;
    report.kappa = std::numeric_limits<double>::quiet_NaN();
    return report;
}

double analytic_threshold(double pfa, double kappa, double r) {
    if (!(pfa > 0.0 && pfa < 1.0))
        throw std::invalid_argument("analytic_threshold: pfa must lie in (0, 1)");
    if (!(kappa >= 0.0)) throw std::invalid_argument("analytic_threshold: kappa < 0");
    if (!(r >= 0.0)) throw std::invalid_argument("analytic_threshold: r < 0");
    return std::max(0.0, std::sqrt(-std::log(pfa)) - std::sqrt(kappa) * r);
}

double theoretical_pfa(double tau, double kappa, double r) {
    check_tau(tau);
    const double tau_tilde = tau + std::sqrt(kappa) * r;
    return std::exp(-tau_tilde * tau_tilde);
}

double marcum_q1(double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0))
        throw std::invalid_argument("marcum_q1: arguments must be nonnegative");
    if (b == 0.0) return 1.0;
    const double lambda = 0.5 * a * a;  // Poisson weight parameter
    const double x = 0.5 * b * b;
    if (lambda == 0.0) return std::exp(-x);

    // Q_1(a,b) = sum_n Pois(n; lambda) * P(chi^2_{2(n+1)} > b^2); the inner
    // survival is accumulated incrementally, the Poisson weights are evaluated
    // through logs so large noncentralities cannot underflow term by term.
    const int n_max =
        static_cast<int>(lambda + 12.0 * std::sqrt(lambda + 1.0) + 60.0);
    double chi_term = std::exp(-x);  // e^{-x} x^n / n! at n = 0
    double chi_survival = chi_term;  // P(chi^2_{2(n+1)} > 2x) at n = 0
    double total = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        const double log_pois = -lambda + n * std::log(lambda) - std::lgamma(n + 1.0);
        total += std::exp(log_pois) * chi_survival;
        chi_term *= x / (n + 1);
        chi_survival += chi_term;
    }
    return std::min(1.0, total);
}

double rician_pd(double tau, double kappa, double r, std::complex<double> c_minus_true) {
    check_tau(tau);
    if (!(kappa > 0.0)) throw std::invalid_argument("rician_pd: kappa must be positive");
    const double tau_tilde = tau + std::sqrt(kappa) * r;
    // sqrt(kappa)*C_-^(uc) is complex Gaussian with mean sqrt(kappa)*C_- and
    // per-component variance 1/2, so the statistic magnitude is Rician.
    const double noncentrality = std::sqrt(2.0 * kappa) * std::abs(c_minus_true);
    return marcum_q1(noncentrality, std::numbers::sqrt2 * tau_tilde);
}

std::string to_string(Detector d) {
    switch (d) {
        case Detector::glrt: return "glrt";
        case Detector::glrt_snh: return "glrt_snh";
        case Detector::vuf: return "vuf";
    }
    return "?";
}

std::string to_string(FreqMode m) {
    switch (m) {
        case FreqMode::known: return "known";
        case FreqMode::suboptimal: return "suboptimal";
        case FreqMode::ml_grid: return "ml";
    }
    return "?";
}

std::string to_string(Calibration c) {
    return c == Calibration::analytic ? "analytic" : "empirical";
}

}  // namespace pmu
