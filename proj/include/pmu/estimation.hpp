#pragma once

#include <complex>
#include <vector>

#include "pmu/whitening.hpp"

namespace pmu {

/// Hypothesis under which the constrained estimators operate. H0 constrains
/// the negative phasor magnitude to |C_-| <= r, H1 to |C_-| > r.
enum class Hypothesis { h0_balanced, h1_unbalanced, unconstrained };

struct PhasorEstimates {
    std::complex<double> c_plus, c_minus;
    double delta = 0.0;            // deviation the context was built at, rad/s
    Hypothesis hypothesis = Hypothesis::unconstrained;
    double kkt_multiplier = 0.0;   // mu_0^2, meaningful under H0 only
};

/// Unconstrained ML estimator of the negative phasor:
///   C_-^(uc) = (kappa1*z_- - kappa2*conj(z_+)) / (kappa1^2 - |kappa2|^2).
/// Throws std::domain_error on a degenerate Gram.
std::complex<double> unconstrained_cminus(const FrequencyContext& ctx);

/// Constrained ML phasor estimates at the context's frequency deviation.
///
/// H0 keeps C_-^(uc) when |C_-^(uc)| <= r and otherwise projects it onto the
/// radius-r circle, with KKT multiplier mu_0^2 = (kappa/r)*(|C_-^(uc)| - r);
/// H1 mirrors the projection (keeps only magnitudes above r). The projection
/// never changes the phase. C_+ = (z_+ - kappa2*conj(C_-)) / kappa1 in all cases.
PhasorEstimates cml_phasors(const FrequencyContext& ctx, double r, Hypothesis hypothesis);

/// Log-likelihood at the given phasor pair, using the context's whitened data:
///   2K log pi - ||nu_+ - P C_+ e1 - Q conj(C_-) e2||^2
///             - ||nu_- - P C_- e1 - Q conj(C_+) e2||^2.
/// Only differences of this quantity are meaningful.
double log_likelihood(const FrequencyContext& ctx, std::complex<double> c_plus,
                      std::complex<double> c_minus);

/// Search grid for the ML frequency-deviation estimator (rad/s).
struct GridSpec {
    double lo = -5.0 * 2.0 * 3.14159265358979323846;
    double hi = 5.0 * 2.0 * 3.14159265358979323846;
    int points = 2001;
    bool refine = true;  // one parabolic refinement around the best grid point
};

/// Data-independent per-candidate quantities for a whole grid, reusable across
/// trials that share (K, N, sigma^2, omega0). Immutable after construction.
class FrequencyTable {
  public:
    struct Entry {
        double delta;
        std::complex<double> p_factor, q_factor;
        Eigen::VectorXcd e1, e2;  // whitened steering vectors
        double kappa1;
        std::complex<double> kappa2;
        double kappa;
        bool degenerate;
    };

    FrequencyTable(const GridSpec& grid, const NoiseCovariance& cov, double omega0,
                   WhiteningFactor kind = WhiteningFactor::symmetric_sqrt);

    const std::vector<Entry>& entries() const { return entries_; }
    const GridSpec& grid() const { return grid_; }
    WhiteningFactor factor_kind() const { return kind_; }

  private:
    GridSpec grid_;
    WhiteningFactor kind_;
    std::vector<Entry> entries_;
};

/// Grid-argmax of the concentrated likelihood
///   |z_+|^2/kappa1 - kappa*|C_-^(i)|^2 + 2*kappa*Real{C_-^(i)*conj(C_-^(uc))},
/// rebuilding the per-candidate context for every grid point, followed by an
/// optional parabolic refinement (accepted only if it improves the objective).
double ml_frequency(const SequenceMeasurements& meas, const NoiseCovariance& cov, double r,
                    Hypothesis hypothesis, const GridSpec& grid = {},
                    WhiteningFactor kind = WhiteningFactor::symmetric_sqrt);

/// Same search against a prebuilt table (the fast path for Monte-Carlo runs).
double ml_frequency(const SequenceMeasurements& meas, const NoiseCovariance& cov,
                    const FrequencyTable& table, double r, Hypothesis hypothesis);

/// Divisor convention of the angle-increment estimator. The literal form sums
/// K-1 angle increments but divides by K, giving a deterministic (K-1)/K bias
/// on clean data; the corrected variant divides by K-1.
enum class AngleSumConvention { literal, unbiased };

/// Positive-sequence frequency-deviation estimator
///   delta_s = (omega0/gamma) * (1/K) * sum_k angle(V_+[k+1] * conj(V_+[k])),
/// on the raw (unwhitened) measurements. Requires K >= 2; throws
/// std::domain_error if any V_+[k] is exactly zero.
double suboptimal_frequency(const SequenceMeasurements& meas,
                            AngleSumConvention convention = AngleSumConvention::literal);

}  // namespace pmu
