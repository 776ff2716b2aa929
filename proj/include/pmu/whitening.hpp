#pragma once

#include <Eigen/Core>
#include <complex>
#include <optional>
#include <utility>

#include "pmu/pipeline.hpp"

namespace pmu {

/// Choice of whitening factor W_f with W_f^H W_f = R^{-1}. Every downstream
/// statistic depends on R only through R^{-1} bilinear forms, so the choice is
/// free; two factorizations are kept so that invariance is testable.
enum class WhiteningFactor { symmetric_sqrt, cholesky };

/// DFT-noise covariance of the K sequence samples: a Bartlett-kernel Toeplitz
/// matrix, [R]_{k,l} = 2*sigma^2/(3*N^2) * max(N - |k-l|, 0).
class NoiseCovariance {
  public:
    /// Throws std::invalid_argument for sigma2 <= 0 (whitening undefined).
    static NoiseCovariance build(int window_count, int samples_per_cycle, double sigma2);

    /// Like build, but sigma2 == 0 substitutes the unit-variance matrix so that
    /// noiseless runs go through the same code path (estimates are invariant to
    /// the substituted scale).
    static NoiseCovariance build_or_surrogate(int window_count, int samples_per_cycle,
                                              double sigma2);

    int window_count() const { return k_; }
    int samples_per_cycle() const { return n_; }
    double sigma2() const { return sigma2_; }

    const Eigen::MatrixXd& matrix() const { return r_; }

    /// Whitening factor of the requested kind, computed once and cached.
    const Eigen::MatrixXd& factor(WhiteningFactor kind = WhiteningFactor::symmetric_sqrt) const;

    /// W_f * v for complex v (the factor is real).
    Eigen::VectorXcd whiten(const Eigen::VectorXcd& v,
                            WhiteningFactor kind = WhiteningFactor::symmetric_sqrt) const;

  private:
    NoiseCovariance(int k, int n, double sigma2);

    int k_ = 0;
    int n_ = 0;
    double sigma2_ = 0.0;
    Eigen::MatrixXd r_;
    mutable std::optional<Eigen::MatrixXd> factor_sym_;
    mutable std::optional<Eigen::MatrixXd> factor_chol_;
};

/// Everything determined by one candidate frequency deviation: the Dirichlet
/// factors P and Q, raw and whitened steering vectors, the Gram quantities
/// kappa1, kappa2, kappa, and the sufficient statistics z_+, z_- computed
/// against one set of measurements.
struct FrequencyContext {
    double delta = 0.0;                 // candidate deviation, rad/s
    std::complex<double> p_factor, q_factor;
    Eigen::VectorXcd e1_raw, e2_raw;    // steering vectors
    Eigen::VectorXcd e1, e2;            // whitened steering vectors
    Eigen::VectorXcd nu_plus, nu_minus; // whitened measurements
    double kappa1 = 0.0;
    std::complex<double> kappa2;
    double kappa = 0.0;                 // (kappa1^2 - |kappa2|^2) / kappa1
    std::complex<double> z_plus, z_minus;
    bool degenerate_gram = false;       // kappa1^2 - |kappa2|^2 below tolerance

    int window_count() const { return static_cast<int>(e1.size()); }
};

/// Dirichlet-kernel factors of the fundamental and its mirrored image:
///   P = sin(gamma*N*delta/(2*omega0)) / (N*sin(gamma*delta/(2*omega0)))
///       * exp(j*gamma*(delta/omega0)*(N-1)/2),
/// Q analogous with 2*omega0 + delta and a negative phase ramp. Removable
/// singularities are evaluated by their limits (P -> 1 as delta -> 0).
std::pair<std::complex<double>, std::complex<double>>
compute_P_Q(double delta, int samples_per_cycle, double omega0);

/// Builds the full per-candidate context against one measurement set.
/// The degenerate-Gram condition (kappa1^2 - |kappa2|^2 < 1e-12 * kappa1^2)
/// is flagged, not thrown; estimators guard on it.
FrequencyContext build_context(double delta, const SequenceMeasurements& meas,
                               const NoiseCovariance& cov,
                               WhiteningFactor kind = WhiteningFactor::symmetric_sqrt);

/// Fills the optional whitened vectors on the measurement struct.
void whiten_sequences(SequenceMeasurements& meas, const NoiseCovariance& cov,
                      WhiteningFactor kind = WhiteningFactor::symmetric_sqrt);

}  // namespace pmu
