#pragma once

#include <Eigen/Core>
#include <array>
#include <complex>
#include <span>

#include "pmu/signal_model.hpp"

namespace pmu {

/// Per-phase phasor sequences V_a[k], V_b[k], V_c[k], k = 0 .. K-1.
struct PhasorSequences {
    std::array<Eigen::VectorXcd, 3> phase;
};

/// Zero/positive/negative sequence measurement vectors of length K.
/// The raw vectors come straight from the PMU front-end; the whitened images
/// are empty until filled by the whitening stage.
struct SequenceMeasurements {
    Eigen::VectorXcd zero, pos, neg;        // raw
    Eigen::VectorXcd zero_w, pos_w, neg_w;  // whitened (optional payload)
    int samples_per_cycle = 0;              // N of the generating scenario
    double omega0 = 0.0;                    // nominal frequency, rad/s

    int window_count() const { return static_cast<int>(pos.size()); }
};

/// One-cycle PMU DFT: X[k] = sqrt(2)/N * sum_{n=k}^{k+N-1} x[n] e^{-j*gamma*n}.
/// Throws std::out_of_range if the window does not fit inside x.
std::complex<double> dft_phasor(std::span<const double> x, int k, int n_per_cycle);

/// (V_0, V_+, V_-) = (1/3) * H * (V_a, V_b, V_c), H rows (1,1,1), (1,a,a^2), (1,a^2,a).
std::array<std::complex<double>, 3>
symmetrical_transform(const std::array<std::complex<double>, 3>& abc);

/// Exact inverse of symmetrical_transform (H^H applied to the sequence triple).
std::array<std::complex<double>, 3>
inverse_symmetrical_transform(const std::array<std::complex<double>, 3>& seq);

/// Full front-end: sliding DFT per phase at window starts k = 0..K-1, then the
/// symmetrical transform per window. Raw vectors filled, whitened left empty.
SequenceMeasurements extract_sequences(const TimeSeriesFrame& frame);

/// Sliding DFT only, without the sequence transform.
PhasorSequences phase_phasors(const TimeSeriesFrame& frame);

}  // namespace pmu
