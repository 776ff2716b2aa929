#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace pmu {

/// Parameters of a synthetic three-phase voltage scenario in per-unit scale.
///
/// The three phases share a common instantaneous frequency omega0 + delta;
/// magnitudes and phases are free, so balanced, magnitude-unbalanced and
/// phase-unbalanced conditions are all expressible. An optional harmonic
/// amplitude list turns the pure cosine into a harmonic-distorted waveform
/// (entry p multiplies the component at p times the prevailing frequency).
struct ThreePhaseScenario {
    std::array<double, 3> magnitudes{1.0, 1.0, 1.0};   // V_a, V_b, V_c >= 0
    std::array<double, 3> phases{0.0, 0.0, 0.0};       // radians
    double nominal_frequency = 2.0 * 3.14159265358979323846 * 60.0;  // omega0, rad/s
    double frequency_deviation = 0.0;                  // delta, rad/s
    int samples_per_cycle = 48;                        // N >= 3
    int window_count = 12;                             // K >= 1
    double noise_variance = 0.0;                       // sigma^2 >= 0
    std::vector<double> harmonics;                     // empty = pure fundamental
    std::uint64_t rng_seed = 0;

    /// Angular step gamma = 2*pi/N.
    double gamma() const;

    /// Number of time samples needed by K sliding windows: K - 1 + N.
    int frame_length() const;

    /// Complex phasor vector v = [V_x * exp(j*phi_x)].
    std::array<std::complex<double>, 3> phasor_vector() const;

    /// True sequence phasors (C_0, C_+, C_-) = sqrt(2)/6 * H * v.
    std::array<std::complex<double>, 3> sequence_phasors() const;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Real-valued sample block covering all K sliding DFT windows.
struct TimeSeriesFrame {
    std::array<std::vector<double>, 3> samples;  // index order a, b, c
    ThreePhaseScenario scenario;
};

/// Noise-free samples v_x[n] = V_x * sum_p a_p cos(p*(gamma*(1+delta/omega0)*n + phi_x)),
/// n = 0 .. K+N-2. An empty harmonic list means a single unit-gain fundamental.
TimeSeriesFrame generate_clean(const ThreePhaseScenario& scenario);

/// Adds white Gaussian noise of the given variance to every phase and sample.
/// Deterministic for a fixed seed; sigma2 == 0 returns the input unchanged.
TimeSeriesFrame add_noise(const TimeSeriesFrame& frame, double sigma2, std::uint64_t seed);

/// generate_clean followed by add_noise with the scenario's own variance and seed.
TimeSeriesFrame generate_noisy(const ThreePhaseScenario& scenario);

/// sigma^2 = 3*V_a^2 / 10^(snr_db/10), the SNR convention used throughout.
double snr_to_sigma2(double snr_db, double v_a);

}  // namespace pmu
