#include "pmu/pipeline.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmu {

namespace {

std::complex<double> alpha_unit() { return std::polar(1.0, 2.0 * std::numbers::pi / 3.0); }

}  // namespace

std::complex<double> dft_phasor(std::span<const double> x, int k, int n_per_cycle) {
    if (n_per_cycle < 1) throw std::invalid_argument("dft_phasor: N must be positive");
    if (k < 0 || static_cast<std::size_t>(k) + n_per_cycle > x.size())
        throw std::out_of_range("dft_phasor: window [k, k+N) outside the sample block");
    const double gamma = 2.0 * std::numbers::pi / n_per_cycle;
    std::complex<double> acc{0.0, 0.0};
    for (int n = k; n < k + n_per_cycle; ++n)
        acc += x[n] * std::polar(1.0, -gamma * n);
    return std::numbers::sqrt2 / n_per_cycle * acc;
}

std::array<std::complex<double>, 3>
symmetrical_transform(const std::array<std::complex<double>, 3>& abc) {
    const auto a = alpha_unit();
    const auto a2 = a * a;
    return {(abc[0] + abc[1] + abc[2]) / 3.0,
            (abc[0] + a * abc[1] + a2 * abc[2]) / 3.0,
            (abc[0] + a2 * abc[1] + a * abc[2]) / 3.0};
}

std::array<std::complex<double>, 3>
inverse_symmetrical_transform(const std::array<std::complex<double>, 3>& seq) {
    // (1/3)H has inverse H^H because H H^H = 3I.
    const auto a = alpha_unit();
    const auto a2 = a * a;
    const auto c = [](std::complex<double> z) { return std::conj(z); };
    return {seq[0] + seq[1] + seq[2],
            seq[0] + c(a) * seq[1] + c(a2) * seq[2],
            seq[0] + c(a2) * seq[1] + c(a) * seq[2]};
}

PhasorSequences phase_phasors(const TimeSeriesFrame& frame) {
    const auto& sc = frame.scenario;
    const int k_count = sc.window_count;
    const int n = sc.samples_per_cycle;
    for (int x = 0; x < 3; ++x)
        if (static_cast<int>(frame.samples[x].size()) < sc.frame_length())
            throw std::invalid_argument("phase_phasors: frame shorter than K-1+N samples");

    PhasorSequences out;
    for (int x = 0; x < 3; ++x) {
        out.phase[x].resize(k_count);
        for (int k = 0; k < k_count; ++k)
            out.phase[x][k] = dft_phasor(frame.samples[x], k, n);
    }
    return out;
}

SequenceMeasurements extract_sequences(const TimeSeriesFrame& frame) {
    const auto phasors = phase_phasors(frame);
    const int k_count = frame.scenario.window_count;

    SequenceMeasurements meas;
    meas.samples_per_cycle = frame.scenario.samples_per_cycle;
    meas.omega0 = frame.scenario.nominal_frequency;
    meas.zero.resize(k_count);
    meas.pos.resize(k_count);
    meas.neg.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
        const auto seq = symmetrical_transform(
            {phasors.phase[0][k], phasors.phase[1][k], phasors.phase[2][k]});
        meas.zero[k] = seq[0];
        meas.pos[k] = seq[1];
        meas.neg[k] = seq[2];
    }
    return meas;
}

}  // namespace pmu
