#include "pmu/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace pmu {

namespace {

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

}  // namespace

double ThreePhaseScenario::gamma() const {
    return 2.0 * std::numbers::pi / samples_per_cycle;
}

int ThreePhaseScenario::frame_length() const {
    return window_count - 1 + samples_per_cycle;
}

std::array<std::complex<double>, 3> ThreePhaseScenario::phasor_vector() const {
    std::array<std::complex<double>, 3> v;
    for (int x = 0; x < 3; ++x) v[x] = std::polar(magnitudes[x], phases[x]);
    return v;
}

std::array<std::complex<double>, 3> ThreePhaseScenario::sequence_phasors() const {
    const auto v = phasor_vector();
    const std::complex<double> a = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
    const std::complex<double> a2 = a * a;
    const double s = std::numbers::sqrt2 / 6.0;
    return {s * (v[0] + v[1] + v[2]),
            s * (v[0] + a * v[1] + a2 * v[2]),
            s * (v[0] + a2 * v[1] + a * v[2])};
}

void ThreePhaseScenario::validate() const {
    for (int x = 0; x < 3; ++x) {
        require(std::isfinite(magnitudes[x]) && magnitudes[x] >= 0.0,
                "magnitudes: must be finite and nonnegative");
        require(std::isfinite(phases[x]), "phases: must be finite");
    }
    require(std::isfinite(nominal_frequency) && nominal_frequency > 0.0,
            "nominal_frequency: must be positive");
    require(std::isfinite(frequency_deviation), "frequency_deviation: must be finite");
    require(samples_per_cycle >= 3, "samples_per_cycle: must be at least 3");
    require(window_count >= 1, "window_count: must be at least 1");
    require(std::isfinite(noise_variance) && noise_variance >= 0.0,
            "noise_variance: must be finite and nonnegative");
    for (double a : harmonics)
        require(std::isfinite(a), "harmonics: amplitudes must be finite");
}

TimeSeriesFrame generate_clean(const ThreePhaseScenario& scenario) {
    scenario.validate();
    const int length = scenario.frame_length();
    const double step = scenario.gamma() *
                        (scenario.nominal_frequency + scenario.frequency_deviation) /
                        scenario.nominal_frequency;
    const std::vector<double> single{1.0};
    const std::vector<double>& amps = scenario.harmonics.empty() ? single : scenario.harmonics;

    TimeSeriesFrame frame;
    frame.scenario = scenario;
    for (int x = 0; x < 3; ++x) {
        auto& s = frame.samples[x];
        s.resize(length);
        for (int n = 0; n < length; ++n) {
            const double angle = step * n + scenario.phases[x];
            double acc = 0.0;
            for (std::size_t p = 0; p < amps.size(); ++p)
                acc += amps[p] * std::cos(static_cast<double>(p + 1) * angle);
            s[n] = scenario.magnitudes[x] * acc;
        }
    }
    return frame;
}

TimeSeriesFrame add_noise(const TimeSeriesFrame& frame, double sigma2, std::uint64_t seed) {
    if (!(std::isfinite(sigma2) && sigma2 >= 0.0))
        throw std::invalid_argument("noise_variance: must be finite and nonnegative");
    if (sigma2 == 0.0) return frame;

    TimeSeriesFrame out = frame;
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, std::sqrt(sigma2));
    const std::size_t length = frame.samples[0].size();
    for (std::size_t n = 0; n < length; ++n)
        for (int x = 0; x < 3; ++x) out.samples[x][n] += dist(gen);
    return out;
}

TimeSeriesFrame generate_noisy(const ThreePhaseScenario& scenario) {
    return add_noise(generate_clean(scenario), scenario.noise_variance, scenario.rng_seed);
}

double snr_to_sigma2(double snr_db, double v_a) {
    if (!(v_a > 0.0)) throw std::invalid_argument("snr_to_sigma2: V_a must be positive");
    return 3.0 * v_a * v_a / std::pow(10.0, snr_db / 10.0);
}

}  // namespace pmu
