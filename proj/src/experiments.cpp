#include "pmu/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <thread>

namespace pmu {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed streams: trial i of sweep point j draws from an independent lane per
// purpose (calibration vs measurement) so points stay reproducible and
// parallel-safe.
enum Stream : std::uint64_t { kCalibration = 0, kMeasurement = 1 };

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1 || count < 2 * threads) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

double proportion_se(double p, long n) { return std::sqrt(p * (1.0 - p) / n); }

// Empirical (1 - pfa) quantile of the sorted ascending sample.
double upper_quantile(std::vector<double> sample, double pfa) {
    std::sort(sample.begin(), sample.end());
    const auto m = sample.size();
    auto idx = static_cast<std::size_t>(std::floor((1.0 - pfa) * m));
    idx = std::min(idx, m - 1);
    return sample[idx];
}

ThreePhaseScenario axis_adjusted(const ExperimentSpec& spec, ThreePhaseScenario s,
                                 double value) {
    switch (spec.axis) {
        case SweepAxis::beta:
        case SweepAxis::epsilon:
        case SweepAxis::tau:
            break;  // handled elsewhere
        case SweepAxis::window_count:
            s.window_count = static_cast<int>(std::lround(value));
            break;
        case SweepAxis::snr_db:
            s.noise_variance = snr_to_sigma2(value, s.magnitudes[0]);
            break;
    }
    return s;
}

ThreePhaseScenario h1_scenario(const ExperimentSpec& spec, double value) {
    double beta = spec.beta;
    double epsilon = spec.epsilon;
    if (spec.axis == SweepAxis::beta) beta = value;
    if (spec.axis == SweepAxis::epsilon) epsilon = value;
    return apply_single_phase_imbalance(axis_adjusted(spec, spec.base, value), beta, epsilon);
}

std::vector<DetectorSpec> default_detectors() {
    return {{Detector::glrt, FreqMode::known},
            {Detector::glrt, FreqMode::suboptimal},
            {Detector::vuf, FreqMode::suboptimal}};
}

struct PointSetup {
    ThreePhaseScenario h1;
    ThreePhaseScenario h0;  // perfectly balanced null for calibration
    NoiseCovariance cov;
    double kappa_known = 0.0;  // at the scenario's true deviation
};

PointSetup make_point(const ExperimentSpec& spec, double value) {
    ThreePhaseScenario h1 = h1_scenario(spec, value);
    h1.validate();
    ThreePhaseScenario h0 = perfectly_balanced(h1);
    NoiseCovariance cov = NoiseCovariance::build_or_surrogate(
        h1.window_count, h1.samples_per_cycle, h1.noise_variance);

    // kappa at the true deviation, for the analytic thresholds; probe with a
    // zero measurement of the right shape.
    SequenceMeasurements probe;
    probe.zero = probe.pos = probe.neg = Eigen::VectorXcd::Zero(h1.window_count);
    probe.samples_per_cycle = h1.samples_per_cycle;
    probe.omega0 = h1.nominal_frequency;
    const FrequencyContext ctx = build_context(h1.frequency_deviation, probe, cov);
    return {std::move(h1), std::move(h0), std::move(cov), ctx.kappa};
}

double detector_statistic(const DetectorSpec& det, const SequenceMeasurements& meas,
                          const NoiseCovariance& cov, const ExperimentSpec& spec,
                          double true_delta) {
    FreqSelection freq;
    freq.mode = det.freq_mode;
    freq.known_delta = true_delta;
    freq.grid = spec.grid;
    switch (det.detector) {
        case Detector::glrt:
            return glrt(meas, cov, spec.r, freq, 0.0).statistic;
        case Detector::glrt_snh:
            return glrt_snh(meas, cov, freq, 0.0).statistic;
        case Detector::vuf:
            return vuf(meas, 0.0).statistic;
    }
    throw std::logic_error("unreachable detector");
}

bool analytic_capable(const DetectorSpec& det) {
    return det.detector != Detector::vuf && det.freq_mode == FreqMode::known;
}

SequenceMeasurements draw(const ThreePhaseScenario& scenario, std::uint64_t seed) {
    ThreePhaseScenario s = scenario;
    s.rng_seed = seed;
    return extract_sequences(generate_noisy(s));
}

// One Monte-Carlo pass: every requested statistic for every trial.
std::vector<std::vector<double>> collect_statistics(
    const ExperimentSpec& spec, const ThreePhaseScenario& scenario,
    const NoiseCovariance& cov, const std::vector<DetectorSpec>& detectors, int trials,
    std::uint64_t point_index, std::uint64_t stream) {
    std::vector<std::vector<double>> stats(detectors.size(),
                                           std::vector<double>(trials, 0.0));
    parallel_for(trials, spec.threads, [&](int i) {
        const std::uint64_t seed = mix_seed(spec.seed, point_index, stream, i);
        const SequenceMeasurements meas = draw(scenario, seed);
        for (std::size_t d = 0; d < detectors.size(); ++d)
            stats[d][i] = detector_statistic(detectors[d], meas, cov, spec,
                                             scenario.frequency_deviation);
    });
    return stats;
}

std::vector<double> calibrate_thresholds(const ExperimentSpec& spec, const PointSetup& point,
                                         const std::vector<DetectorSpec>& detectors,
                                         std::uint64_t point_index,
                                         std::vector<Calibration>* kinds) {
    std::vector<double> thresholds(detectors.size(), 0.0);
    kinds->assign(detectors.size(), Calibration::analytic);

    std::vector<DetectorSpec> empirical;
    std::vector<std::size_t> empirical_slots;
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        if (analytic_capable(detectors[d])) {
            const double r_eff = detectors[d].detector == Detector::glrt ? spec.r : 0.0;
            thresholds[d] = analytic_threshold(spec.pfa, point.kappa_known, r_eff);
        } else {
            empirical.push_back(detectors[d]);
            empirical_slots.push_back(d);
            (*kinds)[d] = Calibration::empirical;
        }
    }
    if (!empirical.empty()) {
        const int cal_trials = spec.calibration_multiplier * spec.trials;
        if (cal_trials < 1)
            throw std::runtime_error("calibration: needs at least one H0 trial");
        auto stats = collect_statistics(spec, point.h0, point.cov, empirical, cal_trials,
                                        point_index, kCalibration);
        for (std::size_t e = 0; e < empirical.size(); ++e)
            thresholds[empirical_slots[e]] = upper_quantile(std::move(stats[e]), spec.pfa);
    }
    return thresholds;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    std::uint64_t h = splitmix(a);
    h = splitmix(h ^ b);
    h = splitmix(h ^ c);
    h = splitmix(h ^ d);
    return h;
}

std::string DetectorSpec::name() const {
    if (detector == Detector::vuf) return "vuf";
    return to_string(detector) + ":" + to_string(freq_mode);
}

void ExperimentSpec::validate() const {
    base.validate();
    if (values.empty()) throw std::invalid_argument("sweep.values: must not be empty");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("sweep.values: must be finite");
    if (trials < 1) throw std::invalid_argument("sweep.trials: must be at least 1");
    if (!(pfa > 0.0 && pfa < 1.0))
        throw std::invalid_argument("detect.pfa: must lie in (0, 1)");
    if (!(r >= 0.0)) throw std::invalid_argument("detect.r: must be nonnegative");
    if (threads < 1) throw std::invalid_argument("run.threads: must be at least 1");
    if (calibration_multiplier < 1)
        throw std::invalid_argument("sweep.calibration_multiplier: must be at least 1");
    if (axis == SweepAxis::window_count)
        for (double v : values)
            if (std::lround(v) < 1)
                throw std::invalid_argument("sweep.values: K must be at least 1");
}

ThreePhaseScenario baseline_scenario() {
    ThreePhaseScenario s;
    s.magnitudes = {1.0, 1.03, 1.0};
    const double phi_a = 0.25 * kPi;
    s.phases = {phi_a, phi_a - 2.0 * kPi / 3.0 - 0.03 * kPi, phi_a + 2.0 * kPi / 3.0};
    s.nominal_frequency = 2.0 * kPi * 60.0;
    s.frequency_deviation = 0.1 * 2.0 * kPi;
    s.samples_per_cycle = 48;
    s.window_count = 12;
    s.noise_variance = snr_to_sigma2(5.0, 1.0);
    s.rng_seed = 1;
    return s;
}

ThreePhaseScenario apply_single_phase_imbalance(ThreePhaseScenario s, double beta,
                                                double epsilon) {
    s.magnitudes[2] = beta * s.magnitudes[0];
    s.phases[2] = s.phases[0] + 2.0 * kPi / 3.0 + epsilon;
    return s;
}

ThreePhaseScenario perfectly_balanced(ThreePhaseScenario s) {
    s.magnitudes = {s.magnitudes[0], s.magnitudes[0], s.magnitudes[0]};
    s.phases = {s.phases[0], s.phases[0] - 2.0 * kPi / 3.0, s.phases[0] + 2.0 * kPi / 3.0};
    return s;
}

ResultTable run_pd_sweep(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.axis == SweepAxis::tau)
        throw std::invalid_argument("pd sweep: tau axis belongs to the pe curve");
    const std::vector<DetectorSpec> detectors =
        spec.detectors.empty() ? default_detectors() : spec.detectors;

    ResultTable table;
    table.axis = to_string(spec.axis);
    for (std::size_t j = 0; j < spec.values.size(); ++j) {
        const Timer timer;
        const PointSetup point = make_point(spec, spec.values[j]);
        std::vector<Calibration> kinds;
        const std::vector<double> thresholds =
            calibrate_thresholds(spec, point, detectors, j, &kinds);
        const auto stats = collect_statistics(spec, point.h1, point.cov, detectors,
                                              spec.trials, j, kMeasurement);
        const double wall = timer.seconds();
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            long hits = 0;
            for (double s : stats[d]) hits += s > thresholds[d] ? 1 : 0;
            const double pd = static_cast<double>(hits) / spec.trials;
            table.rows.push_back({spec.values[j], detectors[d].name(), "pd", pd,
                                  proportion_se(pd, spec.trials), spec.trials, wall});
            table.rows.push_back({spec.values[j], detectors[d].name(),
                                  kinds[d] == Calibration::analytic
                                      ? "threshold_analytic"
                                      : "threshold_empirical",
                                  thresholds[d], 0.0, spec.trials, wall});
        }
    }
    return table;
}

ResultTable run_pe_curve(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.axis != SweepAxis::tau)
        throw std::invalid_argument("pe curve: axis must be tau");
    for (double tau : spec.values)
        if (!(tau >= 0.0)) throw std::invalid_argument("pe curve: thresholds must be >= 0");

    std::vector<DetectorSpec> detectors = spec.detectors;
    if (detectors.empty())
        detectors = {{Detector::glrt, FreqMode::known},
                     {Detector::glrt, FreqMode::suboptimal},
                     {Detector::glrt_snh, FreqMode::known},
                     {Detector::glrt_snh, FreqMode::suboptimal}};
    for (const auto& det : detectors)
        if (det.detector == Detector::vuf)
            throw std::invalid_argument("pe curve: the analytic column is defined for the "
                                        "GLRT family only");

    // The H0 scenario: the base with the spec's own beta/epsilon applied.
    const ThreePhaseScenario scenario =
        apply_single_phase_imbalance(spec.base, spec.beta, spec.epsilon);
    scenario.validate();
    const NoiseCovariance cov = NoiseCovariance::build_or_surrogate(
        scenario.window_count, scenario.samples_per_cycle, scenario.noise_variance);

    SequenceMeasurements probe;
    probe.zero = probe.pos = probe.neg = Eigen::VectorXcd::Zero(scenario.window_count);
    probe.samples_per_cycle = scenario.samples_per_cycle;
    probe.omega0 = scenario.nominal_frequency;
    const double kappa_known =
        build_context(scenario.frequency_deviation, probe, cov).kappa;

    const Timer timer;
    std::vector<std::vector<double>> stats(detectors.size(),
                                           std::vector<double>(spec.trials, 0.0));
    parallel_for(spec.trials, spec.threads, [&](int i) {
        const std::uint64_t seed = mix_seed(spec.seed, 0, kMeasurement, i);
        const SequenceMeasurements meas = draw(scenario, seed);
        for (std::size_t d = 0; d < detectors.size(); ++d)
            stats[d][i] = detector_statistic(detectors[d], meas, cov, spec,
                                             scenario.frequency_deviation);
    });
    const double wall = timer.seconds();

    ResultTable table;
    table.axis = "tau";
    for (double tau : spec.values) {
        for (std::size_t d = 0; d < detectors.size(); ++d) {
            long hits = 0;
            for (double s : stats[d]) hits += s > tau ? 1 : 0;
            const double pe = static_cast<double>(hits) / spec.trials;
            table.rows.push_back({tau, detectors[d].name(), "pfa", pe,
                                  proportion_se(pe, spec.trials), spec.trials, wall});
            const double r_eff = detectors[d].detector == Detector::glrt ? spec.r : 0.0;
            table.rows.push_back({tau, detectors[d].name(), "pfa_theory",
                                  theoretical_pfa(tau, kappa_known, r_eff), 0.0,
                                  spec.trials, wall});
        }
    }
    return table;
}

ResultTable run_freq_mse(const ExperimentSpec& spec) {
    spec.validate();
    if (spec.axis != SweepAxis::snr_db)
        throw std::invalid_argument("freq mse: axis must be snr_db");
    const std::vector<FreqEstimator> estimators =
        spec.estimators.empty()
            ? std::vector<FreqEstimator>{FreqEstimator::suboptimal, FreqEstimator::ml_h0,
                                         FreqEstimator::ml_h1}
            : spec.estimators;

    ResultTable table;
    table.axis = "snr_db";
    const bool needs_grid =
        std::any_of(estimators.begin(), estimators.end(),
                    [](FreqEstimator e) { return e != FreqEstimator::suboptimal; });

    for (std::size_t j = 0; j < spec.values.size(); ++j) {
        const Timer timer;
        ThreePhaseScenario scenario = apply_single_phase_imbalance(
            axis_adjusted(spec, spec.base, spec.values[j]), spec.beta, spec.epsilon);
        scenario.validate();
        const NoiseCovariance cov = NoiseCovariance::build_or_surrogate(
            scenario.window_count, scenario.samples_per_cycle, scenario.noise_variance);
        std::optional<FrequencyTable> freq_table;
        if (needs_grid)
            freq_table.emplace(spec.grid, cov, scenario.nominal_frequency,
                               WhiteningFactor::symmetric_sqrt);
        const double gamma = scenario.gamma();
        const double truth =
            gamma * scenario.frequency_deviation / scenario.nominal_frequency;

        std::vector<std::vector<double>> sq_err(estimators.size(),
                                                std::vector<double>(spec.trials, 0.0));
        parallel_for(spec.trials, spec.threads, [&](int i) {
            const std::uint64_t seed = mix_seed(spec.seed, j, kMeasurement, i);
            const SequenceMeasurements meas = draw(scenario, seed);
            for (std::size_t e = 0; e < estimators.size(); ++e) {
                double estimate = 0.0;
                switch (estimators[e]) {
                    case FreqEstimator::suboptimal:
                        estimate = suboptimal_frequency(meas);
                        break;
                    case FreqEstimator::ml_h0:
                        estimate = ml_frequency(meas, cov, *freq_table, spec.r,
                                                Hypothesis::h0_balanced);
                        break;
                    case FreqEstimator::ml_h1:
                        estimate = ml_frequency(meas, cov, *freq_table, spec.r,
                                                Hypothesis::h1_unbalanced);
                        break;
                }
                const double err = gamma * estimate / scenario.nominal_frequency - truth;
                sq_err[e][i] = err * err;
            }
        });
        const double wall = timer.seconds();
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            double mean = 0.0;
            for (double v : sq_err[e]) mean += v;
            mean /= spec.trials;
            double var = 0.0;
            for (double v : sq_err[e]) var += (v - mean) * (v - mean);
            const double se =
                spec.trials > 1 ? std::sqrt(var / (spec.trials - 1) / spec.trials) : 0.0;
            table.rows.push_back({spec.values[j], to_string(estimators[e]), "mse", mean, se,
                                  spec.trials, wall});
        }
    }
    return table;
}

std::vector<ResultRow> calibrate_point(const ExperimentSpec& spec, double value) {
    spec.validate();
    const std::vector<DetectorSpec> detectors =
        spec.detectors.empty() ? default_detectors() : spec.detectors;
    const PointSetup point = make_point(spec, value);
    std::vector<Calibration> kinds;
    const std::vector<double> thresholds =
        calibrate_thresholds(spec, point, detectors, 0, &kinds);
    std::vector<ResultRow> rows;
    for (std::size_t d = 0; d < detectors.size(); ++d)
        rows.push_back({value, detectors[d].name(),
                        kinds[d] == Calibration::analytic ? "threshold_analytic"
                                                          : "threshold_empirical",
                        thresholds[d], 0.0, spec.trials, 0.0});
    return rows;
}

ResultTable run_harmonics_study(const ExperimentSpec& spec) {
    ExperimentSpec harmonic = spec;
    if (harmonic.base.harmonics.empty())
        harmonic.base.harmonics = {1.0, 0.2, 0.0, 0.5};
    ExperimentSpec sinusoidal = spec;
    sinusoidal.base.harmonics.clear();

    const ResultTable plain = run_pd_sweep(sinusoidal);
    const ResultTable distorted = run_pd_sweep(harmonic);

    ResultTable table;
    table.axis = plain.axis;
    table.rows.reserve(plain.rows.size() + distorted.rows.size());
    for (const auto& row : plain.rows)
        if (row.metric == "pd")
            table.rows.push_back({row.sweep_value, row.detector, "pd_sinusoidal", row.value,
                                  row.std_error, row.trials, row.wall_seconds});
    for (const auto& row : distorted.rows)
        if (row.metric == "pd")
            table.rows.push_back({row.sweep_value, row.detector, "pd_harmonic", row.value,
                                  row.std_error, row.trials, row.wall_seconds});
    return table;
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::beta: return "beta";
        case SweepAxis::epsilon: return "epsilon";
        case SweepAxis::window_count: return "k";
        case SweepAxis::snr_db: return "snr_db";
        case SweepAxis::tau: return "tau";
    }
    return "?";
}

std::string to_string(FreqEstimator e) {
    switch (e) {
        case FreqEstimator::suboptimal: return "suboptimal";
        case FreqEstimator::ml_h0: return "ml_h0";
        case FreqEstimator::ml_h1: return "ml_h1";
    }
    return "?";
}

}  // namespace pmu
