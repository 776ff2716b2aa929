#include "pmu/commands.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include <json.hpp>

#include "pmu/table_io.hpp"
#include "pmu/version.hpp"

namespace pmu {

namespace {

int guarded(std::ostream& err, const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

// Runs the body against the configured output destination.
void with_output(const RunConfig& cfg, std::ostream& fallback,
                 const std::function<void(std::ostream&)>& body) {
    if (cfg.output_path == "-" || cfg.output_path.empty()) {
        body(fallback);
        return;
    }
    std::ofstream file(cfg.output_path);
    if (!file)
        throw std::runtime_error("output: cannot open '" + cfg.output_path + "'");
    body(file);
}

double known_kappa(const ThreePhaseScenario& sc, const NoiseCovariance& cov) {
    SequenceMeasurements probe;
    probe.zero = probe.pos = probe.neg = Eigen::VectorXcd::Zero(sc.window_count);
    probe.samples_per_cycle = sc.samples_per_cycle;
    probe.omega0 = sc.nominal_frequency;
    return build_context(sc.frequency_deviation, probe, cov).kappa;
}

std::vector<DetectorSpec> detect_set(const RunConfig& cfg) {
    if (!cfg.spec.detectors.empty()) return cfg.spec.detectors;
    return {{Detector::glrt, FreqMode::known},
            {Detector::glrt, FreqMode::suboptimal},
            {Detector::vuf, FreqMode::suboptimal}};
}

}  // namespace

int cmd_detect(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ThreePhaseScenario& sc = cfg.spec.base;
        sc.validate();
        const SequenceMeasurements meas = extract_sequences(generate_noisy(sc));
        const NoiseCovariance cov = NoiseCovariance::build_or_surrogate(
            sc.window_count, sc.samples_per_cycle, sc.noise_variance);

        std::vector<NamedReport> reports;
        for (const DetectorSpec& det : detect_set(cfg)) {
            FreqSelection freq{det.freq_mode, sc.frequency_deviation, cfg.spec.grid};
            DetectionReport rep;
            switch (det.detector) {
                case Detector::glrt:
                    rep = glrt(meas, cov, cfg.spec.r, freq, 0.0);
                    break;
                case Detector::glrt_snh:
                    rep = glrt_snh(meas, cov, freq, 0.0);
                    break;
                case Detector::vuf:
                    rep = vuf(meas, 0.0);
                    break;
            }
            if (cfg.tau) {
                rep.threshold = *cfg.tau;
                rep.calibration = Calibration::analytic;
            } else if (det.detector == Detector::vuf) {
                // No analytic rule exists for the VUF; r doubles as the
                // authorized imbalance ratio.
                rep.threshold = cfg.spec.r;
                rep.calibration = Calibration::analytic;
            } else {
                const double r_eff = det.detector == Detector::glrt ? cfg.spec.r : 0.0;
                rep.threshold = analytic_threshold(cfg.spec.pfa, rep.kappa, r_eff);
            }
            rep.unbalanced = rep.statistic > rep.threshold;
            reports.push_back({det.name(), rep});
        }
        with_output(cfg, out, [&](std::ostream& o) { write_reports(o, reports, cfg); });
        if (cfg.verbosity >= 1 && cfg.output_path != "-" && !cfg.output_path.empty())
            err << "wrote " << reports.size() << " report rows to " << cfg.output_path
                << "\n";
    });
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ResultTable table;
        switch (cfg.spec.axis) {
            case SweepAxis::tau:
                table = run_pe_curve(cfg.spec);
                break;
            case SweepAxis::snr_db:
                table = cfg.spec.estimators.empty() ? run_pd_sweep(cfg.spec)
                                                    : run_freq_mse(cfg.spec);
                break;
            default:
                table = cfg.spec.base.harmonics.empty() ? run_pd_sweep(cfg.spec)
                                                        : run_harmonics_study(cfg.spec);
                break;
        }
        with_output(cfg, out, [&](std::ostream& o) { write_table(o, table, cfg); });
        if (cfg.verbosity >= 1 && cfg.output_path != "-" && !cfg.output_path.empty())
            err << "wrote " << table.rows.size() << " rows to " << cfg.output_path << "\n";
    });
}

int cmd_calibrate(const RunConfig& cfg, bool with_empirical, std::ostream& out,
                  std::ostream& err) {
    return guarded(err, [&] {
        const ThreePhaseScenario& sc = cfg.spec.base;
        sc.validate();
        const NoiseCovariance cov = NoiseCovariance::build_or_surrogate(
            sc.window_count, sc.samples_per_cycle, sc.noise_variance);
        const double kappa = known_kappa(sc, cov);
        const double tau = analytic_threshold(cfg.spec.pfa, kappa, cfg.spec.r);
        const double shift = std::sqrt(kappa) * cfg.spec.r;

        std::vector<std::pair<std::string, double>> lines{
            {"pfa", cfg.spec.pfa},
            {"r", cfg.spec.r},
            {"kappa", kappa},
            {"sqrt_kappa_r", shift},
            {"tau_analytic", tau},
            {"tau_tilde", tau + shift},
        };
        std::vector<ResultRow> empirical;
        if (with_empirical) {
            ExperimentSpec spec = cfg.spec;
            if (spec.values.empty()) spec.values = {spec.beta};
            if (spec.axis == SweepAxis::tau) spec.axis = SweepAxis::beta;
            empirical = calibrate_point(spec, spec.values.front());
        }

        with_output(cfg, out, [&](std::ostream& o) {
            if (cfg.format == OutputFormat::jsonl) {
                nlohmann::json j;
                for (const auto& [k, v] : lines) j[k] = v;
                for (const auto& row : empirical)
                    j[row.detector + "." + row.metric] = row.value;
                o << j.dump() << "\n";
                return;
            }
            for (const auto& [k, v] : lines) o << k << " = " << format_double(v) << "\n";
            for (const auto& row : empirical)
                o << row.detector << "." << row.metric << " = " << format_double(row.value)
                  << "\n";
        });
    });
}

int cmd_scenario_dump(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ThreePhaseScenario& sc = cfg.spec.base;
        sc.validate();
        const auto seq = sc.sequence_phasors();

        with_output(cfg, out, [&](std::ostream& o) {
            auto cpx = [](std::complex<double> z) {
                return nlohmann::json{{"re", z.real()}, {"im", z.imag()},
                                      {"abs", std::abs(z)}, {"arg", std::arg(z)}};
            };
            nlohmann::json j{
                {"v_a", sc.magnitudes[0]}, {"v_b", sc.magnitudes[1]},
                {"v_c", sc.magnitudes[2]}, {"phi_a", sc.phases[0]},
                {"phi_b", sc.phases[1]},   {"phi_c", sc.phases[2]},
                {"omega0", sc.nominal_frequency},
                {"delta", sc.frequency_deviation},
                {"samples_per_cycle", sc.samples_per_cycle},
                {"windows", sc.window_count},
                {"sigma2", sc.noise_variance},
                {"gamma", sc.gamma()},
                {"harmonics", sc.harmonics},
                {"seed", sc.rng_seed},
                {"c_zero", cpx(seq[0])},
                {"c_plus", cpx(seq[1])},
                {"c_minus", cpx(seq[2])},
            };
            if (cfg.format == OutputFormat::jsonl) {
                o << j.dump() << "\n";
                return;
            }
            for (const auto& [key, value] : j.items()) o << key << " = " << value.dump() << "\n";
        });
    });
}

}  // namespace pmu
