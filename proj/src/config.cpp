#include "pmu/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace pmu {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

long parse_int(const std::string& text, const std::string& key) {
    long value = 0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
    const std::string t = lower(text);
    if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "off" || t == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

DetectorSpec parse_detector(const std::string& token, const std::string& key) {
    const auto colon = token.find(':');
    const std::string det = lower(trim(token.substr(0, colon)));
    const std::string mode =
        colon == std::string::npos ? "" : lower(trim(token.substr(colon + 1)));

    DetectorSpec spec;
    if (det == "glrt") spec.detector = Detector::glrt;
    else if (det == "glrt_snh") spec.detector = Detector::glrt_snh;
    else if (det == "vuf") spec.detector = Detector::vuf;
    else throw ConfigError(key + ": unknown detector '" + det + "'");

    if (spec.detector == Detector::vuf) {
        if (!mode.empty()) throw ConfigError(key + ": vuf takes no frequency mode");
        spec.freq_mode = FreqMode::suboptimal;
        return spec;
    }
    if (mode.empty() || mode == "suboptimal") spec.freq_mode = FreqMode::suboptimal;
    else if (mode == "known") spec.freq_mode = FreqMode::known;
    else if (mode == "ml") spec.freq_mode = FreqMode::ml_grid;
    else throw ConfigError(key + ": unknown frequency mode '" + mode + "'");
    return spec;
}

FreqEstimator parse_estimator(const std::string& token, const std::string& key) {
    const std::string t = lower(trim(token));
    if (t == "suboptimal") return FreqEstimator::suboptimal;
    if (t == "ml_h0") return FreqEstimator::ml_h0;
    if (t == "ml_h1") return FreqEstimator::ml_h1;
    throw ConfigError(key + ": unknown estimator '" + token + "'");
}

SweepAxis parse_axis(const std::string& text, const std::string& key) {
    const std::string t = lower(trim(text));
    if (t == "beta") return SweepAxis::beta;
    if (t == "epsilon") return SweepAxis::epsilon;
    if (t == "k") return SweepAxis::window_count;
    if (t == "snr_db") return SweepAxis::snr_db;
    if (t == "tau") return SweepAxis::tau;
    throw ConfigError(key + ": unknown sweep axis '" + text + "'");
}

const char* const kKnownKeys[] = {
    "scenario.v_a", "scenario.v_b", "scenario.v_c",
    "scenario.phi_a", "scenario.phi_b", "scenario.phi_c",
    "scenario.beta", "scenario.epsilon",
    "scenario.omega0", "scenario.delta",
    "scenario.samples_per_cycle", "scenario.windows",
    "scenario.snr_db", "scenario.sigma2",
    "scenario.harmonics", "scenario.seed",
    "detect.detectors", "detect.r", "detect.pfa", "detect.tau",
    "sweep.axis", "sweep.values", "sweep.trials", "sweep.calibration_multiplier",
    "sweep.estimators",
    "ml.grid_lo_hz", "ml.grid_hi_hz", "ml.grid_points", "ml.refine",
    "output.path", "output.format", "output.timings",
    "run.threads", "run.verbosity",
};

bool known_key(const std::string& key) {
    for (const char* k : kKnownKeys)
        if (key == k) return true;
    return false;
}

}  // namespace

double parse_real(const std::string& raw, const std::string& key) {
    std::string text = trim(raw);
    double scale = 1.0;
    if (text.size() >= 2 && lower(text.substr(text.size() - 2)) == "pi") {
        scale = std::numbers::pi;
        text = trim(text.substr(0, text.size() - 2));
        if (text.empty() || text == "+") text = "1";
        else if (text == "-") text = "-1";
    }
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError(key + ": expected a real number, got '" + raw + "'");
    return value * scale;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& key) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = trim(token);
        if (token.empty())
            throw ConfigError(key + ": empty list element");
        out.push_back(parse_real(token, key));
    }
    return out;
}

std::string hash_entries(const std::map<std::string, std::string>& entries) {
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [k, v] : entries) {
        feed(k);
        feed("=");
        feed(v);
        feed("\n");
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ConfigBuilder::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    load_string(buffer.str(), path);
}

void ConfigBuilder::load_string(const std::string& text, const std::string& origin) {
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.find('.') == std::string::npos && !section.empty())
            key = section + "." + key;
        if (!known_key(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        entries_[key] = value;
    }
}

void ConfigBuilder::set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "': expected key=value");
    const std::string key = trim(assignment.substr(0, eq));
    if (!known_key(key)) throw ConfigError("override: unknown key '" + key + "'");
    entries_[key] = trim(assignment.substr(eq + 1));
}

RunConfig ConfigBuilder::build() const {
    RunConfig cfg;
    cfg.spec.base = baseline_scenario();
    // Execution knobs do not change what is being computed; keep them out of
    // the provenance hash.
    std::map<std::string, std::string> hashed;
    for (const auto& [k, v] : entries_)
        if (!k.starts_with("run.") && !k.starts_with("output.")) hashed[k] = v;
    cfg.config_hash = hash_entries(hashed);

    const auto get = [&](const char* key) -> std::optional<std::string> {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    };

    auto& sc = cfg.spec.base;
    if (auto v = get("scenario.v_a")) sc.magnitudes[0] = parse_real(*v, "scenario.v_a");
    if (auto v = get("scenario.v_b")) sc.magnitudes[1] = parse_real(*v, "scenario.v_b");
    if (auto v = get("scenario.v_c")) sc.magnitudes[2] = parse_real(*v, "scenario.v_c");
    if (auto v = get("scenario.phi_a")) sc.phases[0] = parse_real(*v, "scenario.phi_a");
    if (auto v = get("scenario.phi_b")) sc.phases[1] = parse_real(*v, "scenario.phi_b");
    if (auto v = get("scenario.phi_c")) sc.phases[2] = parse_real(*v, "scenario.phi_c");
    if (auto v = get("scenario.omega0")) sc.nominal_frequency = parse_real(*v, "scenario.omega0");
    if (auto v = get("scenario.delta")) sc.frequency_deviation = parse_real(*v, "scenario.delta");
    if (auto v = get("scenario.samples_per_cycle"))
        sc.samples_per_cycle = static_cast<int>(parse_int(*v, "scenario.samples_per_cycle"));
    if (auto v = get("scenario.windows"))
        sc.window_count = static_cast<int>(parse_int(*v, "scenario.windows"));
    if (auto v = get("scenario.seed"))
        sc.rng_seed = static_cast<std::uint64_t>(parse_int(*v, "scenario.seed"));

    if (get("scenario.snr_db") && get("scenario.sigma2"))
        throw ConfigError("scenario: snr_db and sigma2 are mutually exclusive");
    if (auto v = get("scenario.sigma2")) {
        sc.noise_variance = parse_real(*v, "scenario.sigma2");
        if (sc.noise_variance < 0.0)
            throw ConfigError("scenario.sigma2: must be nonnegative");
    }
    if (auto v = get("scenario.snr_db")) {
        if (!(sc.magnitudes[0] > 0.0))
            throw ConfigError("scenario.snr_db: requires v_a > 0");
        sc.noise_variance = snr_to_sigma2(parse_real(*v, "scenario.snr_db"), sc.magnitudes[0]);
    }
    if (auto v = get("scenario.harmonics"))
        sc.harmonics = v->empty() ? std::vector<double>{}
                                  : parse_real_list(*v, "scenario.harmonics");

    if (auto v = get("scenario.beta")) {
        cfg.spec.beta = parse_real(*v, "scenario.beta");
        sc = apply_single_phase_imbalance(sc, cfg.spec.beta, cfg.spec.epsilon);
    }
    if (auto v = get("scenario.epsilon")) {
        cfg.spec.epsilon = parse_real(*v, "scenario.epsilon");
        sc = apply_single_phase_imbalance(sc, cfg.spec.beta, cfg.spec.epsilon);
    }

    if (auto v = get("detect.r")) {
        cfg.spec.r = parse_real(*v, "detect.r");
        if (cfg.spec.r < 0.0) throw ConfigError("detect.r: must be nonnegative");
    }
    if (auto v = get("detect.pfa")) {
        cfg.spec.pfa = parse_real(*v, "detect.pfa");
        if (!(cfg.spec.pfa > 0.0 && cfg.spec.pfa < 1.0))
            throw ConfigError("detect.pfa: must lie in (0, 1)");
    }
    if (auto v = get("detect.tau")) {
        cfg.tau = parse_real(*v, "detect.tau");
        if (!(*cfg.tau >= 0.0)) throw ConfigError("detect.tau: must be nonnegative");
    }
    if (auto v = get("detect.detectors")) {
        std::stringstream ss(*v);
        std::string token;
        while (std::getline(ss, token, ','))
            cfg.spec.detectors.push_back(parse_detector(trim(token), "detect.detectors"));
        if (cfg.spec.detectors.empty())
            throw ConfigError("detect.detectors: must name at least one detector");
    }

    if (auto v = get("sweep.axis")) cfg.spec.axis = parse_axis(*v, "sweep.axis");
    if (auto v = get("sweep.values")) {
        cfg.spec.values = parse_real_list(*v, "sweep.values");
        if (cfg.spec.values.empty()) throw ConfigError("sweep.values: must not be empty");
    }
    if (auto v = get("sweep.trials"))
        cfg.spec.trials = static_cast<int>(parse_int(*v, "sweep.trials"));
    if (auto v = get("sweep.calibration_multiplier"))
        cfg.spec.calibration_multiplier =
            static_cast<int>(parse_int(*v, "sweep.calibration_multiplier"));
    if (auto v = get("sweep.estimators")) {
        std::stringstream ss(*v);
        std::string token;
        while (std::getline(ss, token, ','))
            cfg.spec.estimators.push_back(parse_estimator(token, "sweep.estimators"));
    }

    if (auto v = get("ml.grid_lo_hz"))
        cfg.spec.grid.lo = 2.0 * std::numbers::pi * parse_real(*v, "ml.grid_lo_hz");
    if (auto v = get("ml.grid_hi_hz"))
        cfg.spec.grid.hi = 2.0 * std::numbers::pi * parse_real(*v, "ml.grid_hi_hz");
    if (auto v = get("ml.grid_points"))
        cfg.spec.grid.points = static_cast<int>(parse_int(*v, "ml.grid_points"));
    if (auto v = get("ml.refine")) cfg.spec.grid.refine = parse_bool(*v, "ml.refine");

    if (auto v = get("output.path")) cfg.output_path = *v;
    if (auto v = get("output.format")) {
        const std::string f = lower(*v);
        if (f == "csv") cfg.format = OutputFormat::csv;
        else if (f == "jsonl" || f == "json-lines") cfg.format = OutputFormat::jsonl;
        else throw ConfigError("output.format: expected csv or jsonl");
    }
    if (auto v = get("output.timings")) cfg.timings = parse_bool(*v, "output.timings");
    if (auto v = get("run.threads")) {
        cfg.spec.threads = static_cast<int>(parse_int(*v, "run.threads"));
        if (cfg.spec.threads < 1) throw ConfigError("run.threads: must be at least 1");
    }
    if (auto v = get("run.verbosity"))
        cfg.verbosity = static_cast<int>(parse_int(*v, "run.verbosity"));

    cfg.spec.seed = sc.rng_seed;

    try {
        sc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return cfg;
}

}  // namespace pmu
