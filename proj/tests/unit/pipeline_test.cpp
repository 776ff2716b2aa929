#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pmu/pipeline.hpp"
#include "pmu/whitening.hpp"

using namespace pmu;
using cplx = std::complex<double>;
namespace {
constexpr double kPi = std::numbers::pi;

ThreePhaseScenario scenario_v(double beta, double eps, double delta) {
    ThreePhaseScenario s;
    const double phi_a = 0.25 * kPi;
    s.magnitudes = {1.0, 1.03, beta};
    s.phases = {phi_a, phi_a - 2.0 * kPi / 3.0 - 0.03 * kPi, phi_a + 2.0 * kPi / 3.0 + eps};
    s.frequency_deviation = delta;
    return s;
}
}  // namespace

TEST_CASE("dft_phasor of a nominal-frequency cosine is exp(j*phi)/sqrt(2) at any window") {
    const int n = 48;
    const double gamma = 2.0 * kPi / n;
    const double phi = 1.1;
    std::vector<double> x(200);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::cos(gamma * i + phi);
    for (int k : {0, 1, 37, 100}) {
        const cplx expected = std::polar(1.0 / std::numbers::sqrt2, phi);
        CHECK(std::abs(dft_phasor(x, k, n) - expected) < 1e-12);
    }
}

TEST_CASE("dft_phasor of the zero signal is zero") {
    const std::vector<double> x(96, 0.0);
    CHECK(std::abs(dft_phasor(x, 3, 48)) == 0.0);
}

TEST_CASE("dft_phasor of an off-nominal cosine matches the Dirichlet closed form") {
    const int n = 48;
    const double omega0 = 2.0 * kPi * 60.0;
    const double delta = 0.1 * 2.0 * kPi;
    const double gamma = 2.0 * kPi / n;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i)
        x[i] = std::cos(gamma * (omega0 + delta) / omega0 * i);
    const auto [p, q] = compute_P_Q(delta, n, omega0);
    const cplx expected = (p + q) / std::numbers::sqrt2;
    CHECK(std::abs(dft_phasor(x, 0, n) - expected) < 1e-12);
}

TEST_CASE("dft_phasor rejects a window outside the block") {
    const std::vector<double> x(50, 1.0);
    CHECK_THROWS_AS(dft_phasor(x, 3, 48), std::out_of_range);
    CHECK_THROWS_AS(dft_phasor(x, -1, 48), std::out_of_range);
}

TEST_CASE("symmetrical transform on canonical triples") {
    const cplx alpha = std::polar(1.0, 2.0 * kPi / 3.0);
    SUBCASE("balanced triple maps to a pure positive sequence") {
        const double v = 0.8, phi = 0.4;
        const auto seq = symmetrical_transform(
            {std::polar(v, phi), std::polar(v, phi) * std::conj(alpha),
             std::polar(v, phi) * alpha});
        CHECK(std::abs(seq[0]) < 1e-15);
        CHECK(std::abs(seq[1] - std::polar(v, phi)) < 1e-15);
        CHECK(std::abs(seq[2]) < 1e-15);
    }
    SUBCASE("(1,1,1) is pure zero sequence") {
        const auto seq = symmetrical_transform({1.0, 1.0, 1.0});
        CHECK(std::abs(seq[0] - 1.0) < 1e-15);
        CHECK(std::abs(seq[1]) < 1e-15);
        CHECK(std::abs(seq[2]) < 1e-15);
    }
    SUBCASE("single energized phase splits equally") {
        const auto seq = symmetrical_transform({1.0, 0.0, 0.0});
        for (const auto& s : seq) CHECK(std::abs(s - 1.0 / 3.0) < 1e-15);
    }
}

TEST_CASE("inverse transform recovers random triples") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const std::array<cplx, 3> abc{cplx{u(gen), u(gen)}, cplx{u(gen), u(gen)},
                                      cplx{u(gen), u(gen)}};
        const auto back = inverse_symmetrical_transform(symmetrical_transform(abc));
        for (int x = 0; x < 3; ++x) CHECK(std::abs(back[x] - abc[x]) < 1e-12);
    }
}

TEST_CASE("noiseless balanced extraction: zero sequence vanishes, negative is the Q image") {
    ThreePhaseScenario s = scenario_v(1.0, 0.0, 0.35 * 2.0 * kPi);
    s.magnitudes = {1.0, 1.0, 1.0};
    const double phi_a = s.phases[0];
    s.phases = {phi_a, phi_a - 2.0 * kPi / 3.0, phi_a + 2.0 * kPi / 3.0};

    const auto meas = extract_sequences(generate_clean(s));
    const auto truth = s.sequence_phasors();
    const auto [p, q] = compute_P_Q(s.frequency_deviation, s.samples_per_cycle,
                                    s.nominal_frequency);
    const double gamma = s.gamma();
    for (int k = 0; k < s.window_count; ++k) {
        CHECK(std::abs(meas.zero[k]) < 1e-10);
        const cplx e2 = std::polar(
            1.0, -gamma * ((2.0 * s.nominal_frequency + s.frequency_deviation) /
                           s.nominal_frequency) * k);
        CHECK(std::abs(meas.neg[k] - q * std::conj(truth[1]) * e2) < 1e-10);
    }
}

TEST_CASE("noiseless nominal-frequency extraction is the constant phasor vector") {
    ThreePhaseScenario s = scenario_v(1.7, 0.2, 0.0);
    const auto meas = extract_sequences(generate_clean(s));
    const auto truth = s.sequence_phasors();
    for (int k = 0; k < s.window_count; ++k) {
        CHECK(std::abs(meas.pos[k] - truth[1]) < 1e-12);
        CHECK(std::abs(meas.neg[k] - truth[2]) < 1e-12);
        CHECK(std::abs(meas.zero[k] - truth[0]) < 1e-12);
    }
}

TEST_CASE("noiseless general extraction matches the two-frequency sequence model") {
    const double delta = 0.3 * 2.0 * kPi;
    ThreePhaseScenario s = scenario_v(2.0, 0.1 * kPi, delta);
    const auto meas = extract_sequences(generate_clean(s));
    const auto truth = s.sequence_phasors();
    const auto [p, q] = compute_P_Q(delta, s.samples_per_cycle, s.nominal_frequency);
    const double gamma = s.gamma();
    for (int k = 0; k < s.window_count; ++k) {
        const cplx e1 = std::polar(1.0, gamma * (delta / s.nominal_frequency) * k);
        const cplx e2 = std::polar(
            1.0, -gamma * ((2.0 * s.nominal_frequency + delta) / s.nominal_frequency) * k);
        CHECK(std::abs(meas.pos[k] - (p * truth[1] * e1 + q * std::conj(truth[2]) * e2)) <
              1e-10);
        CHECK(std::abs(meas.neg[k] - (p * truth[2] * e1 + q * std::conj(truth[1]) * e2)) <
              1e-10);
    }
}

TEST_CASE("extraction is linear in the frame") {
    ThreePhaseScenario sa = scenario_v(2.0, 0.0, 0.1 * 2.0 * kPi);
    ThreePhaseScenario sb = scenario_v(1.0, 0.4, -0.7 * 2.0 * kPi);
    const auto fa = generate_clean(sa);
    const auto fb = generate_clean(sb);
    TimeSeriesFrame sum = fa;
    for (int x = 0; x < 3; ++x)
        for (std::size_t n = 0; n < sum.samples[x].size(); ++n)
            sum.samples[x][n] += fb.samples[x][n];

    const auto ma = extract_sequences(fa);
    const auto mb = extract_sequences(fb);
    const auto ms = extract_sequences(sum);
    for (int k = 0; k < sa.window_count; ++k) {
        CHECK(std::abs(ms.pos[k] - (ma.pos[k] + mb.pos[k])) < 1e-12);
        CHECK(std::abs(ms.neg[k] - (ma.neg[k] + mb.neg[k])) < 1e-12);
    }
}

TEST_CASE("sequence noise has variance 2 sigma^2/(3N) and uncorrelated sequences") {
    ThreePhaseScenario s = scenario_v(1.0, 0.0, 0.0);
    s.magnitudes = {0.0, 0.0, 0.0};  // noise only
    s.window_count = 1;
    const double sigma2 = 0.8;
    const int draws = 20000;

    double var_acc[3] = {0.0, 0.0, 0.0};
    cplx cross_pm{0.0, 0.0}, cross_p0{0.0, 0.0};
    for (int i = 0; i < draws; ++i) {
        auto frame = generate_clean(s);
        frame = add_noise(frame, sigma2, 1000 + i);
        const auto meas = extract_sequences(frame);
        var_acc[0] += std::norm(meas.zero[0]);
        var_acc[1] += std::norm(meas.pos[0]);
        var_acc[2] += std::norm(meas.neg[0]);
        cross_pm += meas.pos[0] * std::conj(meas.neg[0]);
        cross_p0 += meas.pos[0] * std::conj(meas.zero[0]);
    }
    const double expected = 2.0 * sigma2 / (3.0 * s.samples_per_cycle);
    for (double acc : var_acc)
        CHECK(acc / draws == doctest::Approx(expected).epsilon(0.05));
    // normalized cross correlations
    CHECK(std::abs(cross_pm) / (draws * expected) < 0.05);
    CHECK(std::abs(cross_p0) / (draws * expected) < 0.05);
}
