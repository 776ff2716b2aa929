#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "pmu/signal_model.hpp"
#include "pmu/whitening.hpp"
#include "support/synthetic.hpp"

using namespace pmu;
using cplx = std::complex<double>;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kOmega0 = 2.0 * kPi * 60.0;
}  // namespace

TEST_CASE("covariance entries follow the Bartlett kernel") {
    const auto cov = NoiseCovariance::build(14, 48, 1.0);
    const auto& r = cov.matrix();
    for (int k = 0; k < 14; ++k)
        CHECK(r(k, k) == doctest::Approx(2.0 / (3.0 * 48)).epsilon(1e-14));
    CHECK(r(0, 12) == doctest::Approx(0.010416666666666666).epsilon(1e-14));
    CHECK(r(13, 1) == r(1, 13));

    const auto wide = NoiseCovariance::build(10, 4, 0.5);
    CHECK(wide.matrix()(0, 4) == 0.0);  // |k-l| = N
    CHECK(wide.matrix()(0, 9) == 0.0);
}

TEST_CASE("both whitening factors invert the covariance") {
    const auto cov = NoiseCovariance::build(12, 48, 0.3);
    for (auto kind : {WhiteningFactor::symmetric_sqrt, WhiteningFactor::cholesky}) {
        const Eigen::MatrixXd& w = cov.factor(kind);
        const Eigen::MatrixXd should_be_identity = w.transpose() * w * cov.matrix();
        CHECK((should_be_identity - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() <
              1e-10);
    }
}

TEST_CASE("covariance rejects degenerate noise") {
    CHECK_THROWS_AS(NoiseCovariance::build(12, 48, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(NoiseCovariance::build(0, 48, 1.0), std::invalid_argument);
    CHECK(NoiseCovariance::build_or_surrogate(12, 48, 0.0).sigma2() == 1.0);
}

TEST_CASE("P and Q limits: nominal frequency and the mirrored singularity") {
    {
        const auto [p, q] = compute_P_Q(0.0, 48, kOmega0);
        CHECK(std::abs(p - 1.0) < 1e-14);
        CHECK(std::abs(q) < 1e-14);
    }
    {
        const auto [p, q] = compute_P_Q(-2.0 * kOmega0, 48, kOmega0);
        CHECK(std::abs(q) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("P and Q match the geometric-sum oracle") {
    const int n = 48;
    const double gamma = 2.0 * kPi / n;
    for (double delta : {0.1 * 2.0 * kPi, 2.5 * 2.0 * kPi, -1.3 * 2.0 * kPi, 17.0}) {
        const auto [p, q] = compute_P_Q(delta, n, kOmega0);
        cplx sum_p{0.0, 0.0}, sum_q{0.0, 0.0};
        for (int i = 0; i < n; ++i) {
            sum_p += std::polar(1.0, gamma * (delta / kOmega0) * i);
            sum_q += std::polar(1.0, -gamma * ((2.0 * kOmega0 + delta) / kOmega0) * i);
        }
        CHECK(std::abs(p - sum_p / static_cast<double>(n)) < 1e-12);
        CHECK(std::abs(q - sum_q / static_cast<double>(n)) < 1e-12);
    }
}

TEST_CASE("context at nominal frequency: z_- collapses to e1^H nu_-, kappa2 = 0") {
    std::mt19937_64 gen(5);
    auto truth = testing::random_truth(gen);
    truth.delta = 0.0;
    auto meas = testing::synthesize(truth);
    const auto cov = NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 0.4);
    testing::add_sequence_noise(meas, cov, gen);

    const auto ctx = build_context(0.0, meas, cov);
    CHECK(std::abs(ctx.kappa2) < 1e-12);
    CHECK(ctx.kappa == doctest::Approx(ctx.kappa1).epsilon(1e-12));
    const cplx direct = ctx.e1.dot(ctx.nu_minus);
    CHECK(std::abs(ctx.z_minus - direct) < 1e-10);
}

TEST_CASE("zero data gives zero sufficient statistics but intact kappas") {
    SequenceMeasurements meas;
    meas.zero = meas.pos = meas.neg = Eigen::VectorXcd::Zero(12);
    meas.samples_per_cycle = 48;
    meas.omega0 = kOmega0;
    const auto cov = NoiseCovariance::build(12, 48, 1.0);
    const auto ctx = build_context(0.25 * 2.0 * kPi, meas, cov);
    CHECK(std::abs(ctx.z_plus) == 0.0);
    CHECK(std::abs(ctx.z_minus) == 0.0);
    CHECK(ctx.kappa1 > 0.0);
    CHECK(!ctx.degenerate_gram);
}

TEST_CASE("statistics agree across whitening factors and with direct R^-1 forms") {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 20; ++i) {
        const auto truth = testing::random_truth(gen);
        auto meas = testing::synthesize(truth);
        const auto cov =
            NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 0.7);
        testing::add_sequence_noise(meas, cov, gen);

        const auto sym = build_context(truth.delta, meas, cov,
                                       WhiteningFactor::symmetric_sqrt);
        const auto tri = build_context(truth.delta, meas, cov, WhiteningFactor::cholesky);
        const double scale = std::max(1.0, sym.kappa1);
        CHECK(std::abs(sym.kappa1 - tri.kappa1) < 1e-10 * scale);
        CHECK(std::abs(sym.kappa2 - tri.kappa2) < 1e-10 * scale);
        CHECK(std::abs(sym.kappa - tri.kappa) < 1e-10 * scale);
        CHECK(std::abs(sym.z_plus - tri.z_plus) < 1e-10 * scale);
        CHECK(std::abs(sym.z_minus - tri.z_minus) < 1e-10 * scale);

        // Independent oracle: everything as R^{-1} bilinear forms.
        const Eigen::MatrixXd r_inv = cov.matrix().inverse();
        auto bilinear = [&](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
            return (a.adjoint() * (r_inv * b.real()).cast<cplx>())(0) +
                   cplx(0, 1) * (a.adjoint() * (r_inv * b.imag()).cast<cplx>())(0);
        };
        const double kappa1_direct =
            std::norm(sym.p_factor) * bilinear(sym.e1_raw, sym.e1_raw).real() +
            std::norm(sym.q_factor) * bilinear(sym.e2_raw, sym.e2_raw).real();
        CHECK(std::abs(sym.kappa1 - kappa1_direct) < 1e-9 * scale);
        const cplx z_plus_direct =
            std::conj(sym.p_factor) * bilinear(sym.e1_raw, meas.pos) +
            sym.q_factor * std::conj(bilinear(sym.e2_raw, meas.neg));
        CHECK(std::abs(sym.z_plus - z_plus_direct) < 1e-9 * scale);
    }
}

TEST_CASE("whitened noise has near-identity covariance") {
    ThreePhaseScenario s;
    s.magnitudes = {0.0, 0.0, 0.0};
    s.window_count = 12;
    const double sigma2 = 1.3;
    const auto cov = NoiseCovariance::build(s.window_count, s.samples_per_cycle, sigma2);
    const int draws = 40000;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(12, 12);
    for (int i = 0; i < draws; ++i) {
        auto frame = add_noise(generate_clean(s), sigma2, 50000 + i);
        auto meas = extract_sequences(frame);
        const Eigen::VectorXcd w = cov.whiten(meas.pos);
        acc += w * w.adjoint();
    }
    acc /= draws;
    CHECK((acc - Eigen::MatrixXcd::Identity(12, 12)).norm() < 0.1);
}

TEST_CASE("kappa grows with the window count") {
    double previous = 0.0;
    for (int k = 2; k <= 64; ++k) {
        const auto cov = NoiseCovariance::build(k, 48, 0.9);
        SequenceMeasurements meas;
        meas.zero = meas.pos = meas.neg = Eigen::VectorXcd::Zero(k);
        meas.samples_per_cycle = 48;
        meas.omega0 = kOmega0;
        const auto ctx = build_context(0.1 * 2.0 * kPi, meas, cov);
        CHECK(ctx.kappa > previous);
        previous = ctx.kappa;
    }
}

TEST_CASE("whiten_sequences fills all three whitened vectors") {
    std::mt19937_64 gen(3);
    auto meas = testing::synthesize(testing::random_truth(gen));
    const auto cov = NoiseCovariance::build(meas.window_count(), meas.samples_per_cycle, 0.5);
    whiten_sequences(meas, cov);
    CHECK(meas.zero_w.size() == meas.zero.size());
    CHECK(meas.pos_w.size() == meas.pos.size());
    CHECK(meas.neg_w.size() == meas.neg.size());
}
