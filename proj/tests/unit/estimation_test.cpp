#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pmu/estimation.hpp"
#include "support/synthetic.hpp"

using namespace pmu;
using cplx = std::complex<double>;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kOmega0 = 2.0 * kPi * 60.0;

FrequencyContext noiseless_context(const testing::SequenceTruth& truth,
                                   double sigma2 = 0.5) {
    const auto meas = testing::synthesize(truth);
    const auto cov =
        NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, sigma2);
    return build_context(truth.delta, meas, cov);
}
}  // namespace

TEST_CASE("unconstrained estimator is exact on noiseless data") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 25; ++i) {
        const auto truth = testing::random_truth(gen);
        const auto ctx = noiseless_context(truth);
        const cplx cuc = unconstrained_cminus(ctx);
        CHECK(std::abs(cuc - truth.c_minus) <=
              1e-10 * std::max(1.0, std::abs(truth.c_minus)));
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::unconstrained);
        CHECK(std::abs(est.c_plus - truth.c_plus) <= 1e-10 * std::abs(truth.c_plus));
    }
}

TEST_CASE("unconstrained estimator of zero data is zero") {
    testing::SequenceTruth truth;
    truth.c_plus = truth.c_minus = truth.c_zero = 0.0;
    truth.delta = 0.4 * 2.0 * kPi;
    CHECK(std::abs(unconstrained_cminus(noiseless_context(truth))) == 0.0);
}

TEST_CASE("at nominal frequency the estimator uses only the negative sequence") {
    std::mt19937_64 gen(23);
    auto truth = testing::random_truth(gen);
    truth.delta = 0.0;
    auto meas = testing::synthesize(truth);
    const auto cov = NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 0.6);
    testing::add_sequence_noise(meas, cov, gen);
    const auto ctx = build_context(0.0, meas, cov);
    const cplx expected = ctx.e1.dot(ctx.nu_minus) / ctx.e1.squaredNorm();
    CHECK(std::abs(unconstrained_cminus(ctx) - expected) < 1e-12);
}

TEST_CASE("H0 projection: inactive below r, radius clamp with kappa multiplier above") {
    std::mt19937_64 gen(31);
    auto truth = testing::random_truth(gen);

    SUBCASE("|C^uc| below r is untouched") {
        truth.c_minus = std::polar(0.01, 0.7);
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::h0_balanced);
        CHECK(std::abs(est.c_minus - truth.c_minus) < 1e-12);
        CHECK(est.kkt_multiplier == 0.0);
    }
    SUBCASE("|C^uc| = 0.06 at phase pi/3 clamps to 0.03 with mu^2 = kappa") {
        truth.c_minus = std::polar(0.06, kPi / 3.0);
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::h0_balanced);
        CHECK(std::abs(est.c_minus - std::polar(0.03, kPi / 3.0)) < 1e-10);
        CHECK(est.kkt_multiplier == doctest::Approx(ctx.kappa).epsilon(1e-9));
    }
    SUBCASE("r = 0 returns the perfectly balanced pair") {
        truth.c_minus = std::polar(0.2, -0.4);
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.0, Hypothesis::h0_balanced);
        CHECK(std::abs(est.c_minus) == 0.0);
        CHECK(std::abs(est.c_plus - ctx.z_plus / ctx.kappa1) < 1e-12);
    }
}

TEST_CASE("H1 projection mirrors the H0 case") {
    std::mt19937_64 gen(37);
    auto truth = testing::random_truth(gen);
    SUBCASE("above r is kept") {
        truth.c_minus = std::polar(0.08, 1.9);
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::h1_unbalanced);
        CHECK(std::abs(est.c_minus - truth.c_minus) < 1e-10);
    }
    SUBCASE("below r projects outward, keeping the phase") {
        truth.c_minus = std::polar(0.005, 2.4);
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::h1_unbalanced);
        CHECK(std::abs(est.c_minus) == doctest::Approx(0.03).epsilon(1e-12));
        CHECK(std::arg(est.c_minus) == doctest::Approx(2.4).epsilon(1e-9));
    }
    SUBCASE("zero estimate with positive r picks phase 0") {
        truth.c_minus = 0.0;
        truth.c_plus = 0.0;
        truth.c_zero = 0.0;
        const auto ctx = noiseless_context(truth);
        const auto est = cml_phasors(ctx, 0.03, Hypothesis::h1_unbalanced);
        CHECK(est.c_minus == cplx(0.03, 0.0));
    }
}

TEST_CASE("CML invariants on noisy draws: slackness, phase preservation, ordering") {
    std::mt19937_64 gen(41);
    const double r = 0.03;
    for (int i = 0; i < 100; ++i) {
        const auto truth = testing::random_truth(gen);
        auto meas = testing::synthesize(truth);
        const auto cov =
            NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 1.1);
        testing::add_sequence_noise(meas, cov, gen);
        const auto ctx = build_context(truth.delta, meas, cov);

        const cplx cuc = unconstrained_cminus(ctx);
        const auto h0 = cml_phasors(ctx, r, Hypothesis::h0_balanced);
        const auto h1 = cml_phasors(ctx, r, Hypothesis::h1_unbalanced);

        CHECK(std::abs(h0.kkt_multiplier *
                       (std::norm(h0.c_minus) - r * r)) < 1e-12);
        if (std::abs(cuc) > 0.0) {
            CHECK(std::arg(h0.c_minus) == doctest::Approx(std::arg(cuc)).epsilon(1e-10));
            CHECK((std::abs(h0.c_minus) <= r + 1e-12 ||
                   std::abs(h0.c_minus - cuc) < 1e-12));
        }
        const double l_h0 = log_likelihood(ctx, h0.c_plus, h0.c_minus);
        const double l_h1 = log_likelihood(ctx, h1.c_plus, h1.c_minus);
        // whichever hypothesis owns the unconstrained maximizer wins
        if (std::abs(cuc) >= r)
            CHECK(l_h1 >= l_h0 - 1e-9);
        else
            CHECK(l_h0 >= l_h1 - 1e-9);

        // The likelihood-difference identity behind the GLRT.
        const double lhs = l_h1 - l_h0;
        const double shift = std::abs(cuc) - r;
        const double rhs = ctx.kappa * shift * shift *
                           (std::norm(cuc) > r * r ? 1.0 : -1.0);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("log-likelihood at the exact parameters is the 2K log pi constant") {
    std::mt19937_64 gen(43);
    const auto truth = testing::random_truth(gen);
    const auto ctx = noiseless_context(truth);
    const double expected = 2.0 * truth.window_count * std::log(kPi);
    CHECK(log_likelihood(ctx, truth.c_plus, truth.c_minus) ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("projection is idempotent through a synthetic reconstruction") {
    std::mt19937_64 gen(47);
    auto truth = testing::random_truth(gen);
    truth.c_minus = std::polar(0.09, 0.5);
    const auto ctx = noiseless_context(truth);
    const auto est = cml_phasors(ctx, 0.03, Hypothesis::h0_balanced);

    testing::SequenceTruth fixed = truth;
    fixed.c_plus = est.c_plus;
    fixed.c_minus = est.c_minus;
    const auto ctx2 = noiseless_context(fixed);
    const auto est2 = cml_phasors(ctx2, 0.03, Hypothesis::h0_balanced);
    CHECK(std::abs(est2.c_minus - est.c_minus) < 1e-10);
    CHECK(std::abs(est2.c_plus - est.c_plus) < 1e-10);
}

TEST_CASE("ml frequency search hits an on-grid noiseless optimum exactly") {
    testing::SequenceTruth truth;
    truth.c_plus = std::polar(0.9, 0.2);
    truth.c_minus = std::polar(0.3, -1.0);
    truth.delta = 0.1 * 2.0 * kPi;
    const auto meas = testing::synthesize(truth);
    const auto cov = NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 0.5);

    GridSpec grid;  // default [-5, 5] Hz x 2001 contains 0.1 Hz exactly
    const double est =
        ml_frequency(meas, cov, 0.03, Hypothesis::h1_unbalanced, grid);
    CHECK(est == doctest::Approx(truth.delta).epsilon(1e-12));
}

TEST_CASE("H1 objective reduces to |z+|^2/kappa1 + kappa |C^uc|^2 when unclamped") {
    std::mt19937_64 gen(53);
    for (int i = 0; i < 20; ++i) {
        auto truth = testing::random_truth(gen);
        truth.c_minus = std::polar(0.15 + 0.1 * (i % 3), 0.3 * i);
        auto meas = testing::synthesize(truth);
        const auto cov =
            NoiseCovariance::build(truth.window_count, truth.samples_per_cycle, 2.0);
        testing::add_sequence_noise(meas, cov, gen);
        const auto ctx = build_context(truth.delta, meas, cov);
        const cplx cuc = unconstrained_cminus(ctx);
        const double r = 0.03;
        if (std::abs(cuc) <= r) continue;
        // objective written the paper's way
        const double direct = std::norm(ctx.z_plus) / ctx.kappa1 -
                              ctx.kappa * std::norm(cuc) +
                              2.0 * ctx.kappa * std::norm(cuc);
        const double simplified =
            std::norm(ctx.z_plus) / ctx.kappa1 + ctx.kappa * std::norm(cuc);
        CHECK(direct == doctest::Approx(simplified).epsilon(1e-12));
        // and both equal the concentrated likelihood up to the data constant
        const auto est = cml_phasors(ctx, r, Hypothesis::h1_unbalanced);
        const double constant = 2.0 * truth.window_count * std::log(kPi) -
                                ctx.nu_plus.squaredNorm() - ctx.nu_minus.squaredNorm();
        CHECK(log_likelihood(ctx, est.c_plus, est.c_minus) - constant ==
              doctest::Approx(simplified).epsilon(1e-9));
    }
}

TEST_CASE("suboptimal estimator: zero deviation, literal bias, corrected variant") {
    testing::SequenceTruth truth;
    truth.c_plus = std::polar(0.8, 0.9);
    truth.window_count = 12;

    SUBCASE("nominal frequency gives zero") {
        truth.delta = 0.0;
        CHECK(suboptimal_frequency(testing::synthesize(truth)) == 0.0);
    }
    SUBCASE("balanced off-nominal data shows the (K-1)/K bias") {
        truth.delta = 0.1 * 2.0 * kPi;
        const auto meas = testing::synthesize(truth);
        const double literal = suboptimal_frequency(meas);
        CHECK(literal == doctest::Approx(truth.delta * 11.0 / 12.0).epsilon(1e-12));
        const double corrected =
            suboptimal_frequency(meas, AngleSumConvention::unbiased);
        CHECK(corrected == doctest::Approx(truth.delta).epsilon(1e-12));
    }
    SUBCASE("zero phasor anywhere is an error") {
        truth.c_plus = 0.0;
        truth.delta = 0.0;
        CHECK_THROWS_AS(suboptimal_frequency(testing::synthesize(truth)),
                        std::domain_error);
    }
}

TEST_CASE("degenerate Gram is flagged and estimators refuse it") {
    SequenceMeasurements meas;
    meas.zero = meas.pos = meas.neg = Eigen::VectorXcd::Ones(1);
    meas.samples_per_cycle = 48;
    meas.omega0 = kOmega0;
    const auto cov = NoiseCovariance::build(1, 48, 1.0);
    // At delta = -omega0 both Dirichlet factors vanish, so kappa1 = 0.
    const auto ctx = build_context(-kOmega0, meas, cov);
    CHECK(ctx.degenerate_gram);
    CHECK_THROWS_AS(unconstrained_cminus(ctx), std::domain_error);
    CHECK_THROWS_AS(cml_phasors(ctx, 0.03, Hypothesis::h0_balanced), std::domain_error);
}
