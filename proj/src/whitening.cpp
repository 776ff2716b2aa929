#include "pmu/whitening.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmu {

namespace {

// sin(N*x) / (N*sin(x)) with the removable singularities at x = m*pi filled in
// by the limit (-1)^{m(N-1)}.
double dirichlet_ratio(double x, int n) {
    const double m = std::round(x / std::numbers::pi);
    const double d = x - m * std::numbers::pi;
    const bool odd = std::fmod(std::abs(m * (n - 1)), 2.0) == 1.0;
    const double sign = odd ? -1.0 : 1.0;
    if (std::abs(d) < 1e-7) {
        const double nd = n * d;
        return sign * (1.0 - (nd * nd - d * d) / 6.0);
    }
    return std::sin(n * x) / (n * std::sin(x));
}

Eigen::VectorXcd apply_real(const Eigen::MatrixXd& m, const Eigen::VectorXcd& v) {
    const Eigen::VectorXd re = m * v.real();
    const Eigen::VectorXd im = m * v.imag();
    Eigen::VectorXcd out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = {re[i], im[i]};
    return out;
}

constexpr double kGramTolerance = 1e-12;

}  // namespace

NoiseCovariance::NoiseCovariance(int k, int n, double sigma2)
    : k_(k), n_(n), sigma2_(sigma2) {
    const double scale = 2.0 * sigma2 / (3.0 * static_cast<double>(n) * n);
    r_.resize(k, k);
    for (int row = 0; row < k; ++row)
        for (int col = 0; col < k; ++col) {
            const int lag = std::abs(row - col);
            r_(row, col) = lag <= n ? scale * (n - lag) : 0.0;
        }
}

NoiseCovariance NoiseCovariance::build(int window_count, int samples_per_cycle, double sigma2) {
    if (window_count < 1) throw std::invalid_argument("covariance: K must be at least 1");
    if (samples_per_cycle < 1) throw std::invalid_argument("covariance: N must be at least 1");
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("covariance: sigma^2 must be positive (whitening is "
                                    "undefined for degenerate noise)");
    return NoiseCovariance(window_count, samples_per_cycle, sigma2);
}

NoiseCovariance NoiseCovariance::build_or_surrogate(int window_count, int samples_per_cycle,
                                                    double sigma2) {
    if (sigma2 == 0.0) return build(window_count, samples_per_cycle, 1.0);
    return build(window_count, samples_per_cycle, sigma2);
}

const Eigen::MatrixXd& NoiseCovariance::factor(WhiteningFactor kind) const {
    if (kind == WhiteningFactor::symmetric_sqrt) {
        if (!factor_sym_) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r_);
            if (es.info() != Eigen::Success)
                throw std::runtime_error("covariance: eigendecomposition failed");
            if (es.eigenvalues().minCoeff() <= 0.0)
                throw std::runtime_error("covariance: matrix is not positive definite");
            factor_sym_ = es.eigenvectors() *
                          es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
        }
        return *factor_sym_;
    }
    if (!factor_chol_) {
        Eigen::LLT<Eigen::MatrixXd> llt(r_);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("covariance: Cholesky factorization failed");
        // R = G G^T, W = G^{-1} satisfies W^T W = R^{-1}.
        factor_chol_ = llt.matrixL()
                           .solve(Eigen::MatrixXd::Identity(k_, k_));
    }
    return *factor_chol_;
}

Eigen::VectorXcd NoiseCovariance::whiten(const Eigen::VectorXcd& v, WhiteningFactor kind) const {
    if (v.size() != k_) throw std::invalid_argument("whiten: vector length differs from K");
    return apply_real(factor(kind), v);
}

std::pair<std::complex<double>, std::complex<double>>
compute_P_Q(double delta, int samples_per_cycle, double omega0) {
    const int n = samples_per_cycle;
    const double gamma = 2.0 * std::numbers::pi / n;
    const double xp = gamma * delta / (2.0 * omega0);
    const double xq = gamma * (2.0 * omega0 + delta) / (2.0 * omega0);
    const std::complex<double> p =
        dirichlet_ratio(xp, n) * std::polar(1.0, gamma * (delta / omega0) * (n - 1) / 2.0);
    const std::complex<double> q =
        dirichlet_ratio(xq, n) *
        std::polar(1.0, -gamma * ((2.0 * omega0 + delta) / omega0) * (n - 1) / 2.0);
    return {p, q};
}

FrequencyContext build_context(double delta, const SequenceMeasurements& meas,
                               const NoiseCovariance& cov, WhiteningFactor kind) {
    const int k_count = cov.window_count();
    if (meas.window_count() != k_count)
        throw std::invalid_argument("build_context: measurement length differs from K");
    if (meas.samples_per_cycle != cov.samples_per_cycle())
        throw std::invalid_argument("build_context: N of measurements and covariance differ");
    if (!(meas.omega0 > 0.0))
        throw std::invalid_argument("build_context: measurements carry no nominal frequency");

    const double omega0 = meas.omega0;
    const double gamma = 2.0 * std::numbers::pi / meas.samples_per_cycle;

    FrequencyContext ctx;
    ctx.delta = delta;
    std::tie(ctx.p_factor, ctx.q_factor) = compute_P_Q(delta, meas.samples_per_cycle, omega0);

    ctx.e1_raw.resize(k_count);
    ctx.e2_raw.resize(k_count);
    for (int k = 0; k < k_count; ++k) {
        ctx.e1_raw[k] = std::polar(1.0, gamma * (delta / omega0) * k);
        ctx.e2_raw[k] = std::polar(1.0, -gamma * ((2.0 * omega0 + delta) / omega0) * k);
    }
    const Eigen::MatrixXd& w = cov.factor(kind);
    ctx.e1 = apply_real(w, ctx.e1_raw);
    ctx.e2 = apply_real(w, ctx.e2_raw);
    ctx.nu_plus = apply_real(w, meas.pos);
    ctx.nu_minus = apply_real(w, meas.neg);

    const double p2 = std::norm(ctx.p_factor);
    const double q2 = std::norm(ctx.q_factor);
    ctx.kappa1 = p2 * ctx.e1.squaredNorm() + q2 * ctx.e2.squaredNorm();
    ctx.kappa2 = 2.0 * std::conj(ctx.p_factor) * ctx.q_factor * ctx.e1.dot(ctx.e2);

    // z_+ = P* e1^H nu_+ + Q nu_-^H e2   (and the mirrored z_-); Eigen's dot()
    // conjugates its left argument.
    ctx.z_plus = std::conj(ctx.p_factor) * ctx.e1.dot(ctx.nu_plus) +
                 ctx.q_factor * ctx.nu_minus.dot(ctx.e2);
    ctx.z_minus = std::conj(ctx.p_factor) * ctx.e1.dot(ctx.nu_minus) +
                  ctx.q_factor * ctx.nu_plus.dot(ctx.e2);

    const double gram = ctx.kappa1 * ctx.kappa1 - std::norm(ctx.kappa2);
    ctx.degenerate_gram =
        !(ctx.kappa1 > 0.0) || gram < kGramTolerance * ctx.kappa1 * ctx.kappa1;
    ctx.kappa = ctx.degenerate_gram && ctx.kappa1 == 0.0 ? 0.0 : gram / ctx.kappa1;
    return ctx;
}

void whiten_sequences(SequenceMeasurements& meas, const NoiseCovariance& cov,
                      WhiteningFactor kind) {
    meas.zero_w = cov.whiten(meas.zero, kind);
    meas.pos_w = cov.whiten(meas.pos, kind);
    meas.neg_w = cov.whiten(meas.neg, kind);
}

}  // namespace pmu
