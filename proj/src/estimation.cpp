#include "pmu/estimation.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pmu {

namespace {

void require_nondegenerate(const FrequencyContext& ctx) {
    if (ctx.degenerate_gram)
        throw std::domain_error("estimation: degenerate Gram (kappa1^2 - |kappa2|^2 ~ 0) "
                                "at this frequency deviation");
}

std::complex<double> cuc_from(const FrequencyContext& ctx) {
    const double det = ctx.kappa1 * ctx.kappa1 - std::norm(ctx.kappa2);
    return (ctx.kappa1 * ctx.z_minus - ctx.kappa2 * std::conj(ctx.z_plus)) / det;
}

// The concentrated likelihood maximized by the frequency search; equals
// L(theta_hat) up to a data-only constant (verified against log_likelihood in
// the test suite).
double frequency_objective(const FrequencyContext& ctx, double r, Hypothesis hyp) {
    const std::complex<double> cuc = cuc_from(ctx);
    const double mag = std::abs(cuc);
    std::complex<double> constrained = cuc;
    if (hyp == Hypothesis::h0_balanced) {
        if (mag > r) constrained = mag > 0.0 ? r * cuc / mag : std::complex<double>(r, 0.0);
    } else if (hyp == Hypothesis::h1_unbalanced) {
        if (mag <= r) constrained = mag > 0.0 ? r * cuc / mag : std::complex<double>(r, 0.0);
    }
    return std::norm(ctx.z_plus) / ctx.kappa1 - ctx.kappa * std::norm(constrained) +
           2.0 * ctx.kappa * (constrained * std::conj(cuc)).real();
}

}  // namespace

std::complex<double> unconstrained_cminus(const FrequencyContext& ctx) {
    require_nondegenerate(ctx);
    return cuc_from(ctx);
}

PhasorEstimates cml_phasors(const FrequencyContext& ctx, double r, Hypothesis hypothesis) {
    if (!(r >= 0.0)) throw std::invalid_argument("cml_phasors: r must be nonnegative");
    require_nondegenerate(ctx);

    const std::complex<double> cuc = cuc_from(ctx);
    const double mag = std::abs(cuc);

    PhasorEstimates est;
    est.delta = ctx.delta;
    est.hypothesis = hypothesis;

    switch (hypothesis) {
        case Hypothesis::unconstrained:
            est.c_minus = cuc;
            break;
        case Hypothesis::h0_balanced:
            if (mag * mag <= r * r) {
                est.c_minus = cuc;
                est.kkt_multiplier = 0.0;
            } else {
                // mag > 0 here; the projection keeps the phase of C_-^(uc).
                est.c_minus = r * cuc / mag;
                est.kkt_multiplier = ctx.kappa / r * (mag - r);
            }
            break;
        case Hypothesis::h1_unbalanced:
            if (mag * mag > r * r) {
                est.c_minus = cuc;
            } else {
                est.c_minus = mag > 0.0 ? r * cuc / mag : std::complex<double>(r, 0.0);
            }
            break;
    }
    est.c_plus = (ctx.z_plus - ctx.kappa2 * std::conj(est.c_minus)) / ctx.kappa1;
    return est;
}

double log_likelihood(const FrequencyContext& ctx, std::complex<double> c_plus,
                      std::complex<double> c_minus) {
    const Eigen::VectorXcd res_plus = ctx.nu_plus - ctx.p_factor * c_plus * ctx.e1 -
                                      ctx.q_factor * std::conj(c_minus) * ctx.e2;
    const Eigen::VectorXcd res_minus = ctx.nu_minus - ctx.p_factor * c_minus * ctx.e1 -
                                       ctx.q_factor * std::conj(c_plus) * ctx.e2;
    return 2.0 * ctx.window_count() * std::log(std::numbers::pi) - res_plus.squaredNorm() -
           res_minus.squaredNorm();
}

FrequencyTable::FrequencyTable(const GridSpec& grid, const NoiseCovariance& cov, double omega0,
                               WhiteningFactor kind)
    : grid_(grid), kind_(kind) {
    if (grid.points < 1) throw std::invalid_argument("frequency grid: needs at least 1 point");
    if (!(grid.lo <= grid.hi)) throw std::invalid_argument("frequency grid: lo > hi");
    if (!(omega0 > 0.0)) throw std::invalid_argument("frequency grid: omega0 must be positive");

    const int k_count = cov.window_count();
    const int n = cov.samples_per_cycle();
    const double gamma = 2.0 * std::numbers::pi / n;
    const Eigen::MatrixXd& w = cov.factor(kind);

    entries_.reserve(grid.points);
    for (int i = 0; i < grid.points; ++i) {
        const double delta =
            grid.points == 1 ? grid.lo
                             : grid.lo + (grid.hi - grid.lo) * i / (grid.points - 1);
        Entry entry;
        entry.delta = delta;
        std::tie(entry.p_factor, entry.q_factor) = compute_P_Q(delta, n, omega0);
        Eigen::VectorXcd e1_raw(k_count), e2_raw(k_count);
        for (int k = 0; k < k_count; ++k) {
            e1_raw[k] = std::polar(1.0, gamma * (delta / omega0) * k);
            e2_raw[k] = std::polar(1.0, -gamma * ((2.0 * omega0 + delta) / omega0) * k);
        }
        auto mul = [&](const Eigen::VectorXcd& v) {
            const Eigen::VectorXd re = w * v.real();
            const Eigen::VectorXd im = w * v.imag();
            Eigen::VectorXcd out(v.size());
            for (Eigen::Index j = 0; j < v.size(); ++j) out[j] = {re[j], im[j]};
            return out;
        };
        entry.e1 = mul(e1_raw);
        entry.e2 = mul(e2_raw);
        entry.kappa1 = std::norm(entry.p_factor) * entry.e1.squaredNorm() +
                       std::norm(entry.q_factor) * entry.e2.squaredNorm();
        entry.kappa2 =
            2.0 * std::conj(entry.p_factor) * entry.q_factor * entry.e1.dot(entry.e2);
        const double gram = entry.kappa1 * entry.kappa1 - std::norm(entry.kappa2);
        entry.degenerate =
            !(entry.kappa1 > 0.0) || gram < 1e-12 * entry.kappa1 * entry.kappa1;
        entry.kappa = entry.degenerate && entry.kappa1 == 0.0 ? 0.0 : gram / entry.kappa1;
        entries_.push_back(std::move(entry));
    }
}

namespace {

double entry_objective(const FrequencyTable::Entry& e, const Eigen::VectorXcd& nu_plus,
                       const Eigen::VectorXcd& nu_minus, double r, Hypothesis hyp) {
    const std::complex<double> z_plus =
        std::conj(e.p_factor) * e.e1.dot(nu_plus) + e.q_factor * nu_minus.dot(e.e2);
    const std::complex<double> z_minus =
        std::conj(e.p_factor) * e.e1.dot(nu_minus) + e.q_factor * nu_plus.dot(e.e2);
    const double det = e.kappa1 * e.kappa1 - std::norm(e.kappa2);
    const std::complex<double> cuc = (e.kappa1 * z_minus - e.kappa2 * std::conj(z_plus)) / det;
    const double mag = std::abs(cuc);
    std::complex<double> constrained = cuc;
    if (hyp == Hypothesis::h0_balanced) {
        if (mag > r) constrained = mag > 0.0 ? r * cuc / mag : std::complex<double>(r, 0.0);
    } else if (hyp == Hypothesis::h1_unbalanced) {
        if (mag <= r) constrained = mag > 0.0 ? r * cuc / mag : std::complex<double>(r, 0.0);
    }
    return std::norm(z_plus) / e.kappa1 - e.kappa * std::norm(constrained) +
           2.0 * e.kappa * (constrained * std::conj(cuc)).real();
}

}  // namespace

double ml_frequency(const SequenceMeasurements& meas, const NoiseCovariance& cov,
                    const FrequencyTable& table, double r, Hypothesis hypothesis) {
    if (!(r >= 0.0)) throw std::invalid_argument("ml_frequency: r must be nonnegative");
    const auto& entries = table.entries();
    if (entries.empty()) throw std::invalid_argument("ml_frequency: empty grid");

    const Eigen::VectorXcd nu_plus = cov.whiten(meas.pos, table.factor_kind());
    const Eigen::VectorXcd nu_minus = cov.whiten(meas.neg, table.factor_kind());

    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    std::vector<double> values(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        values[i] = entries[i].degenerate
                        ? -std::numeric_limits<double>::infinity()
                        : entry_objective(entries[i], nu_plus, nu_minus, r, hypothesis);
        if (values[i] > best) {  // strict: lowest index wins ties
            best = values[i];
            best_index = i;
        }
    }
    if (!std::isfinite(best))
        throw std::domain_error("ml_frequency: every grid point has a degenerate Gram");

    double result = entries[best_index].delta;
    if (table.grid().refine && best_index > 0 && best_index + 1 < entries.size() &&
        std::isfinite(values[best_index - 1]) && std::isfinite(values[best_index + 1])) {
        const double f_lo = values[best_index - 1];
        const double f_mid = values[best_index];
        const double f_hi = values[best_index + 1];
        const double denom = f_lo - 2.0 * f_mid + f_hi;
        if (denom < 0.0) {
            const double h =
                (table.grid().hi - table.grid().lo) / (table.grid().points - 1);
            const double vertex = result + 0.5 * h * (f_lo - f_hi) / denom;
            const FrequencyContext ctx =
                build_context(vertex, meas, cov, table.factor_kind());
            if (!ctx.degenerate_gram &&
                frequency_objective(ctx, r, hypothesis) > best)
                result = vertex;
        }
    }
    return result;
}

double ml_frequency(const SequenceMeasurements& meas, const NoiseCovariance& cov, double r,
                    Hypothesis hypothesis, const GridSpec& grid, WhiteningFactor kind) {
    const FrequencyTable table(grid, cov, meas.omega0, kind);
    return ml_frequency(meas, cov, table, r, hypothesis);
}

double suboptimal_frequency(const SequenceMeasurements& meas, AngleSumConvention convention) {
    const int k_count = meas.window_count();
    if (k_count < 2)
        throw std::invalid_argument("suboptimal_frequency: needs at least 2 windows");
    const double gamma = 2.0 * std::numbers::pi / meas.samples_per_cycle;

    double angle_sum = 0.0;
    for (int k = 0; k + 1 < k_count; ++k) {
        if (meas.pos[k] == std::complex<double>(0.0, 0.0) ||
            meas.pos[k + 1] == std::complex<double>(0.0, 0.0))
            throw std::domain_error("suboptimal_frequency: zero positive-sequence phasor "
                                    "has no angle");
        angle_sum += std::arg(meas.pos[k + 1] * std::conj(meas.pos[k]));
    }
    const double divisor =
        convention == AngleSumConvention::literal ? k_count : k_count - 1;
    return meas.omega0 / gamma * angle_sum / divisor;
}

}  // namespace pmu
