#pragma once

// Residual equations of the constant sufficiency-factor pricing model, their
// analytic Jacobian in (ln beta, ln Omega, ln delta, tau), and the jointly
// lognormal covariance identities behind the equity Euler equation.
//
// With F = ln E(R_f), Rm = ln E(R_e), X = ln E(x) and k = tau rho sigma_x sigma_r,
// each residual is (left side) - (right side) of its log-form equation:
//
//   r2 = F + b + w - tau mu_x + tau^2 sigma2_x / 2
//   r3 = F (1 -/+ k) - Rm + b k - d (1 - k) + w (1 + k)      (printed / rederived)
//   r4 = (Rm - F) - w + d - tau sigma2_x
//   r5 = Rm - X + b + d + (1 - tau) mu_x + (1 - tau)^2 sigma2_x / 2
//
// r2 + r4 - r5 = X - mu_x - sigma2_x / 2 for every parameter value, so the
// Jacobian never has full rank.

#include <cmath>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "sfm/errors.hpp"
#include "sfm/moments.hpp"

namespace sfm {

/// Log-space parameter vector (b, w, d, tau) = (ln beta, ln Omega, ln delta, tau).
using LogParams = Eigen::Vector4d;
using Jacobian = Eigen::Matrix4d;

struct ModelParams {
    double beta = 1.0;   // subjective time discount factor
    double omega = 1.0;  // sufficiency factor, risk-free asset investors
    double delta = 1.0;  // sufficiency factor, equity investors
    double tau = 0.0;    // relative risk aversion

    double b() const { return std::log(beta); }
    double w() const { return std::log(omega); }
    double d() const { return std::log(delta); }

    LogParams to_log() const { return {b(), w(), d(), tau}; }
    static ModelParams from_log(const LogParams& v) {
        return {std::exp(v[0]), std::exp(v[1]), std::exp(v[2]), v[3]};
    }

    void validate() const {
        if (!(beta > 0.0) || !(omega > 0.0) || !(delta > 0.0) || !std::isfinite(beta) || !std::isfinite(omega) ||
            !std::isfinite(delta))
            throw DomainError("beta, omega and delta must be positive and finite");
        if (!std::isfinite(tau)) throw DomainError("tau must be finite");
    }
};

enum class Eq3Variant { printed, rederived };
enum class LnExMode { arithmetic, lognormal_implied };

inline std::string_view to_string(Eq3Variant v) { return v == Eq3Variant::printed ? "printed" : "rederived"; }
inline std::string_view to_string(LnExMode m) { return m == LnExMode::arithmetic ? "arithmetic" : "lognormal"; }

inline Eq3Variant parse_eq3_variant(std::string_view s) {
    if (s == "printed") return Eq3Variant::printed;
    if (s == "rederived") return Eq3Variant::rederived;
    throw DomainError("unknown eq3 variant '" + std::string(s) + "'");
}

inline LnExMode parse_lnex_mode(std::string_view s) {
    if (s == "arithmetic") return LnExMode::arithmetic;
    if (s == "lognormal" || s == "lognormal_implied") return LnExMode::lognormal_implied;
    throw DomainError("unknown lnEx mode '" + std::string(s) + "'");
}

struct ModelOptions {
    Eq3Variant eq3 = Eq3Variant::printed;
    LnExMode lnex = LnExMode::arithmetic;
};

struct Residuals {
    double r2 = 0.0;
    double r3 = 0.0;
    double r4 = 0.0;
    double r5 = 0.0;
    double norm = 0.0;

    Eigen::Vector4d as_vector() const { return {r2, r3, r4, r5}; }
    static Residuals from_vector(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3], v.norm()}; }
};

/// Log-moment constants shared by the residuals and the Jacobian.
struct LogMoments {
    double F = 0.0;   // ln E(R_f)
    double Rm = 0.0;  // ln E(R_e)
    double X = 0.0;   // ln E(x), per LnExMode
    double mu_x = 0.0;
    double sigma2_x = 0.0;
    double cross = 0.0;  // rho sigma_x sigma_r, so k = tau * cross

    static LogMoments from(const MomentSet& m, LnExMode mode) {
        if (!(m.mean_rf > 0.0) || !(m.mean_re > 0.0) || !(m.mean_x > 0.0))
            throw DomainError("arithmetic means must be positive to take logs");
        LogMoments l;
        l.F = std::log(m.mean_rf);
        l.Rm = std::log(m.mean_re);
        l.X = mode == LnExMode::arithmetic ? std::log(m.mean_x) : m.mu_x + 0.5 * m.sigma2_x;
        l.mu_x = m.mu_x;
        l.sigma2_x = m.sigma2_x;
        l.cross = m.rho * m.sigma_x() * m.sigma_r();
        return l;
    }
};

namespace detail {

inline Eigen::Vector4d residuals_at(const LogMoments& l, const LogParams& p, Eq3Variant eq3) {
    const double b = p[0], w = p[1], d = p[2], tau = p[3];
    const double k = tau * l.cross;
    const double f_coef = eq3 == Eq3Variant::printed ? 1.0 - k : 1.0 + k;
    const double one_m_tau = 1.0 - tau;
    return {
        l.F + b + w - tau * l.mu_x + 0.5 * tau * tau * l.sigma2_x,
        l.F * f_coef - l.Rm + b * k - d * (1.0 - k) + w * (1.0 + k),
        (l.Rm - l.F) - w + d - tau * l.sigma2_x,
        l.Rm - l.X + b + d + one_m_tau * l.mu_x + 0.5 * one_m_tau * one_m_tau * l.sigma2_x,
    };
}

inline Jacobian jacobian_at(const LogMoments& l, const LogParams& p, Eq3Variant eq3) {
    const double b = p[0], w = p[1], d = p[2], tau = p[3];
    const double k = tau * l.cross;
    // d r3 / d k; the F term flips sign between variants.
    const double dr3_dk = (eq3 == Eq3Variant::printed ? -l.F : l.F) + b + d + w;
    Jacobian J;
    J << 1.0, 1.0, 0.0, -l.mu_x + tau * l.sigma2_x,
        k, 1.0 + k, -(1.0 - k), l.cross * dr3_dk,
        0.0, -1.0, 1.0, -l.sigma2_x,
        1.0, 0.0, 1.0, -l.mu_x - (1.0 - tau) * l.sigma2_x;
    return J;
}

}  // namespace detail

inline Residuals residual_vector(const MomentSet& m, const ModelParams& p, const ModelOptions& options = {}) {
    return Residuals::from_vector(detail::residuals_at(LogMoments::from(m, options.lnex), p.to_log(), options.eq3));
}

/// Rows are r2..r5, columns are (b, w, d, tau).
inline Jacobian jacobian(const MomentSet& m, const ModelParams& p, const ModelOptions& options = {}) {
    return detail::jacobian_at(LogMoments::from(m, options.lnex), p.to_log(), options.eq3);
}

/// cov(X^a, Y^b) for jointly lognormal (X, Y) with log-means mu, log-stddevs sigma and log-correlation rho.
inline double lognormal_power_cov(double a, double b, double mu_x, double sigma_x, double mu_y, double sigma_y,
                                  double rho) {
    const double ex = std::exp(a * mu_x + 0.5 * a * a * sigma_x * sigma_x);
    const double ey = std::exp(b * mu_y + 0.5 * b * b * sigma_y * sigma_y);
    return ex * ey * std::expm1(a * b * rho * sigma_x * sigma_y);
}

/// cov(x^-tau, R_e): covariance of the CRRA marginal rate of substitution with the equity return.
inline double mrs_return_cov(const MomentSet& m, double tau) {
    return lognormal_power_cov(-tau, 1.0, m.mu_x, m.sigma_x(), m.mu_r, m.sigma_r(), m.rho);
}

/// Exact (not log-linearised) discrepancy of the equity Euler relation:
/// Omega E(R_f) - delta E(R_e) - Omega delta beta E(R_f) cov(MRS, R_e).
inline double euler_gap(const MomentSet& m, const ModelParams& p) {
    return p.omega * m.mean_rf - p.delta * m.mean_re -
           p.omega * p.delta * p.beta * m.mean_rf * mrs_return_cov(m, p.tau);
}

}  // namespace sfm
