#pragma once

// Damped least squares for the four-equation system, plus the tools that
// expose its structure: rank diagnostics and the one-parameter solution
// family obtained by zeroing r2, r3, r4 exactly at each fixed tau.
//
// Because r2 + r4 - r5 equals the lognormality gap g for every parameter
// value, no iteration can push the residual norm below |g| / sqrt(3); that
// floor is attained with r3 = 0, r2 = r4 = g / 3, r5 = -g / 3.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "sfm/errors.hpp"
#include "sfm/model.hpp"
#include "sfm/moments.hpp"

namespace sfm {

inline constexpr double rank_threshold = 1e-10;

struct SolverConfig {
    ModelParams initial{0.99, 1.0, 1.0, 2.0};
    int max_iterations = 500;
    double step_tolerance = 1e-12;
    double residual_tolerance = 1e-12;
    double damping_init = 1e-3;
    ModelOptions options{};

    void validate() const {
        initial.validate();
        if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
        if (!(step_tolerance > 0.0) || !(residual_tolerance > 0.0) || !(damping_init > 0.0))
            throw DomainError("solver tolerances and initial damping must be positive");
    }
};

enum class StopReason { residual, step, max_iter };

inline std::string_view to_string(StopReason r) {
    switch (r) {
        case StopReason::residual: return "residual";
        case StopReason::step: return "step";
        case StopReason::max_iter: return "max-iter";
    }
    return "unknown";
}

struct Solution {
    ModelParams params;
    Residuals residuals;
    int iterations = 0;
    StopReason converged = StopReason::max_iter;
    std::array<double, 4> jacobian_singular_values{};
    int numerical_rank = 0;
    /// Accepted-step residual norms, starting with the initial point.
    std::vector<double> norm_history;
};

/// Non-finite residuals during iteration. Carries the last finite iterate.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, ModelParams last) : std::runtime_error(what), last_iterate(last) {}
    ModelParams last_iterate;
};

struct SingularValues {
    std::array<double, 4> values{};
    int rank = 0;
};

inline SingularValues singular_values(const Jacobian& J) {
    Eigen::JacobiSVD<Jacobian> svd(J);
    const Eigen::Vector4d s = svd.singularValues();  // descending
    SingularValues out;
    for (int i = 0; i < 4; ++i) out.values[static_cast<std::size_t>(i)] = s[i];
    const double cutoff = rank_threshold * s[0];
    for (int i = 0; i < 4; ++i)
        if (s[i] > cutoff) ++out.rank;
    return out;
}

namespace detail {

inline bool all_finite(const Eigen::Vector4d& v) { return v.allFinite(); }

}  // namespace detail

/// Levenberg-damped Gauss-Newton on (b, w, d, tau). Deterministic in (m, cfg).
inline Solution solve(const MomentSet& m, const SolverConfig& cfg = {}) {
    cfg.validate();
    const LogMoments lm = LogMoments::from(m, cfg.options.lnex);
    const Eq3Variant eq3 = cfg.options.eq3;

    LogParams x = cfg.initial.to_log();
    Eigen::Vector4d r = detail::residuals_at(lm, x, eq3);
    if (!detail::all_finite(r)) throw SolverError("non-finite residuals at the initial point", cfg.initial);

    Solution sol;
    double cost = r.squaredNorm();
    double lambda = cfg.damping_init;
    sol.norm_history.push_back(std::sqrt(cost));
    sol.converged = StopReason::max_iter;

    int iter = 0;
    while (iter < cfg.max_iterations) {
        if (std::sqrt(cost) <= cfg.residual_tolerance) {
            sol.converged = StopReason::residual;
            break;
        }
        ++iter;
        const Jacobian J = detail::jacobian_at(lm, x, eq3);
        if (!J.allFinite()) throw SolverError("non-finite Jacobian", ModelParams::from_log(x));
        const Eigen::Matrix4d JtJ = J.transpose() * J;
        const Eigen::Vector4d g = J.transpose() * r;

        bool accepted = false;
        bool small_step = false;
        // Inner loop: raise damping until the step reduces the cost or becomes negligible.
        while (true) {
            const Eigen::Matrix4d A = JtJ + lambda * Eigen::Matrix4d::Identity();
            const Eigen::Vector4d step = A.ldlt().solve(-g);
            if (!step.allFinite()) throw SolverError("non-finite step", ModelParams::from_log(x));
            small_step = step.norm() <= cfg.step_tolerance * (x.norm() + cfg.step_tolerance);

            const LogParams trial = x + step;
            const Eigen::Vector4d r_trial = detail::residuals_at(lm, trial, eq3);
            const double trial_cost = r_trial.squaredNorm();
            if (std::isfinite(trial_cost) && trial_cost < cost) {
                x = trial;
                r = r_trial;
                cost = trial_cost;
                lambda = std::max(lambda / 10.0, 1e-15);
                accepted = true;
                break;
            }
            if (small_step) break;
            lambda *= 10.0;
            if (lambda > 1e30) {
                small_step = true;
                break;
            }
        }
        if (accepted) sol.norm_history.push_back(std::sqrt(cost));
        if (small_step) {
            sol.converged = StopReason::step;
            break;
        }
    }
    if (sol.converged == StopReason::max_iter && std::sqrt(cost) <= cfg.residual_tolerance)
        sol.converged = StopReason::residual;

    sol.params = ModelParams::from_log(x);
    sol.residuals = Residuals::from_vector(r);
    sol.iterations = iter;
    const auto sv = singular_values(detail::jacobian_at(lm, x, eq3));
    sol.jacobian_singular_values = sv.values;
    sol.numerical_rank = sv.rank;
    if (!std::isfinite(sol.residuals.norm) || !x.allFinite())
        throw SolverError("non-finite solution", sol.params);
    return sol;
}

struct ManifoldPoint {
    double tau = 0.0;
    double beta = 0.0;
    double omega = 0.0;
    double delta = 0.0;
    Residuals residuals;

    ModelParams params() const { return {beta, omega, delta, tau}; }
};

class SingularSubsystemError : public DomainError {
public:
    SingularSubsystemError(const std::string& what, double tau_at) : DomainError(what), tau(tau_at) {}
    double tau;
};

namespace detail {

// (b, w, d) zeroing r2, r3, r4 at fixed tau. The 3x3 system has determinant -k.
inline Eigen::Vector3d manifold_logs(const LogMoments& l, double tau, Eq3Variant eq3) {
    const double k = tau * l.cross;
    if (std::abs(k) < 1e-14)
        throw SingularSubsystemError("singular (b, w, d) subsystem at tau = " + std::to_string(tau) +
                                         " (tau * rho * sigma_x * sigma_r = 0)",
                                     tau);
    const double f_coef = eq3 == Eq3Variant::printed ? 1.0 - k : 1.0 + k;
    Eigen::Matrix3d A;
    A << 1.0, 1.0, 0.0,
        k, 1.0 + k, -(1.0 - k),
        0.0, -1.0, 1.0;
    const Eigen::Vector3d rhs(-l.F + tau * l.mu_x - 0.5 * tau * tau * l.sigma2_x,
                              l.Rm - l.F * f_coef,
                              -(l.Rm - l.F) + tau * l.sigma2_x);
    return A.fullPivLu().solve(rhs);
}

}  // namespace detail

inline ManifoldPoint manifold_point(const MomentSet& m, double tau, const ModelOptions& options = {}) {
    const LogMoments l = LogMoments::from(m, options.lnex);
    const Eigen::Vector3d bwd = detail::manifold_logs(l, tau, options.eq3);
    const LogParams p(bwd[0], bwd[1], bwd[2], tau);
    ManifoldPoint pt;
    pt.tau = tau;
    pt.beta = std::exp(bwd[0]);
    pt.omega = std::exp(bwd[1]);
    pt.delta = std::exp(bwd[2]);
    pt.residuals = Residuals::from_vector(detail::residuals_at(l, p, options.eq3));
    return pt;
}

inline std::vector<ManifoldPoint> trace_manifold(const MomentSet& m, const std::vector<double>& tau_grid,
                                                 const ModelOptions& options = {}) {
    std::vector<ManifoldPoint> out;
    out.reserve(tau_grid.size());
    for (double tau : tau_grid) out.push_back(manifold_point(m, tau, options));
    return out;
}

/// n evenly spaced values from lo to hi inclusive.
inline std::vector<double> tau_grid(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) throw DomainError("tau grid needs hi > lo and at least 2 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return g;
}

struct ManifoldDistance {
    double distance = std::numeric_limits<double>::infinity();
    ManifoldPoint nearest;
};

/// Euclidean distance in (b, w, d, tau) from `target` to the solution family over tau in [lo, hi]:
/// grid scan followed by golden-section refinement around the best grid point.
inline ManifoldDistance distance_to_manifold(const MomentSet& m, const ModelParams& target, double lo, double hi,
                                             std::size_t steps, const ModelOptions& options = {}) {
    const LogMoments l = LogMoments::from(m, options.lnex);
    const LogParams goal = target.to_log();
    auto dist = [&](double tau) {
        const Eigen::Vector3d bwd = detail::manifold_logs(l, tau, options.eq3);
        return (LogParams(bwd[0], bwd[1], bwd[2], tau) - goal).norm();
    };
    const auto grid = tau_grid(lo, hi, steps);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = dist(grid[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    double a = grid[best == 0 ? 0 : best - 1];
    double c = grid[std::min(best + 1, grid.size() - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = c - phi * (c - a), x2 = a + phi * (c - a);
    double f1 = dist(x1), f2 = dist(x2);
    for (int i = 0; i < 200 && (c - a) > 1e-13; ++i) {
        if (f1 < f2) {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - phi * (c - a);
            f1 = dist(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (c - a);
            f2 = dist(x2);
        }
    }
    double tau_star = 0.5 * (a + c);
    double d_star = dist(tau_star);
    if (best_d < d_star) {
        tau_star = grid[best];
        d_star = best_d;
    }
    return {d_star, manifold_point(m, tau_star, options)};
}

struct RankReport {
    std::array<double, 4> singular_values{};
    int numerical_rank = 0;
    double gap = 0.0;
    double residual_floor = 0.0;
    double euler_gap = 0.0;
};

inline RankReport rank_diagnostics(const MomentSet& m, const ModelParams& p, const ModelOptions& options = {}) {
    const LogMoments l = LogMoments::from(m, options.lnex);
    RankReport rep;
    const auto sv = singular_values(detail::jacobian_at(l, p.to_log(), options.eq3));
    rep.singular_values = sv.values;
    rep.numerical_rank = sv.rank;
    rep.gap = l.X - l.mu_x - 0.5 * l.sigma2_x;
    rep.residual_floor = std::abs(rep.gap) / std::sqrt(3.0);
    rep.euler_gap = euler_gap(m, p);
    return rep;
}

}  // namespace sfm
