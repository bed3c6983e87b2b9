#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "sfm/dataset.hpp"
#include "sfm/errors.hpp"

namespace sfm {

enum class VarianceConvention { sample, population };

inline std::string_view to_string(VarianceConvention c) {
    return c == VarianceConvention::sample ? "sample" : "population";
}

inline VarianceConvention parse_variance_convention(std::string_view s) {
    if (s == "sample") return VarianceConvention::sample;
    if (s == "population") return VarianceConvention::population;
    throw DomainError("unknown variance convention '" + std::string(s) + "'");
}

/// Sample statistics entering the pricing equations.
/// Log-moments are over ln x and ln R_e; the three means are arithmetic means of the raw gross series.
struct MomentSet {
    double mu_x = 0.0;
    double sigma2_x = 0.0;
    double mu_r = 0.0;
    double sigma2_r = 0.0;
    double rho = 0.0;
    double mean_x = 1.0;
    double mean_re = 1.0;
    double mean_rf = 1.0;
    std::size_t n_obs = 0;
    VarianceConvention convention = VarianceConvention::sample;

    double sigma_x() const { return std::sqrt(sigma2_x); }
    double sigma_r() const { return std::sqrt(sigma2_r); }
};

inline MomentSet estimate_moments(const GrowthSeries& growth,
                                  VarianceConvention convention = VarianceConvention::sample) {
    const auto& obs = growth.observations;
    const std::size_t n = obs.size();
    if (n < 2) throw DataError("moment estimation needs at least 2 observations");

    double sum_lx = 0.0, sum_lr = 0.0, sum_x = 0.0, sum_re = 0.0, sum_rf = 0.0;
    for (const auto& o : obs) {
        if (!(o.x > 0.0) || !(o.r_e > 0.0) || !(o.r_f > 0.0))
            throw DomainError("year " + std::to_string(o.year) + ": growth and returns must be positive");
        sum_lx += std::log(o.x);
        sum_lr += std::log(o.r_e);
        sum_x += o.x;
        sum_re += o.r_e;
        sum_rf += o.r_f;
    }
    const double dn = static_cast<double>(n);
    MomentSet m;
    m.n_obs = n;
    m.convention = convention;
    m.mu_x = sum_lx / dn;
    m.mu_r = sum_lr / dn;
    m.mean_x = sum_x / dn;
    m.mean_re = sum_re / dn;
    m.mean_rf = sum_rf / dn;

    // Second pass on centred logs.
    double sxx = 0.0, srr = 0.0, sxr = 0.0;
    for (const auto& o : obs) {
        const double dx = std::log(o.x) - m.mu_x;
        const double dr = std::log(o.r_e) - m.mu_r;
        sxx += dx * dx;
        srr += dr * dr;
        sxr += dx * dr;
    }
    const double divisor = convention == VarianceConvention::sample ? dn - 1.0 : dn;
    m.sigma2_x = sxx / divisor;
    m.sigma2_r = srr / divisor;
    if (sxx == 0.0 || srr == 0.0)
        throw DegenerateSeriesError(std::string("zero variance in ln ") + (sxx == 0.0 ? "x" : "R_e") +
                                    "; correlation undefined");
    // Same divisor on numerator and denominator, so rho is convention-free.
    m.rho = std::clamp(sxr / std::sqrt(sxx * srr), -1.0, 1.0);
    return m;
}

/// ln(mean x) - mu_x - sigma2_x / 2. Zero iff the sample is lognormal-consistent.
inline double lognormality_gap(const MomentSet& m) {
    return std::log(m.mean_x) - m.mu_x - 0.5 * m.sigma2_x;
}

}  // namespace sfm
