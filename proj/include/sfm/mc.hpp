#pragma once

// Monte Carlo oracle for the jointly lognormal covariance identities, and a
// generator of synthetic moment sets with an exact root for solver tests.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sfm/errors.hpp"
#include "sfm/model.hpp"
#include "sfm/moments.hpp"

namespace sfm::mc {

struct BivariateLogNormalSpec {
    double mu_x = 0.0;
    double sigma_x = 0.0;
    double mu_y = 0.0;
    double sigma_y = 0.0;
    double rho = 0.0;

    void validate() const {
        if (!(sigma_x >= 0.0) || !(sigma_y >= 0.0)) throw DomainError("log standard deviations must be >= 0");
        if (!(std::abs(rho) <= 1.0)) throw DomainError("|rho| must be <= 1");
    }

    static BivariateLogNormalSpec from_moments(const MomentSet& m) {
        return {m.mu_x, m.sigma_x(), m.mu_r, m.sigma_r(), m.rho};
    }
};

struct PowerPair {
    double a = 1.0;
    double b = 1.0;
};

struct PowerCovEstimate {
    double a = 0.0;
    double b = 0.0;
    double cov = 0.0;        // unbiased (n - 1) sample covariance of X^a and Y^b
    double std_error = 0.0;  // delta-method standard error
};

struct SampleSummary {
    std::size_t n = 0;
    double mean_x = 0.0;
    double mean_y = 0.0;
    double se_mean_x = 0.0;
    double se_mean_y = 0.0;
    double log_corr = 0.0;  // sample correlation of (ln X, ln Y); NaN when either log is constant
    std::vector<PowerCovEstimate> covs;
};

inline constexpr std::size_t default_chunk_size = 1 << 16;

namespace detail {

// Raw sums of shifted values; additive across chunks.
struct PairSums {
    double su = 0, sv = 0, suv = 0, suu = 0, svv = 0, suuvv = 0, suuv = 0, suvv = 0;

    void add(double du, double dv) {
        const double uv = du * dv;
        su += du;
        sv += dv;
        suv += uv;
        suu += du * du;
        svv += dv * dv;
        suuvv += uv * uv;
        suuv += uv * du;
        suvv += uv * dv;
    }
    void merge(const PairSums& o) {
        su += o.su, sv += o.sv, suv += o.suv, suu += o.suu, svv += o.svv;
        suuvv += o.suuvv, suuv += o.suuv, suvv += o.suvv;
    }
};

struct ChunkSums {
    std::size_t n = 0;
    PairSums marginal;  // (X, Y) shifted by their lognormal means
    PairSums logs;      // (ln X, ln Y) shifted by mu
    std::vector<PairSums> powers;

    void merge(const ChunkSums& o) {
        n += o.n;
        marginal.merge(o.marginal);
        logs.merge(o.logs);
        for (std::size_t i = 0; i < powers.size(); ++i) powers[i].merge(o.powers[i]);
    }
};

struct Shifts {
    double u = 0.0;
    double v = 0.0;
};

// Counter-based seeding: each chunk owns an engine keyed by (seed, chunk index).
inline ChunkSums run_chunk(const BivariateLogNormalSpec& spec, std::span<const PowerPair> pairs,
                           std::span<const Shifts> shifts, Shifts marg, std::uint64_t seed, std::size_t chunk,
                           std::size_t count) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32), 0x5f3du};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - spec.rho * spec.rho));

    ChunkSums s;
    s.n = count;
    s.powers.resize(pairs.size());
    for (std::size_t i = 0; i < count; ++i) {
        const double zx = normal(engine);
        const double zp = normal(engine);
        const double zy = spec.rho * zx + ortho * zp;
        const double lx = spec.mu_x + spec.sigma_x * zx;
        const double ly = spec.mu_y + spec.sigma_y * zy;
        s.logs.add(lx - spec.mu_x, ly - spec.mu_y);
        s.marginal.add(std::exp(lx) - marg.u, std::exp(ly) - marg.v);
        for (std::size_t p = 0; p < pairs.size(); ++p)
            s.powers[p].add(std::exp(pairs[p].a * lx) - shifts[p].u, std::exp(pairs[p].b * ly) - shifts[p].v);
    }
    return s;
}

struct Central {
    double mean_u, mean_v, var_u, var_v, cov, se_cov;
};

// Central moments from shifted raw sums (n-divisor internally, unbiased covariance on output).
inline Central central(const PairSums& s, std::size_t n, Shifts shift) {
    const double dn = static_cast<double>(n);
    const double mu = s.su / dn, mv = s.sv / dn;
    const double m11 = s.suv / dn, m20 = s.suu / dn, m02 = s.svv / dn;
    const double m22 = s.suuvv / dn, m21 = s.suuv / dn, m12 = s.suvv / dn;
    Central c{};
    c.mean_u = shift.u + mu;
    c.mean_v = shift.v + mv;
    c.var_u = std::max(0.0, m20 - mu * mu);
    c.var_v = std::max(0.0, m02 - mv * mv);
    const double cov_pop = m11 - mu * mv;
    const double e_p2 = m22 + mv * mv * m20 + mu * mu * m02 + mu * mu * mv * mv - 2.0 * mv * m21 - 2.0 * mu * m12 +
                        4.0 * mu * mv * m11 - 2.0 * mu * mv * mv * mu - 2.0 * mu * mu * mv * mv;
    const double var_p = std::max(0.0, e_p2 - cov_pop * cov_pop);
    c.cov = n > 1 ? cov_pop * dn / (dn - 1.0) : 0.0;
    c.se_cov = std::sqrt(var_p / dn);
    return c;
}

}  // namespace detail

/// Draw n correlated lognormal pairs and summarise them. Output is independent of `workers`.
inline SampleSummary sample_pairs(const BivariateLogNormalSpec& spec, std::size_t n, std::uint64_t seed,
                                  std::span<const PowerPair> pairs = {}, unsigned workers = 0,
                                  std::size_t chunk_size = default_chunk_size) {
    spec.validate();
    if (n < 2) throw DomainError("sample_pairs needs at least 2 draws");
    if (chunk_size == 0) throw DomainError("chunk size must be positive");

    std::vector<detail::Shifts> shifts;
    for (const auto& p : pairs) shifts.push_back({std::exp(p.a * spec.mu_x), std::exp(p.b * spec.mu_y)});
    const detail::Shifts marg{std::exp(spec.mu_x), std::exp(spec.mu_y)};

    const std::size_t n_chunks = (n + chunk_size - 1) / chunk_size;
    std::vector<detail::ChunkSums> results(n_chunks);
    auto work = [&](std::size_t chunk) {
        const std::size_t begin = chunk * chunk_size;
        const std::size_t count = std::min(chunk_size, n - begin);
        results[chunk] = detail::run_chunk(spec, pairs, shifts, marg, seed, chunk, count);
    };

    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) work(c);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t c = t; c < n_chunks; c += workers) work(c);
            });
        for (auto& th : pool) th.join();
    }

    detail::ChunkSums total;
    total.powers.resize(pairs.size());
    for (const auto& r : results) total.merge(r);  // fixed chunk order

    SampleSummary out;
    out.n = n;
    const auto mc = detail::central(total.marginal, n, marg);
    const double dn = static_cast<double>(n);
    out.mean_x = mc.mean_u;
    out.mean_y = mc.mean_v;
    out.se_mean_x = std::sqrt(mc.var_u / dn);
    out.se_mean_y = std::sqrt(mc.var_v / dn);
    const auto lc = detail::central(total.logs, n, {spec.mu_x, spec.mu_y});
    out.log_corr = (lc.var_u > 0.0 && lc.var_v > 0.0) ? lc.cov * (dn - 1.0) / dn / std::sqrt(lc.var_u * lc.var_v)
                                                        : std::numeric_limits<double>::quiet_NaN();
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto c = detail::central(total.powers[p], n, shifts[p]);
        out.covs.push_back({pairs[p].a, pairs[p].b, c.cov, c.se_cov});
    }
    return out;
}

inline constexpr double acceptance_band = 4.0;  // standard errors

struct IdentityCase {
    std::string name;
    BivariateLogNormalSpec spec;
    PowerPair powers;
    double closed_form = 0.0;
};

struct IdentityResult {
    std::string name;
    double a = 0.0;
    double b = 0.0;
    double closed_form = 0.0;
    double sample = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double marginal_z = 0.0;  // (sample mean X - exp(mu_x + sigma_x^2 / 2)) / se
    bool pass = false;
};

struct ValidationReport {
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    std::vector<IdentityResult> results;

    bool all_pass() const {
        return std::all_of(results.begin(), results.end(), [](const IdentityResult& r) { return r.pass; });
    }
};

namespace detail {

inline double z_score(double sample, double expected, double se) {
    const double diff = sample - expected;
    if (se > 0.0) return diff / se;
    return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

}  // namespace detail

inline IdentityCase power_cov_case(std::string name, const BivariateLogNormalSpec& spec, PowerPair pp) {
    return {std::move(name), spec, pp,
            lognormal_power_cov(pp.a, pp.b, spec.mu_x, spec.sigma_x, spec.mu_y, spec.sigma_y, spec.rho)};
}

/// MRS-return case: X = consumption growth, Y = equity return, powers (-tau, 1).
inline IdentityCase mrs_case(std::string name, const MomentSet& m, double tau) {
    return {std::move(name), BivariateLogNormalSpec::from_moments(m), {-tau, 1.0}, mrs_return_cov(m, tau)};
}

/// The fixed battery: generic power-covariance cases plus the MRS case on `m` at tau in {0, 1, 1.0319, 4.4}.
inline std::vector<IdentityCase> default_battery(const MomentSet& m) {
    const BivariateLogNormalSpec base{0.02, 0.04, 0.05, 0.15, 0.4};
    std::vector<IdentityCase> cases{
        power_cov_case("power_cov a=-2 b=1", base, {-2.0, 1.0}),
        power_cov_case("power_cov a=1 b=1", base, {1.0, 1.0}),
        power_cov_case("power_cov a=2 b=-1 rho<0", {0.0, 0.1, 0.0, 0.2, -0.6}, {2.0, -1.0}),
        power_cov_case("power_cov rho=0", {0.02, 0.04, 0.05, 0.15, 0.0}, {-2.0, 1.0}),
        power_cov_case("power_cov a=0", base, {0.0, 1.0}),
    };
    for (double tau : {0.0, 1.0, 1.0319, 4.4}) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "mrs_return_cov tau=%g", tau);
        cases.push_back(mrs_case(buf, m, tau));
    }
    return cases;
}

/// Each case uses its own stream, keyed by (seed + case index).
inline ValidationReport validate_battery(const std::vector<IdentityCase>& cases, std::size_t draws,
                                         std::uint64_t seed, unsigned workers = 0) {
    if (draws < 10000) throw DomainError("identity validation needs at least 10^4 draws");
    ValidationReport rep;
    rep.draws = draws;
    rep.seed = seed;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        const PowerPair pp[] = {c.powers};
        const auto s = sample_pairs(c.spec, draws, seed + i, pp, workers);
        IdentityResult r;
        r.name = c.name;
        r.a = c.powers.a;
        r.b = c.powers.b;
        r.closed_form = c.closed_form;
        r.sample = s.covs[0].cov;
        r.std_error = s.covs[0].std_error;
        r.z = detail::z_score(r.sample, r.closed_form, r.std_error);
        const double ex = std::exp(c.spec.mu_x + 0.5 * c.spec.sigma_x * c.spec.sigma_x);
        r.marginal_z = detail::z_score(s.mean_x, ex, s.se_mean_x);
        r.pass = std::abs(r.sample - r.closed_form) <= acceptance_band * r.std_error &&
                 std::abs(s.mean_x - ex) <= acceptance_band * s.se_mean_x;
        rep.results.push_back(std::move(r));
    }
    return rep;
}

inline ValidationReport validate_identities(std::size_t draws, std::uint64_t seed, const MomentSet& m,
                                            unsigned workers = 0) {
    return validate_battery(default_battery(m), draws, seed, workers);
}

/// Moment set for which `p` is an exact root of all four residuals with zero lognormality gap.
/// F and Rm are fixed by r2 and r4; rho is chosen so that r3 vanishes. Throws if that needs |rho| > 1.
inline MomentSet synthetic_consistent_moments(const ModelParams& p, double mu_x, double sigma2_x, double sigma2_r,
                                              Eq3Variant eq3 = Eq3Variant::printed) {
    p.validate();
    if (!(sigma2_x > 0.0) || !(sigma2_r > 0.0)) throw DomainError("variances must be positive");
    if (p.tau == 0.0) throw DomainError("tau = 0 leaves r3 independent of rho");
    const double b = p.b(), w = p.w(), d = p.d(), tau = p.tau;
    const double F = -b - w + tau * mu_x - 0.5 * tau * tau * sigma2_x;
    const double Rm = F + w - d + tau * sigma2_x;
    // r3 = c0 + k c1
    const double f_sign = eq3 == Eq3Variant::printed ? -1.0 : 1.0;
    const double c0 = F - Rm - d + w;
    const double c1 = f_sign * F + b + d + w;
    if (c1 == 0.0) throw DomainError("r3 does not depend on k at these parameters");
    const double k = -c0 / c1;
    const double rho = k / (tau * std::sqrt(sigma2_x * sigma2_r));
    if (!(std::abs(rho) <= 1.0)) throw DomainError("required correlation " + std::to_string(rho) + " is outside [-1, 1]");

    MomentSet m;
    m.mu_x = mu_x;
    m.sigma2_x = sigma2_x;
    m.sigma2_r = sigma2_r;
    m.mu_r = Rm - 0.5 * sigma2_r;
    m.rho = rho;
    m.mean_x = std::exp(mu_x + 0.5 * sigma2_x);
    m.mean_re = std::exp(Rm);
    m.mean_rf = std::exp(F);
    m.n_obs = 89;
    return m;
}

}  // namespace sfm::mc
