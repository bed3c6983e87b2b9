#include <gtest/gtest.h>

#include <cmath>

#include "sfm/dataset.hpp"
#include "sfm/mc.hpp"
#include "sfm/solver.hpp"
#include "test_support.hpp"

using namespace sfm;
using namespace sfm::mc;

namespace {

MomentSet bundled_moments() { return estimate_moments(growth_series(load_series(test::bundled_data))); }

}  // namespace

TEST(SamplePairs, PointMass) {
    const PowerPair pp[] = {{-2.0, 1.0}};
    const auto s = sample_pairs({0.02, 0.0, 0.05, 0.0, 0.4}, 5000, 1, pp);
    EXPECT_DOUBLE_EQ(s.mean_x, std::exp(0.02));
    EXPECT_DOUBLE_EQ(s.mean_y, std::exp(0.05));
    EXPECT_EQ(s.covs[0].cov, 0.0);
    EXPECT_EQ(s.covs[0].std_error, 0.0);
}

TEST(SamplePairs, ComonotoneLogs) {
    const auto s = sample_pairs({0.0, 0.1, 0.0, 0.1, 1.0}, 1000000, 3);
    EXPECT_GE(s.log_corr, 0.999);
}

TEST(SamplePairs, ReproducibleAndWorkerIndependent) {
    const BivariateLogNormalSpec spec{0.02, 0.04, 0.05, 0.15, 0.4};
    const PowerPair pp[] = {{-2.0, 1.0}, {1.0, 1.0}};
    const auto a = sample_pairs(spec, 300000, 99, pp, 1);
    const auto b = sample_pairs(spec, 300000, 99, pp, 4);
    const auto c = sample_pairs(spec, 300000, 99, pp, 0);
    for (const auto* o : {&b, &c}) {
        EXPECT_EQ(a.mean_x, o->mean_x);
        EXPECT_EQ(a.mean_y, o->mean_y);
        EXPECT_EQ(a.log_corr, o->log_corr);
        for (std::size_t i = 0; i < 2; ++i) {
            EXPECT_EQ(a.covs[i].cov, o->covs[i].cov);
            EXPECT_EQ(a.covs[i].std_error, o->covs[i].std_error);
        }
    }
    const auto d = sample_pairs(spec, 300000, 100, pp, 1);
    EXPECT_NE(a.covs[0].cov, d.covs[0].cov);
}

TEST(SamplePairs, SmallSampleCovarianceMatchesTwoPass) {
    // With one chunk the shifted-sum estimator must agree with a plain two-pass computation.
    const BivariateLogNormalSpec spec{0.01, 0.2, -0.02, 0.3, -0.5};
    const PowerPair pp[] = {{1.5, -0.5}};
    const std::size_t n = 2000;
    const auto s = sample_pairs(spec, n, 5, pp, 1);

    std::seed_seq seq{5u, 0u, 0u, 0u, 0x5f3du};
    std::mt19937_64 engine(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double zx = normal(engine), zp = normal(engine);
        const double zy = spec.rho * zx + std::sqrt(1 - spec.rho * spec.rho) * zp;
        u[i] = std::exp(1.5 * (spec.mu_x + spec.sigma_x * zx));
        v[i] = std::exp(-0.5 * (spec.mu_y + spec.sigma_y * zy));
    }
    double mu = 0, mv = 0;
    for (std::size_t i = 0; i < n; ++i) mu += u[i], mv += v[i];
    mu /= n, mv /= n;
    double c = 0;
    for (std::size_t i = 0; i < n; ++i) c += (u[i] - mu) * (v[i] - mv);
    double var_p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = (u[i] - mu) * (v[i] - mv) - c / n;
        var_p += p * p;
    }
    EXPECT_NEAR(s.covs[0].cov, c / (n - 1.0), 1e-12);
    EXPECT_NEAR(s.covs[0].std_error, std::sqrt(var_p / n / n), 1e-12);
}

TEST(SamplePairs, Errors) {
    EXPECT_THROW(sample_pairs({0, -1, 0, 1, 0}, 100, 1), DomainError);
    EXPECT_THROW(sample_pairs({0, 1, 0, 1, 1.5}, 100, 1), DomainError);
    EXPECT_THROW(sample_pairs({0, 1, 0, 1, 0}, 1, 1), DomainError);
}

// Sampling oracle for the closed-form power covariance.
TEST(SamplePairs, PowerCovarianceTenMillionDraws) {
    const BivariateLogNormalSpec spec{0.02, 0.04, 0.05, 0.15, 0.4};
    const PowerPair pp[] = {{-2.0, 1.0}};
    const auto s = sample_pairs(spec, 10000000, 2024, pp);
    const double closed = lognormal_power_cov(-2.0, 1.0, 0.02, 0.04, 0.05, 0.15, 0.4);
    EXPECT_LE(std::abs(s.covs[0].cov - closed), 3.0 * s.covs[0].std_error)
        << "closed=" << closed << " sample=" << s.covs[0].cov << " se=" << s.covs[0].std_error;
    EXPECT_LE(std::abs(s.mean_x - std::exp(0.02 + 0.5 * 0.04 * 0.04)), 4.0 * s.se_mean_x);
}

TEST(Battery, TrivialCasesPass) {
    const auto m = bundled_moments();
    const std::vector<IdentityCase> cases{
        mrs_case("tau=0", m, 0.0),
        power_cov_case("a=0", {0.02, 0.04, 0.05, 0.15, 0.4}, {0.0, 1.0}),
        power_cov_case("rho=0", {0.02, 0.04, 0.05, 0.15, 0.0}, {-2.0, 1.0}),
        power_cov_case("rho=0 b", {0.0, 0.1, 0.0, 0.2, 0.0}, {2.0, -1.0}),
    };
    const auto rep = validate_battery(cases, 20000, 7);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_EQ(rep.results[0].sample, 0.0);
    EXPECT_EQ(rep.results[0].closed_form, 0.0);
}

TEST(Battery, DetectsWrongClosedForm) {
    auto c = power_cov_case("wrong", {0.02, 0.04, 0.05, 0.15, 0.4}, {-2.0, 1.0});
    c.closed_form *= 1.5;
    EXPECT_FALSE(validate_battery({c}, 1000000, 1).all_pass());
}

TEST(Battery, RequiresEnoughDraws) { EXPECT_THROW(validate_identities(9999, 1, bundled_moments()), DomainError); }

TEST(Battery, DefaultBatteryCoversRequiredTaus) {
    const auto cases = default_battery(bundled_moments());
    int mrs = 0;
    for (const auto& c : cases)
        if (c.name.rfind("mrs_return_cov", 0) == 0) ++mrs;
    EXPECT_EQ(mrs, 4);
    EXPECT_EQ(cases.size(), 9u);
}

TEST(SyntheticMoments, ExactRoot) {
    const ModelParams p{0.96, 1.2, 1.3, 2.5};
    for (auto eq3 : {Eq3Variant::printed, Eq3Variant::rederived}) {
        const auto m = synthetic_consistent_moments(p, 0.018, 0.0013, 0.027, eq3);
        EXPECT_NEAR(lognormality_gap(m), 0.0, 1e-15);
        EXPECT_LE(std::abs(m.rho), 1.0);
        const auto r = residual_vector(m, p, {eq3, LnExMode::arithmetic});
        EXPECT_LE(r.norm, 1e-14);
    }
    EXPECT_THROW(synthetic_consistent_moments({0.96, 1.02, 0.99, 0.0}, 0.018, 0.0013, 0.027), DomainError);
}

// Frozen output of the default battery (1e6 draws, seed 42) on the bundled data.
// Values depend on the standard library's normal_distribution (libstdc++ here).
TEST(Battery, FrozenDefaultRun) {
    struct Frozen {
        const char* name;
        double sample, std_error;
    };
    const Frozen frozen[] = {
        {"power_cov a=-2 b=1", -0.0049089601123019, 1.332402046502554e-05},
        {"power_cov a=1 b=1", 0.0026034052166418273, 7.115095703986876e-06},
        {"power_cov a=2 b=-1 rho<0", 0.025342957910150742, 5.404067648252583e-05},
        {"power_cov rho=0", -3.605160270263385e-06, 1.2375929207355917e-05},
        {"power_cov a=0", 0, 0},
        {"mrs_return_cov tau=0", 0, 0},
        {"mrs_return_cov tau=1", -0.0023848788104148992, 6.409282088419711e-06},
        {"mrs_return_cov tau=1.0319", -0.002471485042983951, 6.658212715420221e-06},
        {"mrs_return_cov tau=4.4", -0.010058775871537362, 2.693208209205802e-05},
    };
    const auto rep = validate_identities(1000000, 42, bundled_moments());
    ASSERT_EQ(rep.results.size(), std::size(frozen));
    EXPECT_TRUE(rep.all_pass());
    for (std::size_t i = 0; i < rep.results.size(); ++i) {
        const auto& r = rep.results[i];
        EXPECT_EQ(r.name, frozen[i].name);
        EXPECT_NEAR(r.sample, frozen[i].sample, 1e-12 * std::abs(frozen[i].sample)) << r.name;
        EXPECT_NEAR(r.std_error, frozen[i].std_error, 1e-12 * frozen[i].std_error) << r.name;
    }
}
