#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "difflab/errors.hpp"
#include "difflab/forward_process.hpp"
#include "difflab/gaussian_mixture.hpp"
#include "test_util.hpp"

using namespace difflab;

TEST_CASE("sample_zt at t=0 returns y exactly") {
    RngStream rng(1);
    const std::vector<double> y{1.5, -0.5};
    CHECK(sample_zt(y, 0.0, rng) == y);
    CHECK_THROWS_AS(sample_zt(y, -1.0, rng), Error);
}

TEST_CASE("sample_zt variance is t") {
    RngStream rng(2);
    const std::vector<double> y{0.0};
    std::vector<double> xs;
    xs.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) xs.push_back(sample_zt(y, 4.0, rng)[0]);
    const auto s = testutil::stats(xs);
    CHECK(s.var == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("marginal of sample_zt over y ~ pop matches the noised mixture") {
    const GaussianMixture m(1, {0.5, 0.5}, {{-2.0}, {2.0}}, {0.25, 0.25});
    const double t = 1.3;
    RngStream rng(3);
    std::vector<double> xs;
    std::vector<double> y(1);
    const std::int64_t n = 1000000;
    xs.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        m.sample_into(y, rng);
        xs.push_back(sample_zt(y, t, rng)[0]);
    }
    const auto s = testutil::stats(xs);
    // noised mixture: mean 0, per-coordinate variance 4.25 + t
    CHECK(std::abs(s.mean - 0.0) <= 3.0 * s.se_mean);
    CHECK(std::abs(s.var - (4.25 + t)) <= 3.0 * s.se_var);
}

TEST_CASE("path variance accumulates to n*dt") {
    RngStream rng(4);
    const std::vector<double> y{0.0};
    std::vector<double> ends;
    ends.reserve(100000);
    for (int i = 0; i < 100000; ++i) ends.push_back(simulate_path(y, 0.01, 100, rng).states[100][0]);
    const auto s = testutil::stats(ends);
    CHECK(s.var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("path distribution is invariant under step refinement") {
    RngStream rng(5);
    const std::vector<double> y{0.0};
    std::vector<double> coarse, fine;
    for (int i = 0; i < 200000; ++i) {
        coarse.push_back(simulate_path(y, 0.02, 50, rng).states[50][0]);
        fine.push_back(simulate_path(y, 0.01, 100, rng).states[100][0]);
    }
    const auto a = testutil::stats(coarse);
    const auto b = testutil::stats(fine);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.se_mean, b.se_mean));
    CHECK(std::abs(a.var - b.var) <= 3.0 * std::hypot(a.se_var, b.se_var));
}

TEST_CASE("a single step equals a direct jump in distribution") {
    RngStream rng(6);
    const std::vector<double> y{0.7};
    std::vector<double> steps, jumps;
    for (int i = 0; i < 200000; ++i) {
        steps.push_back(simulate_path(y, 0.5, 1, rng).states[1][0]);
        jumps.push_back(sample_zt(y, 0.5, rng)[0]);
    }
    const auto a = testutil::stats(steps);
    const auto b = testutil::stats(jumps);
    CHECK(std::abs(a.mean - b.mean) <= 3.0 * std::hypot(a.se_mean, b.se_mean));
    CHECK(std::abs(a.var - b.var) <= 3.0 * std::hypot(a.se_var, b.se_var));
}

TEST_CASE("path covariance matches min(a,b)*dt") {
    // Markov property proxy: cov(states[a], states[b]) = min(a,b) * dt
    RngStream rng(7);
    const std::vector<double> y{0.0};
    const double dt = 0.01;
    const int a = 30, b = 70;
    const std::int64_t n = 200000;
    double sa = 0.0, sb = 0.0, sab = 0.0, saa = 0.0;
    std::vector<double> prods;
    prods.reserve(n);
    for (std::int64_t i = 0; i < n; ++i) {
        const Path p = simulate_path(y, dt, b, rng);
        const double xa = p.states[a][0], xb = p.states[b][0];
        sa += xa;
        sb += xb;
        sab += xa * xb;
        saa += xa * xa;
        prods.push_back(xa * xb);
    }
    const double dn = static_cast<double>(n);
    const double cov = sab / dn - (sa / dn) * (sb / dn);
    const auto ps = testutil::stats(prods);
    CHECK(std::abs(cov - static_cast<double>(a) * dt) <= 3.0 * ps.se_mean);
}

TEST_CASE("simulate_path is bit-reproducible for a fixed seed") {
    const std::vector<double> y{1.0};
    RngStream a(11), b(11);
    const Path pa = simulate_path(y, 0.1, 64, a);
    const Path pb = simulate_path(y, 0.1, 64, b);
    CHECK(pa.states == pb.states);
}

TEST_CASE("conditional reversal law holds at small dt") {
    RngStream rng(8);
    const std::vector<double> y{0.0};
    const double t = 1.0, dt = 1e-3;
    const auto r = conditional_reversal_moments(y, t, dt, 1000000, rng);
    const double mean_residual = r.empirical_mean[0] - r.predicted_mean[0];
    CHECK(std::abs(mean_residual) <= 3.0 * r.residual_se[0]);
    CHECK(r.predicted_variance == doctest::Approx(dt * (1.0 - dt / t)).epsilon(1e-12));
    CHECK(r.residual_variance[0] == doctest::Approx(r.predicted_variance).epsilon(0.01));
}

TEST_CASE("conditional reversal law is exact even at dt = t/2") {
    RngStream rng(9);
    const std::vector<double> y{0.4};
    const double t = 1.0, dt = 0.5;
    const auto r = conditional_reversal_moments(y, t, dt, 1000000, rng);
    const double mean_residual = r.empirical_mean[0] - r.predicted_mean[0];
    CHECK(std::abs(mean_residual) <= 3.0 * r.residual_se[0]);
    CHECK(r.residual_variance[0] == doctest::Approx(dt * (1.0 - dt / t)).epsilon(0.01));
}

TEST_CASE("conditional reversal rejects dt >= t") {
    RngStream rng(10);
    const std::vector<double> y{0.0};
    CHECK_THROWS_AS(conditional_reversal_moments(y, 1.0, 1.0, 10, rng), Error);
    try {
        conditional_reversal_moments(y, 1.0, 1.5, 10, rng);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InvalidInterval);
    }
}
