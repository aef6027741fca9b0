#include "difflab/forward_process.hpp"

#include <cmath>

#include "difflab/errors.hpp"

namespace difflab {

std::vector<double> sample_zt(std::span<const double> y, double t, RngStream& rng) {
    require(t >= 0.0, Errc::NegativeTime, "t must be >= 0");
    const double s = std::sqrt(t);
    std::vector<double> z(y.begin(), y.end());
    if (s > 0.0)
        for (double& zi : z) zi += s * rng.normal();
    return z;
}

Path simulate_path(std::span<const double> y, double dt, std::int64_t n_steps, RngStream& rng) {
    require(dt > 0.0, Errc::NonPositiveTime, "dt must be > 0");
    require(n_steps >= 1, Errc::InvalidRange, "n_steps must be >= 1");
    Path p;
    p.dt = dt;
    p.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    p.states.emplace_back(y.begin(), y.end());
    const double s = std::sqrt(dt);
    for (std::int64_t n = 0; n < n_steps; ++n) {
        std::vector<double> next = p.states.back();
        for (double& zi : next) zi += s * rng.normal();
        p.states.push_back(std::move(next));
    }
    return p;
}

ReversalCheck conditional_reversal_moments(std::span<const double> y, double t, double dt,
                                           std::int64_t n, RngStream& rng) {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(dt > 0.0 && dt < t, Errc::InvalidInterval, "need 0 < dt < t");
    const std::size_t d = y.size();

    // z(t-dt) = y + sqrt(t-dt) * delta ; z(t) = z(t-dt) + sqrt(dt) * eps
    const double s1 = std::sqrt(t - dt);
    const double s2 = std::sqrt(dt);

    std::vector<double> sum_prev(d, 0.0), sum_pred(d, 0.0);
    std::vector<double> sum_res(d, 0.0), sum_res2(d, 0.0);
    std::vector<double> zprev(d), znow(d);
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            zprev[j] = y[j] + s1 * rng.normal();
            znow[j] = zprev[j] + s2 * rng.normal();
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double pred = znow[j] + dt * (y[j] - znow[j]) / t;
            const double res = zprev[j] - pred;
            sum_prev[j] += zprev[j];
            sum_pred[j] += pred;
            sum_res[j] += res;
            sum_res2[j] += res * res;
        }
    }

    ReversalCheck out;
    out.empirical_mean.resize(d);
    out.predicted_mean.resize(d);
    out.residual_variance.resize(d);
    out.residual_se.resize(d);
    const double dn = static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j) {
        out.empirical_mean[j] = sum_prev[j] / dn;
        out.predicted_mean[j] = sum_pred[j] / dn;
        const double mres = sum_res[j] / dn;
        const double var = sum_res2[j] / dn - mres * mres;
        out.residual_variance[j] = var * dn / (dn - 1.0);
        out.residual_se[j] = std::sqrt(out.residual_variance[j] / dn);
    }
    out.predicted_variance = dt * (1.0 - dt / t);
    return out;
}

} // namespace difflab
