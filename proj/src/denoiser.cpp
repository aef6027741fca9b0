#include "difflab/denoiser.hpp"

#include <algorithm>
#include <cmath>

#include "difflab/errors.hpp"

namespace difflab {

std::vector<double> OracleDenoiser::posterior_mean(double t, std::span<const double> z) const {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(static_cast<int>(z.size()) == m_.dim(), Errc::DimensionMismatch,
            "point has wrong dimension");
    const int k = m_.components();
    const int d = m_.dim();

    std::vector<double> logits(static_cast<std::size_t>(k));
    double max_logit = -INFINITY;
    for (int i = 0; i < k; ++i) {
        logits[i] = std::log(m_.weights()[i]) +
                    log_isotropic_normal(z, m_.mean(i), m_.variances()[i] + t);
        max_logit = std::max(max_logit, logits[i]);
    }
    double norm = 0.0;
    for (int i = 0; i < k; ++i) {
        logits[i] = std::exp(logits[i] - max_logit);
        norm += logits[i];
    }

    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < k; ++i) {
        const double r = logits[i] / norm;
        const double v = m_.variances()[i];
        const auto mu = m_.mean(i);
        const double a = t / (v + t);  // pull toward the component mean
        const double b = v / (v + t);  // keep the observation
        for (int j = 0; j < d; ++j) out[j] += r * (a * mu[j] + b * z[j]);
    }
    return out;
}

std::vector<double> score(const Denoiser& d, double t, std::span<const double> z) {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    std::vector<double> s = d.posterior_mean(t, z);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = (s[i] - z[i]) / t;
    return s;
}

double mmse(const GaussianMixture& m, const Denoiser& d, double t, std::int64_t n, RngStream& rng) {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(n >= 1, Errc::InvalidRange, "n must be >= 1");
    const int dim = m.dim();
    const double s = std::sqrt(t);
    std::vector<double> y(static_cast<std::size_t>(dim)), z(static_cast<std::size_t>(dim));
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        m.sample_into(y, rng);
        for (int j = 0; j < dim; ++j) z[j] = y[j] + s * rng.normal();
        const auto yhat = d.posterior_mean(t, z);
        for (int j = 0; j < dim; ++j) {
            const double e = y[j] - yhat[j];
            acc += e * e;
        }
    }
    return acc / static_cast<double>(n);
}

} // namespace difflab
