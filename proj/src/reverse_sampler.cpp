#include "difflab/reverse_sampler.hpp"

#include <cmath>

#include "difflab/errors.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

TimeGrid make_grid(double t0, double T, std::int64_t n_steps) {
    require(t0 > 0.0 && T > t0, Errc::InvalidRange, "need 0 < t0 < T");
    require(n_steps >= 1, Errc::InvalidRange, "n_steps must be >= 1");
    TimeGrid g;
    g.t0 = t0;
    g.T = T;
    g.n_steps = n_steps;
    g.times.resize(static_cast<std::size_t>(n_steps) + 1);
    const double lnT = std::log(T), lnt0 = std::log(t0);
    for (std::int64_t i = 0; i <= n_steps; ++i)
        g.times[static_cast<std::size_t>(i)] =
            std::exp(lnT + (lnt0 - lnT) * (static_cast<double>(i) / static_cast<double>(n_steps)));
    g.times.front() = T;
    g.times.back() = t0;
    return g;
}

std::vector<std::vector<double>> init_sample(const PopulationSource& src, double T, InitMode mode,
                                             std::int64_t n, RngStream& rng) {
    require(T > 0.0, Errc::NonPositiveTime, "T must be > 0");
    if (mode == InitMode::ExactNoised) {
        require(src.mixture.has_value(), Errc::InvalidConfig,
                "ExactNoised init needs the population mixture");
        return src.mixture->noised(T).sample(n, rng);
    }
    const auto& mu = src.stats.mean;
    const double sd = std::sqrt(src.stats.avg_coord_variance + T);
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                         std::vector<double>(mu.size()));
    for (auto& row : out)
        for (std::size_t j = 0; j < mu.size(); ++j) row[j] = mu[j] + sd * rng.normal();
    return out;
}

namespace {

void init_one(const PopulationSource& src, double T, InitMode mode, std::span<double> out,
              RngStream& rng) {
    if (mode == InitMode::ExactNoised) {
        src.mixture->noised(T).sample_into(out, rng);
    } else {
        const double sd = std::sqrt(src.stats.avg_coord_variance + T);
        for (std::size_t j = 0; j < out.size(); ++j)
            out[j] = src.stats.mean[j] + sd * rng.normal();
    }
}

} // namespace

std::vector<double> reverse_drift(const Denoiser& d, std::span<const double> z, double t,
                                  double dt, double lambda) {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(dt > 0.0 && dt <= t, Errc::InvalidInterval, "need 0 < dt <= t");
    require(lambda >= 0.0, Errc::NegativeLambda, "lambda must be >= 0");
    std::vector<double> out = d.posterior_mean(t, z);
    const double c = dt * (1.0 + lambda) / (2.0 * t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = z[i] + c * (out[i] - z[i]);
    return out;
}

std::vector<double> reverse_sde_step(const Denoiser& d, std::span<const double> z, double t,
                                     double dt, RngStream& rng) {
    return reverse_lambda_step(d, z, t, dt, 1.0, rng);
}

std::vector<double> reverse_ode_step(const Denoiser& d, std::span<const double> z, double t,
                                     double dt) {
    return reverse_drift(d, z, t, dt, 0.0);
}

std::vector<double> reverse_lambda_step(const Denoiser& d, std::span<const double> z, double t,
                                        double dt, double lambda, RngStream& rng) {
    std::vector<double> out = reverse_drift(d, z, t, dt, lambda);
    if (lambda > 0.0) {
        const double sd = std::sqrt(lambda * dt);
        for (double& v : out) v += sd * rng.normal();
    }
    return out;
}

std::vector<std::vector<double>> sample_population(const Denoiser& d, const PopulationSource& src,
                                                   const SamplerConfig& cfg) {
    require(cfg.n_chains >= 1, Errc::InvalidRange, "n_chains must be >= 1");
    require(cfg.lambda >= 0.0, Errc::NegativeLambda, "lambda must be >= 0");
    require(cfg.grid.times.size() >= 2, Errc::InvalidGrid, "grid has no steps");
    if (cfg.init == InitMode::ExactNoised)
        require(src.mixture.has_value(), Errc::InvalidConfig,
                "ExactNoised init needs the population mixture");

    const std::size_t dim = src.stats.mean.size();
    const auto& times = cfg.grid.times;
    std::vector<std::vector<double>> out(static_cast<std::size_t>(cfg.n_chains),
                                         std::vector<double>(dim));

    parallel_for(cfg.n_chains, 256, [&](std::int64_t b, std::int64_t e) {
        std::vector<double> z(dim);
        for (std::int64_t c = b; c < e; ++c) {
            RngStream rng = derive_stream(cfg.seed, "chain", static_cast<std::uint64_t>(c));
            init_one(src, cfg.grid.T, cfg.init, z, rng);
            for (std::size_t i = 0; i + 1 < times.size(); ++i) {
                const double t = times[i];
                const double dt = times[i] - times[i + 1];
                std::vector<double> yhat = d.posterior_mean(t, z);
                const double a = dt * (1.0 + cfg.lambda) / (2.0 * t);
                for (std::size_t j = 0; j < dim; ++j) z[j] += a * (yhat[j] - z[j]);
                if (cfg.lambda > 0.0) {
                    const double sd = std::sqrt(cfg.lambda * dt);
                    for (std::size_t j = 0; j < dim; ++j) z[j] += sd * rng.normal();
                }
            }
            for (std::size_t j = 0; j < dim; ++j)
                require(std::isfinite(z[j]), Errc::NonFiniteState,
                        "chain state became non-finite");
            out[static_cast<std::size_t>(c)] = z;
        }
    });
    return out;
}

} // namespace difflab
