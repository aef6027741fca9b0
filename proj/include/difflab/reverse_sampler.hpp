#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/gaussian_mixture.hpp"
#include "difflab/rng.hpp"

namespace difflab {

// Log-uniform discretization of [t0, T]: times[i] = T * (t0/T)^(i/n_steps),
// strictly decreasing from T to t0 with a constant ratio.
struct TimeGrid {
    double t0 = 0.0;
    double T = 0.0;
    std::int64_t n_steps = 0;
    std::vector<double> times;
};

TimeGrid make_grid(double t0, double T, std::int64_t n_steps);

enum class InitMode {
    ExactNoised,  // draw z(T) from the exact noised mixture p_T
    WideGaussian, // draw z(T) from N(pop mean, (s^2 + T) I), moment-matched
};

struct SamplerConfig {
    TimeGrid grid;
    double lambda = 1.0;
    std::int64_t n_chains = 1;
    std::uint64_t seed = 0;
    InitMode init = InitMode::ExactNoised;
};

// Where the reverse process starts from. ExactNoised needs the mixture itself;
// WideGaussian only needs summary stats, which is all a trained-denoiser setup
// has when the population is known through samples.
struct PopulationSource {
    std::optional<GaussianMixture> mixture;
    PopulationStats stats;

    static PopulationSource from_mixture(GaussianMixture m) {
        PopulationSource s;
        s.stats = PopulationStats::from_mixture(m);
        s.mixture = std::move(m);
        return s;
    }
    static PopulationSource from_stats(PopulationStats st) {
        PopulationSource s;
        s.stats = std::move(st);
        return s;
    }
};

std::vector<std::vector<double>> init_sample(const PopulationSource& src, double T, InitMode mode,
                                             std::int64_t n, RngStream& rng);

// Deterministic part of a generalized reverse step:
//   z + dt * (1+lambda)/2 * (posterior_mean(t,z) - z) / t
std::vector<double> reverse_drift(const Denoiser& d, std::span<const double> z, double t,
                                  double dt, double lambda);

// One Euler-Maruyama step of the reverse SDE: drift (yhat - z)/t, noise sd sqrt(dt).
std::vector<double> reverse_sde_step(const Denoiser& d, std::span<const double> z, double t,
                                     double dt, RngStream& rng);

// One Euler step of the deterministic reverse process: drift (yhat - z)/(2t).
std::vector<double> reverse_ode_step(const Denoiser& d, std::span<const double> z, double t,
                                     double dt);

// One step of the lambda family: drift scaled by (1+lambda)/2, noise variance
// lambda*dt. lambda = 0 is the ODE step, lambda = 1 the SDE step.
std::vector<double> reverse_lambda_step(const Denoiser& d, std::span<const double> z, double t,
                                        double dt, double lambda, RngStream& rng);

// Integrates the lambda family down the grid: chains start at T via the init
// mode and step with dt_i = times[i] - times[i+1], drift evaluated at times[i].
// Chains run in parallel on per-chain counter-derived streams; the output is
// independent of the thread schedule. Throws NonFiniteState if a state goes
// non-finite (no clamping).
std::vector<std::vector<double>> sample_population(const Denoiser& d, const PopulationSource& src,
                                                   const SamplerConfig& cfg);

} // namespace difflab
