#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "difflab/rng.hpp"

namespace difflab {

// One discrete Euler trajectory of the forward diffusion: states[n] = z(n*dt).
struct Path {
    double dt = 0.0;
    std::vector<std::vector<double>> states;
};

// Direct jump to time t: z(t) = y + sqrt(t) * delta, delta ~ N(0, I).
std::vector<double> sample_zt(std::span<const double> y, double t, RngStream& rng);

// states[0] = y; states[n+1] = states[n] + sqrt(dt) * eps_n.
Path simulate_path(std::span<const double> y, double dt, std::int64_t n_steps, RngStream& rng);

// Empirical check of the conditional reversal law. Simulates n pairs
// (z(t-dt), z(t)) given y and regresses z(t-dt) against the predicted
// conditional mean z(t) + dt*(y - z(t))/t. The residual mean should vanish
// and the residual per-coordinate variance should equal dt*(1 - dt/t), the
// exact bivariate-Gaussian value (dt to leading order).
struct ReversalCheck {
    std::vector<double> empirical_mean;    // mean of z(t-dt) draws
    std::vector<double> predicted_mean;    // mean of z(t) + dt*(y - z(t))/t
    std::vector<double> residual_variance; // per-coordinate variance of the residual
    std::vector<double> residual_se;       // standard error of the residual mean
    double predicted_variance = 0.0;       // dt*(1 - dt/t)
};

ReversalCheck conditional_reversal_moments(std::span<const double> y, double t, double dt,
                                           std::int64_t n, RngStream& rng);

} // namespace difflab
