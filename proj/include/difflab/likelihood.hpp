#pragma once

#include <cstdint>
#include <span>

#include "difflab/denoiser.hpp"
#include "difflab/gaussian_mixture.hpp"
#include "difflab/reverse_sampler.hpp"
#include "difflab/rng.hpp"

namespace difflab {

enum class TailMode {
    AnalyticTail, // add c/(2T): the exact limit of the numerator over the cut tail
    Truncate,     // stop at T
};

struct QuadratureSpec {
    TimeGrid grid;                   // quadrature nodes (log-uniform in t)
    std::int64_t mc_samples = 10000; // Monte Carlo draws per node
    // draws for the t0 boundary term; <= 0 means 10 * mc_samples (the
    // boundary integrand is closed form, so draws are much cheaper there)
    std::int64_t boundary_samples = 0;
    TailMode tail = TailMode::AnalyticTail;
};

struct LikelihoodReport {
    double integral_term = 0.0; // nats
    double boundary_term = 0.0; // nats
    double tail_term = 0.0;     // nats
    double total_nll = 0.0;     // integral + boundary + tail
    double standard_error = 0.0;
};

struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
};

// Non-variational estimate of -ln pop(y):
//   integral of E_{z(t)|y} ||y - posterior_mean(t,z)||^2 / (2 t^2) over [t0, T]
//   (trapezoid in ln t), plus the t0 boundary term, plus the tail correction.
// Each node uses its own derived stream; nodes are evaluated in parallel and
// the standard error combines per-node variances.
LikelihoodReport nll(const GaussianMixture& m, const Denoiser& d, std::span<const double> y,
                     const QuadratureSpec& spec, std::uint64_t seed);

// Monte Carlo average over z ~ p(z(t0)|y) of -ln[ pop(y) N(z; y, t0 I) / p_t0(z) ],
// every factor in closed form.
double boundary_term(const GaussianMixture& m, std::span<const double> y, double t0,
                     std::int64_t n, RngStream& rng);

// I(y, z(t0)): same quadrature with the inner expectation over joint (y, z(t)),
// i.e. node value mmse(t)/(2 t^2). The t0 argument replaces the grid's lower
// bound; when t0 >= grid.T the whole integral is the tail term.
Estimate mutual_information(const GaussianMixture& m, const Denoiser& d, double t0,
                            const QuadratureSpec& spec, std::uint64_t seed);

// H(pop) as the average of nll over n_y draws y ~ pop.
Estimate entropy_estimate(const GaussianMixture& m, const Denoiser& d, const QuadratureSpec& spec,
                          std::int64_t n_y, std::uint64_t seed);

} // namespace difflab
