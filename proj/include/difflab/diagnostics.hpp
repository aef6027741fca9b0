#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/gaussian_mixture.hpp"
#include "difflab/reverse_sampler.hpp"
#include "difflab/stats.hpp"

namespace difflab {

// Residual of d p_t / dt = (1/2) d^2 p_t / dz^2 on a uniform z grid, both
// sides from the closed-form noised densities by central differences.
struct ResidualReport {
    double max_abs_residual = 0.0;
    double rms_residual = 0.0;
    double z_min = 0.0, z_max = 0.0, dz = 0.0;
    double t = 0.0, dtime = 0.0;
    double tolerance_used = 0.0;
};

ResidualReport fokker_planck_residual(const GaussianMixture& m, double t, double z_min,
                                      double z_max, double dz, double dtime,
                                      double tolerance = 1e-5);

// Analytic score (posterior-mean identity) against central finite differences
// of ln p_t, per coordinate with step h.
struct ScoreCheck {
    std::vector<double> analytic;
    std::vector<double> numeric;
    double max_abs_err = 0.0;
};

ScoreCheck score_fd_check(const GaussianMixture& m, double t, std::span<const double> z, double h);

// Comparison of an empirical cloud against a closed-form noised mixture.
struct MomentDeltas {
    Moments empirical;
    std::vector<double> target_mean;
    std::vector<double> target_var;    // per-coordinate
    std::vector<double> mass_emp;      // nearest-mean mode masses
    std::vector<double> mass_target;   // component weights
    double max_mean_err = 0.0;         // max_j |mean_j - target_j|
    double max_var_rel_err = 0.0;      // max_j |var_j/target_j - 1|
    double max_mass_err = 0.0;         // max_k |mass_k - w_k|
};

MomentDeltas compare_to_noised(const GaussianMixture& m, double t,
                               const std::vector<std::vector<double>>& pts);

// Transports particles from p_{t1} to p_{t2} with the deterministic velocity
// field dz/dt = -(1/2) * score(t, z) (Euler over a log-uniform grid) and
// compares against the closed-form target p_{t2}.
MomentDeltas flow_equivalence_check(const GaussianMixture& m, double t1, double t2,
                                    std::int64_t n_particles, std::int64_t n_steps,
                                    std::uint64_t seed);

// Runs sample_population at lambda = 1 and lambda = 0 and compares both
// outputs against p_{t0}; the executable form of the time-reversal argument.
struct ReverseConsistency {
    MomentDeltas sde; // lambda = 1
    MomentDeltas ode; // lambda = 0
};

ReverseConsistency reverse_consistency_check(const GaussianMixture& m, const Denoiser& d,
                                             const SamplerConfig& cfg);

} // namespace difflab
