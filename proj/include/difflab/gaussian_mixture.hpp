#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "difflab/rng.hpp"

namespace difflab {

// Finite isotropic Gaussian mixture: weights w_k, means mu_k, per-component
// scalar variances v_k. Closed under the forward diffusion: adding noise of
// variance t shifts every v_k by t and nothing else. Immutable after
// construction; safe to share across threads.
class GaussianMixture {
public:
    GaussianMixture(int dim,
                    std::vector<double> weights,
                    std::vector<std::vector<double>> means,
                    std::vector<double> variances);

    int dim() const noexcept { return dim_; }
    int components() const noexcept { return static_cast<int>(weights_.size()); }

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& variances() const noexcept { return variances_; }
    std::span<const double> mean(int k) const {
        return {means_.data() + static_cast<std::size_t>(k) * dim_, static_cast<std::size_t>(dim_)};
    }

    // ln pop(y), log-sum-exp stabilized
    double log_density(std::span<const double> y) const;

    // exact time-t marginal p_t: variances v_k + t, everything else unchanged
    GaussianMixture noised(double t) const;

    // i.i.d. draws: categorical component, then isotropic Gaussian
    std::vector<std::vector<double>> sample(std::int64_t n, RngStream& rng) const;
    void sample_into(std::span<double> out, RngStream& rng) const; // one draw

    // population mean sum_k w_k mu_k
    std::vector<double> population_mean() const;
    // average per-coordinate central variance: (1/d) * trace of the central
    // second moment (used by the moment-matched wide-Gaussian init)
    double avg_coord_variance() const;
    // (1/d) * E||y||^2, the scale check the CLI warns about
    double second_moment_per_coord() const;

private:
    int dim_;
    std::vector<double> weights_;
    std::vector<double> means_; // row-major K x dim
    // effective variances are base + noise_time; keeping the decomposition
    // makes noised(s).noised(t) and noised(s+t) identical field by field
    std::vector<double> base_variances_;
    double noise_time_ = 0.0;
    std::vector<double> variances_;
    std::vector<double> log_weights_;
    std::vector<double> cdf_; // cumulative weights for sampling
};

// log N(y; mu, var*I) for isotropic covariance
double log_isotropic_normal(std::span<const double> y, std::span<const double> mu, double var);

// Summary statistics a sampler can be initialized from when the population is
// only known through samples.
struct PopulationStats {
    std::vector<double> mean;
    double avg_coord_variance = 0.0;

    static PopulationStats from_mixture(const GaussianMixture& m);
    static PopulationStats from_samples(const std::vector<std::vector<double>>& ys);
};

} // namespace difflab
