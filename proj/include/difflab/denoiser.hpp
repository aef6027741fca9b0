#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "difflab/gaussian_mixture.hpp"
#include "difflab/rng.hpp"

namespace difflab {

// Behavioral contract: anything that maps (t, z) to an estimate of the
// posterior mean E[y | z(t) = z]. posterior_mean is pure and callable
// concurrently.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual int dim() const = 0;
    virtual std::vector<double> posterior_mean(double t, std::span<const double> z) const = 0;
};

// Exact posterior mean under a Gaussian-mixture population. With responsibilities
//   r_k(z,t) \propto w_k N(z; mu_k, (v_k + t) I)
// and per-component conjugate posterior means
//   m_k(z,t) = (t mu_k + v_k z) / (v_k + t),
// the posterior mean is sum_k r_k m_k. Responsibilities are computed in log
// space.
class OracleDenoiser final : public Denoiser {
public:
    explicit OracleDenoiser(GaussianMixture m) : m_(std::move(m)) {}

    int dim() const override { return m_.dim(); }
    std::vector<double> posterior_mean(double t, std::span<const double> z) const override;

    const GaussianMixture& mixture() const noexcept { return m_; }

private:
    GaussianMixture m_;
};

// score(t, z) = grad_z ln p_t(z) = (posterior_mean(t, z) - z) / t
std::vector<double> score(const Denoiser& d, double t, std::span<const double> z);

// Monte Carlo estimate of E_{y, z(t)} ||y - posterior_mean(t, z)||^2 over n
// joint draws y ~ pop, z = y + sqrt(t) delta.
double mmse(const GaussianMixture& m, const Denoiser& d, double t, std::int64_t n, RngStream& rng);

} // namespace difflab
