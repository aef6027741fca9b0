#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/gaussian_mixture.hpp"

namespace difflab {

struct TrainConfig {
    std::vector<int> arch;   // layer widths incl. input (dim+1) and output (dim)
    double t0 = 1e-3;        // t sampled log-uniform on [t0, T]
    double T = 400.0;
    std::int64_t steps = 200000;
    int batch = 128;
    double learning_rate = 3e-3;
    double momentum = 0.9;
    std::uint64_t seed = 0;
    std::int64_t log_every = 1000;
};

// Fully-connected tanh regressor trained to predict y from the scaled noisy
// observation. The network consumes (z / sqrt(1+t), ln t) so inputs stay at
// scale one across the whole t range, and implements the denoiser contract as
//   posterior_mean(t, z) = net(z / sqrt(1+t), ln t).
class TrainedDenoiser final : public Denoiser {
public:
    // training examples (t, z, y): t log-uniform on [t0, T], y from the data
    // source, z = y + sqrt(t) * delta; plain SGD with momentum on the mean
    // squared error
    static TrainedDenoiser train(const GaussianMixture& pop, const TrainConfig& cfg);
    static TrainedDenoiser train(const std::vector<std::vector<double>>& samples,
                                 const TrainConfig& cfg);

    int dim() const override { return dims_.back(); }
    std::vector<double> posterior_mean(double t, std::span<const double> z) const override;

    // JSON file with layer sizes and row-major parameter arrays; layout
    // documented in docs/model-format.md
    void save(const std::string& path) const;
    static TrainedDenoiser load(const std::string& path);

    const std::vector<int>& arch() const noexcept { return dims_; }
    double t0() const noexcept { return t0_; }
    double T() const noexcept { return T_; }
    double final_loss() const noexcept { return final_loss_; }
    std::int64_t train_steps() const noexcept { return train_steps_; }
    const std::vector<std::pair<std::int64_t, double>>& loss_log() const noexcept {
        return loss_log_;
    }

private:
    TrainedDenoiser() = default;

    template <class DrawY>
    static TrainedDenoiser train_impl(int dim, DrawY&& draw_y, const TrainConfig& cfg);

    void init_params(std::uint64_t seed);
    void forward_row(std::span<const double> x, std::vector<double>& out) const;
    void check_finite() const;

    std::vector<int> dims_;
    std::vector<std::vector<double>> weights_; // per layer, row-major out x in
    std::vector<std::vector<double>> biases_;  // per layer
    double t0_ = 0.0, T_ = 0.0;
    double final_loss_ = 0.0;
    std::int64_t train_steps_ = 0;
    std::vector<std::pair<std::int64_t, double>> loss_log_; // (step, window-avg loss)
};

} // namespace difflab
