#include "difflab/trained_denoiser.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

// y[B x O] = x[B x I] . W^T + b, W row-major O x I
void affine_forward(const double* x, int B, int I, const double* W, const double* b, int O,
                    double* y) {
    for (int r = 0; r < B; ++r) {
        const double* xr = x + static_cast<std::size_t>(r) * I;
        double* yr = y + static_cast<std::size_t>(r) * O;
        for (int o = 0; o < O; ++o) {
            const double* w = W + static_cast<std::size_t>(o) * I;
            double acc = b[o];
            for (int i = 0; i < I; ++i) acc += xr[i] * w[i];
            yr[o] = acc;
        }
    }
}

// dx[B x I] = dy[B x O] . W ; gW[O x I] += dy^T . x ; gb[O] += column sums
void affine_backward(const double* x, const double* dy, int B, int I, int O, const double* W,
                     double* dx, double* gW, double* gb) {
    for (int r = 0; r < B; ++r) {
        const double* xr = x + static_cast<std::size_t>(r) * I;
        const double* dyr = dy + static_cast<std::size_t>(r) * O;
        double* dxr = dx ? dx + static_cast<std::size_t>(r) * I : nullptr;
        if (dxr)
            for (int i = 0; i < I; ++i) dxr[i] = 0.0;
        for (int o = 0; o < O; ++o) {
            const double g = dyr[o];
            gb[o] += g;
            double* gwo = gW + static_cast<std::size_t>(o) * I;
            for (int i = 0; i < I; ++i) gwo[i] += g * xr[i];
            if (dxr) {
                const double* w = W + static_cast<std::size_t>(o) * I;
                for (int i = 0; i < I; ++i) dxr[i] += g * w[i];
            }
        }
    }
}

} // namespace

void TrainedDenoiser::init_params(std::uint64_t seed) {
    RngStream rng = derive_stream(seed, "init");
    const std::size_t L = dims_.size() - 1;
    weights_.resize(L);
    biases_.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        const int I = dims_[l], O = dims_[l + 1];
        const double limit = std::sqrt(6.0 / (I + O));
        weights_[l].resize(static_cast<std::size_t>(I) * O);
        for (double& w : weights_[l]) w = limit * (2.0 * rng.uniform() - 1.0);
        biases_[l].assign(static_cast<std::size_t>(O), 0.0);
    }
}

void TrainedDenoiser::check_finite() const {
    for (const auto& w : weights_)
        for (double v : w)
            require(std::isfinite(v), Errc::NonFiniteLoss, "non-finite network parameter");
    for (const auto& b : biases_)
        for (double v : b)
            require(std::isfinite(v), Errc::NonFiniteLoss, "non-finite network parameter");
}

void TrainedDenoiser::forward_row(std::span<const double> x, std::vector<double>& out) const {
    thread_local std::vector<double> a, s;
    a.assign(x.begin(), x.end());
    const std::size_t L = weights_.size();
    for (std::size_t l = 0; l < L; ++l) {
        const int I = dims_[l], O = dims_[l + 1];
        s.assign(static_cast<std::size_t>(O), 0.0);
        affine_forward(a.data(), 1, I, weights_[l].data(), biases_[l].data(), O, s.data());
        if (l + 1 < L)
            for (double& v : s) v = std::tanh(v);
        a = s;
    }
    out = a;
}

std::vector<double> TrainedDenoiser::posterior_mean(double t, std::span<const double> z) const {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(static_cast<int>(z.size()) == dim(), Errc::DimensionMismatch,
            "point has wrong dimension");
    const double scale = 1.0 / std::sqrt(1.0 + t);
    std::vector<double> x(z.size() + 1);
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * scale;
    x.back() = std::log(t);
    std::vector<double> out;
    forward_row(x, out);
    return out;
}

template <class DrawY>
TrainedDenoiser TrainedDenoiser::train_impl(int dim, DrawY&& draw_y, const TrainConfig& cfg) {
    require(cfg.t0 > 0.0 && cfg.T > cfg.t0, Errc::InvalidRange, "need 0 < t0 < T");
    require(cfg.batch >= 1 && cfg.steps >= 0, Errc::InvalidRange, "bad batch/steps");
    require(cfg.arch.size() >= 2, Errc::InvalidConfig, "arch needs input and output layers");
    require(cfg.arch.front() == dim + 1, Errc::InvalidConfig,
            "input layer width must be dim + 1 (scaled z plus ln t)");
    require(cfg.arch.back() == dim, Errc::InvalidConfig, "output layer width must equal dim");

    TrainedDenoiser net;
    net.dims_ = cfg.arch;
    net.t0_ = cfg.t0;
    net.T_ = cfg.T;
    net.init_params(cfg.seed);

    const std::size_t L = net.dims_.size() - 1;
    const int B = cfg.batch;
    const double ln_t0 = std::log(cfg.t0), ln_T = std::log(cfg.T);

    // per-layer batched activations and deltas
    std::vector<std::vector<double>> acts(L + 1), deltas(L + 1);
    for (std::size_t l = 0; l <= L; ++l) {
        acts[l].assign(static_cast<std::size_t>(B) * net.dims_[l], 0.0);
        deltas[l].assign(static_cast<std::size_t>(B) * net.dims_[l], 0.0);
    }
    std::vector<std::vector<double>> gW(L), gb(L), vW(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        gW[l].assign(net.weights_[l].size(), 0.0);
        gb[l].assign(net.biases_[l].size(), 0.0);
        vW[l].assign(net.weights_[l].size(), 0.0);
        vb[l].assign(net.biases_[l].size(), 0.0);
    }
    std::vector<double> targets(static_cast<std::size_t>(B) * dim);
    std::vector<double> y(static_cast<std::size_t>(dim));

    RngStream rng = derive_stream(cfg.seed, "train");
    double window_loss = 0.0;
    std::int64_t window_n = 0;

    for (std::int64_t step = 0; step < cfg.steps; ++step) {
        // assemble batch
        for (int r = 0; r < B; ++r) {
            const double t = std::exp(ln_t0 + (ln_T - ln_t0) * rng.uniform());
            draw_y(rng, y.data());
            const double s = std::sqrt(t);
            const double scale = 1.0 / std::sqrt(1.0 + t);
            double* x = acts[0].data() + static_cast<std::size_t>(r) * (dim + 1);
            for (int j = 0; j < dim; ++j) {
                const double z = y[j] + s * rng.normal();
                x[j] = z * scale;
                targets[static_cast<std::size_t>(r) * dim + j] = y[j];
            }
            x[dim] = std::log(t);
        }

        // forward
        for (std::size_t l = 0; l < L; ++l) {
            affine_forward(acts[l].data(), B, net.dims_[l], net.weights_[l].data(),
                           net.biases_[l].data(), net.dims_[l + 1], acts[l + 1].data());
            if (l + 1 < L)
                for (double& v : acts[l + 1]) v = std::tanh(v);
        }

        // loss and output delta: mean over batch of ||yhat - y||^2
        double loss = 0.0;
        {
            const double inv_b = 1.0 / static_cast<double>(B);
            double* dl = deltas[L].data();
            const double* out = acts[L].data();
            for (std::size_t i = 0; i < targets.size(); ++i) {
                const double e = out[i] - targets[i];
                loss += e * e;
                dl[i] = 2.0 * e * inv_b;
            }
            loss *= inv_b;
        }
        require(std::isfinite(loss), Errc::NonFiniteLoss, "training loss became non-finite");
        window_loss += loss;
        ++window_n;
        if ((step + 1) % cfg.log_every == 0 || step + 1 == cfg.steps) {
            net.loss_log_.emplace_back(step + 1, window_loss / static_cast<double>(window_n));
            window_loss = 0.0;
            window_n = 0;
        }

        // backward
        for (std::size_t l = L; l-- > 0;) {
            std::fill(gW[l].begin(), gW[l].end(), 0.0);
            std::fill(gb[l].begin(), gb[l].end(), 0.0);
            affine_backward(acts[l].data(), deltas[l + 1].data(), B, net.dims_[l],
                            net.dims_[l + 1], net.weights_[l].data(),
                            l > 0 ? deltas[l].data() : nullptr, gW[l].data(), gb[l].data());
            if (l > 0) {
                double* d = deltas[l].data();
                const double* a = acts[l].data();
                for (std::size_t i = 0; i < deltas[l].size(); ++i) d[i] *= 1.0 - a[i] * a[i];
            }
        }

        // SGD with momentum, fixed step size
        for (std::size_t l = 0; l < L; ++l) {
            double* w = net.weights_[l].data();
            double* v = vW[l].data();
            const double* g = gW[l].data();
            for (std::size_t i = 0; i < net.weights_[l].size(); ++i) {
                v[i] = cfg.momentum * v[i] - cfg.learning_rate * g[i];
                w[i] += v[i];
            }
            double* bb = net.biases_[l].data();
            double* vb_ = vb[l].data();
            const double* gb_ = gb[l].data();
            for (std::size_t i = 0; i < net.biases_[l].size(); ++i) {
                vb_[i] = cfg.momentum * vb_[i] - cfg.learning_rate * gb_[i];
                bb[i] += vb_[i];
            }
        }
    }

    net.train_steps_ = cfg.steps;
    net.final_loss_ = net.loss_log_.empty() ? 0.0 : net.loss_log_.back().second;
    if (cfg.steps == 0) {
        // untrained model is still a valid denoiser; record a smoke loss
        net.final_loss_ = 0.0;
    }
    net.check_finite();
    return net;
}

TrainedDenoiser TrainedDenoiser::train(const GaussianMixture& pop, const TrainConfig& cfg) {
    return train_impl(
        pop.dim(),
        [&pop](RngStream& rng, double* out) {
            pop.sample_into({out, static_cast<std::size_t>(pop.dim())}, rng);
        },
        cfg);
}

TrainedDenoiser TrainedDenoiser::train(const std::vector<std::vector<double>>& samples,
                                       const TrainConfig& cfg) {
    require(!samples.empty(), Errc::InvalidConfig, "empty training sample set");
    const int dim = static_cast<int>(samples[0].size());
    const std::size_t n = samples.size();
    return train_impl(
        dim,
        [&samples, n, dim](RngStream& rng, double* out) {
            const std::size_t i =
                std::min(n - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(n)));
            for (int j = 0; j < dim; ++j) out[j] = samples[i][static_cast<std::size_t>(j)];
        },
        cfg);
}

void TrainedDenoiser::save(const std::string& path) const {
    nlohmann::json j;
    j["format"] = "difflab-denoiser";
    j["version"] = 1;
    j["dim"] = dim();
    j["arch"] = dims_;
    j["activation"] = "tanh";
    j["t_range"] = {t0_, T_};
    j["weights"] = weights_;
    j["biases"] = biases_;
    j["train_steps"] = train_steps_;
    j["final_loss"] = final_loss_;
    std::ofstream f(path);
    require(f.good(), Errc::InvalidConfig, "cannot open " + path + " for writing");
    f << j.dump(2) << "\n";
}

TrainedDenoiser TrainedDenoiser::load(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), Errc::InvalidConfig, "cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidConfig, "bad model file: " + std::string(e.what()));
    }
    TrainedDenoiser net;
    try {
        require(j.at("format") == "difflab-denoiser", Errc::InvalidConfig, "unknown model format");
        require(j.at("activation") == "tanh", Errc::InvalidConfig, "unknown activation");
        net.dims_ = j.at("arch").get<std::vector<int>>();
        net.weights_ = j.at("weights").get<std::vector<std::vector<double>>>();
        net.biases_ = j.at("biases").get<std::vector<std::vector<double>>>();
        net.t0_ = j.at("t_range").at(0).get<double>();
        net.T_ = j.at("t_range").at(1).get<double>();
        net.train_steps_ = j.value("train_steps", std::int64_t{0});
        net.final_loss_ = j.value("final_loss", 0.0);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::InvalidConfig, "bad model file: " + std::string(e.what()));
    }
    require(net.dims_.size() >= 2, Errc::InvalidConfig, "bad arch");
    require(net.weights_.size() == net.dims_.size() - 1 &&
                net.biases_.size() == net.dims_.size() - 1,
            Errc::InvalidConfig, "parameter count does not match arch");
    for (std::size_t l = 0; l + 1 < net.dims_.size(); ++l) {
        const std::size_t expect =
            static_cast<std::size_t>(net.dims_[l]) * static_cast<std::size_t>(net.dims_[l + 1]);
        require(net.weights_[l].size() == expect, Errc::InvalidConfig, "bad weight matrix size");
        require(net.biases_[l].size() == static_cast<std::size_t>(net.dims_[l + 1]),
                Errc::InvalidConfig, "bad bias size");
    }
    net.check_finite();
    return net;
}

} // namespace difflab
