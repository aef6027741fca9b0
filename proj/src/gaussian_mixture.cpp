#include "difflab/gaussian_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "difflab/errors.hpp"

namespace difflab {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112; // ln(2*pi)
}

double log_isotropic_normal(std::span<const double> y, std::span<const double> mu, double var) {
    double q = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - mu[i];
        q += d * d;
    }
    const double d = static_cast<double>(y.size());
    return -0.5 * d * (kLog2Pi + std::log(var)) - 0.5 * q / var;
}

GaussianMixture::GaussianMixture(int dim,
                                 std::vector<double> weights,
                                 std::vector<std::vector<double>> means,
                                 std::vector<double> variances)
    : dim_(dim), weights_(std::move(weights)), base_variances_(std::move(variances)) {
    variances_ = base_variances_;
    require(dim_ >= 1, Errc::DimensionMismatch, "dim must be >= 1");
    const std::size_t k = weights_.size();
    require(k >= 1, Errc::DimensionMismatch, "mixture needs at least one component");
    require(means.size() == k && variances_.size() == k, Errc::DimensionMismatch,
            "weights, means, variances must have equal lengths");

    double sum = 0.0;
    for (double w : weights_) {
        require(w > 0.0 && std::isfinite(w), Errc::NonPositiveWeight, "weights must be > 0");
        sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Errc::WeightSumMismatch,
            "weights sum to " + std::to_string(sum) + ", expected 1");
    for (double& w : weights_) w /= sum;

    for (double v : variances_)
        require(v > 0.0 && std::isfinite(v), Errc::NonPositiveVariance, "variances must be > 0");

    means_.reserve(k * static_cast<std::size_t>(dim_));
    for (const auto& mu : means) {
        require(static_cast<int>(mu.size()) == dim_, Errc::DimensionMismatch,
                "every mean must have length dim");
        means_.insert(means_.end(), mu.begin(), mu.end());
    }

    log_weights_.resize(k);
    cdf_.resize(k);
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        log_weights_[i] = std::log(weights_[i]);
        acc += weights_[i];
        cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
}

double GaussianMixture::log_density(std::span<const double> y) const {
    require(static_cast<int>(y.size()) == dim_, Errc::DimensionMismatch,
            "point has wrong dimension");
    const int k = components();
    double max_term = -INFINITY;
    // two passes: find the max exponent, then accumulate exp(term - max)
    std::vector<double> terms(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        terms[i] = log_weights_[i] + log_isotropic_normal(y, mean(i), variances_[i]);
        max_term = std::max(max_term, terms[i]);
    }
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += std::exp(terms[i] - max_term);
    return max_term + std::log(s);
}

GaussianMixture GaussianMixture::noised(double t) const {
    require(t >= 0.0, Errc::NegativeTime, "noise time must be >= 0");
    GaussianMixture out = *this;
    out.noise_time_ = noise_time_ + t;
    for (std::size_t k = 0; k < variances_.size(); ++k)
        out.variances_[k] = base_variances_[k] + out.noise_time_;
    return out;
}

void GaussianMixture::sample_into(std::span<double> out, RngStream& rng) const {
    int k = 0;
    if (components() > 1) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        k = static_cast<int>(std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1));
    }
    const double sd = std::sqrt(variances_[k]);
    const auto mu = mean(k);
    for (int i = 0; i < dim_; ++i) out[i] = mu[i] + sd * rng.normal();
}

std::vector<std::vector<double>> GaussianMixture::sample(std::int64_t n, RngStream& rng) const {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(dim_)));
    for (auto& row : out) sample_into(row, rng);
    return out;
}

std::vector<double> GaussianMixture::population_mean() const {
    std::vector<double> m(static_cast<std::size_t>(dim_), 0.0);
    for (int k = 0; k < components(); ++k) {
        const auto mu = mean(k);
        for (int i = 0; i < dim_; ++i) m[i] += weights_[k] * mu[i];
    }
    return m;
}

double GaussianMixture::avg_coord_variance() const {
    const auto mbar = population_mean();
    double tr = 0.0;
    for (int k = 0; k < components(); ++k) {
        const auto mu = mean(k);
        double sq = 0.0;
        for (int i = 0; i < dim_; ++i) {
            const double d = mu[i] - mbar[i];
            sq += d * d;
        }
        tr += weights_[k] * (dim_ * variances_[k] + sq);
    }
    return tr / dim_;
}

double GaussianMixture::second_moment_per_coord() const {
    double tr = 0.0;
    for (int k = 0; k < components(); ++k) {
        const auto mu = mean(k);
        double sq = 0.0;
        for (int i = 0; i < dim_; ++i) sq += mu[i] * mu[i];
        tr += weights_[k] * (dim_ * variances_[k] + sq);
    }
    return tr / dim_;
}

PopulationStats PopulationStats::from_mixture(const GaussianMixture& m) {
    return {m.population_mean(), m.avg_coord_variance()};
}

PopulationStats PopulationStats::from_samples(const std::vector<std::vector<double>>& ys) {
    PopulationStats s;
    if (ys.empty()) fail(Errc::InvalidConfig, "empty sample set");
    const std::size_t d = ys[0].size();
    s.mean.assign(d, 0.0);
    for (const auto& y : ys)
        for (std::size_t i = 0; i < d; ++i) s.mean[i] += y[i];
    for (double& v : s.mean) v /= static_cast<double>(ys.size());
    double tr = 0.0;
    for (const auto& y : ys)
        for (std::size_t i = 0; i < d; ++i) {
            const double dd = y[i] - s.mean[i];
            tr += dd * dd;
        }
    s.avg_coord_variance = tr / (static_cast<double>(ys.size()) * static_cast<double>(d));
    return s;
}

} // namespace difflab
