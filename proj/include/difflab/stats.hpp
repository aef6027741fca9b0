#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "difflab/gaussian_mixture.hpp"

namespace difflab {

// Per-coordinate sample mean and (unbiased) variance, plus standard errors.
struct Moments {
    std::vector<double> mean;
    std::vector<double> var;
    std::vector<double> mean_se;
    std::vector<double> var_se;
    std::int64_t n = 0;
};

inline Moments compute_moments(const std::vector<std::vector<double>>& pts) {
    Moments m;
    if (pts.empty()) return m;
    const std::size_t d = pts[0].size();
    const double n = static_cast<double>(pts.size());
    m.n = static_cast<std::int64_t>(pts.size());
    m.mean.assign(d, 0.0);
    m.var.assign(d, 0.0);
    m.mean_se.assign(d, 0.0);
    m.var_se.assign(d, 0.0);
    for (const auto& p : pts)
        for (std::size_t j = 0; j < d; ++j) m.mean[j] += p[j];
    for (std::size_t j = 0; j < d; ++j) m.mean[j] /= n;
    std::vector<double> m4(d, 0.0);
    for (const auto& p : pts)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = p[j] - m.mean[j];
            const double c2 = c * c;
            m.var[j] += c2;
            m4[j] += c2 * c2;
        }
    for (std::size_t j = 0; j < d; ++j) {
        const double v = m.var[j] / n;
        m4[j] /= n;
        m.var[j] = m.var[j] / (n - 1.0);
        m.mean_se[j] = std::sqrt(v / n);
        // SE of the sample variance from the fourth central moment
        m.var_se[j] = std::sqrt(std::max(0.0, m4[j] - v * v) / n);
    }
    return m;
}

// Fraction of points whose nearest component mean is component k.
inline std::vector<double> mode_masses(const GaussianMixture& m,
                                       const std::vector<std::vector<double>>& pts) {
    std::vector<double> mass(static_cast<std::size_t>(m.components()), 0.0);
    if (pts.empty()) return mass;
    for (const auto& p : pts) {
        int best = 0;
        double best_d = INFINITY;
        for (int k = 0; k < m.components(); ++k) {
            const auto mu = m.mean(k);
            double dd = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double diff = p[j] - mu[j];
                dd += diff * diff;
            }
            if (dd < best_d) {
                best_d = dd;
                best = k;
            }
        }
        mass[static_cast<std::size_t>(best)] += 1.0;
    }
    for (double& v : mass) v /= static_cast<double>(pts.size());
    return mass;
}

} // namespace difflab
