#pragma once

// Shared helpers for the test suites: sample statistics and independent
// brute-force oracles the library results are checked against.

#include <cmath>
#include <functional>
#include <vector>

#include "difflab/rng.hpp"

namespace testutil {

struct SampleStats {
    double mean = 0.0;
    double var = 0.0; // unbiased
    double se_mean = 0.0;
    double se_var = 0.0;
    std::size_t n = 0;
};

inline SampleStats stats(const std::vector<double>& xs) {
    SampleStats s;
    s.n = xs.size();
    const double n = static_cast<double>(xs.size());
    for (double x : xs) s.mean += x;
    s.mean /= n;
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double c = x - s.mean;
        m2 += c * c;
        m4 += c * c * c * c;
    }
    const double v = m2 / n;
    s.var = m2 / (n - 1.0);
    s.se_mean = std::sqrt(v / n);
    m4 /= n;
    s.se_var = std::sqrt(std::max(0.0, m4 - v * v) / n);
    return s;
}

inline std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
}

// trapezoid quadrature of f over [a, b] with step h (test-side oracle)
inline double trapezoid(const std::function<double(double)>& f, double a, double b, double h) {
    const std::int64_t n = static_cast<std::int64_t>(std::ceil((b - a) / h));
    double s = 0.5 * (f(a) + f(b));
    for (std::int64_t i = 1; i < n; ++i) s += f(a + h * static_cast<double>(i));
    return s * (b - a) / static_cast<double>(n);
}

// extended-precision log-sum-exp of log terms (reference for tail stability)
inline double logsumexp_ref(const std::vector<double>& log_terms) {
    long double mx = log_terms[0];
    for (double v : log_terms) mx = std::max<long double>(mx, v);
    long double s = 0.0L;
    for (double v : log_terms) s += expl(static_cast<long double>(v) - mx);
    return static_cast<double>(mx + logl(s));
}

} // namespace testutil
