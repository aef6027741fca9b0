#include "difflab/likelihood.hpp"

#include <cmath>

#include "difflab/errors.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

namespace {

struct MeanVar {
    double mean = 0.0;
    double var = 0.0; // variance of the mean estimate
};

// Trapezoid weights in u = ln t over an ascending node list with constant
// spacing du; node values supplied per index.
double trapezoid(const std::vector<double>& node_means, double du) {
    double s = 0.0;
    const std::size_t n = node_means.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        s += w * node_means[i];
    }
    return s * du;
}

double trapezoid_var(const std::vector<double>& node_vars, double du) {
    double s = 0.0;
    const std::size_t n = node_vars.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        s += w * w * du * du * node_vars[i];
    }
    return s;
}

MeanVar boundary_mean_var(const GaussianMixture& m, std::span<const double> y, double t0,
                          std::int64_t n, RngStream& rng) {
    const GaussianMixture noised = m.noised(t0);
    const double log_pop_y = m.log_density(y);
    const double s = std::sqrt(t0);
    const std::size_t d = y.size();
    std::vector<double> z(d);
    double acc = 0.0, acc2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) z[j] = y[j] + s * rng.normal();
        const double v = -(log_pop_y + log_isotropic_normal(z, y, t0) - noised.log_density(z));
        require(std::isfinite(v), Errc::NonFiniteState, "non-finite boundary integrand");
        acc += v;
        acc2 += v * v;
    }
    const double dn = static_cast<double>(n);
    const double mean = acc / dn;
    const double var = std::max(0.0, acc2 / dn - mean * mean);
    return {mean, var / dn};
}

} // namespace

double boundary_term(const GaussianMixture& m, std::span<const double> y, double t0,
                     std::int64_t n, RngStream& rng) {
    require(t0 > 0.0, Errc::NonPositiveTime, "t0 must be > 0");
    require(n >= 1, Errc::InvalidRange, "n must be >= 1");
    return boundary_mean_var(m, y, t0, n, rng).mean;
}

LikelihoodReport nll(const GaussianMixture& m, const Denoiser& d, std::span<const double> y,
                     const QuadratureSpec& spec, std::uint64_t seed) {
    require(static_cast<int>(y.size()) == m.dim(), Errc::DimensionMismatch,
            "probe point has wrong dimension");
    require(spec.mc_samples >= 1, Errc::InvalidRange, "mc_samples must be >= 1");
    const auto& grid = spec.grid;
    require(grid.times.size() >= 2, Errc::InvalidGrid, "quadrature grid has no nodes");

    const std::size_t n_nodes = grid.times.size();
    const double du = std::log(grid.T / grid.t0) / static_cast<double>(grid.n_steps);
    const std::int64_t mc = spec.mc_samples;
    const std::size_t dim = y.size();

    // ascending in t; node i gets its own stream so node evaluation order and
    // thread count cannot change the result
    std::vector<double> node_mean(n_nodes, 0.0), node_var(n_nodes, 0.0);
    parallel_for(static_cast<std::int64_t>(n_nodes), 1, [&](std::int64_t b, std::int64_t e) {
        std::vector<double> z(dim);
        for (std::int64_t i = b; i < e; ++i) {
            const double t = grid.times[n_nodes - 1 - static_cast<std::size_t>(i)];
            RngStream rng = derive_stream(seed, "nll-node", static_cast<std::uint64_t>(i));
            const double s = std::sqrt(t);
            double acc = 0.0, acc2 = 0.0;
            for (std::int64_t j = 0; j < mc; ++j) {
                for (std::size_t c = 0; c < dim; ++c) z[c] = y[c] + s * rng.normal();
                const auto yhat = d.posterior_mean(t, z);
                double err2 = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double ee = y[c] - yhat[c];
                    err2 += ee * ee;
                }
                // integrand in u = ln t carries the Jacobian t
                const double v = err2 / (2.0 * t);
                require(std::isfinite(v), Errc::NonFiniteState, "non-finite integrand");
                acc += v;
                acc2 += v * v;
            }
            const double dn = static_cast<double>(mc);
            const double mean = acc / dn;
            node_mean[static_cast<std::size_t>(i)] = mean;
            node_var[static_cast<std::size_t>(i)] =
                std::max(0.0, acc2 / dn - mean * mean) / dn;
        }
    });

    LikelihoodReport rep;
    rep.integral_term = trapezoid(node_mean, du);
    double se2 = trapezoid_var(node_var, du);

    RngStream brng = derive_stream(seed, "nll-boundary");
    const std::int64_t n_boundary =
        spec.boundary_samples > 0 ? spec.boundary_samples : 10 * mc;
    const MeanVar bt = boundary_mean_var(m, y, grid.t0, n_boundary, brng);
    rep.boundary_term = bt.mean;
    se2 += bt.var;

    if (spec.tail == TailMode::AnalyticTail) {
        const auto mbar = m.population_mean();
        double c = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double dd = y[j] - mbar[j];
            c += dd * dd;
        }
        rep.tail_term = c / (2.0 * grid.T);
    }

    rep.total_nll = rep.integral_term + rep.boundary_term + rep.tail_term;
    rep.standard_error = std::sqrt(se2);
    return rep;
}

Estimate mutual_information(const GaussianMixture& m, const Denoiser& d, double t0,
                            const QuadratureSpec& spec, std::uint64_t seed) {
    require(t0 > 0.0, Errc::NonPositiveTime, "t0 must be > 0");
    require(spec.mc_samples >= 1, Errc::InvalidRange, "mc_samples must be >= 1");
    const double trace_var = m.avg_coord_variance() * m.dim();

    // degenerate quadrature range: everything past t0 is tail
    if (t0 >= spec.grid.T) {
        if (spec.tail == TailMode::AnalyticTail) return {trace_var / (2.0 * t0), 0.0};
        return {0.0, 0.0};
    }

    const TimeGrid grid = make_grid(t0, spec.grid.T, spec.grid.n_steps);
    const std::size_t n_nodes = grid.times.size();
    const double du = std::log(grid.T / grid.t0) / static_cast<double>(grid.n_steps);
    const std::int64_t mc = spec.mc_samples;
    const std::size_t dim = static_cast<std::size_t>(m.dim());

    std::vector<double> node_mean(n_nodes, 0.0), node_var(n_nodes, 0.0);
    parallel_for(static_cast<std::int64_t>(n_nodes), 1, [&](std::int64_t b, std::int64_t e) {
        std::vector<double> yv(dim), z(dim);
        for (std::int64_t i = b; i < e; ++i) {
            const double t = grid.times[n_nodes - 1 - static_cast<std::size_t>(i)];
            RngStream rng = derive_stream(seed, "mi-node", static_cast<std::uint64_t>(i));
            const double s = std::sqrt(t);
            double acc = 0.0, acc2 = 0.0;
            for (std::int64_t j = 0; j < mc; ++j) {
                m.sample_into(yv, rng);
                for (std::size_t c = 0; c < dim; ++c) z[c] = yv[c] + s * rng.normal();
                const auto yhat = d.posterior_mean(t, z);
                double err2 = 0.0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double ee = yv[c] - yhat[c];
                    err2 += ee * ee;
                }
                const double v = err2 / (2.0 * t);
                require(std::isfinite(v), Errc::NonFiniteState, "non-finite integrand");
                acc += v;
                acc2 += v * v;
            }
            const double dn = static_cast<double>(mc);
            const double mean = acc / dn;
            node_mean[static_cast<std::size_t>(i)] = mean;
            node_var[static_cast<std::size_t>(i)] =
                std::max(0.0, acc2 / dn - mean * mean) / dn;
        }
    });

    Estimate est;
    est.value = trapezoid(node_mean, du);
    if (spec.tail == TailMode::AnalyticTail) est.value += trace_var / (2.0 * grid.T);
    est.standard_error = std::sqrt(trapezoid_var(node_var, du));
    return est;
}

Estimate entropy_estimate(const GaussianMixture& m, const Denoiser& d, const QuadratureSpec& spec,
                          std::int64_t n_y, std::uint64_t seed) {
    require(n_y >= 2, Errc::InvalidRange, "n_y must be >= 2");
    std::vector<double> totals(static_cast<std::size_t>(n_y), 0.0);
    parallel_for(n_y, 8, [&](std::int64_t b, std::int64_t e) {
        std::vector<double> y(static_cast<std::size_t>(m.dim()));
        for (std::int64_t i = b; i < e; ++i) {
            RngStream yrng = derive_stream(seed, "entropy-y", static_cast<std::uint64_t>(i));
            m.sample_into(y, yrng);
            const LikelihoodReport rep =
                nll(m, d, y, spec, derive_seed(seed, "entropy-nll", static_cast<std::uint64_t>(i)));
            totals[static_cast<std::size_t>(i)] = rep.total_nll;
        }
    });
    double acc = 0.0, acc2 = 0.0;
    for (double v : totals) {
        acc += v;
        acc2 += v * v;
    }
    const double dn = static_cast<double>(n_y);
    Estimate est;
    est.value = acc / dn;
    const double var = std::max(0.0, acc2 / dn - est.value * est.value);
    est.standard_error = std::sqrt(var / dn);
    return est;
}

} // namespace difflab
