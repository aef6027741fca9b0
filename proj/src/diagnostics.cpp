#include "difflab/diagnostics.hpp"

#include <cmath>

#include "difflab/errors.hpp"
#include "difflab/parallel.hpp"

namespace difflab {

ResidualReport fokker_planck_residual(const GaussianMixture& m, double t, double z_min,
                                      double z_max, double dz, double dtime, double tolerance) {
    require(m.dim() == 1, Errc::DimensionUnsupported,
            "Fokker-Planck residual check is one-dimensional");
    require(dz > 0.0 && dtime > 0.0 && z_max > z_min, Errc::InvalidGrid, "bad grid");
    require(t > dtime, Errc::InvalidGrid, "need t > dtime for the central time difference");

    const GaussianMixture p_mid = m.noised(t);
    const GaussianMixture p_lo = m.noised(t - dtime);
    const GaussianMixture p_hi = m.noised(t + dtime);

    const std::int64_t n = static_cast<std::int64_t>(std::floor((z_max - z_min) / dz)) + 1;
    require(n >= 3, Errc::InvalidGrid, "grid too small");

    std::vector<double> resid(static_cast<std::size_t>(n) - 2, 0.0);
    parallel_for(n - 2, 1024, [&](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) {
            const double z = z_min + dz * static_cast<double>(i + 1);
            const double zm[1] = {z - dz}, zc[1] = {z}, zp[1] = {z + dz};
            const double p_c = std::exp(p_mid.log_density(zc));
            const double p_m = std::exp(p_mid.log_density(zm));
            const double p_p = std::exp(p_mid.log_density(zp));
            const double dp_dt =
                (std::exp(p_hi.log_density(zc)) - std::exp(p_lo.log_density(zc))) / (2.0 * dtime);
            const double d2p_dz2 = (p_p - 2.0 * p_c + p_m) / (dz * dz);
            resid[static_cast<std::size_t>(i)] = dp_dt - 0.5 * d2p_dz2;
        }
    });

    ResidualReport rep;
    rep.z_min = z_min;
    rep.z_max = z_max;
    rep.dz = dz;
    rep.t = t;
    rep.dtime = dtime;
    rep.tolerance_used = tolerance;
    double ss = 0.0;
    for (double r : resid) {
        rep.max_abs_residual = std::max(rep.max_abs_residual, std::abs(r));
        ss += r * r;
    }
    rep.rms_residual = std::sqrt(ss / static_cast<double>(resid.size()));
    return rep;
}

ScoreCheck score_fd_check(const GaussianMixture& m, double t, std::span<const double> z,
                          double h) {
    require(t > 0.0, Errc::NonPositiveTime, "t must be > 0");
    require(h > 0.0, Errc::InvalidGrid, "h must be > 0");
    const OracleDenoiser oracle(m);
    const GaussianMixture p_t = m.noised(t);

    ScoreCheck out;
    out.analytic = score(oracle, t, z);
    out.numeric.resize(z.size());
    std::vector<double> probe(z.begin(), z.end());
    for (std::size_t j = 0; j < z.size(); ++j) {
        probe[j] = z[j] + h;
        const double up = p_t.log_density(probe);
        probe[j] = z[j] - h;
        const double dn = p_t.log_density(probe);
        probe[j] = z[j];
        out.numeric[j] = (up - dn) / (2.0 * h);
        out.max_abs_err = std::max(out.max_abs_err, std::abs(out.numeric[j] - out.analytic[j]));
    }
    return out;
}

MomentDeltas compare_to_noised(const GaussianMixture& m, double t,
                               const std::vector<std::vector<double>>& pts) {
    const GaussianMixture target = m.noised(t);
    MomentDeltas d;
    d.empirical = compute_moments(pts);
    d.target_mean = target.population_mean();

    // per-coordinate variance of the noised mixture
    const int dim = target.dim();
    d.target_var.assign(static_cast<std::size_t>(dim), 0.0);
    for (int j = 0; j < dim; ++j) {
        double second = 0.0;
        for (int k = 0; k < target.components(); ++k)
            second += target.weights()[k] *
                      (target.variances()[k] + target.mean(k)[j] * target.mean(k)[j]);
        d.target_var[static_cast<std::size_t>(j)] =
            second - d.target_mean[static_cast<std::size_t>(j)] *
                         d.target_mean[static_cast<std::size_t>(j)];
    }

    d.mass_emp = mode_masses(m, pts);
    d.mass_target = m.weights();

    for (int j = 0; j < dim; ++j) {
        d.max_mean_err = std::max(
            d.max_mean_err, std::abs(d.empirical.mean[static_cast<std::size_t>(j)] -
                                     d.target_mean[static_cast<std::size_t>(j)]));
        d.max_var_rel_err =
            std::max(d.max_var_rel_err,
                     std::abs(d.empirical.var[static_cast<std::size_t>(j)] /
                                  d.target_var[static_cast<std::size_t>(j)] -
                              1.0));
    }
    for (std::size_t k = 0; k < d.mass_emp.size(); ++k)
        d.max_mass_err = std::max(d.max_mass_err, std::abs(d.mass_emp[k] - d.mass_target[k]));
    return d;
}

MomentDeltas flow_equivalence_check(const GaussianMixture& m, double t1, double t2,
                                    std::int64_t n_particles, std::int64_t n_steps,
                                    std::uint64_t seed) {
    require(t1 > 0.0 && t2 >= t1, Errc::InvalidInterval, "need 0 < t1 <= t2");
    const OracleDenoiser oracle(m);
    const std::size_t dim = static_cast<std::size_t>(m.dim());
    const GaussianMixture start = m.noised(t1);

    std::vector<double> times;
    if (t2 > t1) {
        const TimeGrid g = make_grid(t1, t2, n_steps);
        times.assign(g.times.rbegin(), g.times.rend()); // ascending t1 -> t2
    } else {
        times = {t1}; // identity transport
    }

    std::vector<std::vector<double>> pts(static_cast<std::size_t>(n_particles),
                                         std::vector<double>(dim));
    parallel_for(n_particles, 256, [&](std::int64_t b, std::int64_t e) {
        std::vector<double> z(dim);
        for (std::int64_t i = b; i < e; ++i) {
            RngStream rng = derive_stream(seed, "flow-particle", static_cast<std::uint64_t>(i));
            start.sample_into(z, rng);
            for (std::size_t k = 0; k + 1 < times.size(); ++k) {
                const double t = times[k];
                const double dt = times[k + 1] - times[k];
                const auto sc = score(oracle, t, z);
                for (std::size_t j = 0; j < dim; ++j) z[j] += dt * (-0.5) * sc[j];
            }
            pts[static_cast<std::size_t>(i)] = z;
        }
    });
    return compare_to_noised(m, t2, pts);
}

ReverseConsistency reverse_consistency_check(const GaussianMixture& m, const Denoiser& d,
                                             const SamplerConfig& cfg) {
    const PopulationSource src = PopulationSource::from_mixture(m);
    ReverseConsistency out;
    SamplerConfig c = cfg;
    c.lambda = 1.0;
    out.sde = compare_to_noised(m, cfg.grid.t0, sample_population(d, src, c));
    c.lambda = 0.0;
    c.seed = derive_seed(cfg.seed, "reverse-ode");
    out.ode = compare_to_noised(m, cfg.grid.t0, sample_population(d, src, c));
    return out;
}

} // namespace difflab
