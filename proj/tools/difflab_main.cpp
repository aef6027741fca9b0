// difflab: diffusion-model laboratory over Gaussian-mixture populations.
// Subcommands: sample | nll | mi | entropy | train | check.
// Every run is reproducible: one 64-bit root seed, per-module streams derived
// by labeled splitting, outputs byte-identical across reruns (wall time aside).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "difflab/denoiser.hpp"
#include "difflab/diagnostics.hpp"
#include "difflab/errors.hpp"
#include "difflab/forward_process.hpp"
#include "difflab/gaussian_mixture.hpp"
#include "difflab/likelihood.hpp"
#include "difflab/parallel.hpp"
#include "difflab/reverse_sampler.hpp"
#include "difflab/stats.hpp"
#include "difflab/trained_denoiser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace difflab;

namespace {

// ---------------------------------------------------------------- config

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            fail(Errc::InvalidConfig, "unknown key '" + it.key() + "' in " + where);
}

struct PopulationConfig {
    std::optional<GaussianMixture> mixture;
    std::vector<std::vector<double>> samples;
    std::string samples_path;

    bool loaded() const { return mixture.has_value() || !samples.empty(); }
};

std::vector<std::vector<double>> read_samples_csv(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), Errc::InvalidConfig, "cannot open samples file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool drop_first_col = false;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("chain", 0) == 0 || line.rfind("x0", 0) == 0) {
                drop_first_col = line.rfind("chain", 0) == 0;
                continue; // header
            }
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (drop_first_col && !row.empty()) row.erase(row.begin());
        if (!rows.empty() && row.size() != rows.front().size())
            fail(Errc::InvalidConfig, "ragged samples file " + path);
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), Errc::InvalidConfig, "samples file " + path + " is empty");
    return rows;
}

PopulationConfig parse_population(const json& j) {
    PopulationConfig pc;
    check_keys(j, "population", {"weights", "means", "variances", "samples", "dim"});
    if (j.contains("samples")) {
        pc.samples_path = j.at("samples").get<std::string>();
        pc.samples = read_samples_csv(pc.samples_path);
        return pc;
    }
    require(j.contains("weights") && j.contains("means") && j.contains("variances"),
            Errc::InvalidConfig, "population needs weights/means/variances or a samples path");
    auto weights = j.at("weights").get<std::vector<double>>();
    auto means = j.at("means").get<std::vector<std::vector<double>>>();
    auto variances = j.at("variances").get<std::vector<double>>();
    int dim = j.value("dim", means.empty() ? 0 : static_cast<int>(means[0].size()));
    pc.mixture = GaussianMixture(dim, std::move(weights), std::move(means), std::move(variances));
    return pc;
}

struct RunConfig {
    PopulationConfig population;
    // sampler grid
    double grid_t0 = 1e-3, grid_T = 400.0;
    std::int64_t grid_steps = 256;
    // sampler
    double lambda = 1.0;
    std::int64_t chains = 100000;
    std::string init = "auto"; // auto | exact-noised | wide-gaussian
    // quadrature
    double quad_t0 = 1e-3, quad_T = 1000.0;
    std::int64_t quad_nodes = 200;
    std::int64_t mc_samples = 10000;
    std::int64_t boundary_samples = 0; // <= 0: 10 * mc_samples
    std::string tail = "analytic";
    // training
    std::vector<int> arch;
    std::int64_t train_steps = 200000;
    int batch = 128;
    double learning_rate = 3e-3;
    double momentum = 0.9;
    double train_t0 = 1e-3, train_T = 400.0;
    std::int64_t log_every = 1000;
    // entropy
    std::int64_t entropy_n_y = 10000;
    std::int64_t entropy_mc = 200;
    // diagnostics tolerances
    double score_tol = 1e-6;
    double fp_tol = 1e-5;
    double mean_tol = 0.02;
    double var_rel_tol = 0.02;
    double mass_tol = 0.01;
    // common
    std::string denoiser_spec = "oracle";
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;

    json echo; // resolved values, written into every report
};

RunConfig load_config(const std::string& path) {
    RunConfig c;
    if (path.empty()) return c;
    std::ifstream f(path);
    require(f.good(), Errc::InvalidConfig, "cannot open config " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        fail(Errc::InvalidConfig, "bad config JSON: " + std::string(e.what()));
    }
    check_keys(j, "config",
               {"population", "grid", "sampler", "quadrature", "training", "entropy",
                "diagnostics", "denoiser", "seed", "out", "threads"});
    if (j.contains("population")) c.population = parse_population(j.at("population"));
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        check_keys(g, "grid", {"t0", "T", "steps"});
        c.grid_t0 = g.value("t0", c.grid_t0);
        c.grid_T = g.value("T", c.grid_T);
        c.grid_steps = g.value("steps", c.grid_steps);
    }
    if (j.contains("sampler")) {
        const auto& s = j.at("sampler");
        check_keys(s, "sampler", {"lambda", "chains", "init"});
        c.lambda = s.value("lambda", c.lambda);
        c.chains = s.value("chains", c.chains);
        c.init = s.value("init", c.init);
    }
    if (j.contains("quadrature")) {
        const auto& q = j.at("quadrature");
        check_keys(q, "quadrature", {"t0", "T", "nodes", "mc_samples", "boundary_samples", "tail"});
        c.quad_t0 = q.value("t0", c.quad_t0);
        c.quad_T = q.value("T", c.quad_T);
        c.quad_nodes = q.value("nodes", c.quad_nodes);
        c.mc_samples = q.value("mc_samples", c.mc_samples);
        c.boundary_samples = q.value("boundary_samples", c.boundary_samples);
        c.tail = q.value("tail", c.tail);
    }
    if (j.contains("training")) {
        const auto& t = j.at("training");
        check_keys(t, "training",
                   {"arch", "steps", "batch", "learning_rate", "momentum", "t0", "T", "log_every"});
        if (t.contains("arch")) c.arch = t.at("arch").get<std::vector<int>>();
        c.train_steps = t.value("steps", c.train_steps);
        c.batch = t.value("batch", c.batch);
        c.learning_rate = t.value("learning_rate", c.learning_rate);
        c.momentum = t.value("momentum", c.momentum);
        c.train_t0 = t.value("t0", c.train_t0);
        c.train_T = t.value("T", c.train_T);
        c.log_every = t.value("log_every", c.log_every);
    }
    if (j.contains("entropy")) {
        const auto& e = j.at("entropy");
        check_keys(e, "entropy", {"n_y", "mc_samples"});
        c.entropy_n_y = e.value("n_y", c.entropy_n_y);
        c.entropy_mc = e.value("mc_samples", c.entropy_mc);
    }
    if (j.contains("diagnostics")) {
        const auto& d = j.at("diagnostics");
        check_keys(d, "diagnostics",
                   {"score_tol", "fp_tol", "mean_tol", "var_rel_tol", "mass_tol"});
        c.score_tol = d.value("score_tol", c.score_tol);
        c.fp_tol = d.value("fp_tol", c.fp_tol);
        c.mean_tol = d.value("mean_tol", c.mean_tol);
        c.var_rel_tol = d.value("var_rel_tol", c.var_rel_tol);
        c.mass_tol = d.value("mass_tol", c.mass_tol);
    }
    c.denoiser_spec = j.value("denoiser", c.denoiser_spec);
    c.seed = j.value("seed", c.seed);
    c.out_dir = j.value("out", c.out_dir);
    c.threads = j.value("threads", c.threads);
    return c;
}

// ---------------------------------------------------------------- helpers

const GaussianMixture& require_mixture(const RunConfig& c, const std::string& what) {
    require(c.population.loaded(), Errc::InvalidConfig, "missing population spec");
    require(c.population.mixture.has_value(), Errc::InvalidConfig,
            what + " needs an explicit mixture population, not a samples file");
    return *c.population.mixture;
}

std::unique_ptr<Denoiser> make_denoiser(const RunConfig& c) {
    if (c.denoiser_spec == "oracle")
        return std::make_unique<OracleDenoiser>(require_mixture(c, "the oracle denoiser"));
    const std::string prefix = "trained:";
    if (c.denoiser_spec.rfind(prefix, 0) == 0)
        return std::make_unique<TrainedDenoiser>(
            TrainedDenoiser::load(c.denoiser_spec.substr(prefix.size())));
    fail(Errc::InvalidConfig, "denoiser must be 'oracle' or 'trained:<path>'");
}

PopulationSource make_source(const RunConfig& c) {
    require(c.population.loaded(), Errc::InvalidConfig, "missing population spec");
    if (c.population.mixture) return PopulationSource::from_mixture(*c.population.mixture);
    return PopulationSource::from_stats(PopulationStats::from_samples(c.population.samples));
}

void warn_scale(const RunConfig& c) {
    double m2 = 0.0;
    if (c.population.mixture)
        m2 = c.population.mixture->second_moment_per_coord();
    else if (!c.population.samples.empty()) {
        for (const auto& r : c.population.samples)
            for (double v : r) m2 += v * v;
        m2 /= static_cast<double>(c.population.samples.size() * c.population.samples[0].size());
    }
    if (m2 > 4.0)
        std::cerr << "warning: population second moment per coordinate is " << m2
                  << " (> 4); the sqrt(1+t) input scaling assumes roughly unit scale\n";
}

fs::path resolve_out_dir(const RunConfig& c) {
    std::string dir = c.out_dir;
    if (dir.empty()) {
        if (const char* env = std::getenv("DIFFLAB_OUT")) dir = env;
    }
    if (dir.empty()) dir = ".";
    fs::create_directories(dir);
    return dir;
}

json population_echo(const RunConfig& c) {
    json p;
    if (c.population.mixture) {
        const auto& m = *c.population.mixture;
        p["dim"] = m.dim();
        p["weights"] = m.weights();
        json means = json::array();
        for (int k = 0; k < m.components(); ++k)
            means.push_back(std::vector<double>(m.mean(k).begin(), m.mean(k).end()));
        p["means"] = means;
        p["variances"] = m.variances();
    } else if (!c.population.samples.empty()) {
        p["samples"] = c.population.samples_path;
        p["count"] = c.population.samples.size();
    }
    return p;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream f(path);
    require(f.good(), Errc::InvalidConfig, "cannot write " + path.string());
    f << j.dump(2) << "\n";
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

InitMode parse_init(const RunConfig& c) {
    if (c.init == "exact-noised") return InitMode::ExactNoised;
    if (c.init == "wide-gaussian") return InitMode::WideGaussian;
    if (c.init == "auto")
        return c.population.mixture ? InitMode::ExactNoised : InitMode::WideGaussian;
    fail(Errc::InvalidConfig, "init must be auto | exact-noised | wide-gaussian");
}

TailMode parse_tail(const RunConfig& c) {
    if (c.tail == "analytic") return TailMode::AnalyticTail;
    if (c.tail == "truncate") return TailMode::Truncate;
    fail(Errc::InvalidConfig, "tail must be analytic | truncate");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

// ---------------------------------------------------------------- commands

int cmd_sample(const RunConfig& c) {
    warn_scale(c);
    Timer timer;
    auto den = make_denoiser(c);
    const PopulationSource src = make_source(c);

    SamplerConfig sc;
    sc.grid = make_grid(c.grid_t0, c.grid_T, c.grid_steps);
    sc.lambda = c.lambda;
    sc.n_chains = c.chains;
    sc.seed = derive_seed(c.seed, "sample");
    sc.init = parse_init(c);

    const auto pts = sample_population(*den, src, sc);

    const fs::path out = resolve_out_dir(c);
    {
        std::ofstream f(out / "samples.csv");
        require(f.good(), Errc::InvalidConfig, "cannot write samples.csv");
        f << "chain";
        const std::size_t d = pts.empty() ? 0 : pts[0].size();
        for (std::size_t j = 0; j < d; ++j) f << ",x" << j;
        f << "\n";
        for (std::size_t i = 0; i < pts.size(); ++i) {
            f << i;
            for (double v : pts[i]) f << "," << fmt_double(v);
            f << "\n";
        }
    }

    const Moments mom = compute_moments(pts);
    json rep;
    rep["command"] = "sample";
    rep["seed"] = c.seed;
    rep["config"] = {{"population", population_echo(c)},
                     {"grid", {{"t0", c.grid_t0}, {"T", c.grid_T}, {"steps", c.grid_steps}}},
                     {"sampler",
                      {{"lambda", c.lambda},
                       {"chains", c.chains},
                       {"init", sc.init == InitMode::ExactNoised ? "exact-noised" : "wide-gaussian"}}},
                     {"denoiser", c.denoiser_spec}};
    rep["moments"] = {{"mean", mom.mean},
                      {"var", mom.var},
                      {"mean_se", mom.mean_se},
                      {"var_se", mom.var_se}};
    if (c.population.mixture)
        rep["mode_masses"] = mode_masses(*c.population.mixture, pts);
    rep["wall_time_seconds"] = timer.seconds();
    write_json(out / "report.json", rep);
    std::cout << "wrote " << (out / "samples.csv").string() << " and report.json\n";
    return 0;
}

int cmd_nll(const RunConfig& c, const std::vector<double>& y) {
    warn_scale(c);
    Timer timer;
    const GaussianMixture& m = require_mixture(c, "nll");
    require(!y.empty(), Errc::InvalidConfig, "nll needs a probe point --y");
    auto den = make_denoiser(c);

    QuadratureSpec spec;
    spec.grid = make_grid(c.quad_t0, c.quad_T, c.quad_nodes);
    spec.mc_samples = c.mc_samples;
    spec.boundary_samples = c.boundary_samples;
    spec.tail = parse_tail(c);

    const LikelihoodReport rep = nll(m, *den, y, spec, derive_seed(c.seed, "nll"));

    json out;
    out["command"] = "nll";
    out["seed"] = c.seed;
    out["config"] = {{"population", population_echo(c)},
                     {"quadrature",
                      {{"t0", c.quad_t0},
                       {"T", c.quad_T},
                       {"nodes", c.quad_nodes},
                       {"mc_samples", c.mc_samples},
                       {"tail", c.tail}}},
                     {"denoiser", c.denoiser_spec}};
    out["y"] = y;
    out["integral_term"] = rep.integral_term;
    out["boundary_term"] = rep.boundary_term;
    out["tail_term"] = rep.tail_term;
    out["total_nll"] = rep.total_nll;
    out["standard_error"] = rep.standard_error;
    out["log_density_reference"] = m.log_density(y);
    out["wall_time_seconds"] = timer.seconds();
    write_json(resolve_out_dir(c) / "report.json", out);
    std::cout << "nll(" << json(y).dump() << ") = " << rep.total_nll << " +- "
              << rep.standard_error << "\n";
    return 0;
}

int cmd_mi(const RunConfig& c, double t0) {
    warn_scale(c);
    Timer timer;
    const GaussianMixture& m = require_mixture(c, "mutual information");
    auto den = make_denoiser(c);

    QuadratureSpec spec;
    spec.grid = make_grid(c.quad_t0, c.quad_T, c.quad_nodes);
    spec.mc_samples = c.mc_samples;
    spec.tail = parse_tail(c);

    const Estimate est = mutual_information(m, *den, t0, spec, derive_seed(c.seed, "mi"));

    json out;
    out["command"] = "mi";
    out["seed"] = c.seed;
    out["config"] = {{"population", population_echo(c)},
                     {"quadrature",
                      {{"t0", c.quad_t0},
                       {"T", c.quad_T},
                       {"nodes", c.quad_nodes},
                       {"mc_samples", c.mc_samples},
                       {"tail", c.tail}}},
                     {"denoiser", c.denoiser_spec}};
    out["t0"] = t0;
    out["mutual_information"] = est.value;
    out["standard_error"] = est.standard_error;
    out["wall_time_seconds"] = timer.seconds();
    write_json(resolve_out_dir(c) / "report.json", out);
    std::cout << "I(y, z(t0=" << t0 << ")) = " << est.value << " +- " << est.standard_error
              << "\n";
    return 0;
}

int cmd_entropy(const RunConfig& c) {
    warn_scale(c);
    Timer timer;
    const GaussianMixture& m = require_mixture(c, "entropy");
    auto den = make_denoiser(c);

    QuadratureSpec spec;
    spec.grid = make_grid(c.quad_t0, c.quad_T, c.quad_nodes);
    spec.mc_samples = c.entropy_mc;
    spec.boundary_samples = c.boundary_samples;
    spec.tail = parse_tail(c);

    const Estimate est = entropy_estimate(m, *den, spec, c.entropy_n_y,
                                          derive_seed(c.seed, "entropy"));

    json out;
    out["command"] = "entropy";
    out["seed"] = c.seed;
    out["config"] = {{"population", population_echo(c)},
                     {"quadrature",
                      {{"t0", c.quad_t0},
                       {"T", c.quad_T},
                       {"nodes", c.quad_nodes},
                       {"mc_samples", c.entropy_mc},
                       {"tail", c.tail}}},
                     {"entropy", {{"n_y", c.entropy_n_y}, {"mc_samples", c.entropy_mc}}},
                     {"denoiser", c.denoiser_spec}};
    out["entropy"] = est.value;
    out["standard_error"] = est.standard_error;
    out["wall_time_seconds"] = timer.seconds();
    write_json(resolve_out_dir(c) / "report.json", out);
    std::cout << "H(pop) = " << est.value << " +- " << est.standard_error << "\n";
    return 0;
}

int cmd_train(const RunConfig& c) {
    warn_scale(c);
    require(c.population.loaded(), Errc::InvalidConfig, "missing population spec");

    int dim = 0;
    if (c.population.mixture)
        dim = c.population.mixture->dim();
    else
        dim = static_cast<int>(c.population.samples[0].size());

    TrainConfig tc;
    tc.arch = c.arch.empty() ? std::vector<int>{dim + 1, 64, 64, dim} : c.arch;
    tc.t0 = c.train_t0;
    tc.T = c.train_T;
    tc.steps = c.train_steps;
    tc.batch = c.batch;
    tc.learning_rate = c.learning_rate;
    tc.momentum = c.momentum;
    tc.seed = derive_seed(c.seed, "train");
    tc.log_every = c.log_every;

    const TrainedDenoiser net = c.population.mixture
                                    ? TrainedDenoiser::train(*c.population.mixture, tc)
                                    : TrainedDenoiser::train(c.population.samples, tc);

    const fs::path out = resolve_out_dir(c);
    net.save((out / "model.json").string());
    {
        std::ofstream f(out / "training_log.csv");
        require(f.good(), Errc::InvalidConfig, "cannot write training_log.csv");
        f << "step,loss\n";
        for (const auto& [step, loss] : net.loss_log())
            f << step << "," << fmt_double(loss) << "\n";
    }
    std::cout << "trained " << tc.steps << " steps, final loss " << net.final_loss() << ", wrote "
              << (out / "model.json").string() << "\n";
    return 0;
}

int cmd_check(const RunConfig& c, const std::string& only) {
    warn_scale(c);
    Timer timer;
    const GaussianMixture& m = require_mixture(c, "check");
    auto den = make_denoiser(c);
    const std::uint64_t seed = derive_seed(c.seed, "check");

    json checks;
    bool all_pass = true;
    auto want = [&](const std::string& name) { return only.empty() || only == name; };

    if (want("score")) {
        double max_err = 0.0;
        if (m.dim() == 1) {
            for (double t : {0.01, 0.1, 1.0, 10.0})
                for (double z = -6.0; z <= 6.0 + 1e-12; z += 0.1) {
                    const double zv[1] = {z};
                    max_err = std::max(max_err, score_fd_check(m, t, zv, 1e-4).max_abs_err);
                }
        } else {
            for (double t : {0.01, 0.1, 1.0, 10.0}) {
                RngStream rng = derive_stream(seed, "score-probe");
                const auto pts = m.noised(t).sample(100, rng);
                for (const auto& z : pts)
                    max_err = std::max(max_err, score_fd_check(m, t, z, 1e-4).max_abs_err);
            }
        }
        const bool pass = max_err <= c.score_tol;
        checks["score"] = {{"max_abs_err", max_err}, {"tol", c.score_tol}, {"pass", pass}};
        all_pass = all_pass && pass;
    }

    if (want("fokker-planck")) {
        if (m.dim() == 1) {
            double zlo = m.mean(0)[0], zhi = m.mean(0)[0], smax = 0.0;
            for (int k = 0; k < m.components(); ++k) {
                zlo = std::min(zlo, m.mean(k)[0]);
                zhi = std::max(zhi, m.mean(k)[0]);
                smax = std::max(smax, std::sqrt(m.variances()[k]));
            }
            const ResidualReport rep = fokker_planck_residual(
                m, 0.5, zlo - 4.0 - 4.0 * smax, zhi + 4.0 + 4.0 * smax, 1e-3, 1e-4, c.fp_tol);
            const bool pass = rep.max_abs_residual <= c.fp_tol;
            checks["fokker-planck"] = {{"max_abs_residual", rep.max_abs_residual},
                                       {"rms_residual", rep.rms_residual},
                                       {"t", rep.t},
                                       {"tol", c.fp_tol},
                                       {"pass", pass}};
            all_pass = all_pass && pass;
        } else {
            checks["fokker-planck"] = {{"skipped", "one-dimensional check"}};
        }
    }

    if (want("flow")) {
        const MomentDeltas d =
            flow_equivalence_check(m, 0.01, 1.0, 50000, 256, derive_seed(seed, "flow"));
        const bool pass = d.max_mean_err <= c.mean_tol && d.max_var_rel_err <= c.var_rel_tol &&
                          d.max_mass_err <= c.mass_tol;
        checks["flow"] = {{"max_mean_err", d.max_mean_err},
                          {"max_var_rel_err", d.max_var_rel_err},
                          {"max_mass_err", d.max_mass_err},
                          {"mean_tol", c.mean_tol},
                          {"var_rel_tol", c.var_rel_tol},
                          {"mass_tol", c.mass_tol},
                          {"pass", pass}};
        all_pass = all_pass && pass;
    }

    if (want("reverse")) {
        SamplerConfig sc;
        sc.grid = make_grid(c.grid_t0, c.grid_T, c.grid_steps);
        sc.n_chains = c.chains;
        sc.seed = derive_seed(seed, "reverse");
        sc.init = InitMode::ExactNoised;
        const ReverseConsistency rc = reverse_consistency_check(m, *den, sc);
        auto entry = [&](const MomentDeltas& d) {
            return json{{"max_mean_err", d.max_mean_err},
                        {"max_var_rel_err", d.max_var_rel_err},
                        {"max_mass_err", d.max_mass_err}};
        };
        const bool pass = rc.sde.max_mean_err <= c.mean_tol &&
                          rc.sde.max_var_rel_err <= c.var_rel_tol &&
                          rc.sde.max_mass_err <= c.mass_tol &&
                          rc.ode.max_mean_err <= c.mean_tol &&
                          rc.ode.max_var_rel_err <= c.var_rel_tol &&
                          rc.ode.max_mass_err <= c.mass_tol;
        checks["reverse"] = {{"sde", entry(rc.sde)},
                             {"ode", entry(rc.ode)},
                             {"mean_tol", c.mean_tol},
                             {"var_rel_tol", c.var_rel_tol},
                             {"mass_tol", c.mass_tol},
                             {"pass", pass}};
        all_pass = all_pass && pass;
    }

    require(!checks.empty(), Errc::InvalidConfig,
            "--only must name one of: score, fokker-planck, flow, reverse");

    json out;
    out["command"] = "check";
    out["seed"] = c.seed;
    out["config"] = {{"population", population_echo(c)}, {"denoiser", c.denoiser_spec}};
    out["checks"] = checks;
    out["all_pass"] = all_pass;
    out["wall_time_seconds"] = timer.seconds();
    write_json(resolve_out_dir(c) / "diagnostics.json", out);

    for (auto it = checks.begin(); it != checks.end(); ++it) {
        const bool skipped = it.value().contains("skipped");
        std::cout << (skipped ? "SKIP" : (it.value().value("pass", false) ? "PASS" : "FAIL"))
                  << " " << it.key() << "\n";
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion-model laboratory over Gaussian-mixture populations"};
    app.require_subcommand(1);

    std::string config_path, out_dir, denoiser_spec, init_mode, tail_mode, only, arch_csv, y_csv;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<double> lambda, grid_t0, grid_T, quad_t0, quad_T, mi_t0, lr, momentum;
    std::optional<std::int64_t> grid_steps, chains, quad_nodes, mc, train_steps, n_y;
    std::optional<int> batch;
    std::optional<double> tol;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "root seed (64-bit)");
        sub->add_option("--out", out_dir, "output directory (default: $DIFFLAB_OUT or .)");
        sub->add_option("--threads", threads, "worker thread cap (0 = hardware)");
        sub->add_option("--denoiser", denoiser_spec, "oracle | trained:<path>");
    };

    CLI::App* sample = app.add_subcommand("sample", "integrate the reverse process");
    add_common(sample);
    sample->add_option("--lambda", lambda, "stochasticity level (0 = ODE, 1 = SDE)");
    sample->add_option("--steps", grid_steps, "grid steps");
    sample->add_option("--chains", chains, "number of chains");
    sample->add_option("--t0", grid_t0, "grid lower time");
    sample->add_option("--T", grid_T, "grid upper time");
    sample->add_option("--init", init_mode, "auto | exact-noised | wide-gaussian");

    CLI::App* nllc = app.add_subcommand("nll", "estimate -ln pop(y) for a probe point");
    add_common(nllc);
    nllc->add_option("--y", y_csv, "probe point, comma-separated coordinates");
    nllc->add_option("--t0", quad_t0, "quadrature lower time");
    nllc->add_option("--T", quad_T, "quadrature truncation time");
    nllc->add_option("--nodes", quad_nodes, "quadrature nodes");
    nllc->add_option("--mc", mc, "Monte Carlo draws per node");
    nllc->add_option("--tail", tail_mode, "analytic | truncate");

    CLI::App* mic = app.add_subcommand("mi", "mutual information I(y, z(t0))");
    add_common(mic);
    mic->add_option("--t0", mi_t0, "lower integration bound t0");
    mic->add_option("--T", quad_T, "quadrature truncation time");
    mic->add_option("--nodes", quad_nodes, "quadrature nodes");
    mic->add_option("--mc", mc, "Monte Carlo draws per node");
    mic->add_option("--tail", tail_mode, "analytic | truncate");

    CLI::App* ent = app.add_subcommand("entropy", "population entropy estimate");
    add_common(ent);
    ent->add_option("--ny", n_y, "number of y draws");
    ent->add_option("--mc", mc, "Monte Carlo draws per node (inner nll)");

    CLI::App* train = app.add_subcommand("train", "train a denoiser on the population");
    add_common(train);
    train->add_option("--steps", train_steps, "SGD steps");
    train->add_option("--batch", batch, "batch size");
    train->add_option("--lr", lr, "learning rate");
    train->add_option("--momentum", momentum, "momentum");
    train->add_option("--arch", arch_csv, "layer widths, comma-separated");
    train->add_option("--t0", grid_t0, "training t range lower end");
    train->add_option("--T", grid_T, "training t range upper end");

    CLI::App* check = app.add_subcommand("check", "run the diagnostics suite");
    add_common(check);
    check->add_option("--only", only, "run one check: score | fokker-planck | flow | reverse");
    check->add_option("--tol", tol, "override score and Fokker-Planck residual tolerances");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig c = load_config(config_path);
        if (seed) c.seed = *seed;
        if (!out_dir.empty()) c.out_dir = out_dir;
        if (threads) c.threads = *threads;
        if (!denoiser_spec.empty()) c.denoiser_spec = denoiser_spec;
        if (lambda) c.lambda = *lambda;
        if (chains) c.chains = *chains;
        if (!init_mode.empty()) c.init = init_mode;
        if (!tail_mode.empty()) c.tail = tail_mode;
        if (mc) c.mc_samples = *mc;
        if (quad_nodes) c.quad_nodes = *quad_nodes;
        if (quad_t0) c.quad_t0 = *quad_t0;
        if (quad_T) c.quad_T = *quad_T;
        if (n_y) c.entropy_n_y = *n_y;
        if (mc) c.entropy_mc = *mc;
        if (batch) c.batch = *batch;
        if (lr) c.learning_rate = *lr;
        if (momentum) c.momentum = *momentum;
        if (tol) {
            c.score_tol = *tol;
            c.fp_tol = *tol;
        }
        if (!arch_csv.empty()) {
            c.arch.clear();
            std::stringstream ss(arch_csv);
            std::string cell;
            while (std::getline(ss, cell, ',')) c.arch.push_back(std::stoi(cell));
        }
        if (app.got_subcommand(sample)) {
            if (grid_t0) c.grid_t0 = *grid_t0;
            if (grid_T) c.grid_T = *grid_T;
            if (grid_steps) c.grid_steps = *grid_steps;
        }
        if (app.got_subcommand(train)) {
            if (grid_t0) c.train_t0 = *grid_t0;
            if (grid_T) c.train_T = *grid_T;
            if (train_steps) c.train_steps = *train_steps;
        }
        set_max_threads(c.threads);

        if (app.got_subcommand(sample)) return cmd_sample(c);
        if (app.got_subcommand(nllc)) {
            std::vector<double> y;
            std::stringstream ss(y_csv);
            std::string cell;
            while (std::getline(ss, cell, ',')) y.push_back(std::stod(cell));
            return cmd_nll(c, y);
        }
        if (app.got_subcommand(mic)) return cmd_mi(c, mi_t0.value_or(c.quad_t0));
        if (app.got_subcommand(ent)) return cmd_entropy(c);
        if (app.got_subcommand(train)) return cmd_train(c);
        if (app.got_subcommand(check)) return cmd_check(c, only);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return (e.code() == Errc::NonFiniteState || e.code() == Errc::NonFiniteLoss) ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
