// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "difflab/denoiser.hpp"
#include "difflab/diagnostics.hpp"
#include "difflab/forward_process.hpp"
#include "difflab/likelihood.hpp"
#include "difflab/reverse_sampler.hpp"
#include "difflab/stats.hpp"
#include "difflab/trained_denoiser.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace difflab;

namespace {

int g_failures = 0;

struct Criterion {
    std::string name;
    bool pass = true;
    std::string detail;
    double seconds = 0.0;
};

void report(const Criterion& c) {
    std::printf("%s  %s: %s [%.1f s]\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str(), c.seconds);
    std::fflush(stdout);
    if (!c.pass) ++g_failures;
}

template <class F>
void run_criterion(const std::string& name, F&& body) {
    Criterion c;
    c.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail += std::string(" exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report(c);
}

GaussianMixture std_normal() { return GaussianMixture(1, {1.0}, {{0.0}}, {1.0}); }

GaussianMixture bimodal() {
    return GaussianMixture(1, {0.5, 0.5}, {{-2.0}, {2.0}}, {0.25, 0.25});
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

bool within(Criterion& c, const std::string& label, double got, double want, double tol) {
    const bool ok = std::abs(got - want) <= tol;
    c.detail += label + "=" + fmt(got) + (ok ? "" : "(!)") + " ";
    if (!ok) c.pass = false;
    return ok;
}

// ------------------------------------------------------------------ 1-3

void criterion_score(Criterion& c) {
    const GaussianMixture m = bimodal();
    double worst = 0.0;
    for (double t : {0.01, 0.1, 1.0, 10.0})
        for (double z = -6.0; z <= 6.0 + 1e-12; z += 0.1)
            worst = std::max(worst, score_fd_check(m, t, std::vector<double>{z}, 1e-4).max_abs_err);
    c.pass = worst <= 1e-6;
    c.detail = "max_abs_err=" + fmt(worst) + " (tol 1e-6)";
}

void criterion_fokker_planck(Criterion& c) {
    const ResidualReport g = fokker_planck_residual(std_normal(), 1.0, -6.0, 6.0, 1e-3, 1e-4);
    const ResidualReport b = fokker_planck_residual(bimodal(), 0.5, -6.0, 6.0, 1e-3, 1e-4);
    const ResidualReport b2 = fokker_planck_residual(bimodal(), 0.5, -6.0, 6.0, 5e-4, 5e-5);
    const double ratio = b.rms_residual / b2.rms_residual;
    c.pass = g.max_abs_residual <= 1e-5 && b.max_abs_residual <= 1e-5 && ratio > 2.5 &&
             ratio < 6.0;
    c.detail = "gauss=" + fmt(g.max_abs_residual) + " bimodal=" + fmt(b.max_abs_residual) +
               " (tol 1e-5), halving ratio=" + fmt(ratio) + " (~4)";
}

void criterion_conditional_reversal(Criterion& c) {
    RngStream rng(1001);
    const std::vector<double> y{0.0};
    const double t = 1.0, dt = 1e-3;
    const auto r = conditional_reversal_moments(y, t, dt, 1000000, rng);
    const double mean_residual = r.empirical_mean[0] - r.predicted_mean[0];
    const bool mean_ok = std::abs(mean_residual) <= 3.0 * r.residual_se[0];
    const bool var_ok =
        std::abs(r.residual_variance[0] / r.predicted_variance - 1.0) <= 0.01;
    c.pass = mean_ok && var_ok;
    c.detail = "mean_residual=" + fmt(mean_residual) + " (3se " + fmt(3.0 * r.residual_se[0]) +
               "), var=" + fmt(r.residual_variance[0]) + " vs " + fmt(r.predicted_variance) +
               " (1%)";
}

// ------------------------------------------------------------------ 4-6

Moments sampler_moments(double lambda, std::uint64_t seed, std::vector<double>& masses,
                        std::int64_t chains = 100000, std::int64_t steps = 256) {
    const GaussianMixture m = bimodal();
    const OracleDenoiser d(m);
    SamplerConfig cfg;
    cfg.grid = make_grid(1e-3, 400.0, steps);
    cfg.lambda = lambda;
    cfg.n_chains = chains;
    cfg.seed = seed;
    cfg.init = InitMode::ExactNoised;
    const auto pts = sample_population(d, PopulationSource::from_mixture(m), cfg);
    masses = mode_masses(m, pts);
    return compute_moments(pts);
}

void criterion_sampler(Criterion& c, double lambda, std::uint64_t seed) {
    std::vector<double> masses;
    const Moments mom = sampler_moments(lambda, seed, masses);
    within(c, "mean", mom.mean[0], 0.0, 0.02);
    const bool var_ok = std::abs(mom.var[0] / 4.25 - 1.0) <= 0.02;
    c.detail += "var=" + fmt(mom.var[0]) + (var_ok ? "" : "(!)") + " (4.25 2%) ";
    if (!var_ok) c.pass = false;
    within(c, "mass0", masses[0], 0.5, 0.005);
    within(c, "mass1", masses[1], 0.5, 0.005);
}

void criterion_lambda_family(Criterion& c) {
    // finer grid than (4)/(5) so the first-order Euler bias, which differs
    // across lambda, sits below the Monte Carlo floor being compared against
    const std::vector<double> lambdas{0.0, 0.5, 1.0, 2.0, 4.0};
    std::vector<Moments> moms;
    std::vector<std::vector<double>> masses(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        moms.push_back(sampler_moments(lambdas[i], 3000 + i, masses[i], 20000, 2048));
    double worst_sigma = 0.0;
    for (std::size_t i = 0; i < lambdas.size(); ++i)
        for (std::size_t j = i + 1; j < lambdas.size(); ++j) {
            const double mean_sig =
                std::abs(moms[i].mean[0] - moms[j].mean[0]) /
                std::hypot(moms[i].mean_se[0], moms[j].mean_se[0]);
            const double var_sig = std::abs(moms[i].var[0] - moms[j].var[0]) /
                                   std::hypot(moms[i].var_se[0], moms[j].var_se[0]);
            const double n = static_cast<double>(moms[i].n);
            const double mass_se = std::sqrt(0.25 / n + 0.25 / n);
            const double mass_sig = std::abs(masses[i][0] - masses[j][0]) / mass_se;
            worst_sigma = std::max({worst_sigma, mean_sig, var_sig, mass_sig});
        }
    c.pass = worst_sigma <= 3.0;
    c.detail = "worst pairwise deviation = " + fmt(worst_sigma) + " combined SEs (limit 3)";
}

// ------------------------------------------------------------------ 7-9

void criterion_nll(Criterion& c) {
    QuadratureSpec spec;
    spec.grid = make_grid(1e-3, 1e3, 200);
    spec.mc_samples = 40000;
    spec.boundary_samples = 400000;
    spec.tail = TailMode::AnalyticTail;

    const GaussianMixture gauss = std_normal();
    const OracleDenoiser dg(gauss);
    const double half_ln_2pi = 0.9189385332046727;
    for (double yv : {0.0, 1.0, 2.0}) {
        const double want = half_ln_2pi + 0.5 * yv * yv;
        const double got =
            nll(gauss, dg, std::vector<double>{yv}, spec, 4000 + static_cast<int>(yv)).total_nll;
        within(c, "gauss_y" + fmt(yv), got, want, 0.01 * want);
    }
    const GaussianMixture bi = bimodal();
    const OracleDenoiser db(bi);
    for (double yv : {0.0, 2.0}) {
        const double want = -bi.log_density(std::vector<double>{yv});
        const double got =
            nll(bi, db, std::vector<double>{yv}, spec, 4100 + static_cast<int>(yv)).total_nll;
        within(c, "bimodal_y" + fmt(yv), got, want, 0.02 * want);
    }
}

void criterion_mi(Criterion& c) {
    const GaussianMixture m = std_normal();
    const OracleDenoiser d(m);
    QuadratureSpec spec;
    spec.grid = make_grid(1e-3, 1e3, 200);
    spec.mc_samples = 40000;
    spec.tail = TailMode::AnalyticTail;
    int i = 0;
    for (double t0 : {0.1, 1.0, 10.0}) {
        const double want = 0.5 * std::log(1.0 + 1.0 / t0);
        const double got = mutual_information(m, d, t0, spec, 5000 + i++).value;
        within(c, "t0=" + fmt(t0), got, want, 0.01 * want);
    }
}

void criterion_entropy(Criterion& c) {
    const GaussianMixture m = std_normal();
    const OracleDenoiser d(m);
    QuadratureSpec spec;
    spec.grid = make_grid(1e-3, 1e3, 200);
    spec.mc_samples = 100;
    spec.boundary_samples = 1000;
    spec.tail = TailMode::AnalyticTail;
    const double want = 1.4189385332046727;
    const Estimate est = entropy_estimate(m, d, spec, 10000, 6001);
    within(c, "entropy", est.value, want, 0.015 * want);
    c.detail += "(se " + fmt(est.standard_error) + ")";
}

// ------------------------------------------------------------------ 10-11

void criterion_flow(Criterion& c) {
    const MomentDeltas d = flow_equivalence_check(bimodal(), 0.01, 1.0, 100000, 512, 7001);
    const double want_var = 0.25 + 1.0 + 4.0;
    const bool var_ok = std::abs(d.empirical.var[0] / want_var - 1.0) <= 0.02;
    c.detail = "var=" + fmt(d.empirical.var[0]) + (var_ok ? "" : "(!)") + " (" + fmt(want_var) +
               " 2%) ";
    if (!var_ok) c.pass = false;
    within(c, "mean", d.empirical.mean[0], 0.0, 0.02);
    within(c, "mass0", d.mass_emp[0], 0.5, 0.01);
}

void criterion_trained(Criterion& c) {
    const GaussianMixture m = bimodal();
    TrainConfig tc;
    tc.arch = {2, 64, 64, 1};
    tc.t0 = 1e-3;
    tc.T = 400.0;
    tc.steps = 200000;
    tc.batch = 128;
    tc.learning_rate = 3e-3;
    tc.momentum = 0.9;
    tc.seed = 8001;
    const TrainedDenoiser net = TrainedDenoiser::train(m, tc);

    const OracleDenoiser oracle(m);
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
        RngStream a(9000), b(9000);
        const double mo = mmse(m, oracle, t, 400000, a);
        const double mt = mmse(m, net, t, 400000, b);
        const bool ok = mt <= 1.5 * mo;
        c.detail += "t=" + fmt(t) + ":" + fmt(mt / mo) + "x" + (ok ? "" : "(!)") + " ";
        if (!ok) c.pass = false;
    }

    SamplerConfig sc;
    sc.grid = make_grid(1e-3, 400.0, 256);
    sc.lambda = 1.0;
    sc.n_chains = 20000;
    sc.seed = 8002;
    sc.init = InitMode::WideGaussian;
    const auto pts = sample_population(net, PopulationSource::from_mixture(m), sc);
    const auto masses = mode_masses(m, pts);
    within(c, "mass0", masses[0], 0.5, 0.025);
}

// ------------------------------------------------------------------ 12

std::string g_cli;

int run_cli(const std::string& args) {
    const std::string cmd = g_cli + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p);
    if (!f.good()) return "<missing " + p.string() + ">";
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::string normalized_json(const fs::path& p) {
    json j = json::parse(slurp(p), nullptr, false);
    if (j.is_discarded()) return "<bad json " + p.string() + ">";
    j.erase("wall_time_seconds");
    return j.dump();
}

void criterion_reproducibility(Criterion& c) {
    if (g_cli.empty()) {
        c.pass = false;
        c.detail = "no --cli path given";
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "difflab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    json bench = {{"population",
                   {{"weights", {0.5, 0.5}}, {"means", {{-2.0}, {2.0}}}, {"variances", {0.25, 0.25}}}},
                  {"seed", 7},
                  {"training", {{"steps", 300}, {"batch", 64}, {"log_every", 50}}}};
    const fs::path cfg = dir / "bench.json";
    std::ofstream(cfg) << bench.dump(2);

    struct Case {
        std::string name;
        std::string args;
        std::vector<std::string> files; // csv compared raw, json compared normalized
    };
    const std::vector<Case> cases = {
        {"sample", "sample --chains 2000 --steps 64", {"samples.csv", "report.json"}},
        {"nll", "nll --y 1 --mc 2000", {"report.json"}},
        {"mi", "mi --t0 1 --mc 2000", {"report.json"}},
        {"entropy", "entropy --ny 300 --mc 50", {"report.json"}},
        {"train", "train", {"model.json", "training_log.csv"}},
        {"check", "check --only score", {"diagnostics.json"}},
    };
    for (const auto& cs : cases) {
        const fs::path o1 = dir / (cs.name + "_1");
        const fs::path o2 = dir / (cs.name + "_2");
        const std::string base = cs.args + " --config " + cfg.string() + " --seed 7 --out ";
        const int r1 = run_cli(base + o1.string());
        const int r2 = run_cli(base + o2.string());
        bool same = r1 == 0 && r2 == 0;
        for (const auto& f : cs.files) {
            if (f.ends_with(".json"))
                same = same && normalized_json(o1 / f) == normalized_json(o2 / f);
            else
                same = same && slurp(o1 / f) == slurp(o2 / f);
        }
        c.detail += cs.name + (same ? "=ok " : "=DIFF ");
        if (!same) c.pass = false;
    }
}

} // namespace

int main(int argc, char** argv) {
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];

    run_criterion(" 1 score identity", criterion_score);
    run_criterion(" 2 Fokker-Planck residual", criterion_fokker_planck);
    run_criterion(" 3 conditional reversal", criterion_conditional_reversal);
    run_criterion(" 4 reverse SDE sampling (lambda=1)",
                  [](Criterion& c) { criterion_sampler(c, 1.0, 2001); });
    run_criterion(" 5 reverse ODE sampling (lambda=0)",
                  [](Criterion& c) { criterion_sampler(c, 0.0, 2002); });
    run_criterion(" 6 lambda-family invariance", criterion_lambda_family);
    run_criterion(" 7 nll closed forms", criterion_nll);
    run_criterion(" 8 mutual information (I-MMSE)", criterion_mi);
    run_criterion(" 9 entropy", criterion_entropy);
    run_criterion("10 probability-flow equivalence", criterion_flow);
    run_criterion("11 trained denoiser", criterion_trained);
    run_criterion("12 reproducibility", criterion_reproducibility);

    std::printf("%d/12 criteria passed\n", 12 - g_failures);
    return g_failures;
}
