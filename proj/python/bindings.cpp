#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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

namespace py = pybind11;
using namespace difflab;

namespace {

py::array_t<double> to_array(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t d = n ? rows[0].size() : 0;
    py::array_t<double> out({n, d});
    auto buf = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) buf(i, j) = rows[i][j];
    return out;
}

std::vector<std::vector<double>> from_array(py::array_t<double, py::array::c_style> arr) {
    if (arr.ndim() != 2) throw py::value_error("expected a 2-d array of shape (n, dim)");
    auto buf = arr.unchecked<2>();
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(buf.shape(0)),
                                          std::vector<double>(static_cast<std::size_t>(buf.shape(1))));
    for (py::ssize_t i = 0; i < buf.shape(0); ++i)
        for (py::ssize_t j = 0; j < buf.shape(1); ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = buf(i, j);
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "diffusion-model laboratory over Gaussian-mixture populations";

    py::register_exception<Error>(m, "DifflabError");

    py::class_<GaussianMixture>(m, "GaussianMixture")
        .def(py::init<int, std::vector<double>, std::vector<std::vector<double>>,
                      std::vector<double>>(),
             py::arg("dim"), py::arg("weights"), py::arg("means"), py::arg("variances"))
        .def_property_readonly("dim", &GaussianMixture::dim)
        .def_property_readonly("components", &GaussianMixture::components)
        .def_property_readonly("weights", &GaussianMixture::weights)
        .def_property_readonly("variances", &GaussianMixture::variances)
        .def("log_density",
             [](const GaussianMixture& g, const std::vector<double>& y) {
                 return g.log_density(y);
             },
             py::arg("y"))
        .def("noised", &GaussianMixture::noised, py::arg("t"))
        .def("sample",
             [](const GaussianMixture& g, std::int64_t n, std::uint64_t seed) {
                 RngStream rng(seed);
                 return to_array(g.sample(n, rng));
             },
             py::arg("n"), py::arg("seed"))
        .def("population_mean", &GaussianMixture::population_mean)
        .def("avg_coord_variance", &GaussianMixture::avg_coord_variance);

    py::class_<Denoiser, std::shared_ptr<Denoiser>>(m, "Denoiser")
        .def_property_readonly("dim", &Denoiser::dim)
        .def("posterior_mean",
             [](const Denoiser& d, double t, const std::vector<double>& z) {
                 return d.posterior_mean(t, z);
             },
             py::arg("t"), py::arg("z"));

    py::class_<OracleDenoiser, Denoiser, std::shared_ptr<OracleDenoiser>>(m, "OracleDenoiser")
        .def(py::init<GaussianMixture>(), py::arg("mixture"));

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("arch", &TrainConfig::arch)
        .def_readwrite("t0", &TrainConfig::t0)
        .def_readwrite("T", &TrainConfig::T)
        .def_readwrite("steps", &TrainConfig::steps)
        .def_readwrite("batch", &TrainConfig::batch)
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("momentum", &TrainConfig::momentum)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("log_every", &TrainConfig::log_every);

    py::class_<TrainedDenoiser, Denoiser, std::shared_ptr<TrainedDenoiser>>(m, "TrainedDenoiser")
        .def_static("train",
                    [](const GaussianMixture& pop, const TrainConfig& cfg) {
                        return TrainedDenoiser::train(pop, cfg);
                    },
                    py::arg("population"), py::arg("config"))
        .def_static("train_on_samples",
                    [](py::array_t<double, py::array::c_style> samples, const TrainConfig& cfg) {
                        return TrainedDenoiser::train(from_array(samples), cfg);
                    },
                    py::arg("samples"), py::arg("config"))
        .def("save", &TrainedDenoiser::save, py::arg("path"))
        .def_static("load", &TrainedDenoiser::load, py::arg("path"))
        .def_property_readonly("arch", &TrainedDenoiser::arch)
        .def_property_readonly("final_loss", &TrainedDenoiser::final_loss)
        .def_property_readonly("train_steps", &TrainedDenoiser::train_steps);

    m.def("score",
          [](const Denoiser& d, double t, const std::vector<double>& z) {
              return score(d, t, z);
          },
          py::arg("denoiser"), py::arg("t"), py::arg("z"));

    m.def("mmse",
          [](const GaussianMixture& mix, const Denoiser& d, double t, std::int64_t n,
             std::uint64_t seed) {
              RngStream rng(seed);
              return mmse(mix, d, t, n, rng);
          },
          py::arg("mixture"), py::arg("denoiser"), py::arg("t"), py::arg("n"), py::arg("seed"));

    m.def("sample_zt",
          [](const std::vector<double>& y, double t, std::uint64_t seed) {
              RngStream rng(seed);
              return sample_zt(y, t, rng);
          },
          py::arg("y"), py::arg("t"), py::arg("seed"));

    py::class_<TimeGrid>(m, "TimeGrid")
        .def_readonly("t0", &TimeGrid::t0)
        .def_readonly("T", &TimeGrid::T)
        .def_readonly("n_steps", &TimeGrid::n_steps)
        .def_readonly("times", &TimeGrid::times);

    m.def("make_grid", &make_grid, py::arg("t0"), py::arg("T"), py::arg("n_steps"));

    py::enum_<InitMode>(m, "InitMode")
        .value("ExactNoised", InitMode::ExactNoised)
        .value("WideGaussian", InitMode::WideGaussian);

    m.def("sample_population",
          [](const Denoiser& d, const GaussianMixture& mix, double t0, double T,
             std::int64_t n_steps, double lam, std::int64_t n_chains, std::uint64_t seed,
             InitMode init) {
              SamplerConfig cfg;
              cfg.grid = make_grid(t0, T, n_steps);
              cfg.lambda = lam;
              cfg.n_chains = n_chains;
              cfg.seed = seed;
              cfg.init = init;
              return to_array(sample_population(d, PopulationSource::from_mixture(mix), cfg));
          },
          py::arg("denoiser"), py::arg("mixture"), py::arg("t0"), py::arg("T"),
          py::arg("n_steps"), py::arg("lam") = 1.0, py::arg("n_chains") = 1000,
          py::arg("seed") = 0, py::arg("init") = InitMode::ExactNoised);

    py::enum_<TailMode>(m, "TailMode")
        .value("AnalyticTail", TailMode::AnalyticTail)
        .value("Truncate", TailMode::Truncate);

    py::class_<LikelihoodReport>(m, "LikelihoodReport")
        .def_readonly("integral_term", &LikelihoodReport::integral_term)
        .def_readonly("boundary_term", &LikelihoodReport::boundary_term)
        .def_readonly("tail_term", &LikelihoodReport::tail_term)
        .def_readonly("total_nll", &LikelihoodReport::total_nll)
        .def_readonly("standard_error", &LikelihoodReport::standard_error);

    py::class_<Estimate>(m, "Estimate")
        .def_readonly("value", &Estimate::value)
        .def_readonly("standard_error", &Estimate::standard_error);

    auto make_spec = [](double t0, double T, std::int64_t nodes, std::int64_t mc, TailMode tail) {
        QuadratureSpec spec;
        spec.grid = make_grid(t0, T, nodes);
        spec.mc_samples = mc;
        spec.tail = tail;
        return spec;
    };

    m.def("nll",
          [make_spec](const GaussianMixture& mix, const Denoiser& d, const std::vector<double>& y,
                      double t0, double T, std::int64_t nodes, std::int64_t mc, TailMode tail,
                      std::uint64_t seed) {
              return nll(mix, d, y, make_spec(t0, T, nodes, mc, tail), seed);
          },
          py::arg("mixture"), py::arg("denoiser"), py::arg("y"), py::arg("t0") = 1e-3,
          py::arg("T") = 1000.0, py::arg("nodes") = 200, py::arg("mc_samples") = 10000,
          py::arg("tail") = TailMode::AnalyticTail, py::arg("seed") = 0);

    m.def("boundary_term",
          [](const GaussianMixture& mix, const std::vector<double>& y, double t0, std::int64_t n,
             std::uint64_t seed) {
              RngStream rng(seed);
              return boundary_term(mix, y, t0, n, rng);
          },
          py::arg("mixture"), py::arg("y"), py::arg("t0"), py::arg("n"), py::arg("seed") = 0);

    m.def("mutual_information",
          [make_spec](const GaussianMixture& mix, const Denoiser& d, double t0, double T,
                      std::int64_t nodes, std::int64_t mc, std::uint64_t seed) {
              return mutual_information(mix, d, t0, make_spec(std::min(t0, T / 2), T, nodes, mc,
                                                              TailMode::AnalyticTail),
                                        seed);
          },
          py::arg("mixture"), py::arg("denoiser"), py::arg("t0"), py::arg("T") = 1000.0,
          py::arg("nodes") = 200, py::arg("mc_samples") = 10000, py::arg("seed") = 0);

    m.def("entropy_estimate",
          [make_spec](const GaussianMixture& mix, const Denoiser& d, std::int64_t n_y, double t0,
                      double T, std::int64_t nodes, std::int64_t mc, std::uint64_t seed) {
              return entropy_estimate(mix, d, make_spec(t0, T, nodes, mc, TailMode::AnalyticTail),
                                      n_y, seed);
          },
          py::arg("mixture"), py::arg("denoiser"), py::arg("n_y") = 1000, py::arg("t0") = 1e-3,
          py::arg("T") = 1000.0, py::arg("nodes") = 200, py::arg("mc_samples") = 100,
          py::arg("seed") = 0);

    py::class_<ResidualReport>(m, "ResidualReport")
        .def_readonly("max_abs_residual", &ResidualReport::max_abs_residual)
        .def_readonly("rms_residual", &ResidualReport::rms_residual)
        .def_readonly("tolerance_used", &ResidualReport::tolerance_used);

    m.def("fokker_planck_residual", &fokker_planck_residual, py::arg("mixture"), py::arg("t"),
          py::arg("z_min"), py::arg("z_max"), py::arg("dz"), py::arg("dtime"),
          py::arg("tolerance") = 1e-5);

    py::class_<ScoreCheck>(m, "ScoreCheck")
        .def_readonly("analytic", &ScoreCheck::analytic)
        .def_readonly("numeric", &ScoreCheck::numeric)
        .def_readonly("max_abs_err", &ScoreCheck::max_abs_err);

    m.def("score_fd_check",
          [](const GaussianMixture& mix, double t, const std::vector<double>& z, double h) {
              return score_fd_check(mix, t, z, h);
          },
          py::arg("mixture"), py::arg("t"), py::arg("z"), py::arg("h") = 1e-4);

    m.def("set_max_threads", &set_max_threads, py::arg("n"));
}
