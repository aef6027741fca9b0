"""Python smoke tests for the compiled difflab module."""

import math

import pytest

import difflab as dl


@pytest.fixture(scope="module")
def std_normal():
    return dl.GaussianMixture(1, [1.0], [[0.0]], [1.0])


@pytest.fixture(scope="module")
def bimodal():
    return dl.GaussianMixture(1, [0.5, 0.5], [[-2.0], [2.0]], [0.25, 0.25])


def test_log_density(std_normal):
    assert std_normal.log_density([0.0]) == pytest.approx(-0.5 * math.log(2 * math.pi))


def test_validation_errors():
    with pytest.raises(dl.DifflabError):
        dl.GaussianMixture(1, [0.4, 0.7], [[-1.0], [1.0]], [1.0, 1.0])


def test_noised_composes(std_normal):
    assert std_normal.noised(3.0).variances[0] == 4.0


def test_oracle_posterior_mean_and_score(std_normal):
    d = dl.OracleDenoiser(std_normal)
    assert d.posterior_mean(1.0, [2.0])[0] == pytest.approx(1.0)
    assert dl.score(d, 1.0, [2.0])[0] == pytest.approx(-1.0)


def test_mmse(std_normal):
    d = dl.OracleDenoiser(std_normal)
    assert dl.mmse(std_normal, d, 1.0, 200000, seed=5) == pytest.approx(0.5, rel=0.03)


def test_sampling_shapes_and_determinism(bimodal):
    a = bimodal.sample(1000, seed=3)
    b = bimodal.sample(1000, seed=3)
    assert a.shape == (1000, 1)
    assert (a == b).all()


def test_sample_population(bimodal):
    d = dl.OracleDenoiser(bimodal)
    pts = dl.sample_population(d, bimodal, t0=1e-3, T=400.0, n_steps=128,
                               lam=1.0, n_chains=4000, seed=11)
    assert pts.shape == (4000, 1)
    assert abs(pts.mean()) < 0.15
    frac = (pts[:, 0] < 0).mean()
    assert abs(frac - 0.5) < 0.05


def test_nll_matches_closed_form(std_normal):
    d = dl.OracleDenoiser(std_normal)
    rep = dl.nll(std_normal, d, [0.0], mc_samples=4000, seed=2)
    assert rep.total_nll == pytest.approx(0.5 * math.log(2 * math.pi), rel=0.03)
    assert rep.total_nll == pytest.approx(
        rep.integral_term + rep.boundary_term + rep.tail_term)


def test_mutual_information(std_normal):
    d = dl.OracleDenoiser(std_normal)
    est = dl.mutual_information(std_normal, d, 1.0, mc_samples=4000, seed=4)
    assert est.value == pytest.approx(0.5 * math.log(2.0), rel=0.03)


def test_score_fd_check(bimodal):
    chk = dl.score_fd_check(bimodal, 0.5, [1.2], h=1e-4)
    assert chk.max_abs_err < 1e-6


def test_fokker_planck_residual(std_normal):
    rep = dl.fokker_planck_residual(std_normal, 1.0, -6.0, 6.0, 1e-2, 1e-3)
    assert rep.max_abs_residual < 1e-4


def test_train_tiny(bimodal, tmp_path):
    cfg = dl.TrainConfig()
    cfg.arch = [2, 16, 1]
    cfg.steps = 500
    cfg.batch = 32
    cfg.seed = 9
    net = dl.TrainedDenoiser.train(bimodal, cfg)
    assert math.isfinite(net.final_loss)
    path = str(tmp_path / "model.json")
    net.save(path)
    back = dl.TrainedDenoiser.load(path)
    assert back.posterior_mean(1.0, [0.5]) == net.posterior_mean(1.0, [0.5])
