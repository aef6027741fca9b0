"""Diffusion-model laboratory over Gaussian-mixture populations.

Thin wrapper around the compiled core. See the README for the formula
conventions (forward noising z(t) = y + sqrt(t) * noise, y-prediction
denoisers, log-uniform time grids).
"""

from ._core import (
    DifflabError,
    Denoiser,
    Estimate,
    GaussianMixture,
    InitMode,
    LikelihoodReport,
    OracleDenoiser,
    ResidualReport,
    ScoreCheck,
    TailMode,
    TimeGrid,
    TrainConfig,
    TrainedDenoiser,
    boundary_term,
    entropy_estimate,
    fokker_planck_residual,
    make_grid,
    mmse,
    mutual_information,
    nll,
    sample_population,
    sample_zt,
    score,
    score_fd_check,
    set_max_threads,
)

__all__ = [
    "DifflabError",
    "Denoiser",
    "Estimate",
    "GaussianMixture",
    "InitMode",
    "LikelihoodReport",
    "OracleDenoiser",
    "ResidualReport",
    "ScoreCheck",
    "TailMode",
    "TimeGrid",
    "TrainConfig",
    "TrainedDenoiser",
    "boundary_term",
    "entropy_estimate",
    "fokker_planck_residual",
    "make_grid",
    "mmse",
    "mutual_information",
    "nll",
    "sample_population",
    "sample_zt",
    "score",
    "score_fd_check",
    "set_max_threads",
]
