"""Predictive risk machinery: population, empirical, and cross-validated
risks, the constrained population optimum, and excess risk.

Every risk is a quadratic form gamma' S gamma in the augmented vector
gamma = (-1, beta) where S is a second-moment matrix of (Y, X): the
population matrix for the true risk, the sample matrix for the
empirical risk, and per-fold matrices for cross-validation. Population
risks are always evaluated in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solvers import SolverConfig, fit_constrained
from .types import (
    AugmentedSecondMoment,
    Dataset,
    EstimatorSpec,
    FoldScheme,
    InputError,
    Penalty,
    PopulationModel,
)

__all__ = [
    "RiskReport",
    "population_second_moment",
    "empirical_second_moment",
    "quadratic_risk",
    "population_risk",
    "empirical_risk",
    "cv_risk",
    "oracle_coefficients",
    "excess_risk",
    "covariance_factor",
]


@dataclass(frozen=True)
class RiskReport:
    """Exact risks of an estimate relative to the constrained optimum."""

    population_risk: float
    oracle_risk: float
    excess_risk: float
    noise_floor: float

    def __post_init__(self):
        if self.excess_risk != self.population_risk - self.oracle_risk:
            raise InputError("excess_risk must equal population_risk - oracle_risk")
        if self.population_risk < 0.0:
            raise InputError("population_risk must be nonnegative")


def population_second_moment(model: PopulationModel) -> AugmentedSecondMoment:
    """Exact second-moment matrix of (Y, X) under the model.

    Block form: entry (0, 0) is snr + sigma2, the first row/column is
    D beta_star, and the trailing block is D itself.
    """
    p = model.p
    out = np.empty((p + 1, p + 1))
    db = model.d @ model.beta_star
    out[0, 0] = float(model.beta_star @ db) + model.sigma2
    out[0, 1:] = db
    out[1:, 0] = db
    out[1:, 1:] = model.d
    return AugmentedSecondMoment(out)


def empirical_second_moment(data: Dataset) -> AugmentedSecondMoment:
    """Sample second-moment matrix (1/n) sum of z_i z_i' for z = (y, x)."""
    z = np.column_stack([data.y, data.x])
    return AugmentedSecondMoment(z.T @ z / data.n)


def quadratic_risk(beta, moment: AugmentedSecondMoment) -> float:
    """Quadratic form gamma' S gamma with gamma = (-1, beta)."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != moment.p:
        raise InputError(f"beta has length {beta.shape[0]}, expected {moment.p}")
    gamma = np.concatenate([[-1.0], beta])
    return float(gamma @ (moment.sigma @ gamma))


def population_risk(beta, model: PopulationModel) -> float:
    """Expected squared prediction error of the linear predictor beta."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != model.p:
        raise InputError(f"beta has length {beta.shape[0]}, expected {model.p}")
    diff = beta - model.beta_star
    return float(diff @ (model.d @ diff)) + model.sigma2


def empirical_risk(beta, data: Dataset) -> float:
    """Mean squared residual (1/n) ||y - X beta||^2."""
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape[0] != data.p:
        raise InputError(f"beta has length {beta.shape[0]}, expected {data.p}")
    r = data.y - data.x @ beta
    return float(r @ r) / data.n


def cv_risk(
    data: Dataset,
    spec: EstimatorSpec,
    folds: FoldScheme,
    cfg: SolverConfig | None = None,
) -> float:
    """K-fold cross-validation estimate of the risk at one radius.

    Each fold is refit on its complement and scored on the held-out
    rows; the fold averages are combined in a canonical order so the
    value does not depend on how the folds were listed.
    """
    cfg = cfg or SolverConfig()
    if folds.n != data.n:
        raise InputError(f"fold scheme is for n={folds.n}, data has n={data.n}")
    total = 0.0
    for fold in sorted(folds.folds, key=lambda f: int(f[0])):
        train = folds.training_indices(fold)
        fit = fit_constrained(Dataset(data.y[train], data.x[train]), spec, cfg)
        err = data.y[fold] - data.x[fold] @ fit
        total += float(err @ err) / fold.size
    return total / folds.k


def covariance_factor(d: np.ndarray) -> np.ndarray:
    """Factor L with L'L = d from the symmetric eigendecomposition.

    Small negative eigenvalues (down to -1e-10) are clipped to zero;
    anything lower is rejected as indefinite.
    """
    d = np.asarray(d, dtype=np.float64)
    vals, vecs = np.linalg.eigh(d)
    if vals.min() < -1e-10:
        raise InputError(f"covariance has eigenvalue {vals.min()}; not PSD")
    return np.sqrt(np.clip(vals, 0.0, None))[:, None] * vecs.T


def oracle_coefficients(
    model: PopulationModel, t: float, cfg: SolverConfig | None = None
) -> np.ndarray:
    """Population-risk minimizer over the l1 ball of radius t.

    Minimizing (b - beta_star)' D (b - beta_star) over the ball equals a
    constrained least-squares fit with design L and response L beta_star
    where L'L = D, so the constrained solver is reused on that synthetic
    instance.
    """
    t = float(t)
    if t < 0.0 or not math.isfinite(t):
        raise InputError("t must be a finite nonnegative real")
    if float(np.abs(model.beta_star).sum()) <= t:
        return model.beta_star.copy()
    factor = covariance_factor(model.d)
    synthetic = Dataset(factor @ model.beta_star, factor)
    return fit_constrained(synthetic, EstimatorSpec(Penalty.LASSO, t), cfg)


def excess_risk(
    beta_hat,
    t_n: float,
    model: PopulationModel,
    cfg: SolverConfig | None = None,
) -> RiskReport:
    """Risk of beta_hat minus the risk of the radius-t_n population
    optimum. Negative values mean the estimate beats the constrained
    optimum, which is possible when its own radius was chosen larger.
    """
    achieved = population_risk(beta_hat, model)
    oracle = population_risk(oracle_coefficients(model, t_n, cfg), model)
    return RiskReport(
        population_risk=achieved,
        oracle_risk=oracle,
        excess_risk=achieved - oracle,
        noise_floor=model.sigma2,
    )
