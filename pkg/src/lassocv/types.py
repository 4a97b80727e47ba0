"""Shared domain types: observed data, population models, estimator
settings, fold schemes, and selection results.

All types validate their invariants at construction and are immutable
afterwards, so instances can be shared freely across worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "InputError",
    "NoiseKind",
    "Penalty",
    "Selector",
    "Dataset",
    "PopulationModel",
    "AugmentedSecondMoment",
    "EstimatorSpec",
    "FoldScheme",
    "SelectionResult",
    "SimCondition",
    "equicorrelation",
]

SYMMETRY_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


class InputError(ValueError):
    """Raised when an input or a type invariant is violated."""


class NoiseKind(str, Enum):
    GAUSSIAN = "gaussian"
    SCALED_T3 = "t3"


class Penalty(str, Enum):
    LASSO = "lasso"
    GROUP_LASSO = "group_lasso"
    SQRT_LASSO = "sqrt_lasso"


class Selector(str, Enum):
    CV = "cv"
    AIC = "aic"
    BIC = "bic"
    GCV = "gcv"
    SSR = "ssr"


def _as_readonly(a, dtype=np.float64, ndim=None, name="array"):
    out = np.array(a, dtype=dtype)
    if ndim is not None and out.ndim != ndim:
        raise InputError(f"{name}: expected {ndim}-dimensional array, got {out.ndim}")
    out.setflags(write=False)
    return out


def _require_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name}: entries must be finite (no NaN/Inf)")


@dataclass(frozen=True)
class Dataset:
    """Observed regression data: response vector and design matrix.

    Parameters
    ----------
    y : array, shape (n,)
        Response vector.
    x : array, shape (n, p)
        Design matrix; row i holds the predictors of observation i.
    """

    y: np.ndarray
    x: np.ndarray
    n: int = field(init=False)
    p: int = field(init=False)

    def __post_init__(self):
        y = _as_readonly(self.y, ndim=1, name="y")
        x = _as_readonly(self.x, ndim=2, name="x")
        if y.shape[0] != x.shape[0]:
            raise InputError(
                f"y length {y.shape[0]} does not match design rows {x.shape[0]}"
            )
        if y.shape[0] < 1:
            raise InputError("dataset must contain at least one observation")
        if x.shape[1] < 1:
            raise InputError("design must contain at least one column")
        _require_finite(y, "y")
        _require_finite(x, "x")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "n", int(y.shape[0]))
        object.__setattr__(self, "p", int(x.shape[1]))


@dataclass(frozen=True)
class PopulationModel:
    """Linear data-generating process with known second moments.

    Holds the true coefficient vector, the design covariance, and the
    noise law, from which exact predictive risks are computable in
    closed form.

    Parameters
    ----------
    beta_star : array, shape (p,)
        True regression coefficients.
    d : array, shape (p, p)
        Design covariance; must be symmetric positive semidefinite.
    sigma2 : float
        Noise variance, strictly positive.
    noise_kind : NoiseKind
        Noise law; the rescaled t(3) variant divides draws by sqrt(3)
        so its variance is exactly 1.
    """

    beta_star: np.ndarray
    d: np.ndarray
    sigma2: float
    noise_kind: NoiseKind = NoiseKind.GAUSSIAN

    def __post_init__(self):
        beta = _as_readonly(self.beta_star, ndim=1, name="beta_star")
        d = _as_readonly(self.d, ndim=2, name="d")
        _require_finite(beta, "beta_star")
        _require_finite(d, "d")
        p = beta.shape[0]
        if d.shape != (p, p):
            raise InputError(f"d must be {p}x{p}, got {d.shape}")
        if not np.allclose(d, d.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise InputError(f"d must be symmetric within {SYMMETRY_TOL}")
        eigmin = float(np.linalg.eigvalsh(d).min()) if p else 0.0
        if eigmin < EIGENVALUE_FLOOR:
            raise InputError(f"d has eigenvalue {eigmin} below {EIGENVALUE_FLOOR}")
        sigma2 = float(self.sigma2)
        if not (sigma2 > 0.0) or not math.isfinite(sigma2):
            raise InputError("sigma2 must be a positive finite real")
        object.__setattr__(self, "beta_star", beta)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "sigma2", sigma2)
        object.__setattr__(self, "noise_kind", NoiseKind(self.noise_kind))

    @property
    def p(self) -> int:
        return int(self.beta_star.shape[0])

    @property
    def snr(self) -> float:
        """Signal energy under the design covariance."""
        return float(self.beta_star @ (self.d @ self.beta_star))


@dataclass(frozen=True)
class AugmentedSecondMoment:
    """Second-moment matrix of the stacked variable (Y, X).

    Coordinate 0 is the response; entry (0, 0) is the second moment of
    Y, block (1:, 1:) is the second moment of X.
    """

    sigma: np.ndarray

    def __post_init__(self):
        s = _as_readonly(self.sigma, ndim=2, name="sigma")
        _require_finite(s, "sigma")
        if s.shape[0] != s.shape[1] or s.shape[0] < 2:
            raise InputError(f"sigma must be square of size >= 2, got {s.shape}")
        if not np.allclose(s, s.T, atol=SYMMETRY_TOL, rtol=0.0):
            raise InputError(f"sigma must be symmetric within {SYMMETRY_TOL}")
        if np.any(np.diag(s) < 0.0):
            raise InputError("sigma must have a nonnegative diagonal")
        object.__setattr__(self, "sigma", s)

    @property
    def p(self) -> int:
        return int(self.sigma.shape[0]) - 1

    @property
    def response_moment(self) -> float:
        return float(self.sigma[0, 0])


def _validated_groups(groups):
    """Normalize a group partition to a tuple of sorted index arrays."""
    cleaned = []
    seen = set()
    for g in groups:
        idx = np.array(sorted(int(j) for j in g), dtype=np.intp)
        if idx.size == 0:
            raise InputError("groups must be nonempty")
        if np.any(idx < 0):
            raise InputError("group indices must be nonnegative")
        members = set(idx.tolist())
        if len(members) != idx.size or members & seen:
            raise InputError("groups must be disjoint")
        seen |= members
        idx.setflags(write=False)
        cleaned.append(idx)
    p = len(seen)
    if seen != set(range(p)):
        raise InputError("groups must cover indices 0..p-1 without gaps")
    return tuple(cleaned), p


@dataclass(frozen=True)
class EstimatorSpec:
    """Which constrained estimator to fit: penalty geometry, constraint
    radius, and (for the group penalty) the group partition.
    """

    penalty: Penalty
    t: float
    groups: tuple | None = None

    def __post_init__(self):
        penalty = Penalty(self.penalty)
        t = float(self.t)
        if not (t >= 0.0) or not math.isfinite(t):
            raise InputError("t must be a finite nonnegative real")
        groups = self.groups
        if penalty is Penalty.GROUP_LASSO:
            if groups is None:
                raise InputError("group penalty requires a group partition")
            groups, _ = _validated_groups(groups)
        elif groups is not None:
            raise InputError("groups are only allowed with the group penalty")
        object.__setattr__(self, "penalty", penalty)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "groups", groups)

    def with_radius(self, t: float) -> "EstimatorSpec":
        return EstimatorSpec(self.penalty, t, self.groups)


@dataclass(frozen=True)
class FoldScheme:
    """A family of disjoint, balanced validation sets over n observations.

    ``c_n`` is the nominal validation size floor(n/k) and ``b_n`` is the
    smaller of the validation and training sizes, the quantity that
    governs the cross-validation guarantees.
    """

    folds: tuple
    n: int
    k: int = field(init=False)

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise InputError("n must be positive")
        cleaned = []
        seen = set()
        for v in self.folds:
            idx = np.array(sorted(int(i) for i in v), dtype=np.intp)
            if idx.size == 0:
                raise InputError("every fold must be nonempty")
            if np.any(idx < 0) or np.any(idx >= n):
                raise InputError(f"fold indices must lie in 0..{n - 1}")
            members = set(idx.tolist())
            if len(members) != idx.size or members & seen:
                raise InputError("folds must be pairwise disjoint")
            seen |= members
            idx.setflags(write=False)
            cleaned.append(idx)
        if not cleaned:
            raise InputError("at least one fold is required")
        sizes = [f.size for f in cleaned]
        if max(sizes) - min(sizes) > 1:
            raise InputError("folds must be balanced (sizes differing by at most 1)")
        object.__setattr__(self, "folds", tuple(cleaned))
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", len(cleaned))

    @classmethod
    def random(cls, n: int, k: int, seed) -> "FoldScheme":
        """Assign 0..n-1 to k folds: seeded permutation dealt round-robin."""
        n = int(n)
        k = int(k)
        if k < 1 or k > n:
            raise InputError(f"k must be in 1..{n}, got {k}")
        rng = np.random.default_rng(seed)
        perm = rng.permutation(n)
        return cls(tuple(perm[j::k] for j in range(k)), n)

    @property
    def c_n(self) -> int:
        return self.n // self.k

    @property
    def b_n(self) -> int:
        return min(self.n - self.c_n, self.c_n)

    def training_indices(self, fold: np.ndarray) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[fold] = False
        out = np.nonzero(mask)[0]
        if out.size == 0:
            raise InputError("fold complement is empty; cannot train")
        return out


#: Selectors whose grid/criterion fields form a search curve. For these the
#: reported radius must be the argmin of the curve. The scaled-regression
#: selector instead stores its noise-level trajectory in those fields.
_GRID_SELECTORS = frozenset({Selector.CV, Selector.AIC, Selector.BIC, Selector.GCV})


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of a tuning-parameter search.

    ``grid`` and ``criterion`` hold the search curve for grid selectors;
    for the scaled-regression selector they hold the noise-level
    trajectory of the alternating iteration.
    """

    selector: Selector
    t_hat: float
    grid: np.ndarray
    criterion: np.ndarray
    beta_hat: np.ndarray
    converged: bool = True

    def __post_init__(self):
        selector = Selector(self.selector)
        t_hat = float(self.t_hat)
        grid = _as_readonly(self.grid, ndim=1, name="grid")
        criterion = _as_readonly(self.criterion, ndim=1, name="criterion")
        beta = _as_readonly(self.beta_hat, ndim=1, name="beta_hat")
        _require_finite(beta, "beta_hat")
        if t_hat < 0.0:
            raise InputError("t_hat must be nonnegative")
        if selector in _GRID_SELECTORS:
            if grid.shape != criterion.shape:
                raise InputError("grid and criterion must be aligned")
            hits = np.nonzero(grid == t_hat)[0]
            if hits.size == 0:
                raise InputError("t_hat must be an element of the grid")
            finite = criterion[np.isfinite(criterion)]
            if finite.size == 0:
                raise InputError("criterion curve has no finite values")
            if not np.any(criterion[hits] == finite.min()):
                raise InputError("criterion at t_hat must equal the curve minimum")
        object.__setattr__(self, "selector", selector)
        object.__setattr__(self, "t_hat", t_hat)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "criterion", criterion)
        object.__setattr__(self, "beta_hat", beta)
        object.__setattr__(self, "converged", bool(self.converged))


def equicorrelation(p: int, rho: float) -> np.ndarray:
    """Covariance with unit diagonal and constant off-diagonal correlation."""
    rho = float(rho)
    if not (0.0 <= rho < 1.0):
        raise InputError(f"rho must be in [0, 1), got {rho}")
    d = np.full((int(p), int(p)), rho)
    np.fill_diagonal(d, 1.0)
    return d


@dataclass(frozen=True)
class SimCondition:
    """One cell of the simulation grid.

    ``alpha`` sets the sparsity through s = ceil(n**alpha) nonzero
    coefficients; ``rho`` sets the equicorrelation of the design;
    ``snr`` is the exact signal energy the coefficients are scaled to.
    """

    n: int
    p: int
    rho: float
    alpha: float
    snr: float
    noise_kind: NoiseKind
    replications: int
    seed: int

    def __post_init__(self):
        n = int(self.n)
        p = int(self.p)
        rho = float(self.rho)
        alpha = float(self.alpha)
        snr = float(self.snr)
        replications = int(self.replications)
        seed = int(self.seed)
        if n < 1:
            raise InputError("n must be positive")
        if p < 1:
            raise InputError("p must be positive")
        if not (0.0 <= rho < 1.0):
            raise InputError(f"rho must be in [0, 1), got {rho}")
        if not (0.0 < alpha <= 1.0):
            raise InputError(f"alpha must be in (0, 1], got {alpha}")
        if not (snr > 0.0) or not math.isfinite(snr):
            raise InputError("snr must be a positive finite real")
        if replications < 1:
            raise InputError("replications must be positive")
        if not (0 <= seed < 2**64):
            raise InputError("seed must fit in an unsigned 64-bit integer")
        if self.sparsity_of(n, alpha) > p:
            raise InputError(
                f"ceil(n**alpha) = {self.sparsity_of(n, alpha)} exceeds p = {p}"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "snr", snr)
        object.__setattr__(self, "noise_kind", NoiseKind(self.noise_kind))
        object.__setattr__(self, "replications", replications)
        object.__setattr__(self, "seed", seed)

    @staticmethod
    def sparsity_of(n: int, alpha: float) -> int:
        return int(math.ceil(n**alpha))

    @property
    def s(self) -> int:
        """Number of nonzero true coefficients."""
        return self.sparsity_of(self.n, self.alpha)

    @property
    def condition_id(self) -> str:
        return (
            f"n{self.n}_p{self.p}_rho{self.rho:g}_alpha{self.alpha:g}"
            f"_snr{self.snr:g}_{self.noise_kind.value}"
        )
