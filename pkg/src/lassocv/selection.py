"""Tuning-parameter selectors: K-fold cross-validation over a
data-driven interval, penalized-fit information criteria, generalized
cross-validation, and scaled sparse regression.

Grid selectors evaluate their criterion on an increasing radius grid,
warm-starting each fit from the previous grid point, and break ties
toward the smallest radius (the more regularized fit).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .solvers import (
    SolverConfig,
    SolverConvergenceWarning,
    fit_constrained,
    fit_lagrangian,
    gram_lipschitz,
    l1_norm,
)
from .types import (
    Dataset,
    EstimatorSpec,
    FoldScheme,
    InputError,
    Penalty,
    SelectionResult,
    Selector,
)

__all__ = [
    "SelectionError",
    "SearchGrid",
    "GridPath",
    "compute_t_max",
    "default_m_n",
    "default_a_n",
    "oracle_radius",
    "build_grid",
    "grid_fit_path",
    "select_cv",
    "df_hat",
    "gic_criterion",
    "gcv_criterion",
    "select_gic",
    "select_aic",
    "select_bic",
    "select_gcv",
    "select_ssr",
    "ssr_lambda0",
]


class SelectionError(RuntimeError):
    """Raised when a selector has no admissible grid point."""


@dataclass(frozen=True)
class SearchGrid:
    """Candidate constraint radii: a grid from 0 to a data-driven cap."""

    t_max: float
    points: np.ndarray
    size: int = 0

    def __post_init__(self):
        t_max = float(self.t_max)
        pts = np.array(self.points, dtype=np.float64)
        pts.setflags(write=False)
        if t_max < 0.0 or not math.isfinite(t_max):
            raise InputError("t_max must be a finite nonnegative real")
        if pts.ndim != 1 or pts.size < 1:
            raise InputError("points must be a nonempty vector")
        if pts[0] != 0.0 or pts[-1] != t_max:
            raise InputError("points must start at 0 and end at t_max")
        if t_max > 0.0 and np.any(np.diff(pts) <= 0.0):
            raise InputError("points must be strictly increasing")
        object.__setattr__(self, "t_max", t_max)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "size", int(pts.size))


def compute_t_max(data: Dataset, a_n: float) -> float:
    """Upper endpoint of the search interval: ||y||^2 / a_n."""
    a_n = float(a_n)
    if not (a_n > 0.0):
        raise InputError("a_n must be positive")
    return float(data.y @ data.y) / a_n


def default_m_n(n: int) -> float:
    """Slowly diverging factor log log n, clipped below at 1."""
    n = int(n)
    if n < 2:
        return 1.0
    inner = math.log(n)
    return max(1.0, math.log(inner)) if inner > 0.0 else 1.0


def _tail_exponent(q: float) -> float:
    """Exponent 1/4 + 1/(2q), with the heaviest-tail case q = inf giving 1/4."""
    q = float(q)
    if math.isinf(q):
        return 0.25
    if not (q >= 1.0):
        raise InputError("q must be >= 1 or infinite")
    return 0.25 + 1.0 / (2.0 * q)


def default_a_n(n: int, p: float, q: float, b_n: int, m_n: float | None = None) -> float:
    """Normalizing rate n (log p)^(1/4 + 1/(2q)) m_n / b_n^(1/4).

    ``p`` only enters through its logarithm, so non-integer values are
    accepted. ``m_n`` defaults to :func:`default_m_n`.
    """
    n = int(n)
    p = float(p)
    b_n = int(b_n)
    if p < 2.0:
        raise InputError("p must be at least 2")
    if not (0 < b_n <= n):
        raise InputError("b_n must lie in 1..n")
    m_n = default_m_n(n) if m_n is None else float(m_n)
    if not (m_n > 0.0):
        raise InputError("m_n must be positive")
    return n * math.log(p) ** _tail_exponent(q) * m_n / b_n**0.25


def oracle_radius(p: float, q: float, b_n: int, m_n: float) -> float:
    """Radius rate b_n^(1/4) / (m_n (log p)^(1/4 + 1/(2q))).

    The boundary case of the admissible growth for the comparison
    radius; paired with :func:`default_a_n` it makes a_n * t_n = n.
    """
    p = float(p)
    b_n = int(b_n)
    m_n = float(m_n)
    if p < 2.0:
        raise InputError("p must be at least 2")
    if b_n < 1:
        raise InputError("b_n must be positive")
    if not (m_n > 0.0):
        raise InputError("m_n must be positive")
    return b_n**0.25 / (m_n * math.log(p) ** _tail_exponent(q))


def build_grid(t_max: float, size: int = 100) -> SearchGrid:
    """Uniform grid of `size` points on [0, t_max]."""
    size = int(size)
    if size < 2:
        raise InputError("grid size must be at least 2")
    return SearchGrid(float(t_max), np.linspace(0.0, float(t_max), size))


@dataclass(frozen=True)
class GridPath:
    """Constrained fits along a radius grid on one dataset."""

    grid: SearchGrid
    betas: np.ndarray
    emp_risk: np.ndarray

    def df(self, zero_threshold: float) -> np.ndarray:
        return np.array([df_hat(b, zero_threshold) for b in self.betas])


def grid_fit_path(
    data: Dataset,
    grid: SearchGrid,
    cfg: SolverConfig | None = None,
    penalty: Penalty = Penalty.LASSO,
    groups=None,
) -> GridPath:
    """Fit every grid radius on the full dataset, warm-starting each fit
    from the previous one."""
    cfg = cfg or SolverConfig()
    lip = gram_lipschitz(data.x)
    betas = np.empty((grid.size, data.p))
    emp = np.empty(grid.size)
    prev = None
    for i, t in enumerate(grid.points):
        spec = EstimatorSpec(penalty, float(t), groups)
        beta = fit_constrained(data, spec, cfg, x0=prev, lipschitz=lip)
        betas[i] = beta
        r = data.y - data.x @ beta
        emp[i] = float(r @ r) / data.n
        prev = beta
    return GridPath(grid, betas, emp)


def _argmin_first(values: np.ndarray) -> int:
    finite = np.isfinite(values)
    if not np.any(finite):
        raise SelectionError("criterion has no finite values on the grid")
    best = values[finite].min()
    return int(np.nonzero(finite & (values == best))[0][0])


def select_cv(
    data: Dataset,
    folds: FoldScheme,
    grid: SearchGrid,
    cfg: SolverConfig | None = None,
    penalty: Penalty = Penalty.LASSO,
    groups=None,
) -> SelectionResult:
    """Pick the radius minimizing the K-fold cross-validation risk.

    Folds are processed in a canonical order, each sweeping the grid
    with warm starts, so the result is invariant to the order in which
    the folds were listed. The winning radius is refit on all rows.
    """
    cfg = cfg or SolverConfig()
    if folds.n != data.n:
        raise InputError(f"fold scheme is for n={folds.n}, data has n={data.n}")
    criterion = np.zeros(grid.size)
    for fold in sorted(folds.folds, key=lambda f: int(f[0])):
        train = folds.training_indices(fold)
        sub = Dataset(data.y[train], data.x[train])
        lip = gram_lipschitz(sub.x)
        x_val, y_val = data.x[fold], data.y[fold]
        prev = None
        for i, t in enumerate(grid.points):
            spec = EstimatorSpec(penalty, float(t), groups)
            beta = fit_constrained(sub, spec, cfg, x0=prev, lipschitz=lip)
            err = y_val - x_val @ beta
            criterion[i] += float(err @ err) / fold.size
            prev = beta
    criterion /= folds.k
    idx = _argmin_first(criterion)
    t_hat = float(grid.points[idx])
    beta_hat = fit_constrained(data, EstimatorSpec(penalty, t_hat, groups), cfg)
    return SelectionResult(Selector.CV, t_hat, grid.points, criterion, beta_hat)


def df_hat(beta, zero_threshold: float) -> int:
    """Active-set degrees of freedom: nonzero count minus one, floored at 0."""
    beta = np.asarray(beta, dtype=np.float64)
    if not np.all(np.isfinite(beta)):
        raise InputError("beta must be finite")
    zero_threshold = float(zero_threshold)
    if not (zero_threshold > 0.0):
        raise InputError("zero_threshold must be positive")
    return max(int(np.count_nonzero(np.abs(beta) > zero_threshold)) - 1, 0)


def gic_criterion(
    emp_risk: float,
    df: int,
    n: int,
    c_n: float,
    sigma2: float,
    normalized: bool = True,
) -> float:
    """Penalized empirical risk: emp + c_n sigma2 df / n.

    ``normalized=False`` drops the 1/n, putting the penalty on the raw
    scale; on (1/n)-scaled empirical risk that penalty dominates and is
    kept only for comparison.
    """
    penalty = c_n * sigma2 * df
    return emp_risk + (penalty / n if normalized else penalty)


def gcv_criterion(emp_risk: float, df: int, n: int) -> float:
    """Generalized cross-validation: emp / (1 - df/n)^2, infinite at df >= n."""
    if df >= n:
        return math.inf
    return emp_risk / (1.0 - df / n) ** 2


def _grid_result(selector, grid, criterion, path):
    idx = _argmin_first(criterion)
    t_hat = float(grid.points[idx])
    return SelectionResult(selector, t_hat, grid.points, criterion, path.betas[idx])


def select_gic(
    data: Dataset,
    grid: SearchGrid,
    c_n: float,
    sigma2: float,
    cfg: SolverConfig | None = None,
    normalized: bool = True,
    selector: Selector | None = None,
    path: GridPath | None = None,
) -> SelectionResult:
    """Minimize the information criterion with penalty weight c_n.

    c_n = 2 labels the result AIC and c_n = log n labels it BIC; other
    weights require an explicit ``selector`` label. ``sigma2`` is the
    noise variance to plug in (the criterion is not variance-free).
    ``path`` reuses precomputed grid fits.
    """
    cfg = cfg or SolverConfig()
    sigma2 = float(sigma2)
    if not (sigma2 > 0.0):
        raise InputError("sigma2 must be positive")
    if selector is None:
        if c_n == 2.0:
            selector = Selector.AIC
        elif abs(c_n - math.log(data.n)) <= 1e-12:
            selector = Selector.BIC
        else:
            raise InputError("nonstandard c_n requires an explicit selector label")
    if path is None:
        path = grid_fit_path(data, grid, cfg)
    df = path.df(cfg.zero_threshold)
    criterion = np.array(
        [
            gic_criterion(e, int(d), data.n, c_n, sigma2, normalized)
            for e, d in zip(path.emp_risk, df)
        ]
    )
    return _grid_result(selector, grid, criterion, path)


def select_aic(data, grid, sigma2, cfg=None, normalized=True, path=None):
    return select_gic(data, grid, 2.0, sigma2, cfg, normalized, Selector.AIC, path)


def select_bic(data, grid, sigma2, cfg=None, normalized=True, path=None):
    return select_gic(
        data, grid, math.log(data.n), sigma2, cfg, normalized, Selector.BIC, path
    )


def select_gcv(
    data: Dataset,
    grid: SearchGrid,
    cfg: SolverConfig | None = None,
    path: GridPath | None = None,
) -> SelectionResult:
    """Minimize the generalized cross-validation criterion.

    Needs no variance input. Grid points with df >= n are inadmissible;
    if every point is, a SelectionError is raised.
    """
    cfg = cfg or SolverConfig()
    if path is None:
        path = grid_fit_path(data, grid, cfg)
    df = path.df(cfg.zero_threshold)
    criterion = np.array(
        [gcv_criterion(e, int(d), data.n) for e, d in zip(path.emp_risk, df)]
    )
    if not np.any(np.isfinite(criterion)):
        raise SelectionError("every grid point has df >= n; GCV is degenerate")
    return _grid_result(Selector.GCV, grid, criterion, path)


def ssr_lambda0(n: int, p: int) -> float:
    """Universal penalty level sqrt(2 log p / n)."""
    if p < 2:
        raise InputError("p must be at least 2")
    return math.sqrt(2.0 * math.log(p) / n)


def select_ssr(
    data: Dataset,
    cfg: SolverConfig | None = None,
    max_rounds: int = 100,
    sigma_tol: float = 1e-6,
) -> SelectionResult:
    """Scaled sparse regression: alternate the noise level and the fit.

    Starting from the sample standard deviation of y, repeat
    sigma -> penalized fit at lambda0 * sigma -> residual noise level
    until the noise level stabilizes. The equivalent constraint radius
    is the l1 norm of the final fit; the grid/criterion fields carry the
    noise-level trajectory.
    """
    cfg = cfg or SolverConfig()
    if data.p < 2:
        raise InputError("p must be at least 2")
    lam0 = ssr_lambda0(data.n, data.p)
    sigma = float(np.std(data.y, ddof=1)) if data.n > 1 else float(abs(data.y[0]))
    beta = np.zeros(data.p)
    trajectory = [sigma]
    converged = False
    for _ in range(max_rounds):
        if sigma == 0.0:
            converged = True
            break
        beta = fit_lagrangian(data, lam0 * sigma, cfg, x0=beta)
        r = data.y - data.x @ beta
        sigma_new = math.sqrt(float(r @ r) / data.n)
        trajectory.append(sigma_new)
        if abs(sigma_new - sigma) < sigma_tol:
            sigma = sigma_new
            converged = True
            break
        sigma = sigma_new
    if not converged:
        warnings.warn(
            f"noise-level iteration did not stabilize within {max_rounds} rounds",
            SolverConvergenceWarning,
            stacklevel=2,
        )
    traj = np.array(trajectory)
    return SelectionResult(
        Selector.SSR, l1_norm(beta), traj, traj, beta, converged=converged
    )
