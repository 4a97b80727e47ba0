"""Independent reference computations used to check the solvers.

Nothing here shares code with the library's optimization paths: the
constrained objective is minimized by exhaustive face enumeration plus
an interior least-squares check, projections are checked against dense
feasible grids, and risks are recomputed from first principles.
"""

import itertools

import numpy as np
from scipy.optimize import linprog


def min_l1_over_ls_solutions(x, y):
    """Smallest l1 norm among least-squares solutions, via linear programming.

    The LS solution set is the affine set of the normal equations
    X'X b = X'y; splitting b = u - w with u, w >= 0 makes min ||b||_1 an LP.
    """
    g = x.T @ x
    c = x.T @ y
    p = x.shape[1]
    res = linprog(
        np.ones(2 * p),
        A_eq=np.hstack([g, -g]),
        b_eq=c,
        bounds=[(0, None)] * (2 * p),
        method="highs",
    )
    if not res.success:
        raise RuntimeError(f"LP for the minimum-l1 LS solution failed: {res.message}")
    return float(res.fun)


def constrained_objective_oracle(x, y, t):
    """True minimum of (1/n)||y - X b||^2 over the l1 ball of radius t.

    Every optimum is either a least-squares solution inside the ball or
    lies on the boundary, where fixing a support and sign pattern turns
    the problem into an equality-constrained quadratic solve. All
    3^p - 1 patterns are enumerated; candidates violating their sign
    pattern or feasibility are discarded.
    """
    n, p = x.shape
    best = float(y @ y) / n  # the origin is always feasible
    if t <= 0:
        return best
    beta_ls, *_ = np.linalg.lstsq(x, y, rcond=None)
    if min_l1_over_ls_solutions(x, y) <= t + 1e-9:
        r = y - x @ beta_ls
        best = min(best, float(r @ r) / n)
    for size in range(1, p + 1):
        for supp in itertools.combinations(range(p), size):
            xs = x[:, supp]
            gram = (2.0 / n) * (xs.T @ xs)
            top = (2.0 / n) * (xs.T @ y)
            for signs in itertools.product((-1.0, 1.0), repeat=size):
                s = np.array(signs)
                kkt = np.zeros((size + 1, size + 1))
                kkt[:size, :size] = gram
                kkt[:size, size] = s
                kkt[size, :size] = s
                rhs = np.concatenate([top, [t]])
                sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
                b = sol[:size]
                if np.any(s * b < -1e-10):
                    continue
                full = np.zeros(p)
                full[list(supp)] = b
                if np.abs(full).sum() > t + 1e-9:
                    continue
                resid = y - x @ full
                best = min(best, float(resid @ resid) / n)
    return best


def l1_grid(step, box, dim):
    """Cartesian grid over [-box, box]^dim, returned as (points, l1 norms)."""
    axis = np.arange(-box, box + step / 2, step)
    pts = np.array(list(itertools.product(axis, repeat=dim)))
    return pts, np.abs(pts).sum(axis=1)


def best_feasible_grid_point(pts, norms, v, t):
    """Distance-minimizing grid point inside the l1 ball of radius t."""
    feas = norms <= t
    if not np.any(feas):
        return None
    cand = pts[feas]
    d2 = ((cand - v) ** 2).sum(axis=1)
    return cand[int(np.argmin(d2))]


def cv_risk_reference(y, x, t, fold_lists, fit):
    """Hand-rolled K-fold validation average, independent of the library.

    ``fit`` maps (x_train, y_train, t) to coefficients; the surrounding
    arithmetic (complement split, per-fold mean, fold average) is what
    this reference pins down.
    """
    n = len(y)
    total = 0.0
    for fold in fold_lists:
        fold = np.asarray(fold)
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        beta = fit(x[mask], y[mask], t)
        errs = y[fold] - x[fold] @ beta
        total += float(errs @ errs) / len(fold)
    return total / len(fold_lists)
