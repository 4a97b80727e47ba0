# Constrained sparse fits from the ground up: norm-ball projections,
# the projected-gradient solver, and the radius beyond which the
# constraint stops binding.

import numpy as np

from lassocv import (
    Dataset,
    EstimatorSpec,
    Penalty,
    binding_threshold,
    empirical_risk,
    fit_constrained,
    l1_norm,
    project_group_ball,
    project_l1_ball,
)

rng = np.random.default_rng(0)

# --- projections -----------------------------------------------------------
v = np.array([3.0, -1.0, 0.4])
for radius in (0.5, 1.0, 2.0, 5.0):
    proj = project_l1_ball(v, radius)
    print(f"radius {radius:4.1f}: projection {np.round(proj, 4)}  "
          f"(l1 norm {l1_norm(proj):.4f})")

# a group constraint shrinks whole blocks toward zero together
grouped = project_group_ball(rng.standard_normal(6), [[0, 1, 2], [3, 4], [5]], 1.0)
print("group projection:", np.round(grouped, 4))

# --- fitting under a shrinking constraint ----------------------------------
n, p = 60, 12
x = rng.standard_normal((n, p))
beta_true = np.zeros(p)
beta_true[[0, 3, 7]] = (2.0, -1.0, 0.5)
y = x @ beta_true + 0.5 * rng.standard_normal(n)
data = Dataset(y, x)

print("\nradius   objective   nonzeros")
for t in (0.0, 0.5, 1.0, 2.0, 3.5, 6.0):
    beta = fit_constrained(data, EstimatorSpec(Penalty.LASSO, t))
    nnz = int(np.count_nonzero(np.abs(beta) > 1e-8))
    print(f"{t:6.2f}   {empirical_risk(beta, data):9.5f}   {nnz:8d}")

# beyond this radius the fit equals plain least squares
t0 = binding_threshold(data)
beta_free = fit_constrained(data, EstimatorSpec(Penalty.LASSO, 1.1 * t0))
beta_ls, *_ = np.linalg.lstsq(x, y, rcond=None)
print(f"\nbinding threshold: {t0:.4f}")
print("objective at 1.1 * threshold equals least squares:",
      np.isclose(empirical_risk(beta_free, data), empirical_risk(beta_ls, data)))
