# One dataset, five ways to pick the constraint radius: K-fold
# cross-validation over a data-driven interval, AIC/BIC with the true
# variance plugged in, variance-free GCV, and scaled sparse regression.

import numpy as np

from lassocv import (
    Dataset,
    FoldScheme,
    build_grid,
    compute_t_max,
    default_a_n,
    default_m_n,
    df_hat,
    select_aic,
    select_bic,
    select_cv,
    select_gcv,
    select_ssr,
)

rng = np.random.default_rng(42)
n, p, sigma2 = 100, 40, 1.0
x = rng.standard_normal((n, p))
beta_true = np.zeros(p)
beta_true[:4] = (1.2, -0.8, 0.6, 0.4)
y = x @ beta_true + np.sqrt(sigma2) * rng.standard_normal(n)
data = Dataset(y, x)

# the search interval is [0, ||y||^2 / a_n] with a slowly growing a_n
folds = FoldScheme.random(n, k=10, seed=1)
a_n = default_a_n(n, p, q=2.0, b_n=folds.b_n, m_n=default_m_n(n))
grid = build_grid(compute_t_max(data, a_n), size=100)
print(f"search interval: [0, {grid.t_max:.3f}]  "
      f"(a_n = {a_n:.1f}, true l1 norm = {np.abs(beta_true).sum():.3f})")

results = {
    "cv": select_cv(data, folds, grid),
    "aic": select_aic(data, grid, sigma2),
    "bic": select_bic(data, grid, sigma2),
    "gcv": select_gcv(data, grid),
    "ssr": select_ssr(data),
}

print("\nselector   chosen radius   df   support recovered")
truth = {int(j) for j in np.flatnonzero(beta_true)}
for name, res in results.items():
    support = {int(j) for j in np.flatnonzero(np.abs(res.beta_hat) > 1e-8)}
    print(f"{name:8s}   {res.t_hat:13.4f}   {df_hat(res.beta_hat, 1e-8):2d}   "
          f"{sorted(support & truth)} of {sorted(truth)}")

# the scaled-regression iteration also estimates the noise level
ssr = results["ssr"]
print("\nscaled-regression noise-level trajectory:",
      np.round(ssr.grid, 4).tolist())
