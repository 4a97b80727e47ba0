# Monte Carlo diagnostics of the concentration behavior behind the
# guarantees: how fast sample second moments converge, how rarely the
# data-driven search cap escapes its envelope, how sharply squared noise
# norms concentrate, and the finite-sample tail-bound terms themselves.

import math

import numpy as np

from lassocv import (
    BoundInputs,
    NoiseKind,
    PopulationModel,
    concentration_rate,
    equicorrelation,
    excess_tail_terms,
    noise_tail_check,
    tail_events,
)
from lassocv.selection import default_a_n, default_m_n, oracle_radius

d = equicorrelation(12, 0.2)
beta = np.zeros(12)
beta[:2] = 1.0
beta *= math.sqrt(5.0 / float(beta @ d @ beta))
model = PopulationModel(beta, d, 1.0)

# --- sample second moments concentrate at the root-n rate -------------------
report = concentration_rate(model, [25, 50, 100, 200, 400], reps=300, seed=1)
for size, err in zip(report.sizes, report.mean_errors):
    print(f"sample size {size:4d}: mean max-norm error {err:.4f}")
print(f"log-log slope: {report.slope:.3f}  (root-n concentration is -0.5)")

# --- the search cap stays inside its envelope -------------------------------
rows = tail_events(
    model,
    a_n_rule=lambda n: default_a_n(n, model.p, 2.0, n // 2, default_m_n(n)),
    t_n=oracle_radius(model.p, 2.0, 100, default_m_n(200)),
    n_list=[200, 400],
    reps=500,
    seed=2,
)
for r in rows:
    print(f"n={r.n}: cap exceeded {r.cap_exceeded:.3f}, "
          f"below radius {r.below_radius:.3f} (envelope {r.bound:.2e})")

# --- squared noise norms concentrate as sub-Gaussian theory predicts --------
noise = noise_tail_check(NoiseKind.GAUSSIAN, n=100, reps=5000, seed=3)
for row in noise.rows:
    print(f"x={row.x:g}: exceedance {row.frequency:.4f} vs bound {row.bound:.4f}")

# --- the finite-sample tail-bound terms under the matched rates -------------
for n in (100, 1000, 10000):
    p = 2 * n
    c_n = n // 2
    m_n = default_m_n(n)
    terms = excess_tail_terms(BoundInputs(
        n=n, p=p, q=2.0, c_n=c_n,
        a_n=default_a_n(n, p, 2.0, c_n, m_n),
        t_n=oracle_radius(p, 2.0, c_n, m_n),
        f_const=9.0 * model.snr, kappa=1.0,
    ))
    print(f"n={n:5d}: search term {terms.search_term:9.1f}, "
          f"radius term {terms.radius_term:.4f}")
