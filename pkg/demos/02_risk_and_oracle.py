# Exact predictive risk under a known model, the constrained population
# optimum, and excess risk. Everything here is closed form: no test set
# is ever drawn.

import numpy as np

from lassocv import (
    PopulationModel,
    equicorrelation,
    excess_risk,
    oracle_coefficients,
    population_risk,
    population_second_moment,
)

p = 8
d = equicorrelation(p, 0.3)
beta_star = np.zeros(p)
beta_star[:3] = (1.5, -1.0, 0.5)
model = PopulationModel(beta_star, d, sigma2=1.0)

print(f"signal energy (snr): {model.snr:.4f}")
print(f"risk of the truth:   {population_risk(beta_star, model):.4f}  (= sigma2)")
print(f"risk of zero:        {population_risk(np.zeros(p), model):.4f}  (= snr + sigma2)")

# the augmented second-moment matrix collects all of these as quadratic forms
moment = population_second_moment(model)
print(f"second moment of y:  {moment.response_moment:.4f}")

# the best predictor inside a shrinking l1 ball, and its risk
print("\nradius   oracle risk   oracle nonzeros")
for t in (0.0, 0.5, 1.0, 2.0, 3.0, 4.0):
    beta_t = oracle_coefficients(model, t)
    nnz = int(np.count_nonzero(np.abs(beta_t) > 1e-10))
    print(f"{t:6.2f}   {population_risk(beta_t, model):11.5f}   {nnz:15d}")

# excess risk of an arbitrary estimate relative to the radius-1 optimum
estimate = np.zeros(p)
estimate[0] = 1.0
report = excess_risk(estimate, t_n=1.0, model=model)
print(f"\nestimate risk {report.population_risk:.4f}, "
      f"radius-1 optimum {report.oracle_risk:.4f}, "
      f"excess {report.excess_risk:+.4f}")
