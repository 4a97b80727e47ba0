"""Monte Carlo checks of the concentration behavior the guarantees rest
on, plus a numeric evaluator for the finite-sample tail-bound terms.

These diagnostics measure empirical frequencies and rates against the
stated envelopes; they verify consequences, not derivations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .risk import population_second_moment
from .selection import _tail_exponent
from .simulate import draw_observations, generate_noise
from .types import InputError, NoiseKind, PopulationModel

__all__ = [
    "BoundInputs",
    "BoundTerms",
    "bound_terms_from_log_p",
    "excess_tail_terms",
    "max_norm",
    "ConcentrationReport",
    "concentration_rate",
    "TailEventRow",
    "tail_events",
    "NoiseTailRow",
    "NoiseTailReport",
    "noise_tail_check",
    "gaussian_design_f_const",
]


@dataclass(frozen=True)
class BoundInputs:
    """Inputs of the finite-sample excess-risk tail bound.

    ``f_const`` is a proxy for the squared sup of the regression
    function (infinite for Gaussian designs; see
    :func:`gaussian_design_f_const`) and ``kappa`` bounds the noise
    sub-Gaussian norm. ``p`` enters only through its logarithm, so
    non-integer values are accepted.
    """

    n: int
    p: float
    q: float
    c_n: int
    a_n: float
    t_n: float
    f_const: float
    kappa: float
    b_n: int = field(init=False)

    def __post_init__(self):
        n = int(self.n)
        p = float(self.p)
        c_n = int(self.c_n)
        a_n = float(self.a_n)
        t_n = float(self.t_n)
        if p < 2.0:
            raise InputError("p must be at least 2")
        if not (0 < c_n < n):
            raise InputError("c_n must lie strictly between 0 and n")
        if not (a_n > 0.0):
            raise InputError("a_n must be positive")
        if t_n < 0.0:
            raise InputError("t_n must be nonnegative")
        if self.f_const < 0.0 or self.kappa < 0.0:
            raise InputError("f_const and kappa must be nonnegative")
        _tail_exponent(self.q)  # validates q
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "c_n", c_n)
        object.__setattr__(self, "a_n", a_n)
        object.__setattr__(self, "t_n", t_n)
        object.__setattr__(self, "f_const", float(self.f_const))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "b_n", min(n - c_n, c_n))


@dataclass(frozen=True)
class BoundTerms:
    """The two displayed terms of the excess-risk tail bound."""

    search_term: float
    radius_term: float


def bound_terms_from_log_p(
    n: int,
    log_p: float,
    q: float,
    c_n: int,
    a_n: float,
    t_n: float,
    f_const: float,
    kappa: float,
) -> BoundTerms:
    """Evaluate the two bound terms with log p injected directly.

    search term: [1 + 2 n (F + 4 kappa^2) / a_n]^2
                 * sqrt((log p)^(1 + 2/q))
                 * (n^-1/2 + c_n^-1/2 + (n - c_n)^-1/2)
    radius term: (1 + t_n)^2 * sqrt((log p)^(1 + 2/q) / n)

    with 2/q read as 0 when q is infinite.
    """
    two_over_q = 0.0 if math.isinf(q) else 2.0 / q
    logp_pow = log_p ** (1.0 + two_over_q)
    cap = (1.0 + 2.0 * n * (f_const + 4.0 * kappa**2) / a_n) ** 2
    rates = n**-0.5 + c_n**-0.5 + (n - c_n) ** -0.5
    return BoundTerms(
        search_term=cap * math.sqrt(logp_pow) * rates,
        radius_term=(1.0 + t_n) ** 2 * math.sqrt(logp_pow / n),
    )


def excess_tail_terms(inputs: BoundInputs) -> BoundTerms:
    """Evaluate both tail-bound terms for the given inputs."""
    return bound_terms_from_log_p(
        inputs.n,
        math.log(inputs.p),
        inputs.q,
        inputs.c_n,
        inputs.a_n,
        inputs.t_n,
        inputs.f_const,
        inputs.kappa,
    )


def gaussian_design_f_const(model: PopulationModel) -> float:
    """Three-sigma proxy for the squared sup of the regression function.

    The true sup is infinite for Gaussian designs; nine times the mean
    squared signal is the documented stand-in that keeps the cap event
    diagnostics meaningful.
    """
    return 9.0 * model.snr


def max_norm(a) -> float:
    """Entry-wise max norm: the largest absolute entry."""
    return float(np.abs(np.asarray(a)).max())


@dataclass(frozen=True)
class ConcentrationReport:
    """Second-moment concentration against the sample size."""

    sizes: tuple
    mean_errors: tuple
    slope: float


def concentration_rate(
    model: PopulationModel, v_sizes, reps: int, seed
) -> ConcentrationReport:
    """Estimate how fast the sample second moment approaches the
    population one in the entry-wise max norm.

    Returns the least-squares slope of log mean error against log size;
    root-n concentration shows up as a slope near -1/2.
    """
    sizes = [int(v) for v in v_sizes]
    if any(b <= a for a, b in zip(sizes, sizes[1:])) or not sizes:
        raise InputError("v_sizes must be strictly increasing and nonempty")
    if int(reps) < 10:
        raise InputError("reps must be at least 10")
    rng = np.random.default_rng(seed)
    target = population_second_moment(model).sigma
    means = []
    for size in sizes:
        total = 0.0
        for _ in range(int(reps)):
            sample = draw_observations(model, size, rng)
            z = np.column_stack([sample.y, sample.x])
            total += max_norm(z.T @ z / size - target)
        means.append(total / int(reps))
    slope = float(np.polyfit(np.log(sizes), np.log(means), 1)[0]) if len(sizes) > 1 else math.nan
    return ConcentrationReport(tuple(sizes), tuple(means), slope)


@dataclass(frozen=True)
class TailEventRow:
    """Empirical frequencies of the search-cap tail events at one n."""

    n: int
    cap_exceeded: float
    below_radius: float
    bound: float
    tolerance: float

    @property
    def ok(self) -> bool:
        limit = self.bound + self.tolerance
        return self.cap_exceeded <= limit and self.below_radius <= limit


def tail_events(
    model: PopulationModel,
    a_n_rule,
    t_n: float,
    n_list,
    reps: int,
    seed,
    f_const: float | None = None,
    kappa: float = 1.0,
) -> list[TailEventRow]:
    """Measure how often the data-driven search cap escapes its envelope.

    For each n, draws fresh responses and records the frequencies of
    cap > 2 n (F + 4 kappa^2) / a_n and cap < t_n, where the cap is
    ||y||^2 / a_n. Each row carries the stated exp(-n/8) envelope plus
    three binomial standard errors as its tolerance.
    """
    if f_const is None:
        f_const = gaussian_design_f_const(model)
    rng = np.random.default_rng(seed)
    reps = int(reps)
    if reps < 1:
        raise InputError("reps must be positive")
    t_n = float(t_n)
    rows = []
    for n in (int(v) for v in n_list):
        a_n = float(a_n_rule(n))
        if not (a_n > 0.0):
            raise InputError("a_n_rule must return positive values")
        upper = 2.0 * n * (f_const + 4.0 * kappa**2) / a_n
        n_cap = 0
        n_low = 0
        for _ in range(reps):
            sample = draw_observations(model, n, rng)
            t_max = float(sample.y @ sample.y) / a_n
            n_cap += t_max > upper
            n_low += t_max < t_n
        bound = math.exp(-n / 8.0)
        se = math.sqrt(max(bound * (1.0 - bound), 1.0 / reps) / reps)
        rows.append(
            TailEventRow(
                n=n,
                cap_exceeded=n_cap / reps,
                below_radius=n_low / reps,
                bound=bound,
                tolerance=3.0 * se,
            )
        )
    return rows


@dataclass(frozen=True)
class NoiseTailRow:
    x: float
    frequency: float
    bound: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.frequency <= self.bound + self.tolerance


@dataclass(frozen=True)
class NoiseTailReport:
    rows: tuple
    passed: bool


def noise_tail_check(
    noise_kind: NoiseKind,
    n: int,
    reps: int,
    seed,
    x_values=(1.0, 2.0, 4.0),
    kappa: float = 1.0,
    kappa1: float = 1.0,
) -> NoiseTailReport:
    """Check the squared-norm concentration of sub-Gaussian noise.

    At each deviation level x, the frequency of
    | ||eps||^2 - kappa1 n | >= sqrt(8 n kappa^4 x) + kappa^2 x
    must stay below exp(-x) plus three binomial standard errors. The
    rescaled t(3) noise has infinite sub-Gaussian norm and is rejected.
    """
    noise_kind = NoiseKind(noise_kind)
    if noise_kind is not NoiseKind.GAUSSIAN:
        raise InputError(
            "the squared-norm concentration check needs sub-Gaussian noise; "
            "t(3) has polynomial tails and no finite sub-Gaussian norm"
        )
    n = int(n)
    reps = int(reps)
    if n < 1 or reps < 1:
        raise InputError("n and reps must be positive")
    rng = np.random.default_rng(seed)
    sq_norms = np.empty(reps)
    for i in range(reps):
        eps = generate_noise(n, noise_kind, rng)
        sq_norms[i] = float(eps @ eps)
    rows = []
    for x in x_values:
        x = float(x)
        if x <= 0.0:
            raise InputError("x values must be positive")
        threshold = math.sqrt(8.0 * n * kappa**4 * x) + kappa**2 * x
        freq = float(np.mean(np.abs(sq_norms - kappa1 * n) >= threshold))
        bound = math.exp(-x)
        se = math.sqrt(max(bound * (1.0 - bound), 1.0 / reps) / reps)
        rows.append(NoiseTailRow(x=x, frequency=freq, bound=bound, tolerance=3.0 * se))
    return NoiseTailReport(tuple(rows), all(r.ok for r in rows))
