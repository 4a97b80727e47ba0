"""Constrained sparse regression with data-driven tuning and exact
excess-risk evaluation against the population linear oracle.

The library fits l1- and group-constrained least squares, tunes the
constraint radius by K-fold cross-validation or penalized criteria,
simulates the tuned estimators under a known data-generating process to
measure their exact predictive risk, and runs Monte Carlo diagnostics
of the concentration behavior behind those guarantees.
"""

__version__ = "0.1.0"

from .types import (  # noqa: F401
    AugmentedSecondMoment,
    Dataset,
    EstimatorSpec,
    FoldScheme,
    InputError,
    NoiseKind,
    Penalty,
    PopulationModel,
    SelectionResult,
    Selector,
    SimCondition,
    equicorrelation,
)
from .solvers import (  # noqa: F401
    SolverConfig,
    SolverConvergenceWarning,
    binding_threshold,
    fit_constrained,
    fit_lagrangian,
    group_norm,
    l1_norm,
    project_group_ball,
    project_l1_ball,
)
from .risk import (  # noqa: F401
    RiskReport,
    cv_risk,
    empirical_risk,
    empirical_second_moment,
    excess_risk,
    oracle_coefficients,
    population_risk,
    population_second_moment,
    quadratic_risk,
)
from .selection import (  # noqa: F401
    SearchGrid,
    SelectionError,
    build_grid,
    compute_t_max,
    default_a_n,
    default_m_n,
    df_hat,
    oracle_radius,
    select_aic,
    select_bic,
    select_cv,
    select_gcv,
    select_gic,
    select_ssr,
)
from .simulate import (  # noqa: F401
    ALL_SELECTORS,
    ConsistencyRow,
    ReplicationRecord,
    consistency_experiment,
    draw_observations,
    generate_coefficients,
    generate_design,
    generate_noise,
    run_condition,
    run_plan,
    scale_to_snr,
)
from .diagnostics import (  # noqa: F401
    BoundInputs,
    BoundTerms,
    concentration_rate,
    excess_tail_terms,
    noise_tail_check,
    tail_events,
)
from .report import (  # noqa: F401
    ExperimentPlan,
    RunManifest,
    Summary,
    load_config,
    read_records,
    run_simulation,
    summarize,
    write_records,
)
