import math

import numpy as np
import pytest

from lassocv import (
    Dataset,
    EstimatorSpec,
    FoldScheme,
    InputError,
    Penalty,
    SelectionError,
    Selector,
    SolverConfig,
    build_grid,
    compute_t_max,
    cv_risk,
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
from lassocv.selection import GridPath, gcv_criterion, gic_criterion, ssr_lambda0

CFG = SolverConfig()


# ---------------------------------------------------------------------------
# search interval


def test_compute_t_max_arithmetic():
    assert compute_t_max(Dataset([3.0, 4.0], np.ones((2, 1))), 5.0) == pytest.approx(5.0)
    assert compute_t_max(Dataset([0.0, 0.0], np.ones((2, 1))), 3.0) == 0.0
    with pytest.raises(InputError):
        compute_t_max(Dataset([1.0], np.ones((1, 1))), 0.0)


def test_compute_t_max_concentrates_for_standard_noise():
    rng = np.random.default_rng(77)
    y = rng.standard_normal(100)
    t_max = compute_t_max(Dataset(y, np.ones((100, 1))), 100.0)
    assert abs(t_max - 1.0) < 0.5


def test_default_a_n_heaviest_tail_case():
    # q = inf drops the 1/(2q) exponent entirely
    value = default_a_n(100, 1000.0, math.inf, 16, 1.0)
    assert value == pytest.approx(100 * math.log(1000.0) ** 0.25 / 2.0)


def test_default_a_n_worked_example():
    # log p = 4 by direct injection, q = 2: 100 * 4^(1/2) * 1 / 16^(1/4) = 100
    assert default_a_n(100, math.exp(4.0), 2.0, 16, 1.0) == pytest.approx(100.0)


def test_default_a_n_linear_in_m_n():
    one = default_a_n(200, 50, 2.0, 32, 1.3)
    two = default_a_n(200, 50, 2.0, 32, 2.6)
    assert two == pytest.approx(2.0 * one)


def test_default_a_n_rejects_small_p():
    with pytest.raises(InputError):
        default_a_n(100, 1.5, 2.0, 16)


def test_default_m_n_clipped_below():
    assert default_m_n(2) == 1.0
    assert default_m_n(10) == 1.0
    assert default_m_n(100) == pytest.approx(math.log(math.log(100)))


def test_oracle_radius_worked_example():
    # b_n = 160, q = inf, m_n = 1, p = 1600
    value = oracle_radius(1600, math.inf, 160, 1.0)
    assert value == pytest.approx(160**0.25 / math.log(1600) ** 0.25, rel=1e-12)
    assert value == pytest.approx(2.158, abs=2e-3)


def test_build_grid_examples():
    grid = build_grid(1.0, 3)
    assert grid.points.tolist() == [0.0, 0.5, 1.0]
    degenerate = build_grid(0.0, 4)
    assert degenerate.points.tolist() == [0.0, 0.0, 0.0, 0.0]
    spacing = np.diff(build_grid(5.0, 101).points)
    assert spacing == pytest.approx(np.full(100, 0.05))
    with pytest.raises(InputError):
        build_grid(1.0, 1)


# ---------------------------------------------------------------------------
# cross-validation selection


def _sparse_instance(seed=0, n=40, p=8, t_signal=1.5, noise=0.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[0] = t_signal
    y = x @ beta + noise * rng.standard_normal(n)
    return Dataset(y, x), beta


def test_select_cv_noiseless_sparse_reaches_zero_risk():
    data, beta = _sparse_instance()
    folds = FoldScheme.random(data.n, 4, seed=1)
    grid = build_grid(3.0, 5)  # contains ||beta||_1 = 1.5 exactly
    res = select_cv(data, folds, grid, CFG)
    assert min(res.criterion) <= 1e-6
    assert res.t_hat >= 1.5


def test_select_cv_pure_noise_picks_small_radius():
    rng = np.random.default_rng(5)
    n, p = 2000, 5
    data = Dataset(rng.standard_normal(n), rng.standard_normal((n, p)))
    folds = FoldScheme.random(n, 5, seed=2)
    a_n = default_a_n(n, p, 2.0, folds.b_n)
    grid = build_grid(compute_t_max(data, a_n), 50)
    res = select_cv(data, folds, grid, CFG)
    assert res.t_hat <= 0.2 * grid.t_max


def test_select_cv_constant_tie_breaks_to_smallest_radius():
    # an all-zero design makes every radius equivalent
    data = Dataset(np.array([1.0, -1.0, 2.0, 0.5]), np.zeros((4, 2)))
    folds = FoldScheme.random(4, 2, seed=0)
    res = select_cv(data, folds, build_grid(1.0, 4), CFG)
    assert res.t_hat == 0.0


def test_select_cv_invariant_to_fold_order():
    data, _ = _sparse_instance(seed=3, noise=0.5)
    fold_sets = ([0, 4, 8, 12], [1, 5, 9, 13], [2, 6, 10, 14], [3, 7, 11, 15])
    base = FoldScheme(fold_sets, data.n)
    permuted = FoldScheme(fold_sets[::-1], data.n)
    grid = build_grid(2.5, 12)
    res_a = select_cv(data, base, grid, CFG)
    res_b = select_cv(data, permuted, grid, CFG)
    assert res_a.t_hat == res_b.t_hat
    assert np.array_equal(res_a.criterion, res_b.criterion)


def test_select_cv_criterion_recompute_matches():
    data, _ = _sparse_instance(seed=9, n=24, noise=0.7)
    folds = FoldScheme.random(data.n, 3, seed=4)
    grid = build_grid(2.0, 9)
    res = select_cv(data, folds, grid, CFG)
    idx = int(np.nonzero(grid.points == res.t_hat)[0][0])
    fresh = cv_risk(data, EstimatorSpec(Penalty.LASSO, res.t_hat), folds, CFG)
    assert abs(res.criterion[idx] - fresh) <= 1e-10


def test_select_cv_grid_refinement_never_worse():
    data, _ = _sparse_instance(seed=13, n=30, noise=0.6)
    folds = FoldScheme.random(data.n, 3, seed=5)
    coarse = build_grid(2.0, 7)
    fine = build_grid(2.0, 13)  # doubled resolution: superset of the coarse points
    res_coarse = select_cv(data, folds, coarse, CFG)
    res_fine = select_cv(data, folds, fine, CFG)
    assert min(res_fine.criterion) <= min(res_coarse.criterion) + 1e-12


def test_select_cv_different_k_values_consistent():
    data, _ = _sparse_instance(seed=17, n=30, noise=0.4)
    grid = build_grid(2.0, 8)
    for k in (2, 5):
        folds = FoldScheme.random(data.n, k, seed=6)
        res = select_cv(data, folds, grid, CFG)
        assert res.t_hat in grid.points
        idx = int(np.nonzero(grid.points == res.t_hat)[0][0])
        assert res.criterion[idx] == min(res.criterion)


# ---------------------------------------------------------------------------
# degrees of freedom and criteria arithmetic


def test_df_hat_examples():
    assert df_hat([0.5, 0.0, -0.2, 0.0], 1e-8) == 1
    assert df_hat(np.zeros(3), 1e-8) == 0
    assert df_hat([1.0, 2.0, 3.0, 4.0, 5.0], 1e-8) == 4


def test_df_hat_monotone_in_threshold():
    beta = np.array([0.5, 0.05, 0.005, 0.0005])
    thresholds = [1e-4, 1e-3, 1e-2, 1e-1, 1.0]
    counts = [df_hat(beta, t) for t in thresholds]
    assert counts == sorted(counts, reverse=True)


def test_gic_criterion_arithmetic():
    assert gic_criterion(0.8, 3, 100, 2.0, 1.0) == pytest.approx(0.86)
    assert gic_criterion(0.8, 3, 100, math.log(100), 1.0) == pytest.approx(
        0.8 + math.log(100) * 3 / 100
    )
    assert gic_criterion(0.8, 3, 100, math.log(100), 1.0) == pytest.approx(0.93815, abs=2e-5)
    assert gic_criterion(0.9, 0, 50, 2.0, 1.0) == 0.9


def test_gcv_criterion_arithmetic():
    assert gcv_criterion(0.8, 3, 100) == pytest.approx(0.8 / 0.9409)
    assert gcv_criterion(0.8, 3, 100) == pytest.approx(0.85025, abs=1e-5)
    assert gcv_criterion(0.7, 0, 100) == 0.7
    assert gcv_criterion(0.7, 100, 100) == math.inf
    assert gcv_criterion(0.7, 99, 100) == pytest.approx(0.7 * 1e4)


# ---------------------------------------------------------------------------
# information-criterion selectors


def test_select_gic_labels_and_zero_radius_value():
    data, _ = _sparse_instance(seed=23, n=30, noise=0.5)
    grid = build_grid(2.0, 6)
    aic = select_aic(data, grid, 1.0, CFG)
    bic = select_bic(data, grid, 1.0, CFG)
    assert aic.selector is Selector.AIC
    assert bic.selector is Selector.BIC
    # at radius 0 the criterion is exactly mean(y^2)
    assert aic.criterion[0] == pytest.approx(float(data.y @ data.y) / data.n)
    with pytest.raises(InputError):
        select_gic(data, grid, 3.3, 1.0, CFG)


def test_select_gic_unnormalized_penalty_dominates():
    # three equally strong coefficients: the raw-scale penalty (2 per extra
    # coefficient beyond the first) outweighs any fit gain, so at most one
    # coefficient survives, while the normalized variant keeps all three
    rng = np.random.default_rng(29)
    x = rng.standard_normal((40, 6))
    beta = np.zeros(6)
    beta[:3] = 1.0
    data = Dataset(x @ beta + 0.3 * rng.standard_normal(40), x)
    grid = build_grid(4.0, 17)
    raw = select_gic(data, grid, 2.0, 1.0, CFG, normalized=False, selector=Selector.AIC)
    scaled = select_gic(data, grid, 2.0, 1.0, CFG, normalized=True, selector=Selector.AIC)
    assert df_hat(raw.beta_hat, CFG.zero_threshold) == 0
    assert df_hat(scaled.beta_hat, CFG.zero_threshold) >= 2


def test_select_gic_criterion_recompute_matches():
    data, _ = _sparse_instance(seed=43, n=30, noise=0.5)
    grid = build_grid(2.0, 8)
    res = select_aic(data, grid, 1.0, CFG)
    idx = int(np.nonzero(grid.points == res.t_hat)[0][0])
    from lassocv import empirical_risk, fit_constrained

    beta = fit_constrained(data, EstimatorSpec(Penalty.LASSO, res.t_hat), CFG)
    fresh = gic_criterion(
        empirical_risk(beta, data), df_hat(beta, CFG.zero_threshold), data.n, 2.0, 1.0
    )
    assert abs(res.criterion[idx] - fresh) <= 1e-10


def test_select_gcv_runs_and_recompute():
    data, _ = _sparse_instance(seed=31, n=30, noise=0.5)
    grid = build_grid(2.0, 8)
    res = select_gcv(data, grid, CFG)
    idx = int(np.nonzero(grid.points == res.t_hat)[0][0])
    assert res.criterion[idx] == min(res.criterion[np.isfinite(res.criterion)])


def test_select_gcv_degenerate_when_every_fit_saturated():
    data, _ = _sparse_instance(seed=37, n=3, p=6, noise=0.5)
    grid = build_grid(1.0, 3)
    dense = np.ones((3, 6))
    path = GridPath(grid, dense, np.zeros(3))
    with pytest.raises(SelectionError):
        select_gcv(data, grid, CFG, path=path)


# ---------------------------------------------------------------------------
# scaled sparse regression


def test_ssr_lambda0_value():
    assert ssr_lambda0(100, 100) == pytest.approx(0.30348, abs=1e-5)


def test_select_ssr_zero_response():
    data = Dataset(np.zeros(6), np.random.default_rng(0).standard_normal((6, 3)))
    res = select_ssr(data, CFG)
    assert np.array_equal(res.beta_hat, np.zeros(3))
    assert res.t_hat == 0.0
    assert res.grid.tolist() == [0.0]


def test_select_ssr_noise_level_recovery():
    # pure-noise designs: the stabilized noise level should sit near 1
    hits = 0
    seeds = range(30)
    for seed in seeds:
        rng = np.random.default_rng(1000 + seed)
        n, p = 2000, 10
        data = Dataset(rng.standard_normal(n), rng.standard_normal((n, p)))
        res = select_ssr(data, CFG)
        sigma = res.grid[-1]
        hits += abs(sigma**2 - 1.0) <= 0.1
    assert hits >= 29


def test_select_ssr_radius_is_fit_norm():
    data, _ = _sparse_instance(seed=41, n=50, p=6, noise=0.5)
    res = select_ssr(data, CFG)
    assert res.t_hat == pytest.approx(float(np.abs(res.beta_hat).sum()))
    assert res.converged
