import json
import math
import re

import numpy as np
import pytest

import lassocv.report as report
from lassocv import (
    InputError,
    NoiseKind,
    Selector,
    SimCondition,
    load_config,
    read_records,
    summarize,
    write_records,
)
from lassocv.report import (
    CSV_HEADER,
    RunManifest,
    fmt_real,
    main,
    plan_from_mapping,
    run_simulation,
)
from lassocv.simulate import ReplicationRecord


# ---------------------------------------------------------------------------
# configuration


def test_load_config_json_cross_product(tmp_path):
    cfg = tmp_path / "grid.json"
    cfg.write_text(json.dumps({
        "p": [75, 350, 1000],
        "alpha": [0.1, 0.33, 0.5],
        "replications": 3,
        "selectors": ["cv", "aic"],
    }))
    plan = load_config(cfg)
    assert len(plan.conditions) == 9
    assert plan.conditions[0].n == 100  # default materialized
    assert plan.selectors == (Selector.CV, Selector.AIC)
    assert plan.k == 10 and plan.grid_size == 100


def test_load_config_key_value_format(tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text(
        "# comment line\n"
        "n = 60\n"
        "p = 20, 40\n"
        "snr = 5\n"
        "selectors = cv, ssr\n"
        "replications = 2\n"
        "seed = 3\n"
    )
    plan = load_config(cfg)
    assert len(plan.conditions) == 2
    assert {c.p for c in plan.conditions} == {20, 40}
    assert plan.conditions[0].n == 60
    assert plan.seed == 3


def test_load_config_tolerates_trailing_commas(tmp_path):
    cfg = tmp_path / "grid.cfg"
    cfg.write_text("n = 50\np = 10,\nreplications = 2,\n")
    plan = load_config(cfg)
    assert plan.conditions[0].p == 10
    assert plan.conditions[0].replications == 2


def test_load_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"n": 50, "bogus": 1}))
    with pytest.raises(InputError, match="bogus"):
        load_config(cfg)


def test_load_config_rejects_out_of_range_rho(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"rho": 1.2}))
    with pytest.raises(InputError, match="rho"):
        load_config(cfg)


def test_plan_digest_stable_under_key_order():
    a = plan_from_mapping({"n": 50, "p": [10, 20], "seed": 1})
    b = plan_from_mapping({"seed": 1, "p": [10, 20], "n": 50})
    assert a.digest() == b.digest()
    c = plan_from_mapping({"n": 50, "p": [10, 20], "seed": 2})
    assert a.digest() != c.digest()


# ---------------------------------------------------------------------------
# records round trip


def _toy_records(reps=3, selectors=(Selector.CV, Selector.SSR)):
    cond = SimCondition(20, 8, 0.2, 0.1, 5.0, NoiseKind.GAUSSIAN, reps, 1)
    rng = np.random.default_rng(0)
    out = []
    for rep in range(reps):
        for sel in selectors:
            out.append(ReplicationRecord(
                condition=cond,
                rep_index=rep,
                selector=sel,
                t_hat=float(rng.uniform(0, 3)),
                risk_ratio=float(1.0 + rng.uniform(0, 2)),
                excess_risk=float(rng.normal()),
                wall_time_ms=float(rng.uniform(0, 5)),
            ))
    return out


def test_write_records_header_only_when_empty(tmp_path):
    path = write_records([], tmp_path / "records.csv")
    assert path.read_text() == CSV_HEADER + "\n"
    assert (tmp_path / "manifest.txt").exists()


def test_write_records_row_count_and_round_trip(tmp_path):
    records = _toy_records(reps=4)
    path = write_records(records, tmp_path / "records.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 4 * 2
    back = read_records(path)
    for rec, row in zip(records, back):
        assert row["t_hat"] == rec.t_hat  # bitwise via 17 significant digits
        assert row["risk_ratio"] == rec.risk_ratio
        assert row["excess_risk"] == rec.excess_risk
        assert row["wall_time_ms"] == rec.wall_time_ms
        assert row["rep"] == rec.rep_index
        assert row["condition_id"] == rec.condition.condition_id


def test_csv_header_is_frozen():
    assert CSV_HEADER == (
        "condition_id,n,p,rho,alpha,snr,noise,rep,selector,"
        "t_hat,risk_ratio,excess_risk,wall_time_ms"
    )


def test_summary_rows_sorted_by_condition_then_selector():
    records = _toy_records(reps=2, selectors=(Selector.SSR, Selector.CV, Selector.AIC))
    summary = summarize(records)
    keys = [(r.condition_id, r.selector) for r in summary.rows]
    assert keys == sorted(keys)


def test_fmt_real_round_trips_awkward_doubles():
    for x in (0.1, 1 / 3, math.pi, 1e-17, 123456.789012345678, 2.0**-52):
        assert float(fmt_real(x)) == x


def test_manifest_lines(tmp_path):
    manifest = RunManifest("0.1.0", "abc", 7, "t0", "t1", 2, 10)
    write_records([], tmp_path / "records.csv", manifest)
    text = (tmp_path / "manifest.txt").read_text()
    assert "config_digest=abc" in text
    assert "master_seed=7" in text
    assert "record_count=10" in text


# ---------------------------------------------------------------------------
# summaries and figures


def _constant_records(value, selector=Selector.CV, reps=5):
    cond = SimCondition(20, 8, 0.2, 0.1, 5.0, NoiseKind.GAUSSIAN, reps, 1)
    return [
        ReplicationRecord(cond, rep, selector, 1.0, value, 0.0, 1.0)
        for rep in range(reps)
    ]


def test_summarize_empty_is_an_error():
    with pytest.raises(InputError):
        summarize([])


def test_summarize_degenerate_distribution_tick_and_mean():
    records = _constant_records(2.0)
    summary = summarize(records)
    (row,) = summary.rows
    assert row.mean == 2.0 and row.median == 2.0
    svg = summary.figures[records[0].condition.condition_id]
    assert 'class="violin"' in svg
    match = re.search(r'class="mean-line" points="([0-9.,\s]+)"', svg)
    assert match is not None


def test_summarize_mean_line_slopes_for_disjoint_selectors():
    records = _constant_records(1.2, Selector.CV) + _constant_records(3.0, Selector.SSR)
    summary = summarize(records)
    svg = next(iter(summary.figures.values()))
    pts = re.search(r'class="mean-line" points="([^"]+)"', svg).group(1)
    coords = [tuple(map(float, pair.split(","))) for pair in pts.split()]
    assert len(coords) == 2
    # smaller risk ratio sits lower on the page: strictly different y values
    assert abs(coords[0][1] - coords[1][1]) > 10.0


def test_summarize_matches_independent_aggregation(tmp_path):
    records = _toy_records(reps=6)
    path = write_records(records, tmp_path / "records.csv")
    summary = summarize(records)
    rows = read_records(path)
    for srow in summary.rows:
        vals = [
            r["risk_ratio"]
            for r in rows
            if r["condition_id"] == srow.condition_id and r["selector"] == srow.selector
        ]
        assert srow.mean == pytest.approx(float(np.mean(vals)), abs=1e-12)
        assert srow.median == pytest.approx(float(np.median(vals)), abs=1e-12)


def test_summarize_deterministic_bytes():
    records = _toy_records(reps=4)
    a = summarize(records)
    b = summarize(records)
    assert a.figures == b.figures
    assert a.summary_csv() == b.summary_csv()


def test_summarize_skips_failed_replications():
    cond = SimCondition(20, 8, 0.2, 0.1, 5.0, NoiseKind.GAUSSIAN, 2, 1)
    good = ReplicationRecord(cond, 0, Selector.CV, 1.0, 1.5, 0.0, 1.0)
    bad = ReplicationRecord(
        cond, 1, Selector.CV, math.nan, math.nan, math.nan, 1.0, error="boom"
    )
    summary = summarize([good, bad])
    (row,) = summary.rows
    assert row.count == 1


# ---------------------------------------------------------------------------
# pipeline and CLI


TINY_CONFIG = {
    "n": 24,
    "p": [8, 12],
    "replications": 2,
    "selectors": ["cv", "bic"],
    "k": 4,
    "grid_size": 6,
    "seed": 5,
}


def _strip_timing(text: str) -> str:
    return "\n".join(line.rsplit(",", 1)[0] for line in text.splitlines())


def test_run_simulation_outputs_and_determinism(tmp_path):
    plan = plan_from_mapping(TINY_CONFIG)
    m1 = run_simulation(plan, tmp_path / "a", workers=1)
    m2 = run_simulation(plan, tmp_path / "b", workers=2)
    assert m1.record_count == 2 * 2 * 2
    for name in ("records.csv", "summary.csv", "manifest.txt"):
        assert (tmp_path / "a" / name).exists()
    figs = list((tmp_path / "a" / "figures").glob("*.svg"))
    assert len(figs) == 2
    a = _strip_timing((tmp_path / "a" / "records.csv").read_text())
    b = _strip_timing((tmp_path / "b" / "records.csv").read_text())
    assert a == b
    assert (tmp_path / "a" / "summary.csv").read_text() == (
        tmp_path / "b" / "summary.csv"
    ).read_text()


def test_cli_simulate_and_seed_override(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY_CONFIG))
    code = main([
        "simulate", "--config", str(cfg), "--out", str(tmp_path / "out"),
        "--seed", "9",
    ])
    assert code == 0
    assert "wrote 8 records" in capsys.readouterr().out
    rows = read_records(tmp_path / "out" / "records.csv")
    assert len(rows) == 8
    manifest = (tmp_path / "out" / "manifest.txt").read_text()
    assert "master_seed=9" in manifest


def test_cli_bound_prints_expected_terms(capsys):
    code = main([
        "bound", "--n", "100", "--p", str(math.e), "--q", "inf", "--cn", "50",
        "--an", "1e12", "--tn", "2", "--f", "0", "--kappa", "0",
    ])
    assert code == 0
    out = capsys.readouterr().out
    radius = float(re.search(r"radius_term=([0-9.eE+-]+)", out).group(1))
    assert radius == pytest.approx(0.9, abs=1e-9)
    assert "0.9" in out


def test_cli_unknown_flag_exits_one(capsys):
    assert main(["simulate", "--nope"]) == 1
    err = capsys.readouterr().err
    assert "usage" in err.lower()


def test_cli_unknown_subcommand_exits_one():
    assert main(["frobnicate"]) == 1


def test_cli_missing_config_exits_one(tmp_path, capsys):
    assert main(["simulate", "--config", str(tmp_path / "no.json"),
                 "--out", str(tmp_path)]) == 1


def test_cli_internal_error_exits_two(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(TINY_CONFIG))

    def boom(*args, **kwargs):
        raise RuntimeError("worker pool fell over")

    monkeypatch.setattr(report, "run_plan", boom)
    code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "internal error" in capsys.readouterr().err


def test_cli_select_on_csv(tmp_path, capsys):
    rng = np.random.default_rng(2)
    x = rng.standard_normal((40, 4))
    y = x[:, 0] * 1.5 + 0.3 * rng.standard_normal(40)
    lines = ["y,x1,x2,x3,x4"]
    for yi, row in zip(y, x):
        lines.append(",".join(str(v) for v in [yi, *row]))
    data_path = tmp_path / "data.csv"
    data_path.write_text("\n".join(lines) + "\n")
    code = main(["select", "--data", str(data_path), "--selector", "cv",
                 "--k", "4", "--grid-size", "20", "--seed", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "selector=cv" in out
    t_hat = float(re.search(r"t_hat=([0-9.eE+-]+)", out).group(1))
    assert t_hat > 0.0
    # aic without sigma2 is an input error
    assert main(["select", "--data", str(data_path), "--selector", "aic"]) == 1


def test_cli_diagnose_noise(capsys):
    code = main(["diagnose", "--check", "noise", "--n", "50", "--reps", "400",
                 "--seed", "3"])
    assert code == 0
    out = capsys.readouterr().out
    assert "passed=True" in out


def test_cli_diagnose_bound_requires_flags(capsys):
    assert main(["diagnose", "--check", "bound"]) == 1


def test_cli_consistency_writes_table(tmp_path, capsys):
    code = main([
        "consistency", "--k", "2", "--q", "2", "--n-list", "30,60",
        "--p-rule", "2n", "--reps", "2", "--grid-size", "10",
        "--out", str(tmp_path / "cons"), "--seed", "4",
    ])
    assert code == 0
    table = (tmp_path / "cons" / "consistency.csv").read_text().splitlines()
    assert table[0] == "n,p,t_n,median_excess,exceed_fraction"
    assert len(table) == 3


def test_workers_env_fallback(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({**TINY_CONFIG, "p": [8]}))
    monkeypatch.setenv("LASSOCV_WORKERS", "2")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "w")]) == 0
    monkeypatch.setenv("LASSOCV_WORKERS", "zebra")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "w2")]) == 1
