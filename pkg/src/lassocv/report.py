"""Experiment orchestration: configuration files, result persistence,
summary tables with violin figures, and the command-line interface.

Records are written as plain CSV with 17-significant-digit reals so
every double round-trips bitwise; a line-oriented manifest captures the
provenance of each run.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    BoundInputs,
    concentration_rate,
    excess_tail_terms,
    noise_tail_check,
    tail_events,
)
from .selection import (
    SelectionError,
    build_grid,
    compute_t_max,
    default_a_n,
    default_m_n,
    df_hat,
    select_cv,
    select_gcv,
    select_gic,
    select_ssr,
)
from .simulate import (
    ALL_SELECTORS,
    ConsistencyRow,
    ReplicationRecord,
    consistency_experiment,
    run_plan,
    scale_to_snr,
)
from .solvers import SolverConfig
from .types import (
    Dataset,
    FoldScheme,
    InputError,
    NoiseKind,
    PopulationModel,
    Selector,
    SimCondition,
    equicorrelation,
)

__all__ = [
    "CSV_HEADER",
    "ExperimentPlan",
    "RunManifest",
    "load_config",
    "plan_from_mapping",
    "write_records",
    "read_records",
    "SummaryRow",
    "Summary",
    "summarize",
    "run_simulation",
    "main",
]

CSV_HEADER = (
    "condition_id,n,p,rho,alpha,snr,noise,rep,selector,"
    "t_hat,risk_ratio,excess_risk,wall_time_ms"
)

_DEFAULTS = {
    "n": 100,
    "p": [75],
    "rho": [0.2],
    "alpha": [0.1],
    "snr": [5.0],
    "noise": "gaussian",
    "replications": 100,
    "selectors": ["cv", "aic", "bic", "gcv", "ssr"],
    "k": 10,
    "grid_size": 100,
    "seed": 0,
}
_LIST_KEYS = ("p", "rho", "alpha", "snr")

_NOISE_ALIASES = {
    "gaussian": NoiseKind.GAUSSIAN,
    "normal": NoiseKind.GAUSSIAN,
    "t3": NoiseKind.SCALED_T3,
    "scaled_t3": NoiseKind.SCALED_T3,
    "scaledt3": NoiseKind.SCALED_T3,
}


def fmt_real(x: float) -> str:
    """Render a real with 17 significant digits (bit-exact round trip)."""
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class ExperimentPlan:
    """Resolved simulation plan: the condition cross-product plus knobs."""

    conditions: tuple
    selectors: tuple
    k: int
    grid_size: int
    seed: int

    def digest(self) -> str:
        payload = {
            "conditions": [
                {
                    "n": c.n,
                    "p": c.p,
                    "rho": c.rho,
                    "alpha": c.alpha,
                    "snr": c.snr,
                    "noise": c.noise_kind.value,
                    "replications": c.replications,
                }
                for c in self.conditions
            ],
            "selectors": [s.value for s in self.selectors],
            "k": self.k,
            "grid_size": self.grid_size,
            "seed": self.seed,
        }
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_noise(value) -> NoiseKind:
    key = str(value).strip().lower()
    if key not in _NOISE_ALIASES:
        raise InputError(f"noise: unknown kind {value!r}; use gaussian or t3")
    return _NOISE_ALIASES[key]


def _parse_selectors(value):
    if isinstance(value, str):
        value = [v for v in re.split(r"[,\s]+", value) if v]
    out = []
    for name in value:
        key = str(name).strip().lower()
        try:
            sel = Selector(key)
        except ValueError:
            raise InputError(f"selectors: unknown selector {name!r}") from None
        if sel not in out:
            out.append(sel)
    if not out:
        raise InputError("selectors: at least one selector is required")
    return tuple(sorted(out, key=list(ALL_SELECTORS).index))


def _coerce_scalar(token):
    text = str(token).strip()
    try:
        as_float = float(text)
    except ValueError:
        return text
    return int(as_float) if as_float == int(as_float) and "." not in text and "e" not in text.lower() else as_float


def _parse_kv_text(text: str) -> dict:
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        tokens = [t.strip() for t in value.split(",") if t.strip() != ""]
        if not tokens:
            raise InputError(f"config line {lineno}: key {key!r} has no value")
        mapping[key] = [_coerce_scalar(t) for t in tokens] if len(tokens) > 1 else _coerce_scalar(tokens[0])
    return mapping


def plan_from_mapping(mapping: dict) -> ExperimentPlan:
    """Materialize defaults, validate every key, and expand the
    p x rho x alpha x snr cross-product into conditions."""
    unknown = set(mapping) - set(_DEFAULTS)
    if unknown:
        raise InputError(
            f"unknown config key(s): {', '.join(sorted(unknown))}; "
            f"allowed: {', '.join(sorted(_DEFAULTS))}"
        )
    resolved = dict(_DEFAULTS)
    resolved.update(mapping)
    for key in _LIST_KEYS:
        value = resolved[key]
        resolved[key] = list(value) if isinstance(value, (list, tuple)) else [value]
    noise = _parse_noise(resolved["noise"])
    selectors = _parse_selectors(resolved["selectors"])
    n = int(resolved["n"])
    replications = int(resolved["replications"])
    seed = int(resolved["seed"])
    k = int(resolved["k"])
    grid_size = int(resolved["grid_size"])
    if not (1 <= k <= n):
        raise InputError(f"k: must be in 1..{n}, got {k}")
    if grid_size < 2:
        raise InputError("grid_size: must be at least 2")
    conditions = []
    for p, rho, alpha, snr in itertools.product(
        resolved["p"], resolved["rho"], resolved["alpha"], resolved["snr"]
    ):
        try:
            conditions.append(
                SimCondition(
                    n=n, p=int(p), rho=float(rho), alpha=float(alpha),
                    snr=float(snr), noise_kind=noise,
                    replications=replications, seed=seed,
                )
            )
        except InputError as exc:
            raise InputError(f"condition (p={p}, rho={rho}, alpha={alpha}, snr={snr}): {exc}") from None
    return ExperimentPlan(tuple(conditions), selectors, k, grid_size, seed)


def load_config(path) -> ExperimentPlan:
    """Parse a JSON-object or key=value config file into a resolved plan."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"config parse failure: {exc}") from None
        if not isinstance(mapping, dict):
            raise InputError("config JSON must be an object")
    else:
        mapping = _parse_kv_text(text)
    return plan_from_mapping(mapping)


@dataclass(frozen=True)
class RunManifest:
    """Provenance of one pipeline run, persisted as key=value lines."""

    tool_version: str
    config_digest: str
    master_seed: int
    started_at: str
    finished_at: str
    condition_count: int
    record_count: int

    def lines(self) -> list[str]:
        return [
            f"tool_version={self.tool_version}",
            f"config_digest={self.config_digest}",
            f"master_seed={self.master_seed}",
            f"started_at={self.started_at}",
            f"finished_at={self.finished_at}",
            f"condition_count={self.condition_count}",
            f"record_count={self.record_count}",
        ]


def _record_row(r: ReplicationRecord) -> str:
    c = r.condition
    return ",".join(
        [
            c.condition_id,
            str(c.n),
            str(c.p),
            fmt_real(c.rho),
            fmt_real(c.alpha),
            fmt_real(c.snr),
            c.noise_kind.value,
            str(r.rep_index),
            r.selector.value,
            fmt_real(r.t_hat),
            fmt_real(r.risk_ratio),
            fmt_real(r.excess_risk),
            fmt_real(r.wall_time_ms),
        ]
    )


def write_records(records, path, manifest: RunManifest | None = None) -> Path:
    """Write records as CSV plus a key=value manifest sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            for record in records:
                fh.write(_record_row(record) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write records to {path}: {exc}") from None
    if manifest is None:
        now = datetime.now(timezone.utc).isoformat()
        manifest = RunManifest(
            tool_version=__version__,
            config_digest="",
            master_seed=0,
            started_at=now,
            finished_at=now,
            condition_count=len({r.condition.condition_id for r in records}),
            record_count=len(list(records)),
        )
    manifest_path = path.parent / "manifest.txt"
    manifest_path.write_text("\n".join(manifest.lines()) + "\n")
    return path


def read_records(path) -> list[dict]:
    """Read a records CSV back into dicts with parsed numeric fields."""
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise InputError(f"{path} does not carry the expected records header")
    keys = CSV_HEADER.split(",")
    numeric = {"rho", "alpha", "snr", "t_hat", "risk_ratio", "excess_risk", "wall_time_ms"}
    integer = {"n", "p", "rep"}
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        row = {}
        for key, part in zip(keys, parts):
            if key in numeric:
                row[key] = float(part)
            elif key in integer:
                row[key] = int(part)
            else:
                row[key] = part
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Summaries and figures


@dataclass(frozen=True)
class SummaryRow:
    condition_id: str
    selector: str
    count: int
    mean: float
    median: float
    q25: float
    q75: float


@dataclass(frozen=True)
class Summary:
    rows: tuple
    figures: dict

    def summary_csv(self) -> str:
        out = ["condition_id,selector,count,mean,median,q25,q75"]
        for r in self.rows:
            out.append(
                f"{r.condition_id},{r.selector},{r.count},{fmt_real(r.mean)},"
                f"{fmt_real(r.median)},{fmt_real(r.q25)},{fmt_real(r.q75)}"
            )
        return "\n".join(out) + "\n"


def _selector_order(name: str) -> int:
    try:
        return list(ALL_SELECTORS).index(Selector(name))
    except ValueError:
        return len(ALL_SELECTORS)


def summarize(records) -> Summary:
    """Aggregate risk ratios per (condition, selector) and draw one
    violin figure per condition with a mean line across selectors."""
    records = list(records)
    if not records:
        raise InputError("summarize needs at least one record")
    grouped: dict[str, dict[str, list[float]]] = {}
    for r in records:
        if isinstance(r, ReplicationRecord):
            if r.error is not None:
                continue
            cid, sel, value = r.condition.condition_id, r.selector.value, r.risk_ratio
        else:
            value = r["risk_ratio"]
            if math.isnan(value):
                continue
            cid, sel = r["condition_id"], r["selector"]
        grouped.setdefault(cid, {}).setdefault(sel, []).append(float(value))
    if not grouped:
        raise InputError("no successful records to summarize")
    rows = []
    figures = {}
    for cid in sorted(grouped):
        for sel in sorted(grouped[cid]):
            vals = np.array(grouped[cid][sel])
            rows.append(
                SummaryRow(
                    condition_id=cid,
                    selector=sel,
                    count=int(vals.size),
                    mean=float(vals.mean()),
                    median=float(np.median(vals)),
                    q25=float(np.quantile(vals, 0.25)),
                    q75=float(np.quantile(vals, 0.75)),
                )
            )
        # violins keep the selectors in their canonical reporting order
        ordered = sorted(grouped[cid], key=_selector_order)
        figures[cid] = _violin_svg(cid, ordered, [grouped[cid][s] for s in ordered])
    return Summary(tuple(rows), figures)


def _silverman_bandwidth(values: np.ndarray) -> float:
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    iqr = float(np.quantile(values, 0.75) - np.quantile(values, 0.25))
    spread = min(sd, iqr / 1.34) if iqr > 0.0 else sd
    return 0.9 * spread * values.size ** (-0.2)


def _kde(values: np.ndarray, ys: np.ndarray, bw: float) -> np.ndarray:
    z = (ys[:, None] - values[None, :]) / bw
    return np.exp(-0.5 * z * z).sum(axis=1) / (values.size * bw * math.sqrt(2.0 * math.pi))


def _violin_svg(title: str, selectors, value_lists) -> str:
    margin_l, margin_r, margin_t, margin_b = 66.0, 20.0, 40.0, 46.0
    slot = 110.0
    height = 420.0
    width = margin_l + margin_r + slot * len(selectors)
    lo = min(min(v) for v in value_lists)
    hi = max(max(v) for v in value_lists)
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.06 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def y_of(v: float) -> float:
        return margin_t + (hi - v) / (hi - lo) * (height - margin_t - margin_b)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.0f} {height:.0f}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.2f}" y="22" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    axis_x = margin_l - 10.0
    parts.append(
        f'<line x1="{axis_x:.2f}" y1="{margin_t:.2f}" x2="{axis_x:.2f}" '
        f'y2="{height - margin_b:.2f}" stroke="black" stroke-width="1"/>'
    )
    for tick in np.linspace(lo + pad, hi - pad, 5):
        ty = y_of(float(tick))
        parts.append(
            f'<line x1="{axis_x - 4:.2f}" y1="{ty:.2f}" x2="{axis_x:.2f}" '
            f'y2="{ty:.2f}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{axis_x - 8:.2f}" y="{ty + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.3g}</text>'
        )
    parts.append(
        f'<text x="16" y="{height / 2:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {height / 2:.2f})">risk ratio</text>'
    )

    centers = []
    means = []
    half_max = 0.42 * slot
    for i, (sel, vals) in enumerate(zip(selectors, value_lists)):
        values = np.sort(np.array(vals, dtype=np.float64))
        cx = margin_l + slot * (i + 0.5)
        centers.append(cx)
        means.append(float(values.mean()))
        bw = _silverman_bandwidth(values)
        if bw <= 0.0 or values.size < 2:
            ty = y_of(float(values[0]))
            parts.append(
                f'<path class="violin" d="M {cx - half_max / 2:.2f} {ty:.2f} '
                f'H {cx + half_max / 2:.2f}" stroke="#4477aa" stroke-width="2" '
                f'fill="none"/>'
            )
        else:
            grid = np.linspace(values[0] - 2 * bw, values[-1] + 2 * bw, 80)
            dens = _kde(values, grid, bw)
            widths = dens / dens.max() * half_max
            right = [
                f"{cx + w:.2f} {y_of(float(g)):.2f}" for g, w in zip(grid, widths)
            ]
            left = [
                f"{cx - w:.2f} {y_of(float(g)):.2f}"
                for g, w in zip(grid[::-1], widths[::-1])
            ]
            parts.append(
                '<path class="violin" d="M '
                + " L ".join(right + left)
                + ' Z" fill="#9ecae1" stroke="#4477aa" stroke-width="1"/>'
            )
        parts.append(
            f'<text x="{cx:.2f}" y="{height - margin_b + 18:.2f}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="12">{sel}</text>'
        )
    points = " ".join(f"{x:.2f},{y_of(m):.2f}" for x, m in zip(centers, means))
    parts.append(
        f'<polyline class="mean-line" points="{points}" fill="none" '
        f'stroke="#cc0000" stroke-width="1.5"/>'
    )
    for x, m in zip(centers, means):
        parts.append(
            f'<circle cx="{x:.2f}" cy="{y_of(m):.2f}" r="2.5" fill="#cc0000"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def run_simulation(
    plan: ExperimentPlan,
    out_dir,
    workers: int = 1,
    gic_normalized: bool = True,
    cfg: SolverConfig | None = None,
) -> RunManifest:
    """Execute a plan and persist records, summaries, figures, manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    records = run_plan(
        plan.conditions,
        plan.selectors,
        plan.k,
        cfg,
        plan.grid_size,
        gic_normalized=gic_normalized,
        workers=workers,
    )
    finished = datetime.now(timezone.utc).isoformat()
    manifest = RunManifest(
        tool_version=__version__,
        config_digest=plan.digest(),
        master_seed=plan.seed,
        started_at=started,
        finished_at=finished,
        condition_count=len(plan.conditions),
        record_count=len(records),
    )
    write_records(records, out / "records.csv", manifest)
    summary = summarize(records)
    (out / "summary.csv").write_text(summary.summary_csv())
    fig_dir = out / "figures"
    fig_dir.mkdir(exist_ok=True)
    for cid, svg in summary.figures.items():
        (fig_dir / f"{cid}.svg").write_text(svg)
    return manifest


# ---------------------------------------------------------------------------
# Command-line interface


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _workers_from(args) -> int:
    if getattr(args, "workers", None) is not None:
        return max(1, int(args.workers))
    env = os.environ.get("LASSOCV_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"LASSOCV_WORKERS must be an integer, got {env!r}") from None
    return 1


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in re.split(r"[,\s]+", text.strip()) if tok]
    except ValueError:
        raise InputError(f"expected a comma-separated integer list, got {text!r}") from None


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in re.split(r"[,\s]+", text.strip()) if tok]
    except ValueError:
        raise InputError(f"expected a comma-separated number list, got {text!r}") from None


def _parse_p_rule(text: str):
    text = text.strip().lower()
    match = re.fullmatch(r"([0-9]*\.?[0-9]*)\s*\*?\s*n", text)
    if match:
        factor = float(match.group(1)) if match.group(1) else 1.0
        return lambda n: max(2, int(round(factor * n)))
    try:
        constant = int(text)
    except ValueError:
        raise InputError(
            f"p rule {text!r} not understood; use forms like '2n', 'n', or '500'"
        ) from None
    return lambda n: constant


def _parse_q(text: str) -> float:
    if str(text).strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _load_csv_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise InputError(f"data file not found: {path}")
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if len(lines) < 2:
        raise InputError("data file needs a header line and at least one row")
    rows = []
    width = len(lines[0].split(","))
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != width:
            raise InputError(f"data line {lineno}: expected {width} columns")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise InputError(f"data line {lineno}: non-numeric value") from None
    arr = np.array(rows)
    if arr.shape[1] < 2:
        raise InputError("data file needs a response column plus predictors")
    return Dataset(arr[:, 0], arr[:, 1:])


def _build_parser() -> _Parser:
    parser = _Parser(prog="lassocv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a simulation grid from a config file")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--gic-unnormalized", action="store_true")

    con = sub.add_parser("consistency", help="excess-risk trend over growing n")
    con.add_argument("--k", type=int, default=2)
    con.add_argument("--q", type=_parse_q, default=2.0)
    con.add_argument("--n-list", default="100,200,400,800")
    con.add_argument("--p-rule", default="2n")
    con.add_argument("--reps", type=int, default=50)
    con.add_argument("--out", required=True)
    con.add_argument("--seed", type=int, default=0)
    con.add_argument("--delta", type=float, default=0.5)
    con.add_argument("--grid-size", type=int, default=100)
    con.add_argument("--workers", type=int, default=None)

    sel = sub.add_parser("select", help="one-shot tuning on a CSV dataset")
    sel.add_argument("--data", required=True)
    sel.add_argument("--selector", required=True, choices=[s.value for s in ALL_SELECTORS])
    sel.add_argument("--k", type=int, default=10)
    sel.add_argument("--grid-size", type=int, default=100)
    sel.add_argument("--seed", type=int, default=0)
    sel.add_argument("--sigma2", type=float, default=None)
    sel.add_argument("--a-n", type=float, default=None)
    sel.add_argument("--q", type=_parse_q, default=2.0)
    sel.add_argument("--gic-unnormalized", action="store_true")

    diag = sub.add_parser("diagnose", help="Monte Carlo concentration checks")
    diag.add_argument("--check", required=True,
                      choices=["concentration", "tails", "noise", "bound"])
    diag.add_argument("--p", type=float, default=20)
    diag.add_argument("--rho", type=float, default=0.0)
    diag.add_argument("--snr", type=float, default=5.0)
    diag.add_argument("--s", type=int, default=2)
    diag.add_argument("--sigma2", type=float, default=1.0)
    diag.add_argument("--v-sizes", default="25,50,100,200,400")
    diag.add_argument("--n-list", default="200,400")
    diag.add_argument("--n", type=int, default=100)
    diag.add_argument("--noise", default="gaussian")
    diag.add_argument("--reps", type=int, default=500)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--x-values", default="1,2,4")
    diag.add_argument("--t-n", type=float, default=1.0)
    diag.add_argument("--q", type=_parse_q, default=2.0)
    diag.add_argument("--cn", type=int, default=None)
    diag.add_argument("--an", type=float, default=None)
    diag.add_argument("--tn", type=float, default=None)
    diag.add_argument("--f", type=float, default=None)
    diag.add_argument("--kappa", type=float, default=1.0)

    bound = sub.add_parser("bound", help="evaluate the tail-bound terms")
    bound.add_argument("--n", type=int, required=True)
    bound.add_argument("--p", type=float, required=True)
    bound.add_argument("--q", type=_parse_q, required=True)
    bound.add_argument("--cn", type=int, required=True)
    bound.add_argument("--an", type=float, required=True)
    bound.add_argument("--tn", type=float, required=True)
    bound.add_argument("--f", type=float, required=True)
    bound.add_argument("--kappa", type=float, required=True)
    bound.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_simulate(args) -> int:
    plan = load_config(args.config)
    if args.seed is not None:
        conditions = tuple(
            SimCondition(
                n=c.n, p=c.p, rho=c.rho, alpha=c.alpha, snr=c.snr,
                noise_kind=c.noise_kind, replications=c.replications,
                seed=int(args.seed),
            )
            for c in plan.conditions
        )
        plan = ExperimentPlan(conditions, plan.selectors, plan.k, plan.grid_size, int(args.seed))
    manifest = run_simulation(
        plan,
        args.out,
        workers=_workers_from(args),
        gic_normalized=not args.gic_unnormalized,
    )
    print(f"wrote {manifest.record_count} records for {manifest.condition_count} "
          f"condition(s) to {args.out}")
    return 0


def _cmd_consistency(args) -> int:
    rows = consistency_experiment(
        _parse_int_list(args.n_list),
        _parse_p_rule(args.p_rule),
        q=args.q,
        k=args.k,
        reps=args.reps,
        seed=args.seed,
        delta=args.delta,
        grid_size=args.grid_size,
        workers=_workers_from(args),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["n,p,t_n,median_excess,exceed_fraction"]
    for r in rows:
        lines.append(
            f"{r.n},{r.p},{fmt_real(r.t_n)},{fmt_real(r.median_excess)},"
            f"{fmt_real(r.exceed_fraction)}"
        )
    (out / "consistency.csv").write_text("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    return 0


def _cmd_select(args) -> int:
    data = _load_csv_dataset(args.data)
    cfg = SolverConfig()
    selector = Selector(args.selector)
    if selector is Selector.SSR:
        result = select_ssr(data, cfg)
    else:
        folds = FoldScheme.random(data.n, args.k, args.seed)
        a_n = args.a_n
        if a_n is None:
            a_n = default_a_n(data.n, max(data.p, 2), args.q, folds.b_n, default_m_n(data.n))
        grid = build_grid(compute_t_max(data, a_n), args.grid_size)
        if selector is Selector.CV:
            result = select_cv(data, folds, grid, cfg)
        elif selector is Selector.GCV:
            result = select_gcv(data, grid, cfg)
        else:
            if args.sigma2 is None:
                raise InputError(f"--sigma2 is required for selector {selector.value}")
            c_n = 2.0 if selector is Selector.AIC else math.log(data.n)
            result = select_gic(
                data, grid, c_n, args.sigma2, cfg,
                normalized=not args.gic_unnormalized, selector=selector,
            )
    nonzero = int(np.count_nonzero(np.abs(result.beta_hat) > cfg.zero_threshold))
    print(f"selector={result.selector.value}")
    print(f"t_hat={fmt_real(result.t_hat)}")
    print(f"nonzeros={nonzero}")
    print(f"df={df_hat(result.beta_hat, cfg.zero_threshold)}")
    finite = result.criterion[np.isfinite(result.criterion)]
    if finite.size:
        print(f"criterion_min={fmt_real(float(finite.min()))}")
    return 0


def _diag_model(args) -> PopulationModel:
    p = int(args.p)
    if args.s < 1 or args.s > p:
        raise InputError(f"--s must lie in 1..{p}")
    d = equicorrelation(p, args.rho)
    beta = np.zeros(p)
    beta[: args.s] = 1.0
    beta = scale_to_snr(beta, d, args.snr)
    return PopulationModel(beta, d, args.sigma2, NoiseKind.GAUSSIAN)


def _print_bound(args) -> int:
    terms = excess_tail_terms(
        BoundInputs(
            n=args.n, p=args.p, q=args.q, c_n=args.cn, a_n=args.an,
            t_n=args.tn, f_const=args.f, kappa=args.kappa,
        )
    )
    print(f"search_term={terms.search_term:.12g}")
    print(f"radius_term={terms.radius_term:.12g}")
    return 0


def _cmd_diagnose(args) -> int:
    if args.check == "bound":
        for name in ("cn", "an", "tn", "f"):
            if getattr(args, name) is None:
                raise InputError(f"--{name} is required for --check bound")
        return _print_bound(args)
    if args.check == "concentration":
        report = concentration_rate(
            _diag_model(args), _parse_int_list(args.v_sizes), args.reps, args.seed
        )
        for size, err in zip(report.sizes, report.mean_errors):
            print(f"size={size} mean_error={err:.6g}")
        print(f"slope={report.slope:.6g}")
        return 0
    if args.check == "tails":
        model = _diag_model(args)
        rows = tail_events(
            model,
            lambda n: default_a_n(n, model.p, args.q, n // 2, default_m_n(n)),
            args.t_n,
            _parse_int_list(args.n_list),
            args.reps,
            args.seed,
            f_const=args.f,
            kappa=args.kappa,
        )
        ok = True
        for r in rows:
            ok &= r.ok
            print(
                f"n={r.n} cap_exceeded={r.cap_exceeded:.6g} "
                f"below_radius={r.below_radius:.6g} bound={r.bound:.6g} ok={r.ok}"
            )
        print(f"passed={ok}")
        return 0
    report = noise_tail_check(
        _parse_noise(args.noise), args.n, args.reps, args.seed,
        x_values=_parse_float_list(args.x_values), kappa=args.kappa,
    )
    for row in report.rows:
        print(
            f"x={row.x:g} frequency={row.frequency:.6g} bound={row.bound:.6g} "
            f"ok={row.ok}"
        )
    print(f"passed={report.passed}")
    return 0


def main(argv=None) -> int:
    """CLI entry point. Returns 0 on success, 1 on input errors, 2 on
    internal failures."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help paths
        return int(exc.code or 0)
    handlers = {
        "simulate": _cmd_simulate,
        "consistency": _cmd_consistency,
        "select": _cmd_select,
        "diagnose": _cmd_diagnose,
        "bound": _print_bound,
    }
    try:
        return handlers[args.command](args)
    except (InputError, SelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - report and map to exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
