"""Benchmark harness: solve pipelines, quality indicators, and reports.

One record is produced per (instance, model) pair.  Indicator rows aggregate
records per parameter combination with the usual conventions: CPU and the
LP-deviation column average over optimal solves only (a dagger replaces CPU
when a combination yielded none), and the best-bound gap averages over
non-optimal solves that still found an incumbent (blank otherwise).
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from . import arcflow, milp, tivi
from .bounds import BoundReport, horizon_ub
from .instance import GenParams, Instance, generate
from .milp import DEFAULT_MIP_GAP, SolveOutcome
from .schedule import Schedule, decode_flow, validate

MODEL_KEYS = ("fff", "fft", "fft-warm", "tivi")
MODEL_DISPLAY = {"fff": "FFF", "fft": "FFT", "fft-warm": "FFT-Warmed", "tivi": "TIVI"}
NO_SOLUTION_STATUSES = ("no_integer_solution", "time_limit_no_solution")

DAGGER = "†"


def canonical_model(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    if key in ("fft-warmed", "fftwarm", "warm"):
        key = "fft-warm"
    if key not in MODEL_KEYS:
        raise ValueError(f"unknown model {name!r}; choose from {MODEL_KEYS}")
    return key


def encode_warm_start(
    sched: Schedule, lay: arcflow.ArcFlowLayout, model: milp.MilpModel
) -> dict[str, float]:
    """Translate a witness schedule into a full flow-variable assignment.

    Start counts come from setup starts, idle and terminal variables from
    occupancy; the result is audited against every model constraint before
    it is handed to the backend.
    """
    if sched.makespan > lay.horizon:
        raise ValueError(f"witness makespan {sched.makespan} exceeds horizon {lay.horizon}")
    by_lengths = {(c.setup, c.processing): c for c in lay.classes}
    values: dict[str, float] = {}
    for a in sched.assignments:
        c = by_lengths[(a.setup, a.processing)]
        name = arcflow.x_name(c.representative, a.setup_start)
        if values.get(name):
            raise ValueError(f"two identical jobs start at t={a.setup_start}")
        values[name] = 1.0
    for t in range(lay.horizon):
        if t >= sched.makespan:
            values[arcflow.ym_name(t)] = 0.0
            values[arcflow.ys_name(t)] = 0.0
            continue
        busy_m = sum(1 for a in sched.assignments if a.setup_start <= t < a.completion)
        busy_s = sum(1 for a in sched.assignments if a.setup_start <= t < a.setup_end)
        values[arcflow.ym_name(t)] = float(lay.machines - busy_m)
        values[arcflow.ys_name(t)] = float(1 - busy_s)
    for t in range(1, lay.horizon + 1):
        values[arcflow.z_name(t)] = 1.0 if t == sched.makespan else 0.0

    problems = milp.evaluate_assignment(model, values)
    if problems:
        raise ValueError(f"warm start failed the feasibility audit: {problems[:3]}")
    objective = model.objective_value(values)
    if abs(objective - sched.makespan) > 1e-6:
        raise ValueError(
            f"warm start objective {objective} does not match witness makespan {sched.makespan}"
        )
    return values


@dataclass(slots=True)
class SolveReport:
    """Everything one pipeline run learned about an instance/model pair."""

    model: str
    status: str
    objective: float | None
    best_bound: float | None
    lp_bound: float | None
    wall_time: float
    var_count: int
    constraint_count: int
    horizon: int
    bounds: BoundReport
    schedule: Schedule | None
    proved_by_bounds: bool = False
    node_count: int | None = None
    message: str = ""


def build_model(inst: Instance, model: str, T: int, grouped: bool = True) -> milp.MilpModel:
    key = canonical_model(model)
    if key == "fff":
        return arcflow.build_fff(inst, T, grouped=grouped)
    if key in ("fft", "fft-warm"):
        return arcflow.build_fft(inst, T)
    return tivi.build_tivi(inst, T)


def solve_instance(
    inst: Instance,
    model: str = "fff",
    *,
    time_limit: float | None = None,
    gap: float = DEFAULT_MIP_GAP,
    grouped: bool = True,
    shortcut: bool = True,
    with_lp: bool = False,
    backend: str | None = None,
) -> SolveReport:
    """Bound, build, and solve one instance with one model.

    With ``shortcut`` enabled the integer solve is skipped when the heuristic
    upper bound already meets the strengthened lower bound; the witness is
    then returned as the proven optimum.
    """
    key = canonical_model(model)
    report = horizon_ub(inst)
    T = report.ub
    built = build_model(inst, key, T, grouped=grouped)
    var_count = len(built.variables)
    constraint_count = len(built.constraints)
    lp_bound = milp.solve_relaxation(built, backend=backend) if with_lp else None

    if shortcut and report.ub == report.lb_better:
        return SolveReport(
            model=key,
            status="optimal",
            objective=float(report.ub),
            best_bound=float(report.ub),
            lp_bound=lp_bound,
            wall_time=0.0,
            var_count=var_count,
            constraint_count=constraint_count,
            horizon=T,
            bounds=report,
            schedule=report.ub_witness,
            proved_by_bounds=True,
        )

    warm = None
    if key == "fft-warm":
        lay = arcflow.layout(inst, T, grouped=True)
        warm = encode_warm_start(report.ub_witness, lay, built)
    outcome = milp.solve(built, time_limit=time_limit, gap=gap, warm_start=warm, backend=backend)
    sched = _decode_if_possible(outcome, inst, key, T, grouped)
    return SolveReport(
        model=key,
        status=outcome.status,
        objective=outcome.objective,
        best_bound=outcome.best_bound,
        lp_bound=lp_bound,
        wall_time=outcome.wall_time,
        var_count=var_count,
        constraint_count=constraint_count,
        horizon=T,
        bounds=report,
        schedule=sched,
        node_count=outcome.node_count,
        message=outcome.message,
    )


def _decode_if_possible(
    outcome: SolveOutcome, inst: Instance, key: str, T: int, grouped: bool
) -> Schedule | None:
    if outcome.status not in ("optimal", "feasible") or not outcome.incumbent:
        return None
    if key == "tivi":
        sched = tivi.decode_starts(outcome.incumbent, inst, T)
    else:
        lay = arcflow.layout(inst, T, grouped=grouped if key == "fff" else True)
        sched = decode_flow(arcflow.extract_flow(outcome.incumbent, lay))
    problems = validate(sched, inst)
    if problems:
        raise RuntimeError(f"decoded schedule is infeasible: {problems[:3]}")
    return sched


@dataclass(slots=True)
class BenchRecord:
    """Outcome of one (instance, model) benchmark cell."""

    instance: str
    n: int
    m: int
    alpha: float
    rho: float
    replication: int
    model: str
    status: str
    objective: float | None
    best_bound: float | None
    lp_bound: float | None
    wall_time: float
    var_count: int
    constraint_count: int
    proved_by_bounds: bool = False
    error: str = ""

    @property
    def combination(self) -> tuple[int, int, float, float]:
        return (self.n, self.m, self.alpha, self.rho)


def _bench_cell(task: tuple) -> BenchRecord:
    (params_tuple, replication, model, time_limit, gap, shortcut, with_lp) = task
    params = GenParams(*params_tuple)
    inst = generate(params)[replication]
    label = params.label(replication)
    display = MODEL_DISPLAY[canonical_model(model)]
    try:
        rep = solve_instance(
            inst,
            model,
            time_limit=time_limit,
            gap=gap,
            shortcut=shortcut,
            with_lp=with_lp,
        )
    except Exception as exc:
        return BenchRecord(
            instance=label,
            n=params.n,
            m=params.m,
            alpha=params.alpha,
            rho=params.rho,
            replication=replication,
            model=display,
            status="error",
            objective=None,
            best_bound=None,
            lp_bound=None,
            wall_time=0.0,
            var_count=0,
            constraint_count=0,
            error=str(exc),
        )
    return BenchRecord(
        instance=label,
        n=params.n,
        m=params.m,
        alpha=params.alpha,
        rho=params.rho,
        replication=replication,
        model=display,
        status=rep.status,
        objective=rep.objective,
        best_bound=rep.best_bound,
        lp_bound=rep.lp_bound,
        wall_time=rep.wall_time,
        var_count=rep.var_count,
        constraint_count=rep.constraint_count,
        proved_by_bounds=rep.proved_by_bounds,
    )


def run_bench(
    grid: Sequence[GenParams],
    models: Sequence[str] = ("fff", "fft", "tivi"),
    *,
    time_limit: float | None = 3600.0,
    gap: float = DEFAULT_MIP_GAP,
    warm: bool = False,
    jobs: int = 1,
    shortcut: bool = True,
    with_lp: bool = True,
) -> list[BenchRecord]:
    """Solve every instance of the grid with every requested model.

    Workers regenerate instances from (params, replication) so cells are
    independent of scheduling order; failures are recorded per cell and do
    not stop the run.  Records come back sorted by (instance, model).
    """
    if not grid:
        raise ValueError("empty benchmark grid")
    keys = [canonical_model(m) for m in models]
    if warm and "fft-warm" not in keys:
        keys.append("fft-warm")

    tasks = []
    for params in grid:
        packed = (
            params.n,
            params.m,
            params.alpha,
            params.rho,
            params.seed,
            params.replications,
        )
        for replication in range(params.replications):
            for model in keys:
                tasks.append((packed, replication, model, time_limit, gap, shortcut, with_lp))

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_bench_cell, tasks))
    else:
        records = [_bench_cell(task) for task in tasks]
    order = {MODEL_DISPLAY[k]: i for i, k in enumerate(MODEL_KEYS)}
    records.sort(key=lambda r: (r.instance, order[r.model]))
    return records


@dataclass(slots=True)
class ModelIndicators:
    """Aggregates for one model inside one parameter combination."""

    num_optimal: int = 0
    num_no_solution: int = 0
    num_errors: int = 0
    cpu: float | None = None
    dev_cr: float | None = None
    gap_bb: float | None = None


@dataclass(slots=True)
class IndicatorRow:
    n: int
    m: int
    alpha: float
    rho: float
    replications: int
    per_model: dict[str, ModelIndicators] = field(default_factory=dict)


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def indicators(records: Sequence[BenchRecord]) -> list[IndicatorRow]:
    """Per-combination aggregates in the reference tables' conventions."""
    grouped: dict[tuple, dict[str, list[BenchRecord]]] = {}
    for record in records:
        grouped.setdefault(record.combination, {}).setdefault(record.model, []).append(record)

    rows = []
    for combo in sorted(grouped):
        by_model = grouped[combo]
        n, m, alpha, rho = combo
        replications = max(len(cells) for cells in by_model.values())
        row = IndicatorRow(n=n, m=m, alpha=alpha, rho=rho, replications=replications)
        for model, cells in by_model.items():
            optimal = [r for r in cells if r.status == "optimal"]
            no_solution = [r for r in cells if r.status in NO_SOLUTION_STATUSES]
            errors = [r for r in cells if r.status == "error"]
            gaps = [
                100.0 * (r.objective - r.best_bound) / r.objective
                for r in cells
                if r.status == "feasible"
                and r.objective is not None
                and r.best_bound is not None
                and r.objective > 0
            ]
            devs = [
                100.0 * (r.objective - r.lp_bound) / r.lp_bound
                for r in optimal
                if r.objective is not None and r.lp_bound is not None and r.lp_bound > 0
            ]
            row.per_model[model] = ModelIndicators(
                num_optimal=len(optimal),
                num_no_solution=len(no_solution),
                num_errors=len(errors),
                cpu=_mean([r.wall_time for r in optimal]),
                dev_cr=_mean(devs),
                gap_bb=_mean(gaps),
            )
        rows.append(row)
    return rows


def _fmt_cpu(stats: ModelIndicators) -> str:
    # Dagger marks combinations where the solver never reached optimality.
    return f"{stats.cpu:.2f}" if stats.num_optimal > 0 and stats.cpu is not None else DAGGER


def _fmt_pct(value: float | None) -> str:
    return f"{value:.2f}" if value is not None else ""


def _report_cells(rows: Sequence[IndicatorRow]) -> tuple[list[str], list[list[str]]]:
    models = sorted(
        {model for row in rows for model in row.per_model},
        key=lambda m: list(MODEL_DISPLAY.values()).index(m),
    )
    header = ["n", "m", "alpha", "rho"]
    for model in models:
        header.extend(
            [f"{model}:#O", f"{model}:#N", f"{model}:CPU", f"{model}:DEV_CR", f"{model}:GAP_BB"]
        )
    body = []
    for row in rows:
        cells = [str(row.n), str(row.m), f"{row.alpha:g}", f"{row.rho:g}"]
        for model in models:
            stats = row.per_model.get(model)
            if stats is None:
                cells.extend(["", "", "", "", ""])
                continue
            cells.extend(
                [
                    str(stats.num_optimal),
                    str(stats.num_no_solution),
                    _fmt_cpu(stats),
                    _fmt_pct(stats.dev_cr) if stats.num_optimal > 0 else "",
                    _fmt_pct(stats.gap_bb),
                ]
            )
        body.append(cells)
    return header, body


def render_report(rows: Sequence[IndicatorRow], format: str = "markdown") -> str:
    """Indicator table as markdown or CSV with deterministic column order."""
    header, body = _report_cells(rows)
    if format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return buffer.getvalue()
    if format != "markdown":
        raise ValueError(f"unknown report format {format!r}")
    widths = [max(len(header[i]), *(len(row[i]) for row in body)) if body else len(header[i]) for i in range(len(header))]
    def line(cells: Sequence[str]) -> str:
        return "| " + " | ".join(cell.ljust(widths[i]) for i, cell in enumerate(cells)) + " |"
    out = [line(header), "| " + " | ".join("-" * w for w in widths) + " |"]
    out.extend(line(row) for row in body)
    return "\n".join(out) + "\n"


_RECORD_FIELDS = (
    "instance",
    "n",
    "m",
    "alpha",
    "rho",
    "replication",
    "model",
    "status",
    "objective",
    "best_bound",
    "lp_bound",
    "wall_time",
    "var_count",
    "constraint_count",
    "proved_by_bounds",
    "error",
)


def records_to_csv(records: Sequence[BenchRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(_RECORD_FIELDS)
    for r in records:
        writer.writerow([getattr(r, f) for f in _RECORD_FIELDS])
    return buffer.getvalue()


def records_to_jsonl(records: Sequence[BenchRecord]) -> str:
    lines = []
    for r in records:
        doc = {f: getattr(r, f) for f in _RECORD_FIELDS}
        lines.append(json.dumps(doc, sort_keys=True))
    return "\n".join(lines) + "\n"
