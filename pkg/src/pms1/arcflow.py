"""Flow-flow MILP builders: machine and server flows over a shared time axis.

A schedule is encoded as flows on two multigraphs over nodes 0..T.  One
shared binary variable per (job class, start time) carries the execution arc
in both graphs: spanning setup + processing in the machine graph and just the
setup in the server graph.  Unit idle arcs connect consecutive nodes; a
terminal variable z_t marks the makespan node where all flow sinks.

Two builders are provided: the plain model (``build_fff``, optionally
collapsing identical jobs to one column family with a multiplicity
right-hand side) and the tuned model (``build_fft``) that additionally fixes
z_t to zero below the strengthened lower bound and attaches branching and
incumbent-search hints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from . import bounds as bounds_mod
from .instance import Instance, JobClass, group_identical
from .milp import HintSet, MilpModel, SolveOutcome
from .schedule import FlowSolution


def x_name(representative: int, t: int) -> str:
    return f"x_{representative}_{t}"


def ym_name(t: int) -> str:
    return f"yM_{t}"


def ys_name(t: int) -> str:
    return f"yS_{t}"


def z_name(t: int) -> str:
    return f"z_{t}"


@dataclass(frozen=True, slots=True)
class ArcFlowLayout:
    """Variable geometry of one flow model build."""

    horizon: int
    machines: int
    grouped: bool
    classes: tuple[JobClass, ...]

    def start_range(self, cls: JobClass) -> range:
        return range(0, self.horizon - cls.span + 1)

    def variable_count(self) -> int:
        T = self.horizon
        execution = sum(max(0, T - c.span + 1) for c in self.classes)
        return execution + 2 * T + T  # idle machine + idle server + terminal


def column_classes(inst: Instance, grouped: bool) -> tuple[JobClass, ...]:
    """The column families: one per identical-job class, or one per job."""
    if grouped:
        return tuple(group_identical(inst))
    return tuple(
        JobClass(
            setup=j.setup,
            processing=j.processing,
            multiplicity=1,
            representative=j.id,
            members=(j.id,),
        )
        for j in inst.jobs
    )


def layout(inst: Instance, T: int, grouped: bool = False) -> ArcFlowLayout:
    if T < inst.max_span:
        raise ValueError(
            f"horizon {T} is below the longest job span {inst.max_span}; no schedule fits"
        )
    return ArcFlowLayout(
        horizon=T, machines=inst.machines, grouped=grouped, classes=column_classes(inst, grouped)
    )


def count_variables(inst: Instance, T: int, grouped: bool = False) -> int:
    """Closed-form variable count; matches the built model exactly."""
    classes = column_classes(inst, grouped)
    return sum(max(0, T - c.span + 1) for c in classes) + 3 * T


def build_fff(inst: Instance, T: int, grouped: bool = False) -> MilpModel:
    """The flow-flow model over horizon T.

    Objective: sum of t * z_t.  One assignment row per column family (= 1,
    or = multiplicity when grouped), then machine-flow balance at nodes
    0..T with supply m, then server-flow balance with supply 1.
    """
    lay = layout(inst, T, grouped)
    model = MilpModel(name=f"fff_n{inst.n}_m{inst.machines}_T{T}" + ("_g" if grouped else ""))

    for c in lay.classes:
        for t in lay.start_range(c):
            model.add_var(x_name(c.representative, t), "binary")
    for t in range(T):
        model.add_var(ym_name(t), "integer", 0, inst.machines)
    for t in range(T):
        model.add_var(ys_name(t), "binary")
    for t in range(1, T + 1):
        model.add_var(z_name(t), "binary", objective=float(t))

    for c in lay.classes:
        terms = [(x_name(c.representative, t), 1.0) for t in lay.start_range(c)]
        model.add_constr(f"assign_{c.representative}", terms, "=", float(c.multiplicity))

    def balance(prefix: str, span_of, idle_of, supply: int) -> None:
        for t in range(T + 1):
            terms: list[tuple[str, float]] = []
            for c in lay.classes:
                if t + c.span <= T:
                    terms.append((x_name(c.representative, t), 1.0))
                tail = t - span_of(c)
                if tail >= 0 and tail + c.span <= T:
                    terms.append((x_name(c.representative, tail), -1.0))
            if t == 0:
                terms.append((idle_of(0), 1.0))
                model.add_constr(f"{prefix}_0", terms, "=", float(supply))
                continue
            if t < T:
                terms.append((idle_of(t), 1.0))
            terms.append((idle_of(t - 1), -1.0))
            terms.append((z_name(t), float(supply)))
            model.add_constr(f"{prefix}_{t}", terms, "=", 0.0)

    balance("mflow", lambda c: c.span, ym_name, inst.machines)
    balance("sflow", lambda c: c.setup, ys_name, 1)
    model.validate()
    return model


def build_fft(inst: Instance, T: int) -> MilpModel:
    """The tuned flow model: grouped columns plus solver hints.

    z_t is fixed to zero for every t below the strengthened lower bound
    (sound: no schedule can finish earlier), execution variables get branch
    priority decreasing in t with up-first direction, and the backend is
    asked for an aggressive incumbent search.
    """
    model = build_fff(inst, T, grouped=True)
    model.name = f"fft_n{inst.n}_m{inst.machines}_T{T}"
    lb = bounds_mod.lb_better(inst)
    lay = layout(inst, T, grouped=True)
    priority = {}
    direction = {}
    for c in lay.classes:
        for t in lay.start_range(c):
            name = x_name(c.representative, t)
            priority[name] = T - t
            direction[name] = "up"
    model.hints = HintSet(
        branch_priority=priority,
        branch_direction=direction,
        fixed_zero=frozenset(z_name(t) for t in range(1, min(lb, T + 1))),
        aggressive_incumbent_search=True,
    )
    model.validate()
    return model


def manifest(lay: ArcFlowLayout) -> dict:
    """JSON-able map from variable names to their structural meaning."""
    variables: dict[str, dict] = {}
    for c in lay.classes:
        for t in lay.start_range(c):
            variables[x_name(c.representative, t)] = {
                "kind": "execution",
                "class": c.representative,
                "setup": c.setup,
                "processing": c.processing,
                "multiplicity": c.multiplicity,
                "members": list(c.members),
                "start": t,
            }
    for t in range(lay.horizon):
        variables[ym_name(t)] = {"kind": "idle_machines", "t": t}
        variables[ys_name(t)] = {"kind": "idle_server", "t": t}
    for t in range(1, lay.horizon + 1):
        variables[z_name(t)] = {"kind": "finish", "t": t}
    return {
        "horizon": lay.horizon,
        "machines": lay.machines,
        "grouped": lay.grouped,
        "variables": variables,
    }


def extract_flow(values: Mapping[str, float], lay: ArcFlowLayout) -> FlowSolution:
    """Pick the flow variables out of an incumbent, keyed by structure."""
    starts: dict[tuple[int, int], float] = {}
    for c in lay.classes:
        for t in lay.start_range(c):
            v = values.get(x_name(c.representative, t), 0.0)
            if v:
                starts[(c.representative, t)] = v
    idle_m = {t: values.get(ym_name(t), 0.0) for t in range(lay.horizon)}
    idle_s = {t: values.get(ys_name(t), 0.0) for t in range(lay.horizon)}
    finish = {t: values.get(z_name(t), 0.0) for t in range(1, lay.horizon + 1)}
    return FlowSolution(
        classes=lay.classes,
        machines=lay.machines,
        horizon=lay.horizon,
        starts=starts,
        idle_machines=idle_m,
        idle_server=idle_s,
        finish=finish,
    )


def finish_time(outcome: SolveOutcome, lay: ArcFlowLayout, tol: float = 1e-6) -> int:
    """The node where the flow terminates in an integral incumbent."""
    hits = [
        t
        for t in range(1, lay.horizon + 1)
        if abs(outcome.incumbent.get(z_name(t), 0.0) - 1.0) <= tol
    ]
    if len(hits) != 1:
        raise ValueError(f"expected exactly one active finish variable, found {hits}")
    return hits[0]
