"""Schedules: validation, decoding of arc-flow solutions, JSON and Gantt SVG.

A schedule fixes, for every job occurrence, a machine and the time its setup
starts.  Feasibility means setup intervals never overlap on the shared
server and machine occupation intervals never overlap on any machine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .instance import Instance, JobClass


@dataclass(frozen=True, slots=True)
class Assignment:
    """One job occurrence placed on a machine."""

    job: int
    machine: int  # 1-based
    setup_start: int
    setup: int
    processing: int

    @property
    def setup_end(self) -> int:
        return self.setup_start + self.setup

    @property
    def completion(self) -> int:
        return self.setup_start + self.setup + self.processing


@dataclass(frozen=True, slots=True)
class Schedule:
    """Immutable schedule: one assignment per job, plus the makespan."""

    machines: int
    assignments: tuple[Assignment, ...]
    makespan: int

    @classmethod
    def build(cls, machines: int, assignments: list[Assignment] | tuple[Assignment, ...]) -> "Schedule":
        ordered = tuple(sorted(assignments, key=lambda a: (a.setup_start, a.job)))
        makespan = max((a.completion for a in ordered), default=0)
        return cls(machines=machines, assignments=ordered, makespan=makespan)


@dataclass(frozen=True, slots=True)
class Violation:
    """A broken feasibility rule, with the jobs and time window involved."""

    rule: str
    jobs: tuple[int, ...]
    window: tuple[int, int]
    detail: str


def validate(sched: Schedule, inst: Instance) -> list[Violation]:
    """Return all feasibility violations of a schedule; empty means valid."""
    violations: list[Violation] = []

    seen: dict[int, int] = {}
    for a in sched.assignments:
        seen[a.job] = seen.get(a.job, 0) + 1
    expected = {job.id for job in inst.jobs}
    for job_id in sorted(expected - seen.keys()):
        violations.append(Violation("job_missing", (job_id,), (0, 0), f"job {job_id} never scheduled"))
    for job_id, count in sorted(seen.items()):
        if job_id not in expected:
            violations.append(Violation("job_unknown", (job_id,), (0, 0), f"job {job_id} not in instance"))
        elif count > 1:
            violations.append(Violation("job_duplicate", (job_id,), (0, 0), f"job {job_id} scheduled {count} times"))

    for a in sched.assignments:
        if a.job in expected:
            job = inst.job(a.job)
            if (a.setup, a.processing) != (job.setup, job.processing):
                violations.append(
                    Violation(
                        "length_mismatch",
                        (a.job,),
                        (a.setup_start, a.completion),
                        f"job {a.job} has durations ({a.setup},{a.processing}), "
                        f"instance says ({job.setup},{job.processing})",
                    )
                )
        if not 1 <= a.machine <= sched.machines:
            violations.append(
                Violation(
                    "machine_range",
                    (a.job,),
                    (a.setup_start, a.completion),
                    f"machine {a.machine} outside 1..{sched.machines}",
                )
            )
        if a.setup_start < 0:
            violations.append(
                Violation("negative_start", (a.job,), (a.setup_start, a.completion), f"setup starts at {a.setup_start}")
            )

    # Server exclusivity: setup intervals pairwise disjoint.
    by_setup = sorted(sched.assignments, key=lambda a: (a.setup_start, a.job))
    for prev, cur in zip(by_setup, by_setup[1:]):
        if cur.setup_start < prev.setup_end:
            violations.append(
                Violation(
                    "server_overlap",
                    (prev.job, cur.job),
                    (cur.setup_start, min(prev.setup_end, cur.setup_end)),
                    f"setups of jobs {prev.job} and {cur.job} overlap on the server",
                )
            )

    # Machine exclusivity: occupation [setup_start, completion) disjoint per machine.
    per_machine: dict[int, list[Assignment]] = {}
    for a in sched.assignments:
        per_machine.setdefault(a.machine, []).append(a)
    for machine, assigned in sorted(per_machine.items()):
        assigned.sort(key=lambda a: (a.setup_start, a.job))
        for prev, cur in zip(assigned, assigned[1:]):
            if cur.setup_start < prev.completion:
                violations.append(
                    Violation(
                        "machine_overlap",
                        (prev.job, cur.job),
                        (cur.setup_start, min(prev.completion, cur.completion)),
                        f"jobs {prev.job} and {cur.job} overlap on machine {machine}",
                    )
                )

    true_makespan = max((a.completion for a in sched.assignments), default=0)
    if sched.makespan != true_makespan:
        violations.append(
            Violation(
                "makespan_mismatch",
                (),
                (0, max(sched.makespan, true_makespan)),
                f"declared makespan {sched.makespan}, assignments end at {true_makespan}",
            )
        )
    return violations


def schedule_to_json(sched: Schedule) -> str:
    doc = {
        "machines": sched.machines,
        "makespan": sched.makespan,
        "assignments": [
            {"job": a.job, "machine": a.machine, "setup_start": a.setup_start}
            for a in sched.assignments
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def schedule_from_json(text: str, inst: Instance) -> Schedule:
    """Rebuild a schedule from its JSON form; durations come from the instance."""
    doc = json.loads(text)
    assignments = []
    for entry in doc["assignments"]:
        job = inst.job(int(entry["job"]))
        assignments.append(
            Assignment(
                job=job.id,
                machine=int(entry["machine"]),
                setup_start=int(entry["setup_start"]),
                setup=job.setup,
                processing=job.processing,
            )
        )
    ordered = tuple(sorted(assignments, key=lambda a: (a.setup_start, a.job)))
    return Schedule(machines=int(doc["machines"]), assignments=ordered, makespan=int(doc["makespan"]))


class FlowDecodeError(ValueError):
    """A flow solution is not integral or not balanced."""


@dataclass(frozen=True, slots=True)
class FlowSolution:
    """Raw variable values of an arc-flow solve, keyed by structure.

    ``starts[(rep, t)]`` counts units on the execution arc of the job class
    with representative ``rep`` starting at ``t``; ``idle_machines[t]`` and
    ``idle_server[t]`` carry the unit idle arcs; ``finish[t]`` the terminal
    indicator.
    """

    classes: tuple[JobClass, ...]
    machines: int
    horizon: int
    starts: Mapping[tuple[int, int], float]
    idle_machines: Mapping[int, float]
    idle_server: Mapping[int, float]
    finish: Mapping[int, float]


def _as_int(value: float, what: str, tol: float = 1e-6) -> int:
    nearest = round(value)
    if abs(value - nearest) > tol:
        raise FlowDecodeError(f"non-integral value {value!r} for {what}")
    return int(nearest)


def audit_flow(sol: FlowSolution, tol: float = 1e-6) -> None:
    """Check machine- and server-graph balance at every node.

    Raises :class:`FlowDecodeError` with the node and residual on imbalance.
    """
    T, m = sol.horizon, sol.machines
    for graph, span_of, supply, idle in (
        ("machine", lambda c: c.span, m, sol.idle_machines),
        ("server", lambda c: c.setup, 1, sol.idle_server),
    ):
        for t in range(T + 1):
            out = sum(
                sol.starts.get((c.representative, t), 0.0)
                for c in sol.classes
                if t + c.span <= T
            )
            inc = sum(
                sol.starts.get((c.representative, t - span_of(c)), 0.0)
                for c in sol.classes
                if t - span_of(c) >= 0 and t - span_of(c) + c.span <= T
            )
            z = sol.finish.get(t, 0.0) if t >= 1 else 0.0
            if t == 0:
                residual = out + idle.get(0, 0.0) - supply
            elif t < T:
                residual = out - inc + idle.get(t, 0.0) - idle.get(t - 1, 0.0) + supply * z
            else:
                residual = -inc - idle.get(T - 1, 0.0) + supply * z
            if abs(residual) > tol:
                raise FlowDecodeError(
                    f"{graph} flow imbalance at node {t}: residual {residual:.6g}"
                )


def decode_flow(sol: FlowSolution) -> Schedule:
    """Decompose an integral machine-graph flow into per-machine sequences.

    The m unit paths from node 0 to the finish node become the machines;
    each execution arc along a path is one job occurrence.  Paths
    are grown deterministically: always extend the path at the smallest node
    (ties by path index), taking execution arcs before idle arcs.  Class
    occurrences are expanded to concrete job ids ascending by setup start.
    """
    T, m = sol.horizon, sol.machines
    starts: dict[tuple[int, int], int] = {}
    for (rep, t), v in sol.starts.items():
        count = _as_int(v, f"start[{rep},{t}]")
        if count:
            starts[(rep, t)] = count
    idle = {t: _as_int(v, f"idle_machines[{t}]") for t, v in sol.idle_machines.items()}
    finishes = [t for t, v in sol.finish.items() if _as_int(v, f"finish[{t}]") == 1]
    for t, v in sol.idle_server.items():
        _as_int(v, f"idle_server[{t}]")
    audit_flow(sol)
    if len(finishes) != 1:
        raise FlowDecodeError(f"expected exactly one finish node, got {sorted(finishes)}")
    sink = finishes[0]

    by_class = {c.representative: c for c in sol.classes}
    # Execution arcs leaving each node, in deterministic class order.
    exec_out: dict[int, list[int]] = {}
    for c in sol.classes:
        for t in range(0, T + 1):
            count = starts.get((c.representative, t), 0)
            if count:
                exec_out.setdefault(t, []).extend([c.representative] * count)

    positions = [0] * m
    occurrences: list[tuple[int, int, int]] = []  # (representative, setup_start, machine)
    while True:
        active = [(pos, idx) for idx, pos in enumerate(positions) if pos < sink]
        if not active:
            break
        node, path = min(active)
        arcs = exec_out.get(node)
        if arcs:
            rep = arcs.pop(0)
            occurrences.append((rep, node, path + 1))
            positions[path] = node + by_class[rep].span
        else:
            remaining = idle.get(node, 0)
            if remaining <= 0:
                raise FlowDecodeError(f"machine flow imbalance at node {node}: no arc to extend path")
            idle[node] = remaining - 1
            positions[path] = node + 1
    leftover = [(t, a) for t, a in exec_out.items() if a]
    if leftover:
        raise FlowDecodeError(f"unused execution arcs remain at nodes {sorted(t for t, _ in leftover)}")
    if any(pos != sink for pos in positions):
        raise FlowDecodeError(f"paths ended at {positions}, expected all at {sink}")

    # Expand class occurrences to real job ids, ascending id per class in
    # setup-start order.
    assignments: list[Assignment] = []
    per_class: dict[int, list[tuple[int, int]]] = {}
    for rep, start, machine in occurrences:
        per_class.setdefault(rep, []).append((start, machine))
    for rep, placed in per_class.items():
        c = by_class[rep]
        placed.sort()
        members = c.members if c.members else (rep,)
        if len(placed) != len(members):
            raise FlowDecodeError(
                f"class {rep} scheduled {len(placed)} times, multiplicity is {len(members)}"
            )
        for (start, machine), job_id in zip(placed, members):
            assignments.append(
                Assignment(
                    job=job_id,
                    machine=machine,
                    setup_start=start,
                    setup=c.setup,
                    processing=c.processing,
                )
            )
    return Schedule.build(m, assignments)


_SVG_SETUP_FILL = "#b8b8b8"
_SVG_PROC_FILL = "#5b8db8"
_SVG_ROW_H = 28
_SVG_BAR_H = 20
_SVG_LEFT = 64
_SVG_SCALE = 24


def gantt_svg(sched: Schedule) -> str:
    """Deterministic Gantt chart: one row per machine plus a server row.

    Setup segments are grey, processing segments blue; both carry the job id.
    """
    span = max(sched.makespan, 1)
    width = _SVG_LEFT + span * _SVG_SCALE + 16
    rows = sched.machines + 1
    height = rows * _SVG_ROW_H + 40

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]

    def bar(x0: int, x1: int, row: int, fill: str, label: str) -> None:
        x = _SVG_LEFT + x0 * _SVG_SCALE
        w = (x1 - x0) * _SVG_SCALE
        y = 8 + row * _SVG_ROW_H
        parts.append(
            f'<rect x="{x}" y="{y}" width="{w}" height="{_SVG_BAR_H}" '
            f'fill="{fill}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x + w / 2:g}" y="{y + 14}" text-anchor="middle">{label}</text>'
        )

    for row in range(sched.machines):
        y = 8 + row * _SVG_ROW_H + 14
        parts.append(f'<text x="8" y="{y}">M{row + 1}</text>')
    parts.append(f'<text x="8" y="{8 + sched.machines * _SVG_ROW_H + 14}">server</text>')

    for a in sched.assignments:
        row = a.machine - 1
        bar(a.setup_start, a.setup_end, row, _SVG_SETUP_FILL, f"s{a.job}")
        bar(a.setup_end, a.completion, row, _SVG_PROC_FILL, f"j{a.job}")
        bar(a.setup_start, a.setup_end, sched.machines, _SVG_SETUP_FILL, f"s{a.job}")

    axis_y = 8 + rows * _SVG_ROW_H + 6
    parts.append(
        f'<line x1="{_SVG_LEFT}" y1="{axis_y}" x2="{_SVG_LEFT + span * _SVG_SCALE}" '
        f'y2="{axis_y}" stroke="#333"/>'
    )
    step = max(1, span // 12)
    for t in range(0, span + 1, step):
        x = _SVG_LEFT + t * _SVG_SCALE
        parts.append(f'<line x1="{x}" y1="{axis_y - 3}" x2="{x}" y2="{axis_y + 3}" stroke="#333"/>')
        parts.append(f'<text x="{x}" y="{axis_y + 16}" text-anchor="middle">{t}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
