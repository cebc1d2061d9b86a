"""Baseline time-indexed MILP with an explicit makespan variable.

Kept deliberately plain for head-to-head comparison with the flow models:
one binary start variable per job and time slot over the full 0..T range
(no presolving of starts that would overrun the horizon; such starts are
priced into the makespan), machine and server capacity windows per time
slot, and a continuous C_max pushed above every completion time.
"""

from __future__ import annotations

from typing import Mapping

from .bounds import horizon_ub, lb_trivial
from .instance import Instance
from .milp import MilpModel, solve_relaxation
from .schedule import Assignment, Schedule

CMAX_NAME = "Cmax"


def tivi_x_name(job: int, t: int) -> str:
    return f"x_{job}_{t}"


def count_variables(inst: Instance, T: int) -> int:
    return inst.n * (T + 1) + 1


def build_tivi(inst: Instance, T: int) -> MilpModel:
    """Time-indexed model over horizon T.

    Rows: one assignment per job; for every t a machine-capacity window
    summing starts in (t - s_j - p_j, t] and a server window over
    (t - s_j, t]; one completion row per job linking starts to C_max.
    """
    if T < inst.max_span:
        raise ValueError(
            f"horizon {T} is below the longest job span {inst.max_span}; no schedule fits"
        )
    model = MilpModel(name=f"tivi_n{inst.n}_m{inst.machines}_T{T}")
    for job in inst.jobs:
        for t in range(T + 1):
            model.add_var(tivi_x_name(job.id, t), "binary")
    model.add_var(CMAX_NAME, "continuous", 0.0, float("inf"), objective=1.0)

    for job in inst.jobs:
        model.add_constr(
            f"assign_{job.id}",
            [(tivi_x_name(job.id, t), 1.0) for t in range(T + 1)],
            "=",
            1.0,
        )
    for t in range(T + 1):
        terms = []
        for job in inst.jobs:
            for tau in range(max(0, t - job.span + 1), t + 1):
                terms.append((tivi_x_name(job.id, tau), 1.0))
        model.add_constr(f"cap_machines_{t}", terms, "<=", float(inst.machines))
    for t in range(T + 1):
        terms = []
        for job in inst.jobs:
            for tau in range(max(0, t - job.setup + 1), t + 1):
                terms.append((tivi_x_name(job.id, tau), 1.0))
        model.add_constr(f"cap_server_{t}", terms, "<=", 1.0)
    for job in inst.jobs:
        terms = [(tivi_x_name(job.id, t), float(t + job.span)) for t in range(T + 1)]
        terms.append((CMAX_NAME, -1.0))
        model.add_constr(f"completion_{job.id}", terms, "<=", 0.0)
    model.validate()
    return model


def decode_starts(values: Mapping[str, float], inst: Instance, T: int, tol: float = 1e-6) -> Schedule:
    """Rebuild a schedule from an integral incumbent of the time-indexed model.

    Start times are explicit in the solution; machines are assigned greedily
    in start order (earliest-free machine), which always succeeds because the
    capacity rows cap the overlap at m.
    """
    assignments = []
    machine_free = [0] * inst.machines
    starts = []
    for job in inst.jobs:
        hit = [t for t in range(T + 1) if abs(values.get(tivi_x_name(job.id, t), 0.0) - 1.0) <= tol]
        if len(hit) != 1:
            raise ValueError(f"job {job.id} has {len(hit)} active start variables")
        starts.append((hit[0], job))
    for start, job in sorted(starts, key=lambda pair: (pair[0], pair[1].id)):
        k = min(range(inst.machines), key=lambda i: (machine_free[i], i))
        if machine_free[k] > start:
            raise ValueError(f"no machine free at t={start} for job {job.id}")
        machine_free[k] = start + job.span
        assignments.append(
            Assignment(
                job=job.id,
                machine=k + 1,
                setup_start=start,
                setup=job.setup,
                processing=job.processing,
            )
        )
    return Schedule.build(inst.machines, assignments)


def tivi_relaxation_report(inst: Instance, T: int | None = None) -> dict[str, float]:
    """LP bound of the baseline and its signed % deviation from the average load."""
    horizon = T if T is not None else horizon_ub(inst).ub
    lp = solve_relaxation(build_tivi(inst, horizon))
    trivial = lb_trivial(inst)
    return {"lp": lp, "vs_trivial": 100.0 * (lp - float(trivial)) / float(trivial)}
