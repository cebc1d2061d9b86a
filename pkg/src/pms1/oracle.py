"""Exact optimum for small instances by enumerating server orders.

Independent of the MILP machinery: used as the ground truth the models are
checked against.  For a fixed order of setups on the server, starting each
setup as early as possible and placing the job on the earliest-free machine
is dominant (delaying any setup can only delay every later availability), so
enumerating the n! server orders with that dispatch covers an optimal
schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance
from .schedule import Assignment, Schedule


@dataclass(frozen=True, slots=True)
class OracleResult:
    optimum: int
    witness: Schedule
    permutations_explored: int


def brute_force(inst: Instance, cap: int = 8) -> OracleResult:
    """Minimum makespan over all server orders; refuses n > cap.

    Partial orders are pruned when even an optimistic completion (server kept
    saturated, then the shortest remaining processing) cannot beat the
    incumbent; this never affects exactness.
    """
    if inst.n > cap:
        raise ValueError(
            f"instance has n={inst.n} jobs; the exhaustive oracle is capped at "
            f"{cap} (raise `cap` explicitly if you really want to wait)"
        )

    jobs = inst.jobs
    best_makespan: int | None = None
    best_assignments: list[Assignment] = []
    leaves = 0

    remaining_setup = sum(inst.setups)
    machine_free = [0] * inst.machines
    trail: list[Assignment] = []

    full_mask = (1 << len(jobs)) - 1

    def explore(
        used: int, server_free: int, partial_makespan: int, remaining_setup: int, min_proc: int
    ) -> None:
        nonlocal best_makespan, best_assignments, leaves
        if used == full_mask:
            leaves += 1
            if best_makespan is None or partial_makespan < best_makespan:
                best_makespan = partial_makespan
                best_assignments = list(trail)
            return
        if best_makespan is not None:
            bound = max(partial_makespan, server_free + remaining_setup + min_proc)
            if bound >= best_makespan:
                return
        for idx, job in enumerate(jobs):
            if used >> idx & 1:
                continue
            machine = min(range(len(machine_free)), key=lambda k: (machine_free[k], k))
            start = max(server_free, machine_free[machine])
            saved = machine_free[machine]
            machine_free[machine] = start + job.span
            trail.append(
                Assignment(
                    job=job.id,
                    machine=machine + 1,
                    setup_start=start,
                    setup=job.setup,
                    processing=job.processing,
                )
            )
            rest = [j.processing for k, j in enumerate(jobs) if not (used | 1 << idx) >> k & 1]
            explore(
                used | 1 << idx,
                start + job.setup,
                max(partial_makespan, start + job.span),
                remaining_setup - job.setup,
                min(rest) if rest else 0,
            )
            trail.pop()
            machine_free[machine] = saved

    explore(0, 0, 0, remaining_setup, min(inst.processings))
    assert best_makespan is not None
    return OracleResult(
        optimum=best_makespan,
        witness=Schedule.build(inst.machines, best_assignments),
        permutations_explored=leaves,
    )


def chained_server_optimum(inst: Instance) -> int:
    """Optimum when machines never bind (m >= n): only the server chains.

    Closed-form cross-check: minimum over server orders of
    max_k (sum of the first k setups + processing of the k-th job).
    """
    import itertools

    if inst.machines < inst.n:
        raise ValueError("closed form only valid when machines >= jobs")
    best = None
    for perm in itertools.permutations(inst.jobs):
        elapsed = 0
        worst = 0
        for job in perm:
            elapsed += job.setup
            worst = max(worst, elapsed + job.processing)
        best = worst if best is None else min(best, worst)
    assert best is not None
    return best
