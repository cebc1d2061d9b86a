"""Shared test utilities: fixtures data, independent oracles, and solvers.

The LP-format reader here is written against the format rules, not against
the package's writer, so export tests exercise a genuine round trip.
"""

from __future__ import annotations

import itertools
import math
import re

from pms1 import milp
from pms1.instance import Instance, make_instance
from pms1.schedule import Assignment, Schedule

EXAMPLE_SETUPS = [2, 3, 3, 2, 2]
EXAMPLE_PROCESSINGS = [3, 5, 4, 5, 3]


def example_instance() -> Instance:
    return make_instance(EXAMPLE_SETUPS, EXAMPLE_PROCESSINGS, 3)


def chart_schedule() -> Schedule:
    """The illustrative feasible schedule: setups chained at 0,2,5,8,10.

    Jobs 1,2,3 open machines 1..3; job 5 reuses machine 1, job 4 machine 2.
    Completions (5, 10, 12, 13, 17), makespan 17.
    """
    placement = [(1, 1, 0), (2, 2, 2), (3, 3, 5), (5, 1, 8), (4, 2, 10)]
    inst = example_instance()
    assignments = [
        Assignment(
            job=j,
            machine=mach,
            setup_start=start,
            setup=inst.job(j).setup,
            processing=inst.job(j).processing,
        )
        for j, mach, start in placement
    ]
    return Schedule.build(3, assignments)


def as_int(value: float, tol: float = 1e-6) -> int:
    nearest = round(value)
    assert abs(value - nearest) <= tol, f"expected integral value, got {value!r}"
    return int(nearest)


def solve_objective(model: milp.MilpModel, **kwargs) -> int:
    """Solve to proven optimality and return the objective as an exact integer."""
    outcome = milp.solve(model, **kwargs)
    assert outcome.status == "optimal", f"{model.name}: {outcome.status} ({outcome.message})"
    return as_int(outcome.objective)


def exhaustive_minimum(inst: Instance) -> int:
    """Unpruned reference enumeration of all server orders (independent of
    the oracle module's pruned search)."""
    best = None
    for perm in itertools.permutations(inst.jobs):
        server_free = 0
        machine_free = [0] * inst.machines
        makespan = 0
        for job in perm:
            k = min(range(inst.machines), key=lambda i: (machine_free[i], i))
            start = max(server_free, machine_free[k])
            server_free = start + job.setup
            machine_free[k] = start + job.span
            makespan = max(makespan, machine_free[k])
        best = makespan if best is None else min(best, makespan)
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Acceptance-suite workers (module level so a process pool can pickle them).


def oracle_suite_cell(args: tuple) -> dict:
    """Solve one small instance with every exact method plus the oracle."""
    from pms1.arcflow import build_fff, build_fft, extract_flow, layout
    from pms1.bounds import horizon_ub
    from pms1.instance import GenParams, generate
    from pms1.oracle import brute_force
    from pms1.schedule import decode_flow, validate
    from pms1.tivi import CMAX_NAME, build_tivi

    n, m, alpha, rho, seed, rep = args
    params = GenParams(n=n, m=m, alpha=alpha, rho=rho, seed=seed, replications=rep + 1)
    inst = generate(params)[rep]
    report = horizon_ub(inst)
    T = report.ub
    out = {
        "label": params.label(rep),
        "n": n,
        "m": m,
        "alpha": alpha,
        "rho": rho,
        "lb_trivial_ceil": report.lb_trivial_int,
        "lb_better": report.lb_better,
        "ub": T,
        "witness_violations": len(validate(report.ub_witness, inst)),
    }
    out["oracle"] = brute_force(inst).optimum

    fff = milp.solve(build_fff(inst, T, grouped=True))
    out["fff_status"], out["fff_obj"] = fff.status, fff.objective
    lay = layout(inst, T, grouped=True)
    if fff.status == "optimal":
        decoded = decode_flow(extract_flow(fff.incumbent, lay))
        out["fff_decoded_makespan"] = decoded.makespan
        out["fff_decoded_violations"] = len(validate(decoded, inst))

    fft = milp.solve(build_fft(inst, T))
    out["fft_status"], out["fft_obj"] = fft.status, fft.objective

    tivi_out = milp.solve(build_tivi(inst, T))
    out["tivi_status"], out["tivi_obj"] = tivi_out.status, tivi_out.objective
    out["tivi_cmax"] = tivi_out.incumbent.get(CMAX_NAME)
    return out


def relaxation_suite_cell(args: tuple) -> dict:
    """LP bounds of both formulations for one generated instance."""
    from pms1.arcflow import build_fff
    from pms1.bounds import horizon_ub, lb_trivial
    from pms1.instance import GenParams, generate
    from pms1.schedule import validate
    from pms1.tivi import build_tivi

    n, m, alpha, rho, seed, rep, with_tivi = args
    params = GenParams(n=n, m=m, alpha=alpha, rho=rho, seed=seed, replications=rep + 1)
    inst = generate(params)[rep]
    report = horizon_ub(inst)
    T = report.ub
    trivial = float(lb_trivial(inst))
    out = {
        "label": params.label(rep),
        "n": n,
        "lb_trivial": trivial,
        "lb_trivial_ceil": report.lb_trivial_int,
        "lb_better": report.lb_better,
        "ub": T,
        "witness_violations": len(validate(report.ub_witness, inst)),
        "fff_lp": milp.solve_relaxation(build_fff(inst, T, grouped=True)),
        "tivi_lp": None,
    }
    if with_tivi:
        out["tivi_lp"] = milp.solve_relaxation(build_tivi(inst, T))
    return out


def grouping_suite_cell(args: tuple) -> dict:
    """Grouped and per-job flow models for one duplicate-heavy instance."""
    from pms1.arcflow import build_fff, count_variables
    from pms1.bounds import horizon_ub
    from pms1.instance import GenParams, generate, group_identical

    n, m, rho, seed, rep = args
    params = GenParams(n=n, m=m, alpha=0.1, rho=rho, seed=seed, replications=rep + 1)
    inst = generate(params)[rep]
    report = horizon_ub(inst)
    T = report.ub
    grouped = milp.solve(build_fff(inst, T, grouped=True))
    ungrouped = milp.solve(build_fff(inst, T, grouped=False))
    return {
        "label": params.label(rep),
        "lb_better": report.lb_better,
        "ub": T,
        "has_duplicates": len(group_identical(inst)) < inst.n,
        "grouped_status": grouped.status,
        "grouped_obj": grouped.objective,
        "grouped_vars": count_variables(inst, T, grouped=True),
        "ungrouped_status": ungrouped.status,
        "ungrouped_obj": ungrouped.objective,
        "ungrouped_vars": count_variables(inst, T, grouped=False),
    }


# ---------------------------------------------------------------------------
# Minimal independent reader for the CPLEX-style LP format.

_TERM_RE = re.compile(r"([+-])?\s*(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][A-Za-z0-9_.]*)")


class ParsedLP:
    def __init__(self):
        self.objective: dict[str, float] = {}
        self.constraints: list[tuple[str, dict[str, float], str, float]] = []
        self.bounds: dict[str, tuple[float, float]] = {}
        self.generals: set[str] = set()
        self.binaries: set[str] = set()

    def variable_names(self) -> set[str]:
        names = set(self.objective)
        for _, terms, _, _ in self.constraints:
            names.update(terms)
        names.update(self.bounds)
        names.update(self.generals)
        names.update(self.binaries)
        return names


def _parse_terms(text: str) -> dict[str, float]:
    terms: dict[str, float] = {}
    for sign, coeff, name in _TERM_RE.findall(text):
        value = float(coeff) if coeff else 1.0
        if sign == "-":
            value = -value
        terms[name] = terms.get(name, 0.0) + value
    return terms


def parse_lp(text: str) -> ParsedLP:
    parsed = ParsedLP()
    section = None
    pending = ""

    def flush_constraint(line: str) -> None:
        name, body = line.split(":", 1)
        match = re.search(r"(<=|>=|=)\s*([+-]?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)\s*$", body)
        assert match, f"constraint without sense/rhs: {line!r}"
        sense, rhs = match.group(1), float(match.group(2))
        parsed.constraints.append((name.strip(), _parse_terms(body[: match.start()]), sense, rhs))

    for raw in text.splitlines():
        line = raw.split("\\")[0].strip()
        if not line:
            continue
        lowered = line.lower()
        if lowered in ("minimize", "maximize", "subject to", "bounds", "generals", "binaries", "end"):
            if pending and section == "subject to":
                flush_constraint(pending)
                pending = ""
            section = lowered
            continue
        if section == "minimize":
            if line.startswith("obj:"):
                line = line[len("obj:"):]
            for name, value in _parse_terms(line).items():
                parsed.objective[name] = parsed.objective.get(name, 0.0) + value
        elif section == "subject to":
            if ":" in line and pending:
                flush_constraint(pending)
                pending = line
            elif ":" in line:
                pending = line
            else:
                pending += " " + line
        elif section == "bounds":
            ranged = re.match(
                r"^([+-]?[\d.eE+-]+|-inf)\s*<=\s*([A-Za-z_][\w.]*)\s*<=\s*([+-]?[\d.eE+-]+)$", line
            )
            lower_only = re.match(r"^([A-Za-z_][\w.]*)\s*>=\s*([+-]?[\d.eE+-]+|-inf)$", line)
            if ranged:
                lo = -math.inf if ranged.group(1) == "-inf" else float(ranged.group(1))
                parsed.bounds[ranged.group(2)] = (lo, float(ranged.group(3)))
            elif lower_only:
                lo = -math.inf if lower_only.group(2) == "-inf" else float(lower_only.group(2))
                parsed.bounds[lower_only.group(1)] = (lo, math.inf)
            else:
                raise AssertionError(f"unparsed bounds line: {line!r}")
        elif section == "generals":
            parsed.generals.update(line.split())
        elif section == "binaries":
            parsed.binaries.update(line.split())
    if pending and section == "subject to":
        flush_constraint(pending)
    return parsed


def rebuild_model(parsed: ParsedLP, name: str = "reparsed") -> milp.MilpModel:
    """Turn a parsed LP file back into a solvable model."""
    model = milp.MilpModel(name=name)
    for var in sorted(parsed.variable_names()):
        obj = parsed.objective.get(var, 0.0)
        if var in parsed.binaries:
            model.add_var(var, "binary", objective=obj)
        elif var in parsed.generals:
            lo, hi = parsed.bounds.get(var, (0.0, math.inf))
            model.add_var(var, "integer", lo, hi, objective=obj)
        else:
            lo, hi = parsed.bounds.get(var, (0.0, math.inf))
            model.add_var(var, "continuous", lo, hi, objective=obj)
    for cname, terms, sense, rhs in parsed.constraints:
        model.add_constr(cname, sorted(terms.items()), sense, rhs)  # type: ignore[arg-type]
    return model
