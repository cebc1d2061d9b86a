"""Solver-agnostic MILP models, file export, and the HiGHS backend.

Models are plain data (variables, linear constraints, minimise objective)
plus a hint set.  The single in-tree backend drives HiGHS through
``scipy.optimize.milp``; hints a backend cannot honour are ignored with a
one-time log message.  Fixing variables to zero is applied as a bound
tightening and therefore works on any backend.
"""

from __future__ import annotations

import logging
import math
import os
import re
import time
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

log = logging.getLogger(__name__)

VarKind = Literal["binary", "integer", "continuous"]
Sense = Literal["<=", "=", ">="]
Status = Literal[
    "optimal",
    "feasible",
    "infeasible",
    "no_integer_solution",
    "time_limit_no_solution",
    "error",
]

DEFAULT_MIP_GAP = 1e-6
DEFAULT_LP_TOL = 1e-9

BACKEND_ENV_VAR = "PMS1_BACKEND"


class ModelError(ValueError):
    """The model violates a structural invariant (names, references, coefficients)."""


class BackendError(RuntimeError):
    """No usable solver backend, or the backend rejected the model."""


class RelaxationError(RuntimeError):
    """The LP relaxation is infeasible or unbounded."""

    def __init__(self, kind: str):
        super().__init__(f"LP relaxation is {kind}")
        self.kind = kind


@dataclass(frozen=True, slots=True)
class Variable:
    name: str
    kind: VarKind
    lower: float
    upper: float
    objective: float = 0.0


@dataclass(frozen=True, slots=True)
class Constraint:
    name: str
    terms: tuple[tuple[str, float], ...]
    sense: Sense
    rhs: float


@dataclass(slots=True)
class HintSet:
    """Solver guidance: branching, zero-fixings, and incumbent-search effort."""

    branch_priority: dict[str, int] = field(default_factory=dict)
    branch_direction: dict[str, str] = field(default_factory=dict)
    fixed_zero: frozenset[str] = frozenset()
    aggressive_incumbent_search: bool = False


@dataclass(slots=True)
class MilpModel:
    """A minimisation MILP with uniquely named variables and constraints."""

    name: str = "model"
    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    hints: HintSet = field(default_factory=HintSet)

    def add_var(
        self,
        name: str,
        kind: VarKind,
        lower: float = 0.0,
        upper: float = math.inf,
        objective: float = 0.0,
    ) -> str:
        if kind == "binary":
            lower, upper = max(0.0, lower), min(1.0, upper)
        self.variables.append(Variable(name, kind, lower, upper, objective))
        return name

    def add_constr(
        self, name: str, terms: Iterable[tuple[str, float]], sense: Sense, rhs: float
    ) -> str:
        self.constraints.append(Constraint(name, tuple(terms), sense, rhs))
        return name

    @property
    def var_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def var_index(self) -> dict[str, int]:
        return {v.name: i for i, v in enumerate(self.variables)}

    def validate(self) -> None:
        index = self.var_index()
        if len(index) != len(self.variables):
            seen: set[str] = set()
            for v in self.variables:
                if v.name in seen:
                    raise ModelError(f"duplicate variable name {v.name!r}")
                seen.add(v.name)
        seen_c: set[str] = set()
        for c in self.constraints:
            if c.name in seen_c:
                raise ModelError(f"duplicate constraint name {c.name!r}")
            seen_c.add(c.name)
            for var, coeff in c.terms:
                if var not in index:
                    raise ModelError(f"constraint {c.name!r} references unknown variable {var!r}")
                if not math.isfinite(coeff):
                    raise ModelError(f"constraint {c.name!r} has non-finite coefficient on {var!r}")
            if not math.isfinite(c.rhs):
                raise ModelError(f"constraint {c.name!r} has non-finite rhs")
        for v in self.variables:
            if not math.isfinite(v.objective):
                raise ModelError(f"variable {v.name!r} has non-finite objective coefficient")
            if math.isnan(v.lower) or math.isnan(v.upper) or v.lower > v.upper:
                raise ModelError(f"variable {v.name!r} has bad bounds [{v.lower}, {v.upper}]")
        unknown = self.hints.fixed_zero - index.keys()
        if unknown:
            raise ModelError(f"fixed_zero names unknown variables: {sorted(unknown)}")

    def objective_value(self, values: Mapping[str, float]) -> float:
        return sum(v.objective * values.get(v.name, 0.0) for v in self.variables)


@dataclass(frozen=True, slots=True)
class SolveOutcome:
    """Backend-independent result of one solve."""

    status: Status
    objective: float | None
    best_bound: float | None
    incumbent: dict[str, float]
    wall_time: float
    node_count: int | None = None
    message: str = ""


def evaluate_assignment(
    model: MilpModel, values: Mapping[str, float], tol: float = 1e-6
) -> list[str]:
    """All constraint and bound violations of a candidate assignment.

    Used to audit incumbents and warm starts; missing variables count as 0.
    """
    problems = []
    for v in model.variables:
        x = values.get(v.name, 0.0)
        if x < v.lower - tol or x > v.upper + tol:
            problems.append(f"{v.name}={x:g} outside [{v.lower:g}, {v.upper:g}]")
        if v.kind in ("binary", "integer") and abs(x - round(x)) > tol:
            problems.append(f"{v.name}={x:g} not integral")
    for c in model.constraints:
        lhs = sum(coeff * values.get(var, 0.0) for var, coeff in c.terms)
        ok = (
            lhs <= c.rhs + tol
            if c.sense == "<="
            else lhs >= c.rhs - tol if c.sense == ">=" else abs(lhs - c.rhs) <= tol
        )
        if not ok:
            problems.append(f"{c.name}: lhs {lhs:g} violates {c.sense} {c.rhs:g}")
    return problems


# ---------------------------------------------------------------------------
# File export / import

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")


def _sanitize_names(names: Sequence[str]) -> dict[str, str]:
    mapping: dict[str, str] = {}
    used: set[str] = set()
    for name in names:
        clean = name if _NAME_RE.match(name) else re.sub(r"[^A-Za-z0-9_.]", "_", name)
        if clean and clean[0].isdigit():
            clean = "_" + clean
        if not clean:
            clean = "_v"
        if clean in used:
            raise ModelError(f"name collision after sanitization: {name!r} -> {clean!r}")
        used.add(clean)
        mapping[name] = clean
    return mapping


def _num(x: float) -> str:
    return f"{x:.12g}"


def _lp_terms(terms: Iterable[tuple[str, float]]) -> str:
    chunks: list[str] = []
    for var, coeff in terms:
        if coeff >= 0:
            chunks.append(f"+ {_num(coeff)} {var}")
        else:
            chunks.append(f"- {_num(-coeff)} {var}")
    if not chunks:
        return ""
    text = " ".join(chunks)
    return text[2:] if text.startswith("+ ") else text


def export_lp(model: MilpModel) -> str:
    """CPLEX-style LP format; declaration order is preserved."""
    model.validate()
    names = _sanitize_names(model.var_names + [c.name for c in model.constraints])
    lines = [f"\\ Problem: {model.name}", "Minimize"]
    obj_terms = [(names[v.name], v.objective) for v in model.variables if v.objective != 0.0]
    lines.append(f" obj: {_lp_terms(obj_terms)}".rstrip())
    lines.append("Subject To")
    for c in model.constraints:
        body = _lp_terms((names[v], coeff) for v, coeff in c.terms if coeff != 0.0)
        if not body:
            body = "0 " + names[model.variables[0].name] if model.variables else "0"
        lines.append(f" {names[c.name]}: {body} {c.sense} {_num(c.rhs)}")
    bound_lines = []
    for v in model.variables:
        if v.kind == "binary":
            continue
        lo = "-inf" if v.lower == -math.inf else _num(v.lower)
        if v.upper == math.inf:
            if v.lower == 0.0:
                continue  # LP-format default
            bound_lines.append(f" {names[v.name]} >= {lo}")
        else:
            bound_lines.append(f" {lo} <= {names[v.name]} <= {_num(v.upper)}")
    if bound_lines:
        lines.append("Bounds")
        lines.extend(bound_lines)
    generals = [names[v.name] for v in model.variables if v.kind == "integer"]
    if generals:
        lines.append("Generals")
        lines.append(" " + " ".join(generals))
    binaries = [names[v.name] for v in model.variables if v.kind == "binary"]
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_mps(model: MilpModel) -> str:
    """Free-format MPS; equivalent content to the LP export."""
    model.validate()
    names = _sanitize_names(model.var_names + [c.name for c in model.constraints])
    lines = [f"NAME {model.name}"]
    lines.append("ROWS")
    lines.append(" N obj")
    row_kind = {"<=": "L", ">=": "G", "=": "E"}
    for c in model.constraints:
        lines.append(f" {row_kind[c.sense]} {names[c.name]}")
    lines.append("COLUMNS")
    by_var: dict[str, list[tuple[str, float]]] = {v.name: [] for v in model.variables}
    for c in model.constraints:
        for var, coeff in c.terms:
            by_var[var].append((names[c.name], coeff))
    in_integer_block = False
    marker = 0
    for v in model.variables:
        wants_integer = v.kind in ("binary", "integer")
        if wants_integer != in_integer_block:
            tag = "INTORG" if wants_integer else "INTEND"
            lines.append(f" MARKER{marker} 'MARKER' '{tag}'")
            marker += 1
            in_integer_block = wants_integer
        entries = list(by_var[v.name])
        if v.objective != 0.0:
            entries.insert(0, ("obj", v.objective))
        if not entries:
            entries = [("obj", 0.0)]
        for row, coeff in entries:
            lines.append(f" {names[v.name]} {row} {_num(coeff)}")
    if in_integer_block:
        lines.append(f" MARKER{marker} 'MARKER' 'INTEND'")
    lines.append("RHS")
    for c in model.constraints:
        if c.rhs != 0.0:
            lines.append(f" RHS {names[c.name]} {_num(c.rhs)}")
    lines.append("BOUNDS")
    for v in model.variables:
        name = names[v.name]
        if v.kind == "binary":
            lines.append(f" BV BND {name}")
            continue
        if v.lower == v.upper:
            lines.append(f" FX BND {name} {_num(v.lower)}")
            continue
        if v.lower != 0.0:
            if v.lower == -math.inf:
                lines.append(f" MI BND {name}")
            else:
                lines.append(f" LO BND {name} {_num(v.lower)}")
        if v.upper != math.inf:
            lines.append(f" UP BND {name} {_num(v.upper)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> dict[str, float]:
    """Read 'name value' pairs, one per line; '#' starts a comment."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'name value', got {raw!r}")
        try:
            values[parts[0]] = float(parts[1])
        except ValueError:
            raise ValueError(f"line {lineno}: bad number {parts[1]!r}") from None
    return values


# ---------------------------------------------------------------------------
# Backend

_warned_hints: set[str] = set()


def _warn_once(key: str, message: str) -> None:
    if key not in _warned_hints:
        _warned_hints.add(key)
        log.warning(message)


class ScipyHighsBackend:
    """Drives HiGHS through scipy: `milp` for MIPs, `linprog` for pure LPs.

    Relaxations use the interior-point method: the time-indexed LPs are
    heavily degenerate and stall the bundled dual simplex, while IPM solves
    them in seconds.  Supported controls: time limit, relative MIP gap,
    fixing variables to zero.  Not supported (ignored with a one-time log):
    branch priority/direction, warm starts, and the aggressive
    incumbent-search switch.
    """

    name = "highs"

    def solve(
        self,
        model: MilpModel,
        *,
        time_limit: float | None = None,
        gap: float = DEFAULT_MIP_GAP,
        relax: bool = False,
        warm_start: Mapping[str, float] | None = None,
    ) -> SolveOutcome:
        model.validate()
        hints = model.hints
        if hints.branch_priority or hints.branch_direction:
            _warn_once("branching", "backend 'highs' ignores branch priority/direction hints")
        if hints.aggressive_incumbent_search:
            _warn_once("aggressive", "backend 'highs' has no incumbent-search switch; hint ignored")
        if warm_start is not None:
            _warn_once("warmstart", "backend 'highs' (scipy) cannot accept warm starts; ignored")

        if not model.variables:
            return SolveOutcome("optimal", 0.0, 0.0, {}, 0.0, node_count=0)
        is_mip = not relax and any(v.kind != "continuous" for v in model.variables)
        if is_mip:
            return self._solve_mip(model, time_limit, gap)
        return self._solve_lp(model, time_limit)

    def _arrays(self, model: MilpModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lower = np.array([v.lower for v in model.variables], dtype=float)
        upper = np.array([v.upper for v in model.variables], dtype=float)
        index = model.var_index()
        for name in model.hints.fixed_zero:
            i = index[name]
            lower[i] = 0.0
            upper[i] = 0.0
        c = np.array([v.objective for v in model.variables], dtype=float)
        return c, lower, upper

    def _solve_mip(self, model: MilpModel, time_limit: float | None, gap: float) -> SolveOutcome:
        n = len(model.variables)
        index = model.var_index()
        c, lower, upper = self._arrays(model)
        integrality = np.array([0 if v.kind == "continuous" else 1 for v in model.variables])

        constraints = []
        if model.constraints:
            data, rows, cols = [], [], []
            cl = np.empty(len(model.constraints))
            cu = np.empty(len(model.constraints))
            for i, constr in enumerate(model.constraints):
                for var, coeff in constr.terms:
                    rows.append(i)
                    cols.append(index[var])
                    data.append(coeff)
                if constr.sense == "<=":
                    cl[i], cu[i] = -np.inf, constr.rhs
                elif constr.sense == ">=":
                    cl[i], cu[i] = constr.rhs, np.inf
                else:
                    cl[i] = cu[i] = constr.rhs
            matrix = sp.csc_array((data, (rows, cols)), shape=(len(model.constraints), n))
            constraints.append(LinearConstraint(matrix, cl, cu))

        options: dict[str, object] = {"presolve": True, "disp": False, "mip_rel_gap": gap}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)

        started = time.perf_counter()
        try:
            res = milp(
                c=c,
                integrality=integrality,
                bounds=Bounds(lower, upper),
                constraints=constraints,
                options=options,
            )
        except Exception as exc:  # pragma: no cover - defensive
            raise BackendError(f"backend 'highs' rejected the model: {exc}") from exc
        wall = time.perf_counter() - started

        incumbent: dict[str, float] = {}
        if res.x is not None:
            incumbent = {v.name: float(x) for v, x in zip(model.variables, res.x)}
        objective = float(res.fun) if res.fun is not None else None
        bound = res.mip_dual_bound
        best_bound = float(bound) if bound is not None else None
        nodes = int(res.mip_node_count) if res.mip_node_count is not None else None

        if res.status == 0:
            status: Status = "optimal"
        elif res.status == 1:
            status = "feasible" if res.x is not None else "no_integer_solution"
        elif res.status == 2:
            status = "infeasible"
        else:
            status = "error"
        return SolveOutcome(
            status=status,
            objective=objective,
            best_bound=best_bound,
            incumbent=incumbent,
            wall_time=wall,
            node_count=nodes,
            message=str(res.message),
        )

    def _solve_lp(self, model: MilpModel, time_limit: float | None) -> SolveOutcome:
        index = model.var_index()
        n = len(model.variables)
        c, lower, upper = self._arrays(model)
        data_ub, rows_ub, cols_ub, b_ub = [], [], [], []
        data_eq, rows_eq, cols_eq, b_eq = [], [], [], []
        for constr in model.constraints:
            if constr.sense == "=":
                i = len(b_eq)
                b_eq.append(constr.rhs)
                for var, coeff in constr.terms:
                    rows_eq.append(i)
                    cols_eq.append(index[var])
                    data_eq.append(coeff)
            else:
                sign = 1.0 if constr.sense == "<=" else -1.0
                i = len(b_ub)
                b_ub.append(sign * constr.rhs)
                for var, coeff in constr.terms:
                    rows_ub.append(i)
                    cols_ub.append(index[var])
                    data_ub.append(sign * coeff)
        A_ub = sp.csc_array((data_ub, (rows_ub, cols_ub)), shape=(len(b_ub), n)) if b_ub else None
        A_eq = sp.csc_array((data_eq, (rows_eq, cols_eq)), shape=(len(b_eq), n)) if b_eq else None
        bounds = np.stack(
            [lower, np.where(np.isinf(upper), np.inf, upper)], axis=1
        )
        options: dict[str, object] = {"presolve": True, "disp": False}
        if time_limit is not None:
            options["time_limit"] = float(time_limit)

        started = time.perf_counter()
        try:
            res = linprog(
                c,
                A_ub=A_ub,
                b_ub=np.array(b_ub) if b_ub else None,
                A_eq=A_eq,
                b_eq=np.array(b_eq) if b_eq else None,
                bounds=bounds,
                method="highs-ipm",
                options=options,
            )
        except Exception as exc:  # pragma: no cover - defensive
            raise BackendError(f"backend 'highs' rejected the model: {exc}") from exc
        wall = time.perf_counter() - started

        incumbent: dict[str, float] = {}
        if res.x is not None:
            incumbent = {v.name: float(x) for v, x in zip(model.variables, res.x)}
        objective = float(res.fun) if res.fun is not None else None
        if res.status == 0:
            status: Status = "optimal"
        elif res.status == 2:
            status = "infeasible"
        else:
            status = "error"
        message = str(res.message)
        if res.status == 3:
            message = f"unbounded: {message}"
        return SolveOutcome(
            status=status,
            objective=objective,
            best_bound=objective if status == "optimal" else None,
            incumbent=incumbent,
            wall_time=wall,
            node_count=None,
            message=message,
        )


_BACKENDS = {"highs": ScipyHighsBackend}


def get_backend(name: str | None = None) -> ScipyHighsBackend:
    """Resolve a backend by name, honouring the PMS1_BACKEND override."""
    chosen = name or os.environ.get(BACKEND_ENV_VAR) or "highs"
    try:
        return _BACKENDS[chosen]()
    except KeyError:
        raise BackendError(
            f"unknown backend {chosen!r}; available: {sorted(_BACKENDS)}"
        ) from None


def solve(
    model: MilpModel,
    *,
    time_limit: float | None = None,
    gap: float = DEFAULT_MIP_GAP,
    warm_start: Mapping[str, float] | None = None,
    backend: str | None = None,
) -> SolveOutcome:
    """Solve to integrality; returns the best incumbent and bound at termination."""
    return get_backend(backend).solve(
        model, time_limit=time_limit, gap=gap, warm_start=warm_start
    )


def solve_relaxation(model: MilpModel, backend: str | None = None) -> float:
    """Optimal objective with all integrality dropped (bounds kept)."""
    outcome = get_backend(backend).solve(model, relax=True, gap=DEFAULT_LP_TOL)
    if outcome.status == "infeasible":
        raise RelaxationError("infeasible")
    if outcome.status != "optimal" or outcome.objective is None:
        raise RelaxationError("unbounded" if "nbounded" in outcome.message else outcome.status)
    return outcome.objective
