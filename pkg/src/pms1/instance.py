"""Problem data, the canonical instance file format, and the random generator.

The problem: ``n`` jobs must be scheduled on ``m`` identical parallel
machines.  Each job ``j`` first occupies a single shared server for
``setup`` time units and then runs for ``processing`` units on its machine.
The machine is reserved from the moment the setup starts until the job
completes, and the server can perform at most one setup at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Expected processing time E(p) used by the benchmark generator.
MEAN_PROCESSING = 25

ALPHA_GRID = (0.1, 0.3, 0.5)
RHO_GRID = (0.5, 0.7, 1.0)


class InstanceFormatError(ValueError):
    """Malformed instance text; carries the offending 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, slots=True)
class Job:
    """One job: a server-side setup immediately followed by processing."""

    id: int
    setup: int
    processing: int

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"job id must be >= 1, got {self.id}")
        if self.setup < 1 or self.processing < 1:
            raise ValueError(
                f"job {self.id}: setup and processing must be positive integers, "
                f"got ({self.setup}, {self.processing})"
            )

    @property
    def span(self) -> int:
        """Total machine occupation: setup plus processing."""
        return self.setup + self.processing


@dataclass(frozen=True, slots=True)
class Instance:
    """An immutable problem instance: jobs with ids 1..n and a machine count."""

    jobs: tuple[Job, ...]
    machines: int

    def __post_init__(self) -> None:
        if self.machines < 1:
            raise ValueError(f"machine count must be >= 1, got {self.machines}")
        if not self.jobs:
            raise ValueError("instance needs at least one job")
        ids = [job.id for job in self.jobs]
        if ids != list(range(1, len(self.jobs) + 1)):
            raise ValueError(f"job ids must be contiguous 1..n in order, got {ids}")

    @property
    def n(self) -> int:
        return len(self.jobs)

    def job(self, job_id: int) -> Job:
        return self.jobs[job_id - 1]

    @property
    def setups(self) -> tuple[int, ...]:
        return tuple(job.setup for job in self.jobs)

    @property
    def processings(self) -> tuple[int, ...]:
        return tuple(job.processing for job in self.jobs)

    @property
    def total_work(self) -> int:
        """Sum of setup + processing over all jobs."""
        return sum(job.span for job in self.jobs)

    @property
    def max_span(self) -> int:
        return max(job.span for job in self.jobs)


def make_instance(setups: list[int], processings: list[int], machines: int) -> Instance:
    """Build an instance from parallel setup/processing lists."""
    if len(setups) != len(processings):
        raise ValueError("setups and processings must have equal length")
    jobs = tuple(
        Job(i + 1, int(s), int(p)) for i, (s, p) in enumerate(zip(setups, processings))
    )
    return Instance(jobs=jobs, machines=machines)


def parse_instance(text: str) -> Instance:
    """Parse the canonical instance format.

    Line 1 holds ``n m``; the next ``n`` lines hold ``s_j p_j``.  All values
    are whitespace-separated decimal integers.  Lines starting with ``#`` and
    blank lines are ignored.
    """
    rows: list[tuple[int, list[str]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((lineno, stripped.split()))

    if not rows:
        raise InstanceFormatError(1, "empty instance: missing 'n m' header")

    def to_int(lineno: int, token: str, what: str) -> int:
        try:
            return int(token)
        except ValueError:
            raise InstanceFormatError(lineno, f"{what} is not an integer: {token!r}") from None

    header_line, header = rows[0]
    if len(header) != 2:
        raise InstanceFormatError(header_line, f"header must be 'n m', got {' '.join(header)!r}")
    n = to_int(header_line, header[0], "job count n")
    m = to_int(header_line, header[1], "machine count m")
    if n < 1:
        raise InstanceFormatError(header_line, f"job count must be >= 1, got {n}")
    if m < 1:
        raise InstanceFormatError(header_line, f"machine count must be >= 1, got {m}")

    body = rows[1:]
    if len(body) != n:
        raise InstanceFormatError(
            body[-1][0] if body else header_line,
            f"expected {n} job lines, found {len(body)}",
        )

    jobs = []
    for idx, (lineno, tokens) in enumerate(body, start=1):
        if len(tokens) != 2:
            raise InstanceFormatError(lineno, f"job line must be 's p', got {' '.join(tokens)!r}")
        s = to_int(lineno, tokens[0], "setup time")
        p = to_int(lineno, tokens[1], "processing time")
        if s < 1:
            raise InstanceFormatError(lineno, f"nonpositive setup {s}")
        if p < 1:
            raise InstanceFormatError(lineno, f"nonpositive processing {p}")
        jobs.append(Job(idx, s, p))
    return Instance(jobs=tuple(jobs), machines=m)


def render_instance(inst: Instance) -> str:
    """Serialize to the canonical format; inverse of :func:`parse_instance`."""
    lines = [f"{inst.n} {inst.machines}"]
    lines.extend(f"{job.setup} {job.processing}" for job in inst.jobs)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, slots=True)
class GenParams:
    """Parameters of the random benchmark generator.

    ``alpha`` controls the spread of the uniform draws around their means and
    ``rho`` the server load: E(s) = (rho / m) * E(p) with E(p) = 25.
    """

    n: int
    m: int
    alpha: float
    rho: float
    seed: int = 0
    replications: int = 10

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"need n >= 1 and m >= 1, got n={self.n}, m={self.m}")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError(f"rho must be in (0, 1], got {self.rho}")
        if self.seed < 0:
            raise ValueError(f"seed must be >= 0, got {self.seed}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")

    def label(self, replication: int | None = None) -> str:
        """Stable identifier such as ``n10-m3-a0.1-r0.5-03``."""
        base = f"n{self.n}-m{self.m}-a{self.alpha:g}-r{self.rho:g}"
        if replication is None:
            return base
        return f"{base}-{replication:02d}"


def integer_range(lo: float, hi: float) -> tuple[int, int]:
    """Inclusive integer range contained in the real interval [lo, hi].

    Empty ranges (possible when the interval is narrower than one unit)
    collapse to the single value round(lo) so that the generator stays total.
    """
    a, b = math.ceil(lo), math.floor(hi)
    if a > b:
        r = round(lo)
        return r, r
    return a, b


def _replication_rng(params: GenParams, replication: int) -> np.random.Generator:
    # Philox is counter-based and platform-stable; the seed mixes every
    # grid coordinate so replications are independent of generation order.
    key = np.random.SeedSequence(
        [
            params.seed,
            params.n,
            params.m,
            round(params.alpha * 1000),
            round(params.rho * 1000),
            replication,
        ]
    )
    return np.random.Generator(np.random.Philox(key))


def generate(params: GenParams) -> list[Instance]:
    """Draw ``params.replications`` instances, deterministically per seed.

    Processing times are integer-uniform on the range implied by
    ``(1 +/- alpha) * 25`` and setups on ``(1 +/- alpha) * (rho / m) * 25``,
    both restricted to the integers inside the real interval.  For each
    replication the processing vector is drawn before the setup vector.
    """
    p_lo, p_hi = integer_range(
        (1 - params.alpha) * MEAN_PROCESSING, (1 + params.alpha) * MEAN_PROCESSING
    )
    s_mean = (params.rho / params.m) * MEAN_PROCESSING
    s_lo, s_hi = integer_range((1 - params.alpha) * s_mean, (1 + params.alpha) * s_mean)
    if s_lo < 1 or p_lo < 1:
        raise ValueError(
            f"parameters imply nonpositive durations: p in [{p_lo},{p_hi}], s in [{s_lo},{s_hi}]"
        )

    instances = []
    for rep in range(params.replications):
        rng = _replication_rng(params, rep)
        p = rng.integers(p_lo, p_hi + 1, size=params.n)
        s = rng.integers(s_lo, s_hi + 1, size=params.n)
        instances.append(make_instance([int(v) for v in s], [int(v) for v in p], params.m))
    return instances


@dataclass(frozen=True, slots=True)
class JobClass:
    """A group of identical jobs: shared (setup, processing) and a multiplicity."""

    setup: int
    processing: int
    multiplicity: int
    representative: int
    members: tuple[int, ...] = field(default=(), compare=False)

    @property
    def span(self) -> int:
        return self.setup + self.processing


def group_identical(inst: Instance) -> list[JobClass]:
    """Partition jobs by equal (setup, processing).

    Classes come back sorted by (setup, processing); the representative is
    the smallest member id.
    """
    groups: dict[tuple[int, int], list[int]] = {}
    for job in inst.jobs:
        groups.setdefault((job.setup, job.processing), []).append(job.id)
    classes = []
    for (s, p), ids in sorted(groups.items()):
        classes.append(
            JobClass(
                setup=s,
                processing=p,
                multiplicity=len(ids),
                representative=min(ids),
                members=tuple(sorted(ids)),
            )
        )
    return classes


# The benchmark grid: (alpha, rho) combinations per (n, m).  n=10 and n=20
# share one six-combination pattern; n=50 uses four specific cells; n=100,
# 150 and 200 share an eight-combination pattern over m in {3, 5, 7}.
_COMBOS_SMALL = ((0.1, 0.5), (0.1, 1.0), (0.3, 0.5), (0.3, 0.7), (0.5, 0.7), (0.5, 1.0))
_CELLS_50 = ((3, 0.1, 0.5), (3, 0.5, 0.5), (7, 0.1, 0.7), (7, 0.3, 1.0))
_COMBOS_WIDE = {
    3: ((0.1, 0.5), (0.5, 0.5)),
    5: ((0.1, 0.5), (0.1, 0.7), (0.3, 1.0), (0.5, 0.5)),
    7: ((0.1, 0.7), (0.3, 1.0)),
}

GRID_SCOPES = ("small", "medium", "large", "all")


def table3_grid(scope: str, seed: int = 0, replications: int = 10) -> list[GenParams]:
    """The benchmark parameter grid for one size tier.

    small: n in {10, 20, 50}; medium: n = 100; large: n in {150, 200}.
    Every cell carries ``replications`` draws (10 in the reference runs).
    """
    if scope not in GRID_SCOPES:
        raise ValueError(f"scope must be one of {GRID_SCOPES}, got {scope!r}")

    cells: list[tuple[int, int, float, float]] = []
    if scope in ("small", "all"):
        for n in (10, 20):
            machines = (3, 4) if n == 10 else (3,)
            for m in machines:
                cells.extend((n, m, a, r) for a, r in _COMBOS_SMALL)
        cells.extend((50, m, a, r) for m, a, r in _CELLS_50)
    if scope in ("medium", "all"):
        for m, combos in _COMBOS_WIDE.items():
            cells.extend((100, m, a, r) for a, r in combos)
    if scope in ("large", "all"):
        for n in (150, 200):
            for m, combos in _COMBOS_WIDE.items():
                cells.extend((n, m, a, r) for a, r in combos)

    cells.sort()
    return [
        GenParams(n=n, m=m, alpha=a, rho=r, seed=seed, replications=replications)
        for n, m, a, r in cells
    ]
