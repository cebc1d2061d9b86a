"""Pydantic request/response models for the HTTP service and the CLI client."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..bench import BenchRecord, SolveReport
from ..bounds import BoundReport
from ..instance import GenParams, Instance, make_instance
from ..oracle import OracleResult
from ..schedule import Assignment, Schedule, Violation


class JobModel(BaseModel):
    setup: int = Field(ge=1)
    processing: int = Field(ge=1)


class InstancePayload(BaseModel):
    machines: int = Field(ge=1)
    jobs: list[JobModel] = Field(min_length=1)

    def to_instance(self) -> Instance:
        return make_instance(
            [j.setup for j in self.jobs], [j.processing for j in self.jobs], self.machines
        )

    @classmethod
    def from_instance(cls, inst: Instance) -> "InstancePayload":
        return cls(
            machines=inst.machines,
            jobs=[JobModel(setup=j.setup, processing=j.processing) for j in inst.jobs],
        )


class AssignmentModel(BaseModel):
    job: int
    machine: int
    setup_start: int


class SchedulePayload(BaseModel):
    machines: int
    makespan: int
    assignments: list[AssignmentModel]

    @classmethod
    def from_schedule(cls, sched: Schedule) -> "SchedulePayload":
        return cls(
            machines=sched.machines,
            makespan=sched.makespan,
            assignments=[
                AssignmentModel(job=a.job, machine=a.machine, setup_start=a.setup_start)
                for a in sched.assignments
            ],
        )

    def to_schedule(self, inst: Instance) -> Schedule:
        assignments = []
        for entry in self.assignments:
            job = inst.job(entry.job)
            assignments.append(
                Assignment(
                    job=job.id,
                    machine=entry.machine,
                    setup_start=entry.setup_start,
                    setup=job.setup,
                    processing=job.processing,
                )
            )
        ordered = tuple(sorted(assignments, key=lambda a: (a.setup_start, a.job)))
        return Schedule(machines=self.machines, assignments=ordered, makespan=self.makespan)


class GenerateRequest(BaseModel):
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    alpha: float = Field(ge=0.0, lt=1.0)
    rho: float = Field(gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    replications: int = Field(default=10, ge=1)

    def to_params(self) -> GenParams:
        return GenParams(
            n=self.n,
            m=self.m,
            alpha=self.alpha,
            rho=self.rho,
            seed=self.seed,
            replications=self.replications,
        )


class GenerateResponse(BaseModel):
    labels: list[str]
    instances: list[InstancePayload]


class BoundsRequest(BaseModel):
    instance: InstancePayload


class BoundsResponse(BaseModel):
    lb_trivial: float
    lb_trivial_exact: str
    lb_trivial_int: int
    lb_better: int
    ub: int
    winning_heuristic: str
    winning_rule: str
    witness: SchedulePayload

    @classmethod
    def from_report(cls, report: BoundReport) -> "BoundsResponse":
        exact = report.lb_trivial_exact
        return cls(
            lb_trivial=float(exact),
            lb_trivial_exact=f"{exact.numerator}/{exact.denominator}",
            lb_trivial_int=report.lb_trivial_int,
            lb_better=report.lb_better,
            ub=report.ub,
            winning_heuristic=report.winning_heuristic,
            winning_rule=report.winning_rule.value,
            witness=SchedulePayload.from_schedule(report.ub_witness),
        )


class SolveRequest(BaseModel):
    instance: InstancePayload
    model: str = "fff"
    time_limit: float | None = Field(default=None, gt=0)
    gap: float = Field(default=1e-6, ge=0)
    grouped: bool = True
    shortcut: bool = True
    with_lp: bool = False


class SolveResponse(BaseModel):
    model: str
    status: str
    objective: float | None
    best_bound: float | None
    lp_bound: float | None
    wall_time: float
    var_count: int
    constraint_count: int
    horizon: int
    lb_better: int
    ub: int
    proved_by_bounds: bool
    schedule: SchedulePayload | None

    @classmethod
    def from_report(cls, rep: SolveReport) -> "SolveResponse":
        return cls(
            model=rep.model,
            status=rep.status,
            objective=rep.objective,
            best_bound=rep.best_bound,
            lp_bound=rep.lp_bound,
            wall_time=rep.wall_time,
            var_count=rep.var_count,
            constraint_count=rep.constraint_count,
            horizon=rep.horizon,
            lb_better=rep.bounds.lb_better,
            ub=rep.bounds.ub,
            proved_by_bounds=rep.proved_by_bounds,
            schedule=SchedulePayload.from_schedule(rep.schedule) if rep.schedule else None,
        )


class ExportRequest(BaseModel):
    instance: InstancePayload
    model: str = "fff"
    format: str = "lp"
    grouped: bool = True


class ExportResponse(BaseModel):
    format: str
    text: str
    var_count: int
    constraint_count: int


class OracleRequest(BaseModel):
    instance: InstancePayload
    cap: int = Field(default=8, ge=1)


class OracleResponse(BaseModel):
    optimum: int
    permutations_explored: int
    witness: SchedulePayload

    @classmethod
    def from_result(cls, result: OracleResult) -> "OracleResponse":
        return cls(
            optimum=result.optimum,
            permutations_explored=result.permutations_explored,
            witness=SchedulePayload.from_schedule(result.witness),
        )


class ViolationModel(BaseModel):
    rule: str
    jobs: list[int]
    window: list[int]
    detail: str

    @classmethod
    def from_violation(cls, v: Violation) -> "ViolationModel":
        return cls(rule=v.rule, jobs=list(v.jobs), window=list(v.window), detail=v.detail)


class ValidateRequest(BaseModel):
    instance: InstancePayload
    schedule: SchedulePayload


class ValidateResponse(BaseModel):
    valid: bool
    makespan: int
    violations: list[ViolationModel]


class GanttRequest(BaseModel):
    instance: InstancePayload
    schedule: SchedulePayload


class GanttResponse(BaseModel):
    svg: str


class GenParamsModel(BaseModel):
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    alpha: float = Field(ge=0.0, lt=1.0)
    rho: float = Field(gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    replications: int = Field(default=10, ge=1)

    def to_params(self) -> GenParams:
        return GenParams(**self.model_dump())

    @classmethod
    def from_params(cls, p: GenParams) -> "GenParamsModel":
        return cls(n=p.n, m=p.m, alpha=p.alpha, rho=p.rho, seed=p.seed, replications=p.replications)


class BenchRequest(BaseModel):
    scope: str | None = None
    cells: list[GenParamsModel] | None = None
    models: list[str] = ["fff", "fft", "tivi"]
    time_limit: float | None = 3600.0
    gap: float = 1e-6
    warm: bool = False
    jobs: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0)
    replications: int | None = Field(default=None, ge=1)
    shortcut: bool = True


class BenchRecordModel(BaseModel):
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
    proved_by_bounds: bool
    error: str

    @classmethod
    def from_record(cls, r: BenchRecord) -> "BenchRecordModel":
        return cls(
            instance=r.instance,
            n=r.n,
            m=r.m,
            alpha=r.alpha,
            rho=r.rho,
            replication=r.replication,
            model=r.model,
            status=r.status,
            objective=r.objective,
            best_bound=r.best_bound,
            lp_bound=r.lp_bound,
            wall_time=r.wall_time,
            var_count=r.var_count,
            constraint_count=r.constraint_count,
            proved_by_bounds=r.proved_by_bounds,
            error=r.error,
        )

    def to_record(self) -> BenchRecord:
        return BenchRecord(**self.model_dump())


class BenchResponse(BaseModel):
    records: list[BenchRecordModel]
    report_markdown: str
    report_csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
    backend: str
