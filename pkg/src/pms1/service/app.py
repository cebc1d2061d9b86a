"""FastAPI service wrapping the scheduling library.

Each endpoint is a thin wrapper around a plain handler function; the CLI
calls the same handlers in-process when no remote server is configured, so
both front ends share one code path.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__, bench, milp, oracle
from ..bounds import horizon_ub
from ..instance import GRID_SCOPES, generate, table3_grid
from ..schedule import gantt_svg, validate
from . import schemas


def handle_generate(req: schemas.GenerateRequest) -> schemas.GenerateResponse:
    params = req.to_params()
    instances = generate(params)
    return schemas.GenerateResponse(
        labels=[params.label(i) for i in range(len(instances))],
        instances=[schemas.InstancePayload.from_instance(inst) for inst in instances],
    )


def handle_bounds(req: schemas.BoundsRequest) -> schemas.BoundsResponse:
    return schemas.BoundsResponse.from_report(horizon_ub(req.instance.to_instance()))


def handle_solve(req: schemas.SolveRequest) -> schemas.SolveResponse:
    report = bench.solve_instance(
        req.instance.to_instance(),
        req.model,
        time_limit=req.time_limit,
        gap=req.gap,
        grouped=req.grouped,
        shortcut=req.shortcut,
        with_lp=req.with_lp,
    )
    return schemas.SolveResponse.from_report(report)


def handle_export(req: schemas.ExportRequest) -> schemas.ExportResponse:
    inst = req.instance.to_instance()
    T = horizon_ub(inst).ub
    model = bench.build_model(inst, req.model, T, grouped=req.grouped)
    if req.format == "lp":
        text = milp.export_lp(model)
    elif req.format == "mps":
        text = milp.export_mps(model)
    else:
        raise ValueError(f"unknown export format {req.format!r}; use 'lp' or 'mps'")
    return schemas.ExportResponse(
        format=req.format,
        text=text,
        var_count=len(model.variables),
        constraint_count=len(model.constraints),
    )


def handle_oracle(req: schemas.OracleRequest) -> schemas.OracleResponse:
    result = oracle.brute_force(req.instance.to_instance(), cap=req.cap)
    return schemas.OracleResponse.from_result(result)


def handle_validate(req: schemas.ValidateRequest) -> schemas.ValidateResponse:
    inst = req.instance.to_instance()
    sched = req.schedule.to_schedule(inst)
    violations = validate(sched, inst)
    return schemas.ValidateResponse(
        valid=not violations,
        makespan=sched.makespan,
        violations=[schemas.ViolationModel.from_violation(v) for v in violations],
    )


def handle_gantt(req: schemas.GanttRequest) -> schemas.GanttResponse:
    inst = req.instance.to_instance()
    sched = req.schedule.to_schedule(inst)
    return schemas.GanttResponse(svg=gantt_svg(sched))


def handle_bench(req: schemas.BenchRequest) -> schemas.BenchResponse:
    if req.cells:
        grid = [cell.to_params() for cell in req.cells]
    elif req.scope:
        if req.scope not in GRID_SCOPES:
            raise ValueError(f"scope must be one of {GRID_SCOPES}, got {req.scope!r}")
        grid = table3_grid(req.scope, seed=req.seed, replications=req.replications or 10)
    else:
        raise ValueError("bench request needs either 'scope' or explicit 'cells'")
    records = bench.run_bench(
        grid,
        models=req.models,
        time_limit=req.time_limit,
        gap=req.gap,
        warm=req.warm,
        jobs=req.jobs,
        shortcut=req.shortcut,
    )
    rows = bench.indicators(records)
    return schemas.BenchResponse(
        records=[schemas.BenchRecordModel.from_record(r) for r in records],
        report_markdown=bench.render_report(rows, "markdown"),
        report_csv=bench.render_report(rows, "csv"),
    )


def handle_health() -> schemas.HealthResponse:
    return schemas.HealthResponse(
        status="ok", version=__version__, backend=milp.get_backend().name
    )


# Route table shared by the FastAPI app and the in-process CLI client.
ROUTES = {
    "/generate": (schemas.GenerateRequest, handle_generate, schemas.GenerateResponse),
    "/bounds": (schemas.BoundsRequest, handle_bounds, schemas.BoundsResponse),
    "/solve": (schemas.SolveRequest, handle_solve, schemas.SolveResponse),
    "/export": (schemas.ExportRequest, handle_export, schemas.ExportResponse),
    "/oracle": (schemas.OracleRequest, handle_oracle, schemas.OracleResponse),
    "/validate": (schemas.ValidateRequest, handle_validate, schemas.ValidateResponse),
    "/gantt": (schemas.GanttRequest, handle_gantt, schemas.GanttResponse),
    "/bench": (schemas.BenchRequest, handle_bench, schemas.BenchResponse),
}


def create_app() -> FastAPI:
    app = FastAPI(
        title="pms1 scheduling service",
        description=(
            "Makespan minimisation on identical parallel machines with a "
            "shared setup server: bounds, exact flow / time-indexed models, "
            "a brute-force oracle, schedule validation and Gantt rendering."
        ),
        version=__version__,
    )

    @app.post("/generate", response_model=schemas.GenerateResponse)
    def generate_endpoint(req: schemas.GenerateRequest):
        return _run(handle_generate, req)

    @app.post("/bounds", response_model=schemas.BoundsResponse)
    def bounds_endpoint(req: schemas.BoundsRequest):
        return _run(handle_bounds, req)

    @app.post("/solve", response_model=schemas.SolveResponse)
    def solve_endpoint(req: schemas.SolveRequest):
        return _run(handle_solve, req)

    @app.post("/export", response_model=schemas.ExportResponse)
    def export_endpoint(req: schemas.ExportRequest):
        return _run(handle_export, req)

    @app.post("/oracle", response_model=schemas.OracleResponse)
    def oracle_endpoint(req: schemas.OracleRequest):
        return _run(handle_oracle, req)

    @app.post("/validate", response_model=schemas.ValidateResponse)
    def validate_endpoint(req: schemas.ValidateRequest):
        return _run(handle_validate, req)

    @app.post("/gantt", response_model=schemas.GanttResponse)
    def gantt_endpoint(req: schemas.GanttRequest):
        return _run(handle_gantt, req)

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench_endpoint(req: schemas.BenchRequest):
        return _run(handle_bench, req)

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return handle_health()

    return app


def _run(handler, req):
    try:
        return handler(req)
    except (ValueError, milp.BackendError, milp.RelaxationError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
