"""Command-line front end.

Every command builds a request model and sends it through a client: either
straight to the in-process service handlers (default) or to a remote server
over HTTP (``--server`` / PMS1_SERVER), so the CLI and the HTTP API expose
exactly the same operations.  Defaults can come from a ``key=value`` config
file; the solver backend is picked via the PMS1_BACKEND environment variable.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx
from pydantic import BaseModel

from .instance import GRID_SCOPES, parse_instance, render_instance
from .service import ROUTES
from .service import schemas as sc

SERVER_ENV_VAR = "PMS1_SERVER"
CONFIG_KEYS = ("server", "time_limit", "gap", "jobs", "seed")


def load_config(path: str | None) -> dict[str, str]:
    """Read ``key=value`` lines; '#' starts a comment.  Unknown keys error."""
    candidate = Path(path) if path else Path("pms1.cfg")
    if not candidate.exists():
        if path:
            raise click.ClickException(f"config file not found: {path}")
        return {}
    config: dict[str, str] = {}
    for lineno, raw in enumerate(candidate.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.ClickException(f"{candidate}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise click.ClickException(
                f"{candidate}:{lineno}: unknown key {key!r}; known: {', '.join(CONFIG_KEYS)}"
            )
        config[key] = value
    return config


class ServiceClient:
    """Dispatches request models to local handlers or a remote server."""

    def __init__(self, server: str | None, timeout: float = 24 * 3600.0):
        self.server = server.rstrip("/") if server else None
        self.timeout = timeout

    def call(self, path: str, request: BaseModel) -> BaseModel:
        request_cls, handler, response_cls = ROUTES[path]
        assert isinstance(request, request_cls)
        if self.server is None:
            try:
                return handler(request)
            except ValueError as exc:
                raise click.ClickException(str(exc)) from exc
        response = httpx.post(
            self.server + path, json=request.model_dump(), timeout=self.timeout
        )
        if response.status_code == 422:
            detail = response.json().get("detail", response.text)
            raise click.ClickException(f"server rejected request: {detail}")
        response.raise_for_status()
        return response_cls.model_validate(response.json())


def _read_instance_payload(path: str) -> sc.InstancePayload:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read instance file: {exc}") from exc
    try:
        inst = parse_instance(text)
    except ValueError as exc:
        raise click.ClickException(f"{path}: {exc}") from exc
    return sc.InstancePayload.from_instance(inst)


def _read_schedule_payload(path: str) -> sc.SchedulePayload:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read schedule JSON: {exc}") from exc
    return sc.SchedulePayload.model_validate(doc)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(path).write_text(text)


@click.group()
@click.option("--server", default=None, help="Remote service URL; default is in-process.")
@click.option("--config", "config_path", default=None, help="key=value defaults file.")
@click.pass_context
def main(ctx: click.Context, server: str | None, config_path: str | None) -> None:
    """Scheduling with a shared setup server: bounds, exact models, benchmarks."""
    config = load_config(config_path)
    server = server or os.environ.get(SERVER_ENV_VAR) or config.get("server")
    ctx.obj = {
        "client": ServiceClient(server),
        "config": config,
    }


def _cfg_float(ctx: click.Context, key: str, value: float | None) -> float | None:
    if value is not None:
        return value
    raw = ctx.obj["config"].get(key)
    return float(raw) if raw is not None else None


def _cfg_int(ctx: click.Context, key: str, value: int | None, fallback: int) -> int:
    if value is not None:
        return value
    raw = ctx.obj["config"].get(key)
    return int(raw) if raw is not None else fallback


@main.command()
@click.option("--n", type=int, required=True, help="Job count.")
@click.option("--m", type=int, required=True, help="Machine count.")
@click.option("--alpha", type=float, required=True, help="Spread of the uniform draws.")
@click.option("--rho", type=float, required=True, help="Server-load factor (<= 1).")
@click.option("--seed", type=int, default=None)
@click.option("--replications", type=int, default=10, show_default=True)
@click.option("--out", "out_dir", default=None, help="Directory for instance files; default stdout.")
@click.pass_context
def generate(ctx, n, m, alpha, rho, seed, replications, out_dir) -> None:
    """Draw random instances and write them in the canonical format."""
    request = sc.GenerateRequest(
        n=n, m=m, alpha=alpha, rho=rho, seed=_cfg_int(ctx, "seed", seed, 0), replications=replications
    )
    response = ctx.obj["client"].call("/generate", request)
    if out_dir is None:
        for label, payload in zip(response.labels, response.instances):
            click.echo(f"# {label}")
            click.echo(render_instance(payload.to_instance()), nl=False)
        return
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for label, payload in zip(response.labels, response.instances):
        (directory / f"{label}.txt").write_text(render_instance(payload.to_instance()))
    click.echo(f"wrote {len(response.labels)} instances to {directory}")


@main.command()
@click.argument("instance_file")
@click.option("--json", "as_json", is_flag=True, help="Emit JSON instead of aligned text.")
@click.pass_context
def bounds(ctx, instance_file, as_json) -> None:
    """Lower bounds, heuristic upper bound, and the winning heuristic."""
    request = sc.BoundsRequest(instance=_read_instance_payload(instance_file))
    response = ctx.obj["client"].call("/bounds", request)
    if as_json:
        click.echo(response.model_dump_json(indent=2))
        return
    rows = [
        ("lb_trivial", f"{response.lb_trivial_exact} ({response.lb_trivial:.4f})"),
        ("lb_trivial_int", str(response.lb_trivial_int)),
        ("lb_better", str(response.lb_better)),
        ("ub", str(response.ub)),
        ("winner", f"{response.winning_heuristic}/{response.winning_rule}"),
    ]
    width = max(len(k) for k, _ in rows)
    for key, value in rows:
        click.echo(f"{key.ljust(width)}  {value}")


@main.command()
@click.argument("instance_file")
@click.option(
    "--model",
    type=click.Choice(["fff", "fft", "fft-warm", "tivi"]),
    default="fff",
    show_default=True,
)
@click.option("--time-limit", type=float, default=None, help="Solve time limit in seconds.")
@click.option("--gap", type=float, default=None, help="Relative MIP gap tolerance.")
@click.option("--export", "export_path", default=None, help="Write the model (.lp or .mps).")
@click.option("--schedule-out", default=None, help="Write the schedule as JSON.")
@click.option("--ungrouped", is_flag=True, help="Keep one column per job (fff only).")
@click.option("--no-shortcut", is_flag=True, help="Solve even when bounds already prove the optimum.")
@click.option("--with-lp", is_flag=True, help="Also solve the LP relaxation.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def solve(
    ctx, instance_file, model, time_limit, gap, export_path, schedule_out, ungrouped,
    no_shortcut, with_lp, as_json,
) -> None:
    """Solve one instance to optimality (or until the time limit)."""
    payload = _read_instance_payload(instance_file)
    client = ctx.obj["client"]
    if export_path:
        fmt = "mps" if export_path.endswith(".mps") else "lp"
        export = client.call(
            "/export",
            sc.ExportRequest(instance=payload, model=model, format=fmt, grouped=not ungrouped),
        )
        Path(export_path).write_text(export.text)
        click.echo(
            f"exported {fmt} model ({export.var_count} variables, "
            f"{export.constraint_count} constraints) to {export_path}"
        )
    request = sc.SolveRequest(
        instance=payload,
        model=model,
        time_limit=_cfg_float(ctx, "time_limit", time_limit),
        gap=_cfg_float(ctx, "gap", gap) or 1e-6,
        grouped=not ungrouped,
        shortcut=not no_shortcut,
        with_lp=with_lp,
    )
    response = client.call("/solve", request)
    if schedule_out and response.schedule is not None:
        _write(schedule_out, json.dumps(response.schedule.model_dump(), indent=2) + "\n")
    if as_json:
        click.echo(response.model_dump_json(indent=2))
        return
    click.echo(f"model        {response.model}")
    click.echo(f"status       {response.status}" + ("  (proved by bounds)" if response.proved_by_bounds else ""))
    if response.objective is not None:
        click.echo(f"objective    {response.objective:g}")
    if response.best_bound is not None:
        click.echo(f"best_bound   {response.best_bound:g}")
    if response.lp_bound is not None:
        click.echo(f"lp_bound     {response.lp_bound:.4f}")
    click.echo(f"bounds       lb_better={response.lb_better} ub={response.ub} horizon={response.horizon}")
    click.echo(f"size         {response.var_count} variables, {response.constraint_count} constraints")
    click.echo(f"wall_time    {response.wall_time:.3f}s")


@main.command()
@click.argument("instance_file")
@click.option("--cap", type=int, default=8, show_default=True, help="Refuse instances above this n.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def oracle(ctx, instance_file, cap, as_json) -> None:
    """Exact optimum by exhaustive enumeration (small instances only)."""
    request = sc.OracleRequest(instance=_read_instance_payload(instance_file), cap=cap)
    response = ctx.obj["client"].call("/oracle", request)
    if as_json:
        click.echo(response.model_dump_json(indent=2))
        return
    click.echo(f"optimum                {response.optimum}")
    click.echo(f"permutations_explored  {response.permutations_explored}")


@main.command()
@click.argument("instance_file")
@click.option("--schedule", "schedule_file", required=True, help="Schedule JSON to validate.")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def validate(ctx, instance_file, schedule_file, as_json) -> None:
    """Check a schedule against the instance's feasibility rules."""
    request = sc.ValidateRequest(
        instance=_read_instance_payload(instance_file),
        schedule=_read_schedule_payload(schedule_file),
    )
    response = ctx.obj["client"].call("/validate", request)
    if as_json:
        click.echo(response.model_dump_json(indent=2))
    elif response.valid:
        click.echo(f"valid schedule, makespan {response.makespan}")
    else:
        click.echo(f"INVALID schedule ({len(response.violations)} violations):")
        for violation in response.violations:
            click.echo(f"  [{violation.rule}] {violation.detail}")
    if not response.valid:
        sys.exit(1)


@main.command()
@click.argument("instance_file")
@click.option("--schedule", "schedule_file", required=True, help="Schedule JSON to draw.")
@click.option("--out", "out_path", default=None, help="SVG output path; default stdout.")
@click.pass_context
def gantt(ctx, instance_file, schedule_file, out_path) -> None:
    """Render a schedule as an SVG Gantt chart (machines plus server row)."""
    request = sc.GanttRequest(
        instance=_read_instance_payload(instance_file),
        schedule=_read_schedule_payload(schedule_file),
    )
    response = ctx.obj["client"].call("/gantt", request)
    _write(out_path, response.svg)


@main.command()
@click.option("--grid", type=click.Choice(GRID_SCOPES), required=True)
@click.option("--models", default="fff,fft,tivi", show_default=True, help="Comma-separated list.")
@click.option("--time-limit", type=float, default=None, help="Per-solve limit in seconds [3600].")
@click.option("--jobs", type=int, default=None, help="Parallel workers.")
@click.option("--seed", type=int, default=None)
@click.option("--replications", type=int, default=None, help="Draws per combination [10].")
@click.option("--warm", is_flag=True, help="Also run the warm-started tuned model.")
@click.option("--no-shortcut", is_flag=True)
@click.option("--out-csv", default=None, help="Write per-record CSV here.")
@click.option("--out-jsonl", default=None, help="Write per-record JSON lines here.")
@click.option("--format", "report_format", type=click.Choice(["markdown", "csv"]), default="markdown", show_default=True)
@click.pass_context
def bench(
    ctx, grid, models, time_limit, jobs, seed, replications, warm, no_shortcut,
    out_csv, out_jsonl, report_format,
) -> None:
    """Run the benchmark grid and print the indicator table."""
    from .bench import records_to_csv, records_to_jsonl  # local: CSV shaping stays in the library

    request = sc.BenchRequest(
        scope=grid,
        models=[m.strip() for m in models.split(",") if m.strip()],
        time_limit=_cfg_float(ctx, "time_limit", time_limit) or 3600.0,
        warm=warm,
        jobs=_cfg_int(ctx, "jobs", jobs, 1),
        seed=_cfg_int(ctx, "seed", seed, 0),
        replications=replications,
        shortcut=not no_shortcut,
    )
    response = ctx.obj["client"].call("/bench", request)
    if out_csv or out_jsonl:
        records = [r.to_record() for r in response.records]
        if out_csv:
            Path(out_csv).write_text(records_to_csv(records))
        if out_jsonl:
            Path(out_jsonl).write_text(records_to_jsonl(records))
    click.echo(response.report_csv if report_format == "csv" else response.report_markdown, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
