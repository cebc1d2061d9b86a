"""Schedule validation, JSON round trip, flow decoding, and the Gantt SVG."""

from pathlib import Path

import pytest

from helpers import chart_schedule
from pms1.instance import make_instance
from pms1.schedule import (
    Assignment,
    FlowDecodeError,
    FlowSolution,
    Schedule,
    decode_flow,
    gantt_svg,
    schedule_from_json,
    schedule_to_json,
    validate,
)
from pms1.instance import JobClass

GOLDEN = Path(__file__).parent / "golden"


def test_chart_schedule_is_valid(example5x3):
    sched = chart_schedule()
    assert validate(sched, example5x3) == []
    assert sched.makespan == 17


def test_server_overlap_detected():
    inst = make_instance([2, 2], [3, 3], 2)
    sched = Schedule.build(
        2,
        [
            Assignment(1, 1, 0, 2, 3),
            Assignment(2, 2, 1, 2, 3),  # setup [1,3) overlaps [0,2)
        ],
    )
    rules = [v.rule for v in validate(sched, inst)]
    assert "server_overlap" in rules


def test_machine_overlap_detected():
    inst = make_instance([2, 3], [3, 5], 3)
    sched = Schedule.build(
        3,
        [
            Assignment(1, 1, 0, 2, 3),
            Assignment(2, 1, 3, 3, 5),  # machine 1 busy [0,5), next starts at 3
        ],
    )
    rules = [v.rule for v in validate(sched, inst)]
    assert "machine_overlap" in rules
    assert "server_overlap" not in rules


def test_missing_and_duplicate_jobs():
    inst = make_instance([1, 1], [1, 1], 2)
    sched = Schedule.build(2, [Assignment(1, 1, 0, 1, 1), Assignment(1, 2, 2, 1, 1)])
    rules = sorted(v.rule for v in validate(sched, inst))
    assert rules == ["job_duplicate", "job_missing"]


def test_machine_range_and_length_mismatch():
    inst = make_instance([1], [2], 1)
    sched = Schedule.build(1, [Assignment(1, 2, 0, 9, 9)])
    rules = {v.rule for v in validate(sched, inst)}
    assert {"machine_range", "length_mismatch"} <= rules


def test_makespan_mismatch_detected():
    inst = make_instance([1], [2], 1)
    sched = Schedule(machines=1, assignments=(Assignment(1, 1, 0, 1, 2),), makespan=99)
    assert any(v.rule == "makespan_mismatch" for v in validate(sched, inst))


def test_json_round_trip(example5x3):
    sched = chart_schedule()
    text = schedule_to_json(sched)
    back = schedule_from_json(text, example5x3)
    assert back == sched


def _example_flow_solution(example5x3):
    """Hand-built integral flow for the chart schedule (makespan 17, T=18)."""
    sched = chart_schedule()
    classes = tuple(
        JobClass(setup=j.setup, processing=j.processing, multiplicity=1, representative=j.id, members=(j.id,))
        for j in example5x3.jobs
    )
    T = 18
    starts = {(a.job, a.setup_start): 1.0 for a in sched.assignments}
    idle_m = {}
    idle_s = {}
    for t in range(T):
        if t >= sched.makespan:
            idle_m[t] = 0.0
            idle_s[t] = 0.0
            continue
        busy_m = sum(1 for a in sched.assignments if a.setup_start <= t < a.completion)
        busy_s = sum(1 for a in sched.assignments if a.setup_start <= t < a.setup_end)
        idle_m[t] = float(3 - busy_m)
        idle_s[t] = float(1 - busy_s)
    finish = {t: 1.0 if t == 17 else 0.0 for t in range(1, T + 1)}
    return FlowSolution(
        classes=classes,
        machines=3,
        horizon=T,
        starts=starts,
        idle_machines=idle_m,
        idle_server=idle_s,
        finish=finish,
    )


def test_decode_flow_chart_solution(example5x3):
    sol = _example_flow_solution(example5x3)
    sched = decode_flow(sol)
    assert validate(sched, example5x3) == []
    assert sched.makespan == 17
    # deterministic decomposition: machine 1 starts with job 1's arc over [0, 5)
    first = min(sched.assignments, key=lambda a: (a.setup_start, a.job))
    assert (first.job, first.machine, first.setup_start) == (1, 1, 0)


def test_decode_flow_rejects_fractional(example5x3):
    sol = _example_flow_solution(example5x3)
    broken = FlowSolution(
        classes=sol.classes,
        machines=sol.machines,
        horizon=sol.horizon,
        starts={**sol.starts, (1, 0): 0.5},
        idle_machines=sol.idle_machines,
        idle_server=sol.idle_server,
        finish=sol.finish,
    )
    with pytest.raises(FlowDecodeError, match="non-integral"):
        decode_flow(broken)


def test_decode_flow_reports_imbalance(example5x3):
    sol = _example_flow_solution(example5x3)
    # drop one idle-machine unit: balance breaks at that node
    idle = dict(sol.idle_machines)
    idle[0] = idle[0] - 1
    broken = FlowSolution(
        classes=sol.classes,
        machines=sol.machines,
        horizon=sol.horizon,
        starts=sol.starts,
        idle_machines=idle,
        idle_server=sol.idle_server,
        finish=sol.finish,
    )
    with pytest.raises(FlowDecodeError, match="imbalance at node 0"):
        decode_flow(broken)


def test_decode_flow_single_job():
    inst = make_instance([4], [7], 1)
    classes = (JobClass(setup=4, processing=7, multiplicity=1, representative=1, members=(1,)),)
    sol = FlowSolution(
        classes=classes,
        machines=1,
        horizon=11,
        starts={(1, 0): 1.0},
        idle_machines={t: 0.0 for t in range(11)},
        idle_server={t: 0.0 if t < 4 else 1.0 for t in range(11)},
        finish={t: 1.0 if t == 11 else 0.0 for t in range(1, 12)},
    )
    sched = decode_flow(sol)
    assert sched.makespan == 11
    assert validate(sched, inst) == []


def test_gantt_structure():
    sched = chart_schedule()
    svg = gantt_svg(sched)
    assert svg.startswith("<svg")
    assert svg.count(">M1<") == 1 and ">M3<" in svg and ">server<" in svg
    # every job paints one setup + one processing bar per row, and the
    # setup repeats on the server row: 3 rects per job plus background
    assert svg.count("<rect") == 1 + 3 * len(sched.assignments)


def test_gantt_golden_bytes():
    svg = gantt_svg(chart_schedule())
    golden = GOLDEN / "example_gantt.svg"
    assert golden.exists(), "golden SVG missing; regenerate with scripts in tests/golden"
    assert svg == golden.read_text()


def test_gantt_single_job_rows():
    sched = Schedule.build(1, [Assignment(1, 1, 0, 2, 3)])
    svg = gantt_svg(sched)
    assert ">M1<" in svg and ">server<" in svg
    assert svg.count("<rect") == 1 + 3
