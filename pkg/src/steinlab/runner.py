"""Execute a scenario's checks and assemble the report directory."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, config
from .checks import REGISTRY, CheckResult, partial_result, run_check
from .errors import CapacityError
from .report import write_csv, write_json
from .scenario import Scenario, parse_scenario

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CAPACITY = 0, 1, 2, 3
_ORDER = {name: i for i, name in enumerate(REGISTRY)}


def check_rng(seed: int, name: str) -> np.random.Generator:
    """Per-check generator; independent of execution order and worker count."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_ORDER[name],)))


@dataclass
class StepOutcome:
    name: str
    status: str            # "pass", "fail", "capacity", "error"
    result: CheckResult | None
    seconds: float
    message: str = ""


def _step(payload) -> StepOutcome:
    data, name, seed, base = payload
    sc = parse_scenario(data) if isinstance(data, dict) else data
    start = time.perf_counter()
    with config.use_log_base(base):
        try:
            res = run_check(name, sc, check_rng(seed, name), sc.params.get(name))
        except CapacityError as exc:
            return StepOutcome(name, "capacity", partial_result(name, exc),
                               time.perf_counter() - start, str(exc))
    status = "pass" if res.passed else "fail"
    return StepOutcome(name, status, res, time.perf_counter() - start)


@dataclass
class RunReport:
    scenario: Scenario
    seed: int
    unit: str
    steps: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        if any(s.status == "capacity" for s in self.steps):
            return EXIT_CAPACITY
        if any(s.status == "fail" and REGISTRY[s.name].hard for s in self.steps):
            return EXIT_FAIL
        return EXIT_OK

    def summary(self) -> dict:
        checks = {}
        for s in self.steps:
            entry = {"status": s.status, "hard": REGISTRY[s.name].hard}
            if s.result is not None:
                entry["passed"] = s.result.passed
                entry["summary"] = s.result.summary
                entry["table"] = f"{s.name}.csv"
                entry["rows"] = len(s.result.rows)
            if s.message:
                entry["message"] = s.message
            checks[s.name] = entry
        return {"tool": "stein-lab", "version": __version__, "scenario": self.scenario.to_dict(),
                "seed": self.seed, "unit": self.unit, "exit_code": self.exit_code,
                "checks": checks}


def run_scenario(sc: Scenario, out: str | Path | None = None, jobs: int = 1,
                 seed: int | None = None) -> RunReport:
    """Run every listed check; write ``<check>.csv``, ``summary.json`` and ``timings.json``.

    Checks run in parallel when ``jobs > 1``. Results are assembled in the
    listed order so the written bytes do not depend on ``jobs``.
    """
    seed = sc.seed if seed is None else seed
    base = sc.log_base if sc.log_base is not None else ("2" if config.log_base() == 2.0 else "e")
    with config.use_log_base(base):
        unit = config.unit_name()
    report = RunReport(sc, seed, unit)
    if jobs > 1 and len(sc.checks) > 1:
        payloads = [(sc.to_dict() | {"seed": seed}, name, seed, base) for name in sc.checks]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            report.steps = list(pool.map(_step, payloads))
    else:
        report.steps = [_step((sc, name, seed, base)) for name in sc.checks]
    if out is not None:
        write_report(report, out)
    return report


def write_report(report: RunReport, out) -> None:
    out = Path(out)
    for s in report.steps:
        if s.result is not None:
            write_csv(out / f"{s.name}.csv", s.result.columns, s.result.rows)
    write_json(out / "summary.json", report.summary())
    write_json(out / "timings.json", {s.name: round(s.seconds, 3) for s in report.steps})
