"""Experiment orchestration: staged runs, seed sweeps, parameter sweeps,
gap tables and report files.

A run executes, per seed, the staged pipeline: beam search produces the
best completed solution plus the solution pool; RVND improves every pool
member and the minimum becomes the incumbent; ILS refines the incumbent.
The wall-clock limit is checked cooperatively (between beam levels, pool
improvements and ILS iterations, never mid-evaluation), and a stage that
did not complete is never reported: the record keeps the last completed
stage, flagged when the cut happened.

Seeds run as independent jobs (optionally in a thread pool); the merge
is by seed order, so serial and parallel runs produce identical records.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import mean, median

from ._util import derive_seed, fmt_money
from .beam import BeamConfig, run_beam_search
from .evaluator import evaluate, format_trace, gap_percent
from .ils import IlsConfig, run_ils_detailed
from .instance import Instance, load_instance
from .localsearch import rvnd
from .solution import Solution, dump_solution

STAGES = ("bs", "ls", "ils")

RESULTS_HEADER = ["Instance", "N", "Class", "Obj", "BestTotalCost", "BestGap",
                  "AverageTotalCost", "AverageGap", "TimeHours"]
STAGES_HEADER = ["Instance", "N", "Class", "Seed",
                 "AfterBSCost", "AfterBSTimeS", "AfterLSCost", "AfterLSTimeS",
                 "AfterILSCost", "AfterILSTimeS", "TimeLimited"]
PLOTDATA_HEADER = ["Instance", "N", "Class", "Seed", "Stage", "Cost", "Gap",
                   "TimeSeconds"]


class Deadline:
    """Cooperative wall-clock limit; the cut decision is machine-dependent
    and is flagged on the record."""

    def __init__(self, seconds: float | None):
        self.seconds = seconds
        self.start = time.monotonic()

    def exceeded(self) -> bool:
        return self.seconds is not None and time.monotonic() - self.start >= self.seconds


@dataclass
class RunConfig:
    instance_path: str | None = None
    horizon: int | None = None            # shrink the instance horizon
    beam: BeamConfig = field(default_factory=BeamConfig)
    ils: IlsConfig = field(default_factory=IlsConfig)
    stage: str = "ils"                    # cumulative: ils implies ls implies bs
    seeds: list[int] = field(default_factory=lambda: list(range(1, 11)))
    time_limit_seconds: float | None = 90_000.0
    best_known: float | None = None
    out_dir: str | None = None
    dump_beam: str | None = None
    dump_ils: str | None = None
    trace: bool = False
    workers: int = 1

    def validate(self) -> "RunConfig":
        if self.stage not in STAGES:
            raise ValueError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if self.time_limit_seconds is not None and self.time_limit_seconds <= 0:
            raise ValueError("time_limit_seconds must be positive")
        if self.best_known is not None and self.best_known <= 0:
            raise ValueError("best_known must be positive")
        self.beam.validate()
        self.ils.validate()
        return self


@dataclass
class StageResult:
    cost: int          # cents
    seconds: float     # elapsed wall time when the stage completed


@dataclass
class SeedOutcome:
    seed: int
    stages: dict[str, StageResult]
    best_solution: Solution | None
    time_limited: bool
    beam_rows: list = field(default_factory=list)
    ils_rows: list = field(default_factory=list)

    @property
    def final_stage(self) -> str | None:
        for stage in reversed(STAGES):
            if stage in self.stages:
                return stage
        return None

    @property
    def final_cost(self) -> int | None:
        stage = self.final_stage
        return self.stages[stage].cost if stage else None


@dataclass
class RunRecord:
    instance_name: str
    beam_width: int
    difficulty_class: str
    best_known: float | None
    outcomes: list[SeedOutcome]

    def _final_costs(self) -> list[int]:
        return [o.final_cost for o in self.outcomes if o.final_cost is not None]

    @property
    def best_cost(self) -> float | None:
        costs = self._final_costs()
        return min(costs) / 100.0 if costs else None

    @property
    def average_cost(self) -> float | None:
        costs = self._final_costs()
        return round(mean(costs) / 100.0, 2) if costs else None

    def _gaps(self) -> list[float]:
        if self.best_known is None:
            return []
        return [gap_percent(c / 100.0, self.best_known) for c in self._final_costs()]

    @property
    def best_gap(self) -> float | None:
        gaps = self._gaps()
        return min(gaps) if gaps else None

    @property
    def average_gap(self) -> float | None:
        gaps = self._gaps()
        return round(mean(gaps), 2) + 0.0 if gaps else None

    @property
    def average_seconds(self) -> float:
        times = [max(s.seconds for s in o.stages.values())
                 for o in self.outcomes if o.stages]
        return mean(times) if times else 0.0

    @property
    def total_seconds(self) -> float:
        return sum(max(s.seconds for s in o.stages.values())
                   for o in self.outcomes if o.stages)


def _run_seed(inst: Instance, cfg: RunConfig, seed: int) -> SeedOutcome:
    deadline = Deadline(cfg.time_limit_seconds)
    start = time.monotonic()
    beam_cfg = replace(cfg.beam, seed=seed)
    outcome = run_beam_search(inst, beam_cfg, deadline)
    if not outcome.completed:
        return SeedOutcome(seed, {}, None, True, beam_rows=outcome.node_rows)
    stages = {"bs": StageResult(outcome.best_cost, time.monotonic() - start)}
    best_solution = outcome.best
    time_limited = False
    ils_rows: list = []

    if cfg.stage in ("ls", "ils"):
        improved: list[Solution] = []
        complete = True
        for idx, sol in enumerate(outcome.pool):
            if deadline.exceeded():
                complete = False
                break
            improved.append(rvnd(sol, inst, derive_seed(seed, "ls", idx)))
        if complete and improved:
            incumbent = min(improved, key=lambda s: evaluate(s, inst).total_cost)
            stages["ls"] = StageResult(evaluate(incumbent, inst).total_cost,
                                       time.monotonic() - start)
            best_solution = incumbent
        else:
            time_limited = True

    if cfg.stage == "ils" and "ls" in stages and not time_limited:
        ils_cfg = replace(cfg.ils, seed=derive_seed(seed, "ils"))
        result = run_ils_detailed(best_solution, inst, ils_cfg, deadline)
        ils_rows = result.rows
        if result.completed:
            stages["ils"] = StageResult(result.best_cost, time.monotonic() - start)
            best_solution = result.best
        else:
            time_limited = True

    return SeedOutcome(seed, stages, best_solution, time_limited,
                       beam_rows=outcome.node_rows, ils_rows=ils_rows)


def run_on_instance(inst: Instance, cfg: RunConfig) -> RunRecord:
    cfg.validate()
    if cfg.horizon is not None:
        inst = inst.with_horizon(cfg.horizon)
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = {seed: pool.submit(_run_seed, inst, cfg, seed)
                       for seed in cfg.seeds}
            outcomes = [futures[seed].result() for seed in cfg.seeds]
    else:
        outcomes = [_run_seed(inst, cfg, seed) for seed in cfg.seeds]
    record = RunRecord(
        instance_name=inst.name or (Path(cfg.instance_path).stem if cfg.instance_path else ""),
        beam_width=cfg.beam.beam_width,
        difficulty_class=inst.difficulty_class,
        best_known=cfg.best_known,
        outcomes=outcomes,
    )
    _write_dumps(record, cfg)
    if cfg.trace:
        for outcome in outcomes:
            if outcome.best_solution is not None:
                ev = evaluate(outcome.best_solution, inst)
                print(format_trace(outcome.best_solution, ev, inst), end="")
    if cfg.out_dir:
        for outcome in outcomes:
            if outcome.best_solution is not None:
                out = Path(cfg.out_dir)
                out.mkdir(parents=True, exist_ok=True)
                dump_solution(outcome.best_solution,
                              out / f"best_solution_seed{outcome.seed}.txt")
    return record


def run(cfg: RunConfig) -> RunRecord:
    """Load the instance and execute the staged pipeline for every seed."""
    if not cfg.instance_path:
        raise ValueError("instance_path is required")
    inst = load_instance(cfg.instance_path)
    return run_on_instance(inst, cfg)


def _seed_path(base: str, seed: int, multi: bool) -> Path:
    p = Path(base)
    return p if not multi else p.with_name(f"{p.stem}.seed{seed}{p.suffix}")


def _write_dumps(record: RunRecord, cfg: RunConfig) -> None:
    multi = len(cfg.seeds) > 1
    if cfg.dump_beam:
        for outcome in record.outcomes:
            path = _seed_path(cfg.dump_beam, outcome.seed, multi)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["level", "node", "score", "pool_best"])
                for level, node, score, pool_best in outcome.beam_rows:
                    w.writerow([level, node, fmt_money(score),
                                fmt_money(pool_best) if pool_best is not None else ""])
    if cfg.dump_ils:
        for outcome in record.outcomes:
            path = _seed_path(cfg.dump_ils, outcome.seed, multi)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(["iter", "current_cost", "best_cost", "accepted",
                            "temperature"])
                for row in outcome.ils_rows:
                    w.writerow([row.iteration, fmt_money(row.current_cost),
                                fmt_money(row.best_cost), int(row.accepted),
                                f"{row.temperature:.6f}"])


def _fmt_gap(gap: float | None) -> str:
    return "" if gap is None else f"{gap:.2f}"


def _fmt_opt_money(money_value: float | None) -> str:
    return "" if money_value is None else f"{money_value:.2f}"


def results_rows(records: list[RunRecord]) -> list[list[str]]:
    rows = []
    for r in records:
        rows.append([
            r.instance_name, str(r.beam_width), r.difficulty_class,
            _fmt_opt_money(r.best_known),
            _fmt_opt_money(r.best_cost), _fmt_gap(r.best_gap),
            _fmt_opt_money(r.average_cost), _fmt_gap(r.average_gap),
            f"{r.average_seconds / 3600.0:.4f}",
        ])
    return rows


def stage_rows(records: list[RunRecord]) -> list[list[str]]:
    rows = []
    for r in records:
        for o in r.outcomes:
            row = [r.instance_name, str(r.beam_width), r.difficulty_class, str(o.seed)]
            for stage in STAGES:
                if stage in o.stages:
                    row += [fmt_money(o.stages[stage].cost),
                            f"{o.stages[stage].seconds:.2f}"]
                else:
                    row += ["", ""]
            row.append(str(int(o.time_limited)))
            rows.append(row)
    return rows


def plotdata_rows(records: list[RunRecord]) -> list[list[str]]:
    rows = []
    for r in records:
        for o in r.outcomes:
            for stage in STAGES:
                if stage not in o.stages:
                    continue
                s = o.stages[stage]
                gap = (gap_percent(s.cost / 100.0, r.best_known)
                       if r.best_known is not None else None)
                rows.append([r.instance_name, str(r.beam_width), r.difficulty_class,
                             str(o.seed), stage, fmt_money(s.cost), _fmt_gap(gap),
                             f"{s.seconds:.2f}"])
    return rows


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def report(records: list[RunRecord], out_dir, figures: bool = True) -> list[Path]:
    """Write the main results CSV, the per-stage CSV, the plot-data CSV and
    (by default) the box-plot figures next to them."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        _write_csv(out / "results.csv", RESULTS_HEADER, results_rows(records)),
        _write_csv(out / "stages.csv", STAGES_HEADER, stage_rows(records)),
        _write_csv(out / "plotdata.csv", PLOTDATA_HEADER, plotdata_rows(records)),
    ]
    if figures:
        from . import plots
        written += plots.render_report_figures(plotdata_rows(records), out)
    return written


@dataclass
class SweepRow:
    value: float
    beam_width: int
    average: float | None
    median_value: float | None
    metric: str          # "gap" when best_known was given, else "cost"


def sweep(param: str, values: list, base: RunConfig,
          inst: Instance | None = None, scale_n: bool = False) -> list[SweepRow]:
    """Re-run the pipeline for each parameter value; aggregates the average
    and median gap (cost when no best-known value is given) per value.

    For the q sweep, ``scale_n`` keeps beam_width * q constant so the
    computational budget stays comparable across rows.
    """
    if param not in ("w", "q", "n"):
        raise ValueError(f"param must be one of w, q, n; got {param!r}")
    if not values:
        raise ValueError("values must be non-empty")
    if inst is None:
        if not base.instance_path:
            raise ValueError("instance_path is required")
        inst = load_instance(base.instance_path)
    reference_budget = base.beam.beam_width * base.beam.greedy.q
    rows = []
    for value in values:
        cfg = replace(base, beam=replace(base.beam, greedy=replace(base.beam.greedy)))
        if param == "w":
            cfg.beam.max_children = int(value)
        elif param == "n":
            cfg.beam.beam_width = int(value)
        else:
            cfg.beam.greedy.q = int(value)
            if scale_n:
                cfg.beam.beam_width = max(1, round(reference_budget / int(value)))
        record = run_on_instance(inst, cfg)
        per_seed = [o.final_cost / 100.0 for o in record.outcomes
                    if o.final_cost is not None]
        if base.best_known is not None:
            metric = "gap"
            points = [gap_percent(c, base.best_known) for c in per_seed]
        else:
            metric = "cost"
            points = per_seed
        rows.append(SweepRow(
            value=value, beam_width=cfg.beam.beam_width,
            average=round(mean(points), 2) + 0.0 if points else None,
            median_value=round(median(points), 2) + 0.0 if points else None,
            metric=metric))
    return rows


def write_sweep_csv(rows: list[SweepRow], param: str, path) -> Path:
    header = ["Param", "Value", "N", f"Average{rows[0].metric.capitalize()}",
              f"Median{rows[0].metric.capitalize()}"]
    body = [[param, str(r.value), str(r.beam_width),
             _fmt_gap(r.average), _fmt_gap(r.median_value)] for r in rows]
    return _write_csv(Path(path), header, body)
