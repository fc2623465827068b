"""Run reports, comparison tables, scaling benchmarks, and figures.

report.csv is fully deterministic for fixed seeds and flags; wall time and
peak memory are measurement noise by nature and therefore live in a
separate timings.csv. Peak memory is the resident set sampled around the
solve call — an approximation, not an allocator high-water mark.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import psutil

from .core import Instance, units_to_usd_str
from .hierarchical import CapPolicy
from .methods import HIERARCHICAL_CAPPED, PlanResult, solve
from .oracle import audit
from .scenarios import Scenario
from .synth import gen_instance

INTERVAL_STAT_COLUMNS = ["mean", "std", "min", "p25", "p50", "p75", "max"]


def worker_count() -> int:
    raw = os.environ.get("PODPLAN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else min(4, os.cpu_count() or 1)


@dataclass
class RunReport:
    instance_id: str
    scenario: str
    method: str
    dt: int
    objective: int
    fleet: int
    wall_s: float
    peak_mem_bytes: int
    violations: int
    result: PlanResult

    @property
    def objective_usd(self) -> str:
        return units_to_usd_str(self.objective, places=2)


def run_one(
    inst: Instance,
    instance_id: str,
    scenario: Scenario,
    method: str,
    dt: int,
    seed: int = 0,
    cap: Optional[CapPolicy] = None,
) -> RunReport:
    costs = scenario.costs(inst.n_stations, seed)
    proc = psutil.Process()
    t0 = time.perf_counter()
    result = solve(inst, costs, dt, method, cap)
    wall = time.perf_counter() - t0
    rss = proc.memory_info().rss
    violations = 0
    try:
        audit(result.itineraries, inst, result.routes, costs, result.objective)
    except AssertionError:
        violations = 1
    return RunReport(
        instance_id, scenario.name, method, dt, result.objective, result.fleet,
        wall, rss, violations, result,
    )


def compare_methods(
    inst: Instance,
    instance_id: str,
    scenarios: list[Scenario],
    dts: list[int],
    methods: list[str],
    seed: int = 0,
    cap: Optional[CapPolicy] = None,
) -> list[RunReport]:
    """One report per (scenario, method, dt) cell, key-ordered, solved in a
    bounded worker pool."""
    cells = [(sc, m, dt) for sc in scenarios for m in methods for dt in dts]

    def cell(args: tuple[Scenario, str, int]) -> RunReport:
        sc, m, dt = args
        return run_one(inst, instance_id, sc, m, dt, seed, cap if m == HIERARCHICAL_CAPPED else None)

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        return list(pool.map(cell, cells))


def best_flags(reports: list[RunReport]) -> dict[int, bool]:
    """index -> True when that report has the strictly minimal objective
    among reports sharing (instance, scenario, dt)."""
    groups: dict[tuple[str, str, int], list[int]] = {}
    for i, r in enumerate(reports):
        groups.setdefault((r.instance_id, r.scenario, r.dt), []).append(i)
    flags = {i: False for i in range(len(reports))}
    for idxs in groups.values():
        lo = min(reports[i].objective for i in idxs)
        winners = [i for i in idxs if reports[i].objective == lo]
        if len(winners) < len(idxs) or len(idxs) == 1:
            for i in winners:
                flags[i] = True
    return flags


def write_report_csv(reports: list[RunReport], out_path: Path) -> None:
    flags = best_flags(reports)
    with out_path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(
            ["instance", "scenario", "method", "dt_s", "objective_usd", "objective_units",
             "fleet", "violations", "best"]
        )
        for i, r in enumerate(reports):
            w.writerow(
                [r.instance_id, r.scenario, r.method, r.dt, r.objective_usd, r.objective,
                 r.fleet, r.violations, int(flags[i])]
            )


def write_timings_csv(reports: list[RunReport], out_path: Path) -> None:
    with out_path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["instance", "scenario", "method", "dt_s", "wall_s", "peak_mem_bytes"])
        for r in reports:
            w.writerow([r.instance_id, r.scenario, r.method, r.dt, f"{r.wall_s:.6f}", r.peak_mem_bytes])


def _stats(values: list[float]) -> list[str]:
    if not values:
        return [""] * len(INTERVAL_STAT_COLUMNS)
    a = np.asarray(values, dtype=float)
    vals = [a.mean(), a.std(), a.min(), *np.percentile(a, [25, 50, 75]), a.max()]
    return [f"{v:.1f}" for v in vals]


def write_intervals_csv(reports: list[RunReport], out_path: Path) -> None:
    """Duration statistics of between-service intervals per category."""
    with out_path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["instance", "scenario", "method", "dt_s", "category", "count",
                    *INTERVAL_STAT_COLUMNS])
        for r in reports:
            if r.result.intervals is None:
                continue
            by_cat: dict[str, list[float]] = {}
            for res in r.result.intervals:
                by_cat.setdefault(res.problem.category, []).append(float(res.problem.duration))
            for cat in sorted(by_cat):
                w.writerow([r.instance_id, r.scenario, r.method, r.dt, cat,
                            len(by_cat[cat]), *_stats(by_cat[cat])])


def render_table(reports: list[RunReport]) -> str:
    """Aligned plain-text comparison; '*' marks the strict minimum per cell."""
    flags = best_flags(reports)
    header = ["instance", "scenario", "method", "dt", "objective USD", "fleet"]
    rows = [header]
    for i, r in enumerate(reports):
        mark = "*" if flags[i] else ""
        rows.append([r.instance_id, r.scenario, r.method, str(r.dt), r.objective_usd + mark,
                     str(r.fleet)])
    widths = [max(len(row[c]) for row in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def fit_power_law(points: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Least squares y = a·x^b on log-log axes; returns (b, a, R²)."""
    if len(points) < 3:
        raise ValueError("need at least 3 points")
    if any(x <= 0 or y <= 0 for x, y in points):
        raise ValueError("power-law fit needs positive values")
    lx = np.log([x for x, _ in points])
    ly = np.log([y for _, y in points])
    b, loga = np.polyfit(lx, ly, 1)
    pred = loga + b * lx
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(b), float(math.exp(loga)), r2


@dataclass
class BenchRow:
    instance_id: str
    n_stations: int
    n_runs: int
    n_routes: int
    n_arcs: int
    method: str
    dt: int
    objective: int
    fleet: int
    wall_s: float
    peak_mem_bytes: int


def bench(
    sizes: list[int],
    methods: list[str],
    scenario: Scenario,
    dt: int = 30,
    seed: int = 7,
    n_stations: int = 6,
    cap: Optional[CapPolicy] = None,
) -> list[BenchRow]:
    """Scaling benchmark over generated instances, one per run count."""
    rows: list[BenchRow] = []
    proc = psutil.Process()
    for n_runs in sizes:
        inst = gen_instance(seed, n_stations, n_runs, span_s=max(900, 90 * n_runs))
        costs = scenario.costs(inst.n_stations, seed)
        for method in methods:
            t0 = time.perf_counter()
            result = solve(inst, costs, dt, method, cap if method == HIERARCHICAL_CAPPED else None)
            wall = time.perf_counter() - t0
            rows.append(
                BenchRow(
                    f"gen-{seed}-{n_runs}", n_stations, n_runs, len(result.routes),
                    result.n_arcs, method, dt, result.objective, result.fleet, wall,
                    proc.memory_info().rss,
                )
            )
    return rows


def write_scaling_csv(rows: list[BenchRow], out_path: Path) -> None:
    with out_path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["instance", "n_stations", "n_runs", "n_routes", "n_arcs", "method",
                    "dt_s", "objective_units", "fleet", "wall_s", "peak_mem_bytes"])
        for r in rows:
            w.writerow([r.instance_id, r.n_stations, r.n_runs, r.n_routes, r.n_arcs,
                        r.method, r.dt, r.objective, r.fleet, f"{r.wall_s:.6f}",
                        r.peak_mem_bytes])


def scaling_figure(rows: list[BenchRow], out_path: Path) -> dict[str, tuple[float, float, float]]:
    """Log-log scatter of solve time against network arc count, with a
    fitted power law per method; returns the fits."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fits: dict[str, tuple[float, float, float]] = {}
    fig, ax = plt.subplots(figsize=(6, 4.5))
    methods = sorted({r.method for r in rows})
    for method in methods:
        pts = [(float(max(r.n_arcs, r.n_routes)), r.wall_s) for r in rows if r.method == method]
        pts = [(x, y) for x, y in pts if x > 0 and y > 0]
        xs, ys = [p[0] for p in pts], [p[1] for p in pts]
        ax.scatter(xs, ys, label=method, s=18)
        if len(pts) >= 3:
            b, a, r2 = fit_power_law(pts)
            fits[method] = (b, a, r2)
            grid = np.geomspace(min(xs), max(xs), 50)
            ax.plot(grid, a * grid**b, linewidth=1,
                    label=f"{method} fit: exp={b:.2f}, R²={r2:.3f}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("network arcs")
    ax.set_ylabel("solve wall time (s)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
    return fits


def intervals_figure(reports: list[RunReport], out_path: Path) -> None:
    """Histogram of between-service interval durations per category."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_cat: dict[str, list[float]] = {}
    for r in reports:
        for res in r.result.intervals or []:
            by_cat.setdefault(res.problem.category, []).append(res.problem.duration / 60.0)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for cat in sorted(by_cat):
        ax.hist(by_cat[cat], bins=20, alpha=0.6, label=cat)
    ax.set_xlabel("interval duration (min)")
    ax.set_ylabel("count")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
