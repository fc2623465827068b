"""Command-line interface.

Exit codes: 0 success, 1 infeasible instance, 2 bad input. All outputs are
deterministic for fixed seeds and flags; wall-time and memory measurements
are isolated in timings/scaling files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .core import Instance, InstanceError, validate_instance
from .decompose import decompose_instance
from .flow import InfeasibleNetworkError, export_itineraries_csv, export_itineraries_json
from .gtfs import (
    GtfsError,
    build_instance,
    build_travel_matrix,
    estimate_demand,
    parse_static_gtfs,
    read_snapshots,
)
from .hierarchical import CapConfigError, CapPolicy, InfeasibleIntervalError
from .methods import HIERARCHICAL_CAPPED, METHODS
from .report import (
    bench as run_bench,
    compare_methods,
    render_table,
    scaling_figure,
    intervals_figure,
    write_intervals_csv,
    write_report_csv,
    write_scaling_csv,
    write_timings_csv,
)
from .scenarios import get_scenario
from .synth import gen_instance

EXIT_INFEASIBLE = 1
EXIT_INPUT = 2


def _load_instance(path: str) -> Instance:
    try:
        inst = Instance.from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise click.ClickException(f"cannot read instance {path}: {exc}") from exc
    problems = validate_instance(inst)
    if problems:
        for v in problems:
            click.echo(f"invalid instance: {v}", err=True)
        sys.exit(EXIT_INPUT)
    return inst


def _parse_csv_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


@click.group()
def main() -> None:
    """Fleet sizing and empty-pod routing for modular transit schedules."""


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
def decompose(instance_path: str) -> None:
    """Split each bus run into minimal pod routes; print them as JSON."""
    inst = _load_instance(instance_path)
    routes = decompose_instance(inst)
    doc = [
        {
            "run_id": r.run_id,
            "seq": r.seq,
            "visits": [{"station": s, "arrival_s": t} for s, t in r.visits],
        }
        for r in routes
    ]
    click.echo(json.dumps(doc, indent=2))


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--method", default="integrated", type=click.Choice(METHODS))
@click.option("--dt", default=30, type=int, show_default=True)
@click.option("--scenario", default="S1", show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--cap-nodes", default=15000, type=int, show_default=True,
              help="node budget per interval network (capped method only)")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def solve(instance_path: str, method: str, dt: int, scenario: str, seed: int,
          cap_nodes: int, out_dir: str) -> None:
    """Solve one instance and write report, itineraries, and interval stats."""
    inst = _load_instance(instance_path)
    try:
        sc = get_scenario(scenario)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    cap = CapPolicy(cap_nodes) if method == HIERARCHICAL_CAPPED else None
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        reports = compare_methods(inst, Path(instance_path).stem, [sc], [dt], [method],
                                  seed=seed, cap=cap)
    except (InfeasibleNetworkError, InfeasibleIntervalError) as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    except (CapConfigError, InstanceError) as exc:
        raise click.ClickException(str(exc)) from exc
    write_report_csv(reports, out / "report.csv")
    write_timings_csv(reports, out / "timings.csv")
    write_intervals_csv(reports, out / "intervals.csv")
    r = reports[0]
    with (out / "itineraries.json").open("w") as f:
        export_itineraries_json(r.result.itineraries, f)
    with (out / "itineraries.csv").open("w", newline="") as f:
        export_itineraries_csv(r.result.itineraries, f)
    click.echo(render_table(reports), nl=False)
    if r.violations:
        click.echo("audit violations detected", err=True)
        sys.exit(EXIT_INFEASIBLE)


@main.command()
@click.option("--instance", "instance_path", required=True, type=click.Path(exists=True))
@click.option("--scenarios", default="S1,S2,S3,S4,S5", show_default=True)
@click.option("--dts", default="5,15,30,60", show_default=True)
@click.option("--methods", default="integrated,hierarchical", show_default=True)
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--cap-nodes", default=15000, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def compare(instance_path: str, scenarios: str, dts: str, methods: str, seed: int,
            cap_nodes: int, out_dir: str) -> None:
    """Run every (scenario, method, dt) cell and emit the comparison table."""
    inst = _load_instance(instance_path)
    try:
        scs = [get_scenario(s) for s in _parse_csv_list(scenarios)]
        dt_list = [int(d) for d in _parse_csv_list(dts)]
        method_list = _parse_csv_list(methods)
        for m in method_list:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        reports = compare_methods(inst, Path(instance_path).stem, scs, dt_list, method_list,
                                  seed=seed, cap=CapPolicy(cap_nodes))
    except (InfeasibleNetworkError, InfeasibleIntervalError) as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    write_report_csv(reports, out / "report.csv")
    write_timings_csv(reports, out / "timings.csv")
    write_intervals_csv(reports, out / "intervals.csv")
    if any(r.result.intervals for r in reports):
        intervals_figure(reports, out / "intervals.svg")
    click.echo(render_table(reports), nl=False)


@main.command()
@click.option("--family", default="scaling", type=click.Choice(["scaling"]), show_default=True)
@click.option("--sizes", default="13,30,59", show_default=True, help="run counts to generate")
@click.option("--methods", default="integrated,hierarchical,hierarchical-capped", show_default=True)
@click.option("--scenario", default="S1", show_default=True)
@click.option("--dt", default=30, type=int, show_default=True)
@click.option("--seed", default=7, type=int, show_default=True)
@click.option("--stations", default=6, type=int, show_default=True)
@click.option("--cap-nodes", default=15000, type=int, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def bench(family: str, sizes: str, methods: str, scenario: str, dt: int, seed: int,
          stations: int, cap_nodes: int, out_dir: str) -> None:
    """Scaling benchmark over generated instances; CSV plus log-log figure."""
    try:
        size_list = [int(s) for s in _parse_csv_list(sizes)]
        method_list = _parse_csv_list(methods)
        for m in method_list:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        sc = get_scenario(scenario)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        rows = run_bench(size_list, method_list, sc, dt=dt, seed=seed,
                         n_stations=stations, cap=CapPolicy(cap_nodes))
    except (InfeasibleNetworkError, InfeasibleIntervalError) as exc:
        click.echo(f"infeasible: {exc}", err=True)
        sys.exit(EXIT_INFEASIBLE)
    write_scaling_csv(rows, out / "scaling.csv")
    fits = scaling_figure(rows, out / "scaling.svg")
    for method, (b, _a, r2) in sorted(fits.items()):
        click.echo(f"{method}: time ~ arcs^{b:.2f} (R²={r2:.3f})")


@main.command()
@click.option("--seed", default=0, type=int, show_default=True)
@click.option("--stations", default=5, type=int, show_default=True)
@click.option("--runs", default=8, type=int, show_default=True)
@click.option("--horizon", default=0, type=int, show_default=True, help="0 = auto")
@click.option("--demand-max", default=4, type=int, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def gen(seed: int, stations: int, runs: int, horizon: int, demand_max: int,
        out_path: str) -> None:
    """Generate a reproducible synthetic instance JSON."""
    try:
        inst = gen_instance(seed, stations, runs, horizon_s=horizon, demand_max=demand_max)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    Path(out_path).write_text(inst.to_json())
    click.echo(f"wrote {out_path}")


@main.command("gtfs-build")
@click.option("--feed", "feed_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--service-id", required=True)
@click.option("--routes", "route_filter", default="", help="comma-separated route-id allowlist")
@click.option("--snapshots", "snapshot_paths", multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="one NDJSON file per capture day; repeatable")
@click.option("--speed-mph", default=15.0, type=float, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def gtfs_build(feed_dir: str, service_id: str, route_filter: str,
               snapshot_paths: tuple[str, ...], speed_mph: float, out_dir: str) -> None:
    """Build an instance JSON plus demand provenance CSV from GTFS data."""
    allow = set(_parse_csv_list(route_filter)) or None
    try:
        stops, trips = parse_static_gtfs(feed_dir, service_id, allow)
        days = [read_snapshots(p) for p in snapshot_paths]
        profile = estimate_demand(days, trips, stops)
        travel = build_travel_matrix(stops, speed_mph)
        inst = build_instance(stops, trips, profile, travel)
    except (GtfsError, json.JSONDecodeError, ValueError) as exc:
        raise click.ClickException(str(exc)) from exc
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "instance.json").write_text(inst.to_json())
    with (out / "provenance.csv").open("w", newline="") as f:
        profile.write_provenance_csv(f)
    click.echo(f"{len(inst.runs)} runs, {inst.n_stations} stations "
               f"({len(profile.excluded_trips)} trips excluded)")


if __name__ == "__main__":
    main()
