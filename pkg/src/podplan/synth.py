"""Seeded synthetic instance generator for property tests and benchmarks.

Stations are random planar points; travel times are Euclidean distance over
a fixed speed, rounded up, so the matrix is metric and a direct move is
never beaten by a multi-hop detour. Runs are placed uniformly in time.
"""

from __future__ import annotations

import math
import random

from .core import BusRun, Instance, Station, Stop, TravelTimeMatrix, default_horizon

SPEED_M_PER_S = 6.7  # ~15 mph


def gen_instance(
    seed: int,
    n_stations: int,
    n_runs: int,
    horizon_s: int = 0,
    demand_max: int = 4,
    stops_per_run: tuple[int, int] = (2, 4),
    area_m: float = 3000.0,
    span_s: int = 3600,
    dt_hint: int = 30,
) -> Instance:
    """Reproducible random instance: same arguments, byte-identical JSON."""
    if n_stations <= 0 or n_runs < 0 or demand_max <= 0 or stops_per_run[0] < 1:
        raise ValueError("parameters must be positive")
    if stops_per_run[0] > stops_per_run[1] or stops_per_run[1] > n_stations:
        raise ValueError(f"stops_per_run {stops_per_run} infeasible for {n_stations} stations")
    rng = random.Random(seed)
    pts = [(rng.uniform(0, area_m), rng.uniform(0, area_m)) for _ in range(n_stations)]
    tau = [
        [
            max(1, math.ceil(math.dist(pts[a], pts[b]) / SPEED_M_PER_S)) if a != b else 0
            for b in range(n_stations)
        ]
        for a in range(n_stations)
    ]
    stations = tuple(Station(i, f"s{i}") for i in range(n_stations))
    travel = TravelTimeMatrix.from_lists(tau)
    runs = []
    for k in range(n_runs):
        n_stops = rng.randint(*stops_per_run)
        seq = rng.sample(range(n_stations), n_stops)
        t = rng.randrange(0, max(span_s, 1))
        stops = []
        for i, s in enumerate(seq):
            if i > 0:
                t += travel(seq[i - 1], s) + rng.randint(10, 60)  # dwell on top of transit
            stops.append(Stop(s, t, rng.randint(1, demand_max)))
        runs.append(BusRun(k, tuple(stops)))
    if horizon_s <= 0:
        horizon_s = default_horizon(runs, dt_hint) if runs else dt_hint
    return Instance(stations, travel, tuple(runs), horizon_s)
