"""Decompose per-stop pod demand of a bus run into the fewest pod routes.

Each route is a contiguous sub-sequence of the run's stops; the number of
routes covering a stop equals its demand, and the greedy longest-segment
extraction is provably minimum.
"""

from __future__ import annotations

from .core import BusRun, Instance, PodRoute


def decompose_bus_run(run: BusRun) -> list[PodRoute]:
    """Extract pod routes greedily: start at the earliest stop with unmet
    demand and extend through every consecutive stop that still has demand."""
    remaining = [stop.demand for stop in run.stops]
    routes: list[PodRoute] = []
    n = len(remaining)
    i = 0
    while True:
        while i < n and remaining[i] == 0:
            i += 1
        if i == n:
            break
        j = i
        while j < n and remaining[j] > 0:
            remaining[j] -= 1
            j += 1
        visits = tuple((stop.station, stop.arrival) for stop in run.stops[i:j])
        routes.append(PodRoute(run.id, len(routes), visits))
    return routes


def decompose_instance(inst: Instance) -> list[PodRoute]:
    """All pod routes of an instance, in run order then extraction order."""
    routes: list[PodRoute] = []
    for run in inst.runs:
        routes.extend(decompose_bus_run(run))
    return routes


def min_route_count_oracle(demands: list[int]) -> int:
    """Closed-form minimum route count: the sum of positive demand rises.

    Every route is contiguous, so at each stop the routes covering it but
    not its predecessor number at least max(0, d[i] - d[i-1]); summing the
    rises counts exactly the route starts the greedy extraction produces.
    """
    if any(d < 0 for d in demands):
        raise ValueError("demands must be non-negative")
    prev = 0
    total = 0
    for d in demands:
        total += max(0, d - prev)
        prev = d
    return total
