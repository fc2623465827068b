"""Reduced time-space network construction.

The full-horizon network drives the integrated method; windowed networks
drive the hierarchical Stage 2. Middle vertices of pod routes are elided:
a route contributes only its requester (demand 1) and releaser (supply 1),
joined to the standby layer by unit-capacity boundary arcs whose costs carry
the discretization-gap parking charges.

Node numbering is deterministic: Source=0, Sink=1, standby vertices
row-major by station then step, then requesters, then releasers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, TextIO

from .core import (
    CostConfig,
    Instance,
    InstanceError,
    PodRoute,
    TimeGrid,
    TravelTimeMatrix,
    effective_travel_time,
    snap_window,
)

SOURCE = 0
SINK = 1

# Arc kinds (wire names used by the dump format).
RELEASER_TO_STANDBY = "releaser_to_standby"
STANDBY_TO_REQUESTER = "standby_to_requester"
MOVE = "move"
PARK = "park"
SOURCE_TO_STANDBY = "source_to_standby"
SOURCE_TO_RELEASER = "source_to_releaser"
STANDBY_TO_SINK = "standby_to_sink"
SINK_TO_SOURCE = "sink_to_source"


class Arc(NamedTuple):
    src: int
    dst: int
    cost: int
    cap: int
    kind: str


@dataclass
class TimeSpaceNetwork:
    grid: TimeGrid
    n_stations: int
    window: tuple[int, int]  # inclusive step-seconds [w_lo, w_hi]
    arcs: list[Arc]
    supply: dict[int, int]
    requester_routes: tuple[int, ...]  # route index per requester node, in node order
    releaser_routes: tuple[int, ...]
    travel: TravelTimeMatrix
    sink_to_source_arc: Optional[int] = None  # arc index, integrated networks only

    @property
    def n_cols(self) -> int:
        return (self.window[1] - self.window[0]) // self.grid.dt + 1

    @property
    def n_nodes(self) -> int:
        return 2 + self.n_stations * self.n_cols + len(self.requester_routes) + len(self.releaser_routes)

    def standby(self, station: int, t: int) -> int:
        w_lo, w_hi = self.window
        if not (w_lo <= t <= w_hi) or (t - w_lo) % self.grid.dt:
            raise ValueError(f"time {t} outside window or off grid")
        return 2 + station * self.n_cols + (t - w_lo) // self.grid.dt

    def requester(self, pos: int) -> int:
        return 2 + self.n_stations * self.n_cols + pos

    def releaser(self, pos: int) -> int:
        return 2 + self.n_stations * self.n_cols + len(self.requester_routes) + pos

    def node_label(self, v: int) -> str:
        if v == SOURCE:
            return "source"
        if v == SINK:
            return "sink"
        base = 2 + self.n_stations * self.n_cols
        if v < base:
            s, col = divmod(v - 2, self.n_cols)
            return f"standby(s{s},t{self.window[0] + col * self.grid.dt})"
        if v < base + len(self.requester_routes):
            return f"requester(r{self.requester_routes[v - base]})"
        return f"releaser(r{self.releaser_routes[v - base - len(self.requester_routes)]})"

    def dump_arcs(self, out: TextIO) -> None:
        """Plain-text arc list `from to cost capacity kind` for diffing."""
        for a in self.arcs:
            out.write(f"{a.src} {a.dst} {a.cost} {a.cap} {a.kind}\n")


def count_formulas(n_stations: int, n_steps: int, n_routes: int) -> tuple[int, int]:
    """Closed-form node count and arc upper bound for the reduced
    full-horizon network; the arc formula over-counts moves truncated at the
    horizon, so it is only an upper bound."""
    nodes = 2 * n_routes + n_stations * n_steps + 2
    arcs = 2 * n_stations + n_stations**2 * (n_steps - 1) + 2 * n_routes + 1
    return nodes, arcs


def _add_standby_lattice(
    net: TimeSpaceNetwork, travel: TravelTimeMatrix, costs: CostConfig, cap: int
) -> None:
    """Park and move arcs over the standby layer of the window."""
    w_lo, w_hi = net.window
    dt = net.grid.dt
    for s in range(net.n_stations):
        for t in range(w_lo, w_hi, dt):
            net.arcs.append(
                Arc(net.standby(s, t), net.standby(s, t + dt), costs.park[s] * dt, cap, PARK)
            )
    for s in range(net.n_stations):
        for s2 in range(net.n_stations):
            if s2 == s:
                continue
            tau_hat = effective_travel_time(travel(s, s2), net.grid)
            for t in range(w_lo, w_hi - tau_hat + 1, dt):
                net.arcs.append(
                    Arc(
                        net.standby(s, t),
                        net.standby(s2, t + tau_hat),
                        costs.move * tau_hat,
                        cap,
                        MOVE,
                    )
                )


def build_integrated_network(
    inst: Instance, routes: list[PodRoute], grid: TimeGrid, costs: CostConfig
) -> TimeSpaceNetwork:
    """Full-horizon circulation network for the integrated method."""
    n_routes = len(routes)
    cap = max(n_routes, 1)
    net = TimeSpaceNetwork(
        grid=grid,
        n_stations=inst.n_stations,
        window=(0, grid.horizon),
        arcs=[],
        supply={},
        requester_routes=tuple(range(n_routes)),
        releaser_routes=tuple(range(n_routes)),
        travel=inst.travel,
    )
    for s in range(inst.n_stations):
        net.arcs.append(Arc(SOURCE, net.standby(s, 0), costs.fleet, cap, SOURCE_TO_STANDBY))
    _add_standby_lattice(net, inst.travel, costs, cap)
    for i, route in enumerate(routes):
        t_lo, t_hi = snap_window(route, grid)
        req, rel = net.requester(i), net.releaser(i)
        net.arcs.append(
            Arc(
                net.standby(route.start_station, t_lo),
                req,
                (route.start_time - t_lo) * costs.park[route.start_station],
                1,
                STANDBY_TO_REQUESTER,
            )
        )
        net.arcs.append(
            Arc(
                rel,
                net.standby(route.end_station, t_hi),
                (t_hi - route.end_time) * costs.park[route.end_station],
                1,
                RELEASER_TO_STANDBY,
            )
        )
        net.supply[req] = -1
        net.supply[rel] = 1
    for s in range(inst.n_stations):
        net.arcs.append(Arc(net.standby(s, grid.horizon), SINK, 0, cap, STANDBY_TO_SINK))
    net.sink_to_source_arc = len(net.arcs)
    net.arcs.append(Arc(SINK, SOURCE, 0, cap, SINK_TO_SOURCE))

    nodes, arc_bound = count_formulas(inst.n_stations, grid.steps, n_routes)
    assert net.n_nodes == nodes
    assert len(net.arcs) <= arc_bound
    return net


# Interval categories (hierarchical Stage 2).
UNASSIGNED = "unassigned"
BETWEEN = "between"
TERMINAL = "terminal"


def build_interval_network(
    category: str,
    *,
    travel: TravelTimeMatrix,
    n_stations: int,
    grid: TimeGrid,
    costs: CostConfig,
    window: tuple[int, int],
    release: Optional[tuple[int, int]] = None,  # (station, step-seconds)
    request: Optional[tuple[int, int]] = None,
    route_index: int = -1,
) -> TimeSpaceNetwork:
    """Windowed unit-flow network for one between-service interval.

    Unassigned: sourced anywhere at window start, each source arc charging
    one fleet cost; ends at the requester. Between: sourced for free at the
    known release point; ends at the requester. Terminal: sourced at the
    release point; drains to the sink across the window end.
    """
    if category == UNASSIGNED:
        if request is None or release is not None:
            raise ValueError("unassigned interval needs a request point only")
        entry, exit_ = "open", "point"
    elif category == BETWEEN:
        if request is None or release is None:
            raise ValueError("between interval needs release and request points")
        entry, exit_ = "point", "point"
    elif category == TERMINAL:
        if release is None or request is not None:
            raise ValueError("terminal interval needs a release point only")
        entry, exit_ = "point", "open"
    else:
        raise ValueError(f"unknown category {category!r}")
    return build_window_network(
        travel=travel,
        n_stations=n_stations,
        grid=grid,
        costs=costs,
        window=window,
        entry=entry,
        exit_=exit_,
        release=release,
        request=request,
        route_index=route_index,
    )


def build_window_network(
    *,
    travel: TravelTimeMatrix,
    n_stations: int,
    grid: TimeGrid,
    costs: CostConfig,
    window: tuple[int, int],
    entry: str,  # "open" (sourced anywhere, fleet cost) or "point" (known release)
    exit_: str,  # "point" (requester) or "open" (sink at window end)
    release: Optional[tuple[int, int]] = None,
    request: Optional[tuple[int, int]] = None,
    route_index: int = -1,
) -> TimeSpaceNetwork:
    """Generic windowed builder; the three categories and the capped
    variant's chained subwindows are all configurations of this network."""
    w_lo, w_hi = window
    if w_lo > w_hi or (w_hi - w_lo) % grid.dt:
        raise ValueError(f"window {window} not aligned to dt={grid.dt}")
    if release is not None and release[1] != w_lo:
        raise ValueError("release point must sit at the window start")
    if exit_ == "point" and (request is None or request[1] != w_hi):
        raise ValueError("request point must sit at the window end")

    net = TimeSpaceNetwork(
        grid=grid,
        n_stations=n_stations,
        window=(w_lo, w_hi),
        arcs=[],
        supply={},
        requester_routes=(route_index,) if exit_ == "point" else (),
        releaser_routes=(route_index,) if entry == "point" else (),
        travel=travel,
    )
    if entry == "open":
        for s in range(n_stations):
            net.arcs.append(Arc(SOURCE, net.standby(s, w_lo), costs.fleet, 1, SOURCE_TO_STANDBY))
    else:
        rel = net.releaser(0)
        net.arcs.append(Arc(SOURCE, rel, 0, 1, SOURCE_TO_RELEASER))
        net.arcs.append(Arc(rel, net.standby(release[0], w_lo), 0, 1, RELEASER_TO_STANDBY))
    net.supply[SOURCE] = 1

    _add_standby_lattice(net, travel, costs, 1)

    if exit_ == "point":
        req = net.requester(0)
        net.arcs.append(Arc(net.standby(request[0], w_hi), req, 0, 1, STANDBY_TO_REQUESTER))
        net.supply[req] = net.supply.get(req, 0) - 1
    else:
        for s in range(n_stations):
            net.arcs.append(Arc(net.standby(s, w_hi), SINK, 0, 1, STANDBY_TO_SINK))
        net.supply[SINK] = -1
    return net
