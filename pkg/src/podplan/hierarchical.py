"""Stage 2 of the hierarchical method: between-service routing per chain.

Every gap in a pod's assignment chain becomes a small windowed min-cost
flow problem (unassigned lead-in, between-route repositioning, terminal
tail). The capped variant splits long windows into sequentially chained
subwindows whose networks stay under a node budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .core import (
    CostConfig,
    Instance,
    PodRoute,
    TimeGrid,
    TravelTimeMatrix,
    effective_travel_time,
    snap_times,
    snap_window,
)
from .flow import Action, InfeasibleNetworkError, PodItinerary, solve_min_cost_circulation
from .tsn import (
    BETWEEN,
    MOVE,
    PARK,
    RELEASER_TO_STANDBY,
    SINK,
    SOURCE,
    SOURCE_TO_RELEASER,
    SOURCE_TO_STANDBY,
    STANDBY_TO_REQUESTER,
    STANDBY_TO_SINK,
    TERMINAL,
    UNASSIGNED,
    TimeSpaceNetwork,
    build_window_network,
)

MIN_DT = 5  # finest refinement resolution, seconds


class InfeasibleIntervalError(Exception):
    """An interval could not be routed even at the finest grid."""


class CapConfigError(Exception):
    """Node cap below the minimum viable subwindow."""


@dataclass(frozen=True)
class CapPolicy:
    max_nodes: int


@dataclass(frozen=True)
class IntervalProblem:
    pod: int
    category: str  # UNASSIGNED | BETWEEN | TERMINAL
    window: tuple[int, int]
    dt: int
    release: Optional[tuple[int, int]] = None
    request: Optional[tuple[int, int]] = None

    @property
    def duration(self) -> int:
        return self.window[1] - self.window[0]


@dataclass
class IntervalResult:
    problem: IntervalProblem
    actions: list[Action]
    cost: int  # excludes any fleet charge
    fleet_cost: int  # one fleet charge for sourced (unassigned) intervals
    subintervals: int = 1
    max_nodes: int = 0
    n_arcs: int = 0  # total arcs across the interval's networks


@dataclass
class HierarchicalPlan:
    itineraries: list[PodItinerary]
    objective: int
    fleet_size: int
    matching_size: int
    chains: list[list[int]]
    intervals: list[IntervalResult]


def _refinement_dts(dt: int) -> list[int]:
    """Grids to try for an interval: the requested dt, then its divisors
    down to the 5-second floor, then exact 1-second resolution. Tight
    continuous-time transitions always fit at 1 s, and their windows are
    tiny precisely when the slack is tight, so the fallback stays cheap."""
    dts = [d for d in range(dt, 0, -1) if dt % d == 0 and d >= MIN_DT]
    dts.append(1)
    return dts


def _snap(route: PodRoute, dt: int) -> tuple[int, int]:
    return snap_times(route.start_time, route.end_time, dt)


def plan_intervals(
    chains: list[list[int]],
    routes: list[PodRoute],
    travel: TravelTimeMatrix,
    dt: int,
    horizon: int,
) -> list[IntervalProblem]:
    """Carve each chain into interval problems at the requested grid,
    refining an interval's grid whenever snapping makes a continuous-time
    feasible transition collide or become unreachable."""
    problems: list[IntervalProblem] = []
    grid = TimeGrid(dt, horizon)
    for pod, chain in enumerate(chains):
        first = routes[chain[0]]
        t_lo_first, _ = snap_window(first, grid)
        if t_lo_first > 0:
            problems.append(
                IntervalProblem(
                    pod,
                    UNASSIGNED,
                    (0, t_lo_first),
                    dt,
                    request=(first.start_station, t_lo_first),
                )
            )
        for a, b in zip(chain, chain[1:]):
            ra, rb = routes[a], routes[b]
            problems.append(_between_problem(pod, ra, rb, travel, dt))
        last = routes[chain[-1]]
        _, t_hi_last = snap_window(last, grid)
        if t_hi_last < horizon:
            problems.append(
                IntervalProblem(
                    pod,
                    TERMINAL,
                    (t_hi_last, horizon),
                    dt,
                    release=(last.end_station, t_hi_last),
                )
            )
    return problems


def _between_problem(
    pod: int, ra: PodRoute, rb: PodRoute, travel: TravelTimeMatrix, dt: int
) -> IntervalProblem:
    s_rel, s_req = ra.end_station, rb.start_station
    tau = travel(s_rel, s_req)
    for d in _refinement_dts(dt):
        t_hi = snap_times(ra.start_time, ra.end_time, d)[1]
        t_lo = (rb.start_time // d) * d
        need = math.ceil(tau / d) * d if s_rel != s_req else 0
        if t_hi + need <= t_lo:
            return IntervalProblem(
                pod, BETWEEN, (t_hi, t_lo), d, release=(s_rel, t_hi), request=(s_req, t_lo)
            )
    raise InfeasibleIntervalError(f"transition {ra.label} -> {rb.label} infeasible on any grid")


def _extract_segment(net: TimeSpaceNetwork, flow: tuple[int, ...]) -> tuple[list[Action], int, int]:
    """Trace the single unit from source to its endpoint.

    Returns (actions, fleet_cost, end_station)."""
    out: dict[int, int] = {}
    for idx, a in enumerate(net.arcs):
        if flow[idx] > 0 and a.src not in out:
            out[a.src] = idx
    actions: list[Action] = []
    fleet_cost = 0
    node = SOURCE
    end_station = -1
    while True:
        arc = net.arcs[out[node]]
        if arc.kind == SOURCE_TO_STANDBY:
            fleet_cost = arc.cost
        elif arc.kind in (SOURCE_TO_RELEASER, RELEASER_TO_STANDBY):
            pass
        elif arc.kind == PARK:
            s, t = _coords(net, arc.src)
            actions.append(Action("park", t, t + net.grid.dt, s, s, arc.cost))
        elif arc.kind == MOVE:
            s, t = _coords(net, arc.src)
            s2, t2 = _coords(net, arc.dst)
            actions.append(Action("move", t, t2, s, s2, arc.cost))
        elif arc.kind == STANDBY_TO_REQUESTER:
            end_station, _ = _coords(net, arc.src)
            return actions, fleet_cost, end_station
        elif arc.kind == STANDBY_TO_SINK:
            end_station, _ = _coords(net, arc.src)
            return actions, fleet_cost, end_station
        else:
            raise AssertionError(f"unexpected arc {arc.kind} in interval trace")
        node = arc.dst


def _coords(net: TimeSpaceNetwork, v: int) -> tuple[int, int]:
    s, col = divmod(v - 2, net.n_cols)
    return s, net.window[0] + col * net.grid.dt


def solve_interval(
    p: IntervalProblem,
    travel: TravelTimeMatrix,
    n_stations: int,
    costs: CostConfig,
    horizon: int,
) -> IntervalResult:
    """Unit-flow optimum over the interval's windowed network."""
    if p.category == BETWEEN and p.duration == 0:
        if p.release[0] != p.request[0]:
            raise InfeasibleIntervalError(f"zero-width interval across stations for pod {p.pod}")
        return IntervalResult(p, [], 0, 0, subintervals=1, max_nodes=0)
    grid = TimeGrid(p.dt, horizon)
    net = build_window_network(
        travel=travel,
        n_stations=n_stations,
        grid=grid,
        costs=costs,
        window=p.window,
        entry="open" if p.category == UNASSIGNED else "point",
        exit_="open" if p.category == TERMINAL else "point",
        release=p.release,
        request=p.request,
    )
    try:
        sol = solve_min_cost_circulation(net)
    except InfeasibleNetworkError as exc:
        raise InfeasibleIntervalError(f"pod {p.pod} {p.category} interval: {exc}") from exc
    actions, fleet_cost, _ = _extract_segment(net, sol.flow)
    return IntervalResult(
        p, actions, sol.objective - fleet_cost, fleet_cost,
        subintervals=1, max_nodes=net.n_nodes, n_arcs=len(net.arcs),
    )


def _split_columns(n_cols: int, max_cols: int, min_steps: int) -> list[tuple[int, int]]:
    """Even split of an inclusive column range into chained pieces of at
    most max_cols columns and at least min_steps steps each; adjacent
    pieces share a boundary column."""
    gaps = n_cols - 1
    per_piece = max_cols - 1
    pieces = math.ceil(gaps / per_piece)
    if min_steps > 0:
        if per_piece < min_steps or gaps // min_steps < pieces:
            raise CapConfigError(
                f"node cap too small: subwindows need at least {min_steps} steps "
                f"to complete a direct move to the request station"
            )
    out = []
    at = 0
    for i in range(pieces):
        size = gaps // pieces + (1 if i < gaps % pieces else 0)
        out.append((at, at + size))
        at += size
    return out


def solve_interval_capped(
    p: IntervalProblem,
    travel: TravelTimeMatrix,
    n_stations: int,
    costs: CostConfig,
    horizon: int,
    cap: CapPolicy,
) -> IntervalResult:
    """Sequentially chained subwindows under a node budget.

    The end station of each piece seeds the next piece's source. Pieces
    with a downstream request drop window-end stations from which the
    request can no longer be reached in the remaining time, so a feasible
    interval never strands the pod mid-chain.
    """
    min_nodes = 2 * n_stations + 4
    if cap.max_nodes < min_nodes:
        raise CapConfigError(f"cap {cap.max_nodes} below minimum viable window {min_nodes}")
    if p.category == BETWEEN and p.duration == 0:
        return solve_interval(p, travel, n_stations, costs, horizon)
    n_cols = p.duration // p.dt + 1
    max_cols = (cap.max_nodes - 4) // n_stations
    if n_cols <= max_cols:
        res = solve_interval(p, travel, n_stations, costs, horizon)
        return res
    grid = TimeGrid(p.dt, horizon)
    w_lo = p.window[0]
    actions: list[Action] = []
    total = 0
    fleet_cost = 0
    max_nodes_seen = 0
    arcs_seen = 0
    min_steps = 0
    if p.request is not None:
        # Moves cannot cross subwindow boundaries, so every piece must be
        # long enough for a direct move to the request station.
        min_steps = max(
            effective_travel_time(travel(s, p.request[0]), grid) // p.dt
            for s in range(n_stations)
        )
    pieces = _split_columns(n_cols, max_cols, min_steps)
    station = p.release[0] if p.release is not None else -1
    for k, (c0, c1) in enumerate(pieces):
        a, b = w_lo + c0 * p.dt, w_lo + c1 * p.dt
        last = k == len(pieces) - 1
        entry = "open" if (k == 0 and p.category == UNASSIGNED) else "point"
        exit_ = "point" if (last and p.category != TERMINAL) else "open"
        net = build_window_network(
            travel=travel,
            n_stations=n_stations,
            grid=grid,
            costs=costs,
            window=(a, b),
            entry=entry,
            exit_=exit_,
            release=(station, a) if entry == "point" else None,
            request=p.request if exit_ == "point" else None,
        )
        if exit_ == "open" and p.request is not None:
            _prune_stranding_exits(net, travel, grid, p.request, b)
        assert net.n_nodes <= cap.max_nodes
        try:
            sol = solve_min_cost_circulation(net)
        except InfeasibleNetworkError as exc:
            raise InfeasibleIntervalError(
                f"pod {p.pod} capped {p.category} subinterval {k}: {exc}"
            ) from exc
        seg, fc, station = _extract_segment(net, sol.flow)
        actions.extend(seg)
        total += sol.objective
        fleet_cost += fc
        max_nodes_seen = max(max_nodes_seen, net.n_nodes)
        arcs_seen += len(net.arcs)
    return IntervalResult(
        p, actions, total - fleet_cost, fleet_cost,
        subintervals=len(pieces), max_nodes=max_nodes_seen, n_arcs=arcs_seen,
    )


def _prune_stranding_exits(
    net: TimeSpaceNetwork,
    travel: TravelTimeMatrix,
    grid: TimeGrid,
    request: tuple[int, int],
    piece_end: int,
) -> None:
    req_s, req_t = request
    remaining = req_t - piece_end
    keep = []
    for idx, a in enumerate(net.arcs):
        if a.kind == STANDBY_TO_SINK:
            s, _ = _coords(net, a.src)
            if s != req_s and effective_travel_time(travel(s, req_s), grid) > remaining:
                continue
        keep.append(a)
    net.arcs[:] = keep


def solve_stage2(
    inst: Instance,
    routes: list[PodRoute],
    chains: list[list[int]],
    costs: CostConfig,
    grid: TimeGrid,
    cap: Optional[CapPolicy] = None,
) -> tuple[list[PodItinerary], int, list[IntervalResult]]:
    """Solve every interval of every chain and assemble full itineraries."""
    problems = plan_intervals(chains, routes, inst.travel, grid.dt, grid.horizon)
    results: list[IntervalResult] = []
    for p in problems:
        if cap is None:
            results.append(solve_interval(p, inst.travel, inst.n_stations, costs, grid.horizon))
        else:
            results.append(
                solve_interval_capped(p, inst.travel, inst.n_stations, costs, grid.horizon, cap)
            )
    return assemble(chains, routes, results, costs, grid)


def assemble(
    chains: list[list[int]],
    routes: list[PodRoute],
    results: list[IntervalResult],
    costs: CostConfig,
    grid: TimeGrid,
) -> tuple[list[PodItinerary], int, list[IntervalResult]]:
    """Stitch serve actions and interval segments into per-pod itineraries.

    Route boundary gap charges are applied here, exactly once per route, on
    the serve action, using the snapped times of the adjoining intervals.
    """
    by_pod: dict[int, list[IntervalResult]] = {}
    for r in results:
        by_pod.setdefault(r.problem.pod, []).append(r)

    itineraries: list[PodItinerary] = []
    for pod, chain in enumerate(chains):
        parts = by_pod.get(pod, [])
        # Boundary times per route in the chain, taken from adjoining intervals.
        entry_t: dict[int, int] = {}
        exit_t: dict[int, int] = {}
        for res in parts:
            p = res.problem
            if p.category == UNASSIGNED:
                entry_t[chain[0]] = p.request[1]
            elif p.category == TERMINAL:
                exit_t[chain[-1]] = p.release[1]
        betweens = [res for res in parts if res.problem.category == BETWEEN]
        assert len(betweens) == len(chain) - 1
        for (a, b), res in zip(zip(chain, chain[1:]), betweens):
            exit_t[a] = res.problem.release[1]
            entry_t[b] = res.problem.request[1]
        # Fall back to the planning grid for boundaries not set by an interval.
        for i in chain:
            lo, hi = _snap(routes[i], grid.dt)
            entry_t.setdefault(i, lo)
            exit_t.setdefault(i, hi)

        actions: list[Action] = []
        fleet_cost = costs.fleet
        idx = 0
        if parts and parts[0].problem.category == UNASSIGNED:
            actions.extend(parts[0].actions)
            fleet_cost = parts[0].fleet_cost
            idx = 1
        for k, i in enumerate(chain):
            r = routes[i]
            gap = (r.start_time - entry_t[i]) * costs.park[r.start_station] + (
                exit_t[i] - r.end_time
            ) * costs.park[r.end_station]
            actions.append(
                Action(
                    "serve",
                    entry_t[i],
                    exit_t[i],
                    r.start_station,
                    r.end_station,
                    gap,
                    route_index=i,
                )
            )
            if idx < len(parts) and parts[idx].problem.category == BETWEEN and k + 1 < len(chain):
                actions.extend(parts[idx].actions)
                idx += 1
        if idx < len(parts) and parts[idx].problem.category == TERMINAL:
            actions.extend(parts[idx].actions)
            idx += 1
        itineraries.append(PodItinerary(pod, actions, fleet_cost))
    objective = sum(it.total_cost for it in itineraries)
    return itineraries, objective, results
