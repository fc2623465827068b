"""Independent verification oracles for small instances.

These deliberately avoid the production solver machinery: path cover via
bitmask dynamic programming over the compatibility edges, schedule cost via
exhaustive chain-partition enumeration with a plain forward table over the
station/time lattice, and an action-level audit that reprices every
itinerary from first principles.
"""

from __future__ import annotations

import math
from typing import Optional

from .core import CostConfig, Instance, PodRoute, TimeGrid, snap_times
from .flow import Action, PodItinerary
from .matching import CompatibilityDag

MAX_ROUTES_COVER = 12
MAX_ROUTES_SCHEDULE = 6

DISCRETE = "discrete"
CONTINUOUS = "continuous"


class OracleLimitError(Exception):
    """Instance too large for exhaustive verification."""


def brute_force_path_cover(dag: CompatibilityDag) -> int:
    """Minimum vertex-disjoint path cover size by exhaustive matching.

    dp[mask] is the most edges usable with successor-set `mask` after
    considering each predecessor in turn; every reachable state is visited,
    so the result is exact.
    """
    n = dag.n_routes
    if n > MAX_ROUTES_COVER:
        raise OracleLimitError(f"{n} vertices exceeds oracle limit {MAX_ROUTES_COVER}")
    dp = [0] * (1 << n)
    for i in range(n):
        nxt = dp[:]
        for mask in range(1 << n):
            base = dp[mask]
            for j in dag.succ[i]:
                if not mask & (1 << j) and base + 1 > nxt[mask | (1 << j)]:
                    nxt[mask | (1 << j)] = base + 1
        dp = nxt
    return n - max(dp)


def brute_force_route_cover(demands: tuple[int, ...] | list[int]) -> int:
    """Exhaustive minimum number of contiguous routes covering a demand
    vector, by memoized recursion over the remaining demand state. Any
    optimal cover can start a route at the leftmost positive stop, so only
    the route's right endpoint is branched on."""
    if any(d < 0 for d in demands):
        raise ValueError("demands must be non-negative")
    memo: dict[tuple[int, ...], int] = {}

    def best(state: tuple[int, ...]) -> int:
        got = memo.get(state)
        if got is not None:
            return got
        i = next((k for k, d in enumerate(state) if d > 0), None)
        if i is None:
            return 0
        lo = math.inf
        work = list(state)
        j = i
        while j < len(work) and work[j] > 0:
            work[j] -= 1
            lo = min(lo, 1 + best(tuple(work)))
            j += 1
        memo[state] = int(lo)
        return int(lo)

    return best(tuple(demands))


def _can_follow(r1: PodRoute, r2: PodRoute, travel) -> bool:
    # One-second minimum occupancy per served route, mirroring the
    # minimum-width snap rule of the grid formulations.
    eff_end = max(r1.end_time, r1.start_time + 1)
    return travel(r1.end_station, r2.start_station) <= r2.start_time - eff_end


def _snap(route: PodRoute, dt: int) -> tuple[int, int]:
    return snap_times(route.start_time, route.end_time, dt)


def _lattice_best(
    travel,
    n_stations: int,
    costs: CostConfig,
    dt: int,
    window: tuple[int, int],
    start: Optional[int],  # station; None = free entry at any station
    end: Optional[int],  # station; None = free exit at any station
) -> Optional[tuple[int, list[Action]]]:
    """Cheapest park/move action sequence across the window, by forward
    table with parent pointers. Returns None when the window is impassable."""
    w_lo, w_hi = window
    cols = (w_hi - w_lo) // dt + 1
    cost: list[list[Optional[int]]] = [[None] * cols for _ in range(n_stations)]
    parent: list[list[Optional[tuple[int, int]]]] = [[None] * cols for _ in range(n_stations)]
    for s in range(n_stations):
        if start is None or s == start:
            cost[s][0] = 0
    taus = [
        [math.ceil(travel(a, b) / dt) if a != b else 0 for b in range(n_stations)]
        for a in range(n_stations)
    ]
    for c in range(1, cols):
        for s in range(n_stations):
            best, par = None, None
            if cost[s][c - 1] is not None:
                best = cost[s][c - 1] + costs.park[s] * dt
                par = (s, c - 1)
            for s2 in range(n_stations):
                if s2 == s:
                    continue
                steps = taus[s2][s]
                if steps == 0 or steps > c or cost[s2][c - steps] is None:
                    continue
                cand = cost[s2][c - steps] + costs.move * steps * dt
                if best is None or cand < best:
                    best, par = cand, (s2, c - steps)
            cost[s][c], parent[s][c] = best, par
    goal = None
    for s in range(n_stations):
        if (end is None or s == end) and cost[s][cols - 1] is not None:
            if goal is None or cost[s][cols - 1] < cost[goal][cols - 1]:
                goal = s
    if goal is None:
        return None
    actions: list[Action] = []
    s, c = goal, cols - 1
    while c > 0:
        s2, c2 = parent[s][c]
        t2, t = w_lo + c2 * dt, w_lo + c * dt
        if s2 == s:
            actions.append(Action("park", t2, t, s, s, costs.park[s] * dt))
        else:
            actions.append(Action("move", t2, t, s2, s, costs.move * (t - t2)))
        s, c = s2, c2
    actions.reverse()
    return cost[goal][cols - 1], actions


def _partitions(routes: list[PodRoute], travel) -> list[list[list[int]]]:
    """All partitions of time-ordered routes into continuous-time feasible chains."""
    order = sorted(range(len(routes)), key=lambda i: (routes[i].start_time, i))
    out: list[list[list[int]]] = []

    def rec(k: int, chains: list[list[int]]) -> None:
        if k == len(order):
            out.append([c[:] for c in chains])
            return
        i = order[k]
        for c in chains:
            if _can_follow(routes[c[-1]], routes[i], travel):
                c.append(i)
                rec(k + 1, chains)
                c.pop()
        chains.append([i])
        rec(k + 1, chains)
        chains.pop()

    rec(0, [])
    return out


def _refined_dts(dt: int) -> list[int]:
    # Same ladder the two-stage planner uses: divisors down to 5 s, then
    # exact 1-second resolution.
    return [d for d in range(dt, 4, -1) if dt % d == 0] + [1]


def _chain_schedule(
    chain: list[int],
    routes: list[PodRoute],
    inst: Instance,
    costs: CostConfig,
    dt: int,
    horizon: int,
    mode: str,
) -> Optional[tuple[int, list[Action]]]:
    """Cost and actions for one pod serving `chain`, excluding the fleet charge."""
    total = 0
    actions: list[Action] = []
    first = routes[chain[0]]
    t_lo0, _ = _snap(first, dt)
    if t_lo0 > 0:
        got = _lattice_best(
            inst.travel, inst.n_stations, costs, dt, (0, t_lo0), None, first.start_station
        )
        if got is None:
            return None
        total += got[0]
        actions.extend(got[1])
    entry = t_lo0
    for a, b in zip(chain, chain[1:]):
        ra, rb = routes[a], routes[b]
        dts = _refined_dts(dt) if mode == CONTINUOUS else [dt]
        seg = None
        for d in dts:
            t_hi = snap_times(ra.start_time, ra.end_time, d)[1]
            t_lo = (rb.start_time // d) * d
            if t_hi > t_lo:
                continue
            got = _lattice_best(
                inst.travel, inst.n_stations, costs, d, (t_hi, t_lo), ra.end_station, rb.start_station
            )
            if got is not None:
                seg = (t_hi, t_lo, got)
                break
        if seg is None:
            return None
        t_hi, t_lo, got = seg
        gap = (ra.start_time - entry) * costs.park[ra.start_station] + (
            t_hi - ra.end_time
        ) * costs.park[ra.end_station]
        actions.append(
            Action("serve", entry, t_hi, ra.start_station, ra.end_station, gap, route_index=a)
        )
        total += gap + got[0]
        actions.extend(got[1])
        entry = t_lo
    last = routes[chain[-1]]
    _, t_hi_last = _snap(last, dt)
    gap = (last.start_time - entry) * costs.park[last.start_station] + (
        t_hi_last - last.end_time
    ) * costs.park[last.end_station]
    actions.append(
        Action(
            "serve", entry, t_hi_last, last.start_station, last.end_station, gap,
            route_index=chain[-1],
        )
    )
    total += gap
    if t_hi_last < horizon:
        got = _lattice_best(
            inst.travel, inst.n_stations, costs, dt, (t_hi_last, horizon), last.end_station, None
        )
        if got is None:
            return None
        total += got[0]
        actions.extend(got[1])
    return total, actions


def brute_force_schedule(
    inst: Instance,
    routes: list[PodRoute],
    costs: CostConfig,
    grid: TimeGrid,
    mode: str = DISCRETE,
) -> tuple[int, list[PodItinerary]]:
    """Exhaustive optimum over all chain partitions of the routes.

    In discrete mode every interval is priced on the given grid, matching
    the full-horizon formulation exactly. Continuous mode lets each
    between-interval refine its grid, as the two-stage planner does.
    Returns the objective and witness itineraries (first minimum found,
    under a fixed enumeration order).
    """
    if len(routes) > MAX_ROUTES_SCHEDULE:
        raise OracleLimitError(f"{len(routes)} routes exceeds oracle limit {MAX_ROUTES_SCHEDULE}")
    best: Optional[tuple[int, list[PodItinerary]]] = None
    for chains in _partitions(routes, inst.travel):
        cost = costs.fleet * len(chains)
        witness: list[PodItinerary] = []
        ok = True
        for pod, chain in enumerate(chains):
            got = _chain_schedule(chain, routes, inst, costs, grid.dt, grid.horizon, mode)
            if got is None:
                ok = False
                break
            cost += got[0]
            witness.append(PodItinerary(pod, got[1], costs.fleet))
        if ok and (best is None or cost < best[0]):
            best = (cost, witness)
    if best is None:
        raise OracleLimitError("no feasible partition on this grid")
    return best


def audit(
    itineraries: list[PodItinerary],
    inst: Instance,
    routes: list[PodRoute],
    costs: CostConfig,
    claimed_objective: int,
) -> None:
    """Reprice every action from scratch and check the claimed objective.

    Raises AssertionError with a description on any mismatch.
    """
    total = 0
    served: dict[int, int] = {}
    for it in itineraries:
        assert it.fleet_cost == costs.fleet, f"pod {it.pod}: fleet charge {it.fleet_cost}"
        total += it.fleet_cost
        at: Optional[tuple[int, int]] = None  # (station, time) after previous action
        for act in it.actions:
            dur = act.end_s - act.start_s
            if at is not None:
                assert at == (act.from_station, act.start_s), (
                    f"pod {it.pod}: gap before {act.kind} at {act.start_s}"
                )
            if act.kind == "park":
                assert act.from_station == act.to_station
                want = costs.park[act.from_station] * dur
            elif act.kind == "move":
                tau = inst.travel(act.from_station, act.to_station)
                assert dur >= tau, f"pod {it.pod}: move shorter than travel time"
                want = costs.move * dur
            elif act.kind == "serve":
                r = routes[act.route_index]
                served[act.route_index] = served.get(act.route_index, 0) + 1
                assert act.start_s <= r.start_time and act.end_s >= r.end_time
                assert act.from_station == r.start_station and act.to_station == r.end_station
                want = (r.start_time - act.start_s) * costs.park[r.start_station] + (
                    act.end_s - r.end_time
                ) * costs.park[r.end_station]
            else:
                raise AssertionError(f"unknown action kind {act.kind}")
            assert act.cost == want, (
                f"pod {it.pod} {act.kind} [{act.start_s},{act.end_s}]: "
                f"cost {act.cost}, repriced {want}"
            )
            total += act.cost
            at = (act.to_station, act.end_s)
    assert sorted(served) == list(range(len(routes))), "not every route served exactly once"
    assert all(v == 1 for v in served.values())
    assert total == claimed_objective, f"objective {claimed_objective}, repriced {total}"
