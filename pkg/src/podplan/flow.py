"""Exact integral min-cost circulation and flow-to-itinerary decomposition.

The solver is successive shortest paths with node potentials (Dijkstra on
reduced costs). Supplies are unit-sized, costs are non-negative integers,
and shortest-path ties are broken by smallest node id, so results are
integral, optimal, and deterministic.
"""

from __future__ import annotations

import csv
import heapq
import json
from dataclasses import dataclass, field
from typing import Optional, TextIO

from .core import CostConfig, Instance, PodRoute, TimeGrid, Violation, units_to_usd_str
from .tsn import (
    RELEASER_TO_STANDBY,
    SINK,
    SINK_TO_SOURCE,
    SOURCE,
    SOURCE_TO_RELEASER,
    SOURCE_TO_STANDBY,
    STANDBY_TO_REQUESTER,
    STANDBY_TO_SINK,
    MOVE,
    PARK,
    TimeSpaceNetwork,
)

_INF = float("inf")


class InfeasibleNetworkError(Exception):
    """A demand node cannot be reached; carries the offending routes."""

    def __init__(self, message: str, routes: list[int]):
        super().__init__(message)
        self.routes = routes


@dataclass(frozen=True)
class FlowSolution:
    flow: tuple[int, ...]  # parallel to net.arcs
    objective: int
    fleet_size: int


class _Ssp:
    """Residual-graph successive shortest paths with potentials."""

    def __init__(self, n: int):
        self.n = n
        self.head: list[list[int]] = [[] for _ in range(n)]
        self.to: list[int] = []
        self.cap: list[int] = []
        self.cost: list[int] = []

    def add(self, u: int, v: int, cap: int, cost: int) -> int:
        idx = len(self.to)
        self.head[u].append(idx)
        self.to.append(v)
        self.cap.append(cap)
        self.cost.append(cost)
        self.head[v].append(idx + 1)
        self.to.append(u)
        self.cap.append(0)
        self.cost.append(-cost)
        return idx

    def solve(self, source: int, target: int, units: int) -> int:
        """Route `units` from source to target at min cost; returns cost or
        raises if the flow cannot be completed."""
        pot = [0] * self.n
        total = 0
        shipped = 0
        while shipped < units:
            dist: list[float] = [_INF] * self.n
            par_edge = [-1] * self.n
            dist[source] = 0
            heap: list[tuple[int, int]] = [(0, source)]
            while heap:
                d, u = heapq.heappop(heap)
                if d > dist[u]:
                    continue
                for e in self.head[u]:
                    if self.cap[e] <= 0:
                        continue
                    v = self.to[e]
                    nd = d + self.cost[e] + pot[u] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        par_edge[v] = e
                        heapq.heappush(heap, (nd, v))
            if dist[target] == _INF:
                raise InfeasibleNetworkError("no augmenting path", [])
            cutoff = dist[target]
            for v in range(self.n):
                pot[v] += int(min(dist[v], cutoff))
            push = units - shipped
            v = target
            while v != source:
                e = par_edge[v]
                push = min(push, self.cap[e])
                v = self.to[e ^ 1]
            v = target
            while v != source:
                e = par_edge[v]
                self.cap[e] -= push
                self.cap[e ^ 1] += push
                total += push * self.cost[e]
                v = self.to[e ^ 1]
            shipped += push
        return total


def solve_min_cost_circulation(net: TimeSpaceNetwork) -> FlowSolution:
    """Optimal integral circulation; fleet size read off the sink-to-source arc."""
    n = net.n_nodes
    ssp = _Ssp(n + 2)
    super_src, super_dst = n, n + 1
    arc_edge: list[int] = []
    for a in net.arcs:
        arc_edge.append(ssp.add(a.src, a.dst, a.cap, a.cost))
    units = 0
    for v, s in sorted(net.supply.items()):
        if s > 0:
            ssp.add(super_src, v, s, 0)
            units += s
        elif s < 0:
            ssp.add(v, super_dst, -s, 0)
    try:
        objective = ssp.solve(super_src, super_dst, units)
    except InfeasibleNetworkError:
        raise _diagnose_infeasible(net, ssp, super_src) from None
    flow = tuple(net.arcs[i].cap - ssp.cap[arc_edge[i]] for i in range(len(net.arcs)))
    fleet = flow[net.sink_to_source_arc] if net.sink_to_source_arc is not None else 0
    return FlowSolution(flow, objective, fleet)


def _diagnose_infeasible(net: TimeSpaceNetwork, ssp: _Ssp, super_src: int) -> InfeasibleNetworkError:
    # Which demand nodes does residual reachability miss?
    seen = [False] * ssp.n
    seen[super_src] = True
    stack = [super_src]
    while stack:
        u = stack.pop()
        for e in ssp.head[u]:
            if ssp.cap[e] > 0 and not seen[ssp.to[e]]:
                seen[ssp.to[e]] = True
                stack.append(ssp.to[e])
    bad = [
        net.requester_routes[i]
        for i in range(len(net.requester_routes))
        if not seen[net.requester(i)]
    ]
    names = ", ".join(str(r) for r in bad) or "unknown"
    return InfeasibleNetworkError(f"unreachable requester route(s): {names}", bad)


@dataclass(frozen=True)
class Action:
    kind: str  # "serve" | "park" | "move"
    start_s: int
    end_s: int
    from_station: int
    to_station: int
    cost: int
    route_index: int = -1

    def as_dict(self) -> dict:
        d = {
            "type": self.kind,
            "start_s": self.start_s,
            "end_s": self.end_s,
            "cost_micro": self.cost,
        }
        if self.kind == "move":
            d["from_station"] = self.from_station
            d["to_station"] = self.to_station
        else:
            d["station"] = self.from_station
            if self.kind == "serve":
                d["to_station"] = self.to_station
                d["route"] = self.route_index
        return d


@dataclass
class PodItinerary:
    pod: int
    actions: list[Action]
    fleet_cost: int

    @property
    def total_cost(self) -> int:
        return self.fleet_cost + sum(a.cost for a in self.actions)


def decompose_flow(
    net: TimeSpaceNetwork, sol: FlowSolution, routes: list[PodRoute]
) -> list[PodItinerary]:
    """Peel unit source-to-sink paths off an integral circulation.

    At a requester the pod serves that route and re-emerges at the paired
    releaser; serve actions absorb the boundary-arc gap costs. Outgoing arcs
    are consumed in construction order, so the split is deterministic.
    """
    residual = list(sol.flow)
    out_arcs: dict[int, list[int]] = {}
    for idx, a in enumerate(net.arcs):
        if residual[idx] > 0:
            out_arcs.setdefault(a.src, []).append(idx)
    # Serve before moving on: a zero-width route loops requester/releaser
    # through a single standby node, and skipping past it would strand flow.
    for arcs in out_arcs.values():
        arcs.sort(key=lambda i: (net.arcs[i].kind != STANDBY_TO_REQUESTER, i))

    def take(node: int) -> int:
        for idx in out_arcs.get(node, []):
            if residual[idx] > 0:
                residual[idx] -= 1
                return idx
        raise AssertionError(f"flow conservation broken at node {node}")

    base = 2 + net.n_stations * net.n_cols
    req_pos = {net.requester(i): i for i in range(len(net.requester_routes))}

    itineraries: list[PodItinerary] = []
    n_pods = sol.fleet_size
    for pod in range(n_pods):
        idx = take(SOURCE)
        arc = net.arcs[idx]
        actions: list[Action] = []
        fleet_cost = arc.cost
        node = arc.dst
        while node != SINK:
            idx = take(node)
            arc = net.arcs[idx]
            s_from, t_from = _standby_coords(net, arc.src)
            if arc.kind == PARK:
                actions.append(
                    Action("park", t_from, t_from + net.grid.dt, s_from, s_from, arc.cost)
                )
                node = arc.dst
            elif arc.kind == MOVE:
                s_to, t_to = _standby_coords(net, arc.dst)
                actions.append(Action("move", t_from, t_to, s_from, s_to, arc.cost))
                node = arc.dst
            elif arc.kind == STANDBY_TO_REQUESTER:
                r = net.requester_routes[req_pos[arc.dst]]
                route = routes[r]
                rel_node = net.releaser(net.releaser_routes.index(r))
                exit_idx = take(rel_node)
                exit_arc = net.arcs[exit_idx]
                _, t_hi = _standby_coords(net, exit_arc.dst)
                actions.append(
                    Action(
                        "serve",
                        t_from,
                        t_hi,
                        route.start_station,
                        route.end_station,
                        arc.cost + exit_arc.cost,
                        route_index=r,
                    )
                )
                node = exit_arc.dst
            elif arc.kind == STANDBY_TO_SINK:
                node = SINK
            else:
                raise AssertionError(f"unexpected arc kind {arc.kind} while tracing")
        take(SINK)  # close the circulation
        itineraries.append(PodItinerary(pod, actions, fleet_cost))

    if any(residual):
        raise AssertionError("residual flow remains after decomposition")
    total = sum(it.total_cost for it in itineraries)
    if total != sol.objective:
        raise AssertionError(f"itinerary costs {total} != objective {sol.objective}")
    return itineraries


def _standby_coords(net: TimeSpaceNetwork, v: int) -> tuple[int, int]:
    s, col = divmod(v - 2, net.n_cols)
    return s, net.window[0] + col * net.grid.dt


def check_constraints(
    itins: list[PodItinerary],
    inst: Instance,
    routes: list[PodRoute],
    grid: TimeGrid,
) -> list[Violation]:
    """Audit itineraries against the scheduling model: every route served by
    exactly one pod, one activity per pod at any instant with no gaps over
    the horizon, and every transition physically reachable."""
    out: list[Violation] = []
    served: dict[int, list[int]] = {}
    for it in itins:
        where = f"pod {it.pod}"
        if not it.actions:
            out.append(Violation(where, "itinerary has no actions"))
            continue
        if it.actions[0].start_s != 0:
            out.append(Violation(where, f"starts at {it.actions[0].start_s}, not 0"))
        if it.actions[-1].end_s != grid.horizon:
            out.append(Violation(where, f"ends at {it.actions[-1].end_s}, not horizon"))
        prev_end = it.actions[0].start_s
        prev_station = it.actions[0].from_station
        for a in it.actions:
            if a.start_s != prev_end:
                out.append(Violation(where, f"activity gap/overlap at t={a.start_s}"))
            if a.from_station != prev_station:
                out.append(
                    Violation(where, f"teleport {prev_station}->{a.from_station} at t={a.start_s}")
                )
            if a.kind == "move":
                tau = inst.travel(a.from_station, a.to_station)
                if a.end_s - a.start_s < tau:
                    out.append(Violation(where, f"move at t={a.start_s} faster than travel time"))
                prev_station = a.to_station
            elif a.kind == "serve":
                route = routes[a.route_index]
                served.setdefault(a.route_index, []).append(it.pod)
                if a.from_station != route.start_station or a.to_station != route.end_station:
                    out.append(Violation(where, f"serve endpoints mismatch route {route.label}"))
                if a.start_s > route.start_time or a.end_s < route.end_time:
                    out.append(
                        Violation(where, f"serve window misses route {route.label} service span")
                    )
                prev_station = a.to_station
            else:
                prev_station = a.from_station
            prev_end = a.end_s
    for r in range(len(routes)):
        pods = served.get(r, [])
        if len(pods) != 1:
            out.append(
                Violation(f"route {routes[r].label}", f"served by {len(pods)} pods, expected 1")
            )
    return out


def export_itineraries_json(itins: list[PodItinerary], out: TextIO) -> None:
    doc = [
        {
            "pod": it.pod,
            "fleet_cost_micro": it.fleet_cost,
            "total_cost_micro": it.total_cost,
            "actions": [a.as_dict() for a in it.actions],
        }
        for it in itins
    ]
    json.dump(doc, out, indent=2, sort_keys=True)
    out.write("\n")


def export_itineraries_csv(itins: list[PodItinerary], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["pod", "n_serves", "n_moves", "n_parks", "total_cost_usd"])
    for it in itins:
        kinds = [a.kind for a in it.actions]
        writer.writerow(
            [
                it.pod,
                kinds.count("serve"),
                kinds.count("move"),
                kinds.count("park"),
                units_to_usd_str(it.total_cost),
            ]
        )
