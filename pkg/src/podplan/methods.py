"""Top-level planning entry points.

Two solution methods over the same instance: a single full-horizon
min-cost circulation, and a two-stage plan (continuous-time matching for
fleet size, then per-interval min-cost flows), with an optional node cap
on the interval networks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import CostConfig, Instance, PodRoute, TimeGrid
from .decompose import decompose_instance
from .flow import PodItinerary, decompose_flow, solve_min_cost_circulation
from .hierarchical import CapPolicy, IntervalResult, solve_stage2
from .matching import build_compatibility_dag, fleet_size, max_matching, reconstruct_chains
from .tsn import build_integrated_network

INTEGRATED = "integrated"
HIERARCHICAL = "hierarchical"
HIERARCHICAL_CAPPED = "hierarchical-capped"
METHODS = (INTEGRATED, HIERARCHICAL, HIERARCHICAL_CAPPED)


@dataclass
class PlanResult:
    method: str
    dt: int
    objective: int  # exact currency units
    fleet: int
    routes: list[PodRoute]
    itineraries: list[PodItinerary]
    n_nodes: int
    n_arcs: int
    intervals: Optional[list[IntervalResult]] = None
    matching_size: int = 0


def solve_integrated(inst: Instance, costs: CostConfig, dt: int) -> PlanResult:
    routes = decompose_instance(inst)
    grid = inst.grid(dt)
    net = build_integrated_network(inst, routes, grid, costs)
    sol = solve_min_cost_circulation(net)
    itineraries = decompose_flow(net, sol, routes)
    return PlanResult(
        method=INTEGRATED,
        dt=dt,
        objective=sol.objective,
        fleet=sol.fleet_size,
        routes=routes,
        itineraries=itineraries,
        n_nodes=net.n_nodes,
        n_arcs=len(net.arcs),
    )


def solve_hierarchical(
    inst: Instance, costs: CostConfig, dt: int, cap: Optional[CapPolicy] = None
) -> PlanResult:
    routes = decompose_instance(inst)
    grid = inst.grid(dt)
    dag = build_compatibility_dag(routes, inst.travel)
    matching = max_matching(dag)
    chains = reconstruct_chains(matching, routes)
    itineraries, objective, results = solve_stage2(inst, routes, chains, costs, grid, cap)
    return PlanResult(
        method=HIERARCHICAL_CAPPED if cap is not None else HIERARCHICAL,
        dt=dt,
        objective=objective,
        fleet=fleet_size(len(routes), matching),
        routes=routes,
        itineraries=itineraries,
        n_nodes=max((r.max_nodes for r in results), default=0),
        n_arcs=sum(r.n_arcs for r in results),
        intervals=results,
        matching_size=matching.size,
    )


def solve(
    inst: Instance,
    costs: CostConfig,
    dt: int,
    method: str = INTEGRATED,
    cap: Optional[CapPolicy] = None,
) -> PlanResult:
    if method == INTEGRATED:
        return solve_integrated(inst, costs, dt)
    if method == HIERARCHICAL:
        return solve_hierarchical(inst, costs, dt)
    if method == HIERARCHICAL_CAPPED:
        if cap is None:
            raise ValueError("capped method needs a CapPolicy")
        return solve_hierarchical(inst, costs, dt, cap)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
