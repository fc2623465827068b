"""Stage 1 of the hierarchical method: minimum fleet size.

Builds the route-compatibility DAG in continuous time, solves maximum
bipartite matching with Hopcroft-Karp, and reconstructs assignment chains.
The minimum disjoint path cover of the DAG has size |R| minus the matching
cardinality, and that size is the minimum fleet.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import PodRoute, TravelTimeMatrix

_UNSET = -1
_INF = float("inf")


@dataclass(frozen=True)
class CompatibilityDag:
    """Edges go from the releaser side of route i to the requester side of
    route j whenever an empty pod can make the continuous-time connection."""

    n_routes: int
    succ: tuple[tuple[int, ...], ...]  # per releaser, requesters sorted by start time

    @property
    def n_edges(self) -> int:
        return sum(len(s) for s in self.succ)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, row in enumerate(self.succ) for j in row}


@dataclass(frozen=True)
class Matching:
    pairs: dict[int, int]  # releaser route -> requester route

    @property
    def size(self) -> int:
        return len(self.pairs)


def effective_end(route: PodRoute) -> int:
    """A served route occupies its pod for at least one second; a
    zero-duration (single-visit) route would otherwise allow two co-located
    instantaneous routes to chain in both directions."""
    return max(route.end_time, route.start_time + 1)


def _compatible(r1: PodRoute, r2: PodRoute, travel: TravelTimeMatrix) -> bool:
    return travel(r1.end_station, r2.start_station) <= r2.start_time - effective_end(r1)


def build_compatibility_dag(routes: list[PodRoute], travel: TravelTimeMatrix) -> CompatibilityDag:
    """Compatibility edges over continuous times; no discretization.

    The one-second minimum occupancy makes every edge strictly forward in
    time, so the graph is acyclic by construction (asserted anyway).
    """
    n = len(routes)
    succ: list[list[int]] = [[] for _ in range(n)]
    order = sorted(range(n), key=lambda j: (routes[j].start_time, j))
    for i in range(n):
        for j in order:
            if j != i and _compatible(routes[i], routes[j], travel):
                succ[i].append(j)
    dag = CompatibilityDag(n, tuple(tuple(s) for s in succ))
    _assert_acyclic(dag)
    return dag


def _assert_acyclic(dag: CompatibilityDag) -> None:
    indeg = [0] * dag.n_routes
    for row in dag.succ:
        for j in row:
            indeg[j] += 1
    queue = deque(i for i in range(dag.n_routes) if indeg[i] == 0)
    seen = 0
    while queue:
        i = queue.popleft()
        seen += 1
        for j in dag.succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                queue.append(j)
    if seen != dag.n_routes:
        raise AssertionError("compatibility graph contains a cycle")


def max_matching(dag: CompatibilityDag) -> Matching:
    """Hopcroft-Karp over the releaser/requester bipartite split.

    Adjacency order is fixed by the DAG construction, so the particular
    maximum matching returned is deterministic.
    """
    n = dag.n_routes
    pair_l = [_UNSET] * n  # releaser -> requester
    pair_r = [_UNSET] * n  # requester -> releaser
    dist = [0.0] * n

    def bfs() -> bool:
        queue: deque[int] = deque()
        for i in range(n):
            if pair_l[i] == _UNSET:
                dist[i] = 0
                queue.append(i)
            else:
                dist[i] = _INF
        found = _INF
        while queue:
            i = queue.popleft()
            if dist[i] >= found:
                continue
            for j in dag.succ[i]:
                k = pair_r[j]
                if k == _UNSET:
                    found = min(found, dist[i] + 1)
                elif dist[k] == _INF:
                    dist[k] = dist[i] + 1
                    queue.append(k)
        return found != _INF

    def dfs(i: int) -> bool:
        for j in dag.succ[i]:
            k = pair_r[j]
            if k == _UNSET or (dist[k] == dist[i] + 1 and dfs(k)):
                pair_l[i] = j
                pair_r[j] = i
                return True
        dist[i] = _INF
        return False

    while bfs():
        for i in range(n):
            if pair_l[i] == _UNSET:
                dfs(i)
    return Matching({i: pair_l[i] for i in range(n) if pair_l[i] != _UNSET})


def fleet_size(n_routes: int, matching: Matching) -> int:
    return n_routes - matching.size


def reconstruct_chains(matching: Matching, routes: list[PodRoute]) -> list[list[int]]:
    """Turn matched pairs into per-pod chains of route indices.

    Chain heads are routes no other route feeds into; chain count equals the
    fleet size. Chains are ordered by their head route index.
    """
    succ = matching.pairs
    has_pred = set(succ.values())
    chains: list[list[int]] = []
    for head in range(len(routes)):
        if head in has_pred:
            continue
        chain = [head]
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
        chains.append(chain)
    covered = sorted(i for c in chains for i in c)
    if covered != list(range(len(routes))):
        raise AssertionError("chains do not partition the routes")
    return chains
