"""Shared fixtures.

`paper_instance` is the worked four-run example: runs A-D over seven
stations with hand-picked travel times chosen so that exactly seventeen
release-to-request transitions are feasible, the maximum matching has size
four, and the minimum fleet is six. `small_instance` is a two-run,
three-station example whose reduced full-horizon network at dt=60 has
exactly 41 nodes and needs two pods.
"""

from __future__ import annotations

import pytest

from podplan import BusRun, Instance, Station, Stop, TravelTimeMatrix


def _matrix(n: int, default: int, overrides: dict[tuple[int, int], int]) -> TravelTimeMatrix:
    rows = [[0 if i == j else overrides.get((i, j), default) for j in range(n)] for i in range(n)]
    return TravelTimeMatrix.from_lists(rows)


# Stations s1..s7 are ids 0..6. Times are seconds from 13:00.
PAPER_TRAVEL = _matrix(
    7,
    300,
    {
        (1, 5): 240,  # s2 -> s6
        (3, 5): 480,  # s4 -> s6
        (3, 0): 600,  # s4 -> s1
        (3, 4): 600,  # s4 -> s5
        (2, 0): 420,  # s3 -> s1
        (2, 5): 360,  # s3 -> s6
        (2, 4): 360,  # s3 -> s5
    },
)

PAPER_RUNS = [
    # run A: s1 13:00 (3), s2 13:02 (3), s3 13:05 (2), s4 13:07 (2)
    BusRun(0, (Stop(0, 0, 3), Stop(1, 120, 3), Stop(2, 300, 2), Stop(3, 420, 2))),
    # run B: s1 13:18 (2), s2 13:20 (2), s3 13:23 (1), s4 13:25 (1)
    BusRun(1, (Stop(0, 1080, 2), Stop(1, 1200, 2), Stop(2, 1380, 1), Stop(3, 1500, 1))),
    # run C: s5 13:13 (1), s6 13:17 (2), s3 13:20 (2), s7 13:24 (1)
    BusRun(2, (Stop(4, 780, 1), Stop(5, 1020, 2), Stop(2, 1200, 2), Stop(6, 1440, 1))),
    # run D: s5 13:03 (2), s6 13:07 (3), s3 13:10 (3), s7 13:14 (1)
    BusRun(3, (Stop(4, 180, 2), Stop(5, 420, 3), Stop(2, 600, 3), Stop(6, 840, 1))),
]

# Transitions drawn in the bipartite illustration, as (releaser, requester)
# route labels; the full feasible set adds the two visually coincident
# duplicates listed in PAPER_HIDDEN_EDGES (their endpoints overlap in the
# drawing because the routes share stations and times).
PAPER_FIGURE_EDGES = {
    ("0.2", "1.0"), ("0.2", "1.1"), ("0.2", "3.2"), ("0.2", "2.1"),
    ("0.0", "2.1"), ("0.1", "2.1"), ("3.1", "2.1"), ("3.2", "1.0"),
    ("3.1", "1.1"), ("0.1", "1.0"), ("0.0", "1.1"), ("0.0", "1.0"),
    ("0.1", "1.1"), ("0.2", "2.0"), ("3.2", "2.1"),
}
PAPER_HIDDEN_EDGES = {("3.2", "1.1"), ("3.1", "1.0")}
PAPER_MATCHING_SIZE = 4
PAPER_FLEET = 6
PAPER_ROUTE_COUNTS = [3, 2, 2, 3]  # routes per run A, B, C, D


@pytest.fixture
def paper_instance() -> Instance:
    stations = tuple(Station(i, f"s{i + 1}") for i in range(7))
    return Instance(stations, PAPER_TRAVEL, tuple(PAPER_RUNS), 1800)


SMALL_TRAVEL = _matrix(3, 300, {(0, 1): 100, (1, 0): 100, (1, 2): 150, (2, 1): 150,
                                (0, 2): 250, (2, 0): 250})

SMALL_RUNS = [
    BusRun(0, (Stop(0, 0, 2), Stop(1, 120, 2), Stop(2, 300, 1))),
    BusRun(1, (Stop(0, 300, 1), Stop(1, 420, 1), Stop(2, 600, 1))),
]

SMALL_NODES_DT60 = 41  # 2*3 routes + 3 stations * 11 steps + source + sink
SMALL_FLEET = 2


@pytest.fixture
def small_instance() -> Instance:
    stations = tuple(Station(i, f"s{i + 1}") for i in range(3))
    return Instance(stations, SMALL_TRAVEL, tuple(SMALL_RUNS), 600)
