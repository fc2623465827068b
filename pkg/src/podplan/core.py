"""Domain types, time discretization, and instance validation.

All times are integer seconds. Currency is held in integer cost units where
1 USD = 60,000,000 units; equivalently one unit is a micro-USD-per-minute
rate applied for one second. This makes every per-minute price in whole
micro-USD exactly representable when charged per second, so objective
values compare exactly across solvers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

# 1 USD expressed in internal cost units.
USD = 60_000_000


def per_minute_rate(usd_per_minute: float | str) -> int:
    """Convert a USD-per-minute price to cost units per second."""
    rate = Fraction(str(usd_per_minute)) * 1_000_000
    if rate.denominator != 1 or rate < 0:
        raise ValueError(f"price {usd_per_minute!r} is not a whole micro-USD per minute")
    return int(rate)


def usd_amount(usd: float | str) -> int:
    """Convert a one-off USD amount to cost units."""
    amount = Fraction(str(usd)) * USD
    if amount.denominator != 1 or amount < 0:
        raise ValueError(f"amount {usd!r} is not representable in cost units")
    return int(amount)


def units_to_usd_str(units: int, places: int = 6) -> str:
    """Render a cost-unit amount as a fixed-point USD string (round half even)."""
    q = Fraction(units, USD) * 10**places
    scaled = q.numerator // q.denominator
    rem2 = 2 * (q.numerator - scaled * q.denominator)
    if rem2 > q.denominator or (rem2 == q.denominator and scaled % 2 == 1):
        scaled += 1
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // 10**places}.{scaled % 10**places:0{places}d}"


@dataclass(frozen=True)
class Station:
    id: int
    label: str


@dataclass(frozen=True)
class TravelTimeMatrix:
    """Continuous travel seconds between stations; not assumed symmetric."""

    tau: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_lists(rows: list[list[int]]) -> "TravelTimeMatrix":
        return TravelTimeMatrix(tuple(tuple(int(x) for x in row) for row in rows))

    def __call__(self, s: int, t: int) -> int:
        return self.tau[s][t]

    @property
    def n(self) -> int:
        return len(self.tau)


@dataclass(frozen=True)
class Stop:
    station: int
    arrival: int
    demand: int


@dataclass(frozen=True)
class BusRun:
    id: int
    stops: tuple[Stop, ...]

    @property
    def start(self) -> int:
        return self.stops[0].arrival

    @property
    def end(self) -> int:
        return self.stops[-1].arrival


@dataclass(frozen=True)
class PodRoute:
    """One pod's contiguous in-service segment of a bus run."""

    run_id: int
    seq: int  # extraction order within the run
    visits: tuple[tuple[int, int], ...]  # (station, arrival seconds)

    def __post_init__(self) -> None:
        if not self.visits:
            raise ValueError("route must have at least one visit")
        times = [t for _, t in self.visits]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("route visit times must be strictly increasing")

    @property
    def start_station(self) -> int:
        return self.visits[0][0]

    @property
    def end_station(self) -> int:
        return self.visits[-1][0]

    @property
    def start_time(self) -> int:
        return self.visits[0][1]

    @property
    def end_time(self) -> int:
        return self.visits[-1][1]

    @property
    def label(self) -> str:
        return f"{self.run_id}.{self.seq}"


@dataclass(frozen=True)
class TimeGrid:
    dt: int
    horizon: int

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.horizon <= 0 or self.horizon % self.dt != 0:
            raise ValueError("horizon must be a positive multiple of dt")

    @property
    def steps(self) -> int:
        return self.horizon // self.dt + 1


@dataclass(frozen=True)
class CostConfig:
    """Fleet, movement and per-station parking prices in internal units.

    fleet: units per pod per service day.
    move: units per second of empty travel.
    park: units per second of parking, indexed by station id.
    """

    fleet: int
    move: int
    park: tuple[int, ...]

    @staticmethod
    def from_usd(
        fleet_usd: float | str,
        move_per_min: float | str,
        park_per_min: float | str | list,
        n_stations: int,
    ) -> "CostConfig":
        if isinstance(park_per_min, list):
            if len(park_per_min) != n_stations:
                raise ValueError("park price list must cover every station")
            park = tuple(per_minute_rate(p) for p in park_per_min)
        else:
            park = (per_minute_rate(park_per_min),) * n_stations
        return CostConfig(usd_amount(fleet_usd), per_minute_rate(move_per_min), park)


@dataclass(frozen=True)
class Instance:
    stations: tuple[Station, ...]
    travel: TravelTimeMatrix
    runs: tuple[BusRun, ...]
    horizon: int

    @property
    def n_stations(self) -> int:
        return len(self.stations)

    def grid(self, dt: int) -> TimeGrid:
        """Grid over the instance horizon, padding the horizon up to a dt multiple."""
        horizon = self.horizon
        if horizon % dt:
            horizon += dt - horizon % dt
        return TimeGrid(dt, horizon)

    def to_json(self) -> str:
        doc = {
            "stations": [{"id": s.id, "label": s.label} for s in self.stations],
            "travel": [list(row) for row in self.travel.tau],
            "runs": [
                {
                    "id": run.id,
                    "stops": [
                        {"station": st.station, "arrival_s": st.arrival, "demand_pods": st.demand}
                        for st in run.stops
                    ],
                }
                for run in self.runs
            ],
            "horizon_s": self.horizon,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "Instance":
        doc = json.loads(text)
        stations = tuple(Station(s["id"], s["label"]) for s in doc["stations"])
        travel = TravelTimeMatrix.from_lists(doc["travel"])
        runs = tuple(
            BusRun(
                r["id"],
                tuple(Stop(st["station"], st["arrival_s"], st["demand_pods"]) for st in r["stops"]),
            )
            for r in doc["runs"]
        )
        return Instance(stations, travel, runs, doc["horizon_s"])


def default_horizon(runs: list[BusRun] | tuple[BusRun, ...], dt: int) -> int:
    """Smallest dt multiple covering the latest run end plus one step."""
    latest = max((run.end for run in runs), default=0)
    return math.ceil(latest / dt) * dt + dt


def snap_times(start: int, end: int, dt: int) -> tuple[int, int]:
    """Grid-aligned bounds around a continuous service span.

    The snapped window is at least one step wide: a zero-width window would
    let a single-instant route's releaser feed its own (or a twin's)
    requester through one standby node, satisfying flow conservation with a
    phantom pod. Strictly positive width forces every served route to
    occupy a real pod for at least one step.
    """
    t_lo = (start // dt) * dt
    t_hi = max(math.ceil(end / dt) * dt, t_lo + dt)
    return t_lo, t_hi


def snap_window(route: PodRoute, grid: TimeGrid) -> tuple[int, int]:
    """Map a route's continuous service span to grid-aligned step seconds."""
    t_lo, t_hi = snap_times(route.start_time, route.end_time, grid.dt)
    if route.start_time < 0 or t_hi > grid.horizon:
        raise InstanceError(
            f"route {route.label} window [{route.start_time}, {route.end_time}] "
            f"exceeds horizon {grid.horizon}"
        )
    return t_lo, t_hi


def effective_travel_time(tau_ss: int, grid: TimeGrid) -> int:
    """Round a continuous travel time up to a whole number of steps."""
    if tau_ss < 0:
        raise ValueError("travel time must be non-negative")
    return math.ceil(tau_ss / grid.dt) * grid.dt


class InstanceError(Exception):
    """Raised when input data cannot form a coherent problem instance."""


@dataclass(frozen=True)
class Violation:
    where: str
    rule: str

    def __str__(self) -> str:
        return f"{self.where}: {self.rule}"


def validate_instance(inst: Instance) -> list[Violation]:
    """Check every type invariant; violations are data, not faults."""
    out: list[Violation] = []
    n = inst.n_stations
    ids = [s.id for s in inst.stations]
    if ids != list(range(n)):
        out.append(Violation("stations", "ids must be dense 0..n-1"))
    labels = [s.label for s in inst.stations]
    if len(set(labels)) != len(labels):
        out.append(Violation("stations", "labels must be unique"))
    if inst.travel.n != n or any(len(row) != n for row in inst.travel.tau):
        out.append(Violation("travel", f"matrix must be {n}x{n}"))
    else:
        for i in range(n):
            if inst.travel(i, i) != 0:
                out.append(Violation(f"travel[{i}][{i}]", "diagonal must be zero"))
            for j in range(n):
                if i != j and inst.travel(i, j) <= 0:
                    out.append(Violation(f"travel[{i}][{j}]", "off-diagonal must be positive"))
    for run in inst.runs:
        if not run.stops:
            out.append(Violation(f"run {run.id}", "must have at least one stop"))
            continue
        for k, stop in enumerate(run.stops):
            if not (0 <= stop.station < n):
                out.append(Violation(f"run {run.id} stop {k}", f"unknown station {stop.station}"))
            if stop.demand < 0:
                out.append(Violation(f"run {run.id} stop {k}", "demand must be non-negative"))
        times = [s.arrival for s in run.stops]
        if any(b <= a for a, b in zip(times, times[1:])):
            out.append(Violation(f"run {run.id}", "arrival times must be strictly increasing"))
        if times[0] < 0 or times[-1] > inst.horizon:
            out.append(Violation(f"run {run.id}", "run must fit within [0, horizon]"))
    return out
