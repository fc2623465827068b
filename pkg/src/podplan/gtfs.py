"""Build problem instances from GTFS static feeds plus recorded occupancy
snapshots.

Static tables give the runs and scheduled arrival times for one service
day. Newline-delimited JSON snapshot files (one file group per capture day)
give onboard passenger counts; each count is a lower bound on the load at
both the preceding and the upcoming stop. Per stop we take the maximum
bound per day, then the maximum across days; stops a trip never showed a
count for are filled from the nearest observed neighbor (maximum of both
sides when equidistant); trips with no observations at all are excluded.
Pod demand is the passenger count divided by pod capacity, rounded up.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

from .core import BusRun, Instance, Station, Stop, TravelTimeMatrix

POD_CAPACITY = 16
DEFAULT_SPEED_MPH = 15.0
_MPH_TO_M_PER_S = 0.44704
_EARTH_RADIUS_M = 6_371_000.0

OBSERVED = "observed"
NEIGHBOR_FILLED = "neighbor-filled"
EXCLUDED = "excluded"


class GtfsError(Exception):
    """Malformed or incomplete feed data."""


@dataclass(frozen=True)
class GtfsStop:
    stop_id: str
    name: str
    lat: float
    lon: float


@dataclass(frozen=True)
class GtfsTrip:
    trip_id: str
    route_id: str
    stops: tuple[tuple[str, int], ...]  # (stop_id, arrival seconds from midnight)


@dataclass
class DemandProfile:
    """Per (trip, stop index): pod demand and how it was obtained."""

    demand: dict[tuple[str, int], int]
    provenance: dict[tuple[str, int], str]
    excluded_trips: set[str]

    def write_provenance_csv(self, out: TextIO) -> None:
        w = csv.writer(out)
        w.writerow(["trip_id", "stop_index", "demand_pods", "provenance"])
        for (trip, idx) in sorted(self.demand):
            w.writerow([trip, idx, self.demand[(trip, idx)], self.provenance[(trip, idx)]])


def _read_table(feed_dir: Path, name: str, required: list[str]) -> list[dict[str, str]]:
    path = feed_dir / f"{name}.txt"
    if not path.exists():
        raise GtfsError(f"missing mandatory table {name}.txt")
    with path.open(newline="", encoding="utf-8-sig") as f:
        reader = csv.DictReader(f)
        cols = reader.fieldnames or []
        for col in required:
            if col not in cols:
                raise GtfsError(f"table {name}.txt missing column {col}")
        return list(reader)


def _parse_gtfs_time(text: str) -> int:
    h, m, s = text.strip().split(":")
    return int(h) * 3600 + int(m) * 60 + int(s)


def parse_static_gtfs(
    feed_dir: str | Path,
    service_id: str,
    route_allowlist: Optional[set[str]] = None,
) -> tuple[list[GtfsStop], list[GtfsTrip]]:
    """One trip per service trip on the selected service day, arrival
    seconds from midnight; stops restricted to those the trips visit."""
    feed = Path(feed_dir)
    stops_rows = _read_table(feed, "stops", ["stop_id", "stop_name", "stop_lat", "stop_lon"])
    routes_rows = _read_table(feed, "routes", ["route_id"])
    trips_rows = _read_table(feed, "trips", ["trip_id", "route_id", "service_id"])
    st_rows = _read_table(feed, "stop_times", ["trip_id", "arrival_time", "stop_id", "stop_sequence"])
    _read_table(feed, "calendar", ["service_id"])

    known_routes = {r["route_id"] for r in routes_rows}
    stops_by_id = {
        r["stop_id"]: GtfsStop(r["stop_id"], r["stop_name"], float(r["stop_lat"]), float(r["stop_lon"]))
        for r in stops_rows
    }
    wanted: dict[str, str] = {}
    for t in trips_rows:
        if t["service_id"] != service_id:
            continue
        if t["route_id"] not in known_routes:
            raise GtfsError(f"trip {t['trip_id']} references unknown route {t['route_id']}")
        if route_allowlist is not None and t["route_id"] not in route_allowlist:
            continue
        wanted[t["trip_id"]] = t["route_id"]

    by_trip: dict[str, list[tuple[int, str, int]]] = {}
    for row in st_rows:
        trip = row["trip_id"]
        if trip not in wanted:
            continue
        if row["stop_id"] not in stops_by_id:
            raise GtfsError(f"stop_times references unknown stop {row['stop_id']}")
        by_trip.setdefault(trip, []).append(
            (int(row["stop_sequence"]), row["stop_id"], _parse_gtfs_time(row["arrival_time"]))
        )
    trips = []
    for trip_id in sorted(by_trip):
        seq = sorted(by_trip[trip_id])
        trips.append(
            GtfsTrip(trip_id, wanted[trip_id], tuple((stop_id, arr) for _, stop_id, arr in seq))
        )
    used = sorted({sid for t in trips for sid, _ in t.stops})
    return [stops_by_id[sid] for sid in used], trips


def read_snapshots(path: str | Path) -> list[dict]:
    """One capture per NDJSON line: {captured_at, trip_id, stop_seq_hint
    or lat/lon, occupancy}."""
    out = []
    with Path(path).open(encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def _locate(rec: dict, trip: GtfsTrip, stops_by_id: dict[str, GtfsStop]) -> Optional[int]:
    """Index of the stop the vehicle most recently passed (bracket start)."""
    if "stop_seq_hint" in rec:
        idx = int(rec["stop_seq_hint"])
        return idx if 0 <= idx < len(trip.stops) else None
    if "lat" in rec and "lon" in rec:
        best, best_d = None, None
        for i, (sid, _) in enumerate(trip.stops):
            s = stops_by_id[sid]
            d = haversine_m(rec["lat"], rec["lon"], s.lat, s.lon)
            if best_d is None or d < best_d:
                best, best_d = i, d
        return best
    return None


def estimate_demand(
    snapshot_days: list[list[dict]],
    trips: list[GtfsTrip],
    stops: list[GtfsStop],
    capacity: int = POD_CAPACITY,
) -> DemandProfile:
    """Aggregate NDJSON captures into per-stop pod demand.

    snapshot_days groups captures by service day; the cross-day rule takes
    the maximum of the per-day maxima.
    """
    by_id = {t.trip_id: t for t in trips}
    stops_by_id = {s.stop_id: s for s in stops}
    bound: dict[tuple[str, int], int] = {}
    for day in snapshot_days:
        day_bound: dict[tuple[str, int], int] = {}
        for rec in day:
            trip = by_id.get(rec.get("trip_id"))
            if trip is None:
                warnings.warn(f"snapshot references unknown trip {rec.get('trip_id')!r}; skipped")
                continue
            count = rec.get("occupancy")
            if count is None or count < 0:
                continue
            idx = _locate(rec, trip, stops_by_id)
            if idx is None:
                continue
            for k in (idx, min(idx + 1, len(trip.stops) - 1)):
                key = (trip.trip_id, k)
                if count > day_bound.get(key, -1):
                    day_bound[key] = count
        for key, v in day_bound.items():
            if v > bound.get(key, -1):
                bound[key] = v

    demand: dict[tuple[str, int], int] = {}
    provenance: dict[tuple[str, int], str] = {}
    excluded: set[str] = set()
    for trip in trips:
        observed: dict[int, int] = {}
        for i in range(len(trip.stops)):
            v = bound.get((trip.trip_id, i))
            if v is not None:
                observed[i] = v
        if not observed:
            excluded.add(trip.trip_id)
            for i in range(len(trip.stops)):
                demand[(trip.trip_id, i)] = 0
                provenance[(trip.trip_id, i)] = EXCLUDED
            continue
        for i in range(len(trip.stops)):
            if i in observed:
                count = observed[i]
                flag = OBSERVED
            else:
                count = _nearest_fill(observed, i)
                flag = NEIGHBOR_FILLED
            demand[(trip.trip_id, i)] = math.ceil(count / capacity)
            provenance[(trip.trip_id, i)] = flag
    return DemandProfile(demand, provenance, excluded)


def _nearest_fill(observed: dict[int, int], i: int) -> int:
    """Count from the nearest observed stop; max of both when equidistant."""
    best_d = None
    vals: list[int] = []
    for j, v in observed.items():
        d = abs(j - i)
        if best_d is None or d < best_d:
            best_d, vals = d, [v]
        elif d == best_d:
            vals.append(v)
    return max(vals)


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp, dl = p2 - p1, math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * _EARTH_RADIUS_M * math.asin(math.sqrt(a))


def build_travel_matrix(stops: list[GtfsStop], speed_mph: float = DEFAULT_SPEED_MPH) -> TravelTimeMatrix:
    """Great-circle distance over a constant average speed, in whole seconds."""
    speed = speed_mph * _MPH_TO_M_PER_S
    n = len(stops)
    rows = []
    for a in range(n):
        row = []
        for b in range(n):
            if a == b:
                row.append(0)
            else:
                d = haversine_m(stops[a].lat, stops[a].lon, stops[b].lat, stops[b].lon)
                row.append(max(1, math.ceil(d / speed)) if d > 0 else 0)
        rows.append(row)
    return TravelTimeMatrix.from_lists(rows)


def build_instance(
    stops: list[GtfsStop],
    trips: list[GtfsTrip],
    profile: DemandProfile,
    travel: Optional[TravelTimeMatrix] = None,
    speed_mph: float = DEFAULT_SPEED_MPH,
) -> Instance:
    """Canonical instance from feed data plus an estimated demand profile.

    Excluded trips are dropped; remaining duplicate-arrival stops within a
    trip are not expected from well-formed feeds and raise a feed error.
    """
    index = {s.stop_id: i for i, s in enumerate(stops)}
    if travel is None:
        travel = build_travel_matrix(stops, speed_mph)
    runs = []
    run_id = 0
    for trip in trips:
        if trip.trip_id in profile.excluded_trips:
            continue
        stops_out = tuple(
            Stop(index[sid], arr, profile.demand[(trip.trip_id, i)])
            for i, (sid, arr) in enumerate(trip.stops)
        )
        times = [s.arrival for s in stops_out]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise GtfsError(f"trip {trip.trip_id} has non-increasing arrival times")
        runs.append(BusRun(run_id, stops_out))
        run_id += 1
    stations = tuple(Station(i, s.stop_id) for i, s in enumerate(stops))
    latest = max((r.end for r in runs), default=0)
    return Instance(stations, travel, tuple(runs), latest + 60)
