"""GTFS feed ingestion and occupancy-snapshot demand estimation."""

from __future__ import annotations

import io
import shutil
from pathlib import Path

import pytest

from podplan.core import validate_instance
from podplan.gtfs import (
    EXCLUDED,
    NEIGHBOR_FILLED,
    OBSERVED,
    GtfsError,
    build_instance,
    build_travel_matrix,
    estimate_demand,
    haversine_m,
    parse_static_gtfs,
    read_snapshots,
)

DATA = Path(__file__).parent / "data" / "gtfs"
FEED = DATA / "feed"


@pytest.fixture(scope="module")
def parsed():
    return parse_static_gtfs(FEED, "WK")


@pytest.fixture(scope="module")
def profile(parsed):
    stops, trips = parsed
    days = [read_snapshots(DATA / "day1.ndjson"), read_snapshots(DATA / "day2.ndjson")]
    with pytest.warns(UserWarning, match="unknown trip"):
        return estimate_demand(days, trips, stops)


class TestStaticParsing:
    def test_service_day_selection(self, parsed):
        stops, trips = parsed
        assert [t.trip_id for t in trips] == ["T1", "T2", "T3", "T4", "T5", "T6", "T7"]
        # Saturday-only T8 is dropped, and with it the stop only it visits.
        assert [s.stop_id for s in stops] == ["SA", "SB", "SC", "SD", "SE", "SF", "SG", "SH", "SI"]

    def test_times_and_order(self, parsed):
        _, trips = parsed
        t1 = next(t for t in trips if t.trip_id == "T1")
        assert t1.stops == (("SA", 28800), ("SB", 28980), ("SC", 29160))
        t3 = next(t for t in trips if t.trip_id == "T3")
        assert [sid for sid, _ in t3.stops] == ["SC", "SB", "SA"]

    def test_route_allowlist(self):
        _, trips = parse_static_gtfs(FEED, "WK", route_allowlist={"R2"})
        assert [t.trip_id for t in trips] == ["T4", "T5", "T6"]

    def test_missing_table(self, tmp_path):
        broken = tmp_path / "feed"
        shutil.copytree(FEED, broken)
        (broken / "calendar.txt").unlink()
        with pytest.raises(GtfsError, match="calendar"):
            parse_static_gtfs(broken, "WK")

    def test_missing_column(self, tmp_path):
        broken = tmp_path / "feed"
        shutil.copytree(FEED, broken)
        text = (broken / "trips.txt").read_text().replace("service_id", "svc")
        (broken / "trips.txt").write_text(text)
        with pytest.raises(GtfsError, match="service_id"):
            parse_static_gtfs(broken, "WK")


class TestDemandEstimation:
    def test_capacity_rounding(self, profile):
        # 16 riders fit one pod exactly; 17 need a second.
        assert profile.demand[("T1", 0)] == 1
        assert profile.demand[("T1", 1)] == 2  # max(16, 17) across days
        assert profile.demand[("T1", 2)] == 2

    def test_bound_covers_bracketing_stops(self, profile):
        # A hint at index 0 bounds both index 0 and index 1.
        assert profile.provenance[("T2", 0)] == OBSERVED
        assert profile.provenance[("T2", 1)] == OBSERVED

    def test_neighbor_fill(self, profile):
        assert profile.provenance[("T2", 2)] == NEIGHBOR_FILLED
        assert profile.demand[("T2", 2)] == 1  # filled from the 5-rider bound

    def test_equidistant_fill_takes_max(self, profile):
        # T4 stop 2 sits between bounds of 4 (stops 0-1) and 33 (stop 3).
        assert profile.provenance[("T4", 2)] == NEIGHBOR_FILLED
        assert profile.demand[("T4", 2)] == 3

    def test_unobserved_trip_excluded(self, profile):
        assert profile.excluded_trips == {"T7"}
        assert profile.provenance[("T7", 0)] == EXCLUDED

    def test_lat_lon_location(self, profile):
        # T3's only capture is a lat/lon fix nearest its middle stop.
        assert profile.demand[("T3", 1)] == 2
        assert profile.demand[("T3", 2)] == 2
        assert profile.provenance[("T3", 0)] == NEIGHBOR_FILLED

    def test_provenance_csv(self, profile):
        buf = io.StringIO()
        profile.write_provenance_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "trip_id,stop_index,demand_pods,provenance"
        assert len(lines) == 1 + 3 + 3 + 3 + 4 + 3 + 3 + 2  # header + stops per trip


class TestInstanceBuild:
    def test_fixture_instance_shape(self, parsed, profile):
        stops, trips = parsed
        inst = build_instance(stops, trips, profile)
        assert len(inst.runs) == 6  # T7 dropped
        assert inst.n_stations == 9
        assert validate_instance(inst) == []
        assert inst.horizon == max(r.end for r in inst.runs) + 60

    def test_station_labels_are_stop_ids(self, parsed, profile):
        stops, trips = parsed
        inst = build_instance(stops, trips, profile)
        assert [s.label for s in inst.stations] == [s.stop_id for s in stops]

    def test_travel_matrix_from_coordinates(self, parsed):
        stops, _ = parsed
        travel = build_travel_matrix(stops, speed_mph=15.0)
        d = haversine_m(stops[0].lat, stops[0].lon, stops[1].lat, stops[1].lon)
        assert travel(0, 0) == 0
        assert travel(0, 1) >= d / (15.0 * 0.44704)
        assert travel(0, 1) == travel(1, 0)
