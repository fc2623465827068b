"""Core data model: currency, grids, snapping, validation, serialization."""

from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from podplan.core import (
    USD,
    CostConfig,
    Instance,
    InstanceError,
    PodRoute,
    Station,
    Stop,
    TimeGrid,
    TravelTimeMatrix,
    BusRun,
    default_horizon,
    effective_travel_time,
    per_minute_rate,
    snap_times,
    snap_window,
    units_to_usd_str,
    usd_amount,
    validate_instance,
)


class TestCurrency:
    def test_usd_amount_is_exact(self):
        assert usd_amount("13.7") == 137 * USD // 10
        assert usd_amount(1) == USD

    def test_per_minute_rate_divides_evenly(self):
        # 0.03 USD/min at USD=60_000_000 units is exactly 30_000 units/s.
        assert per_minute_rate("0.03") == 30_000
        assert per_minute_rate("0.01") * 60 == usd_amount("0.01")

    def test_round_trip_formatting(self):
        assert units_to_usd_str(usd_amount("13.7"), places=2) == "13.70"
        assert units_to_usd_str(30_000 * 60, places=2) == "0.03"

    def test_cost_config_from_usd(self):
        c = CostConfig.from_usd("13.7", "0.03", ["0.01", "0.08"], 2)
        assert c.fleet == usd_amount("13.7")
        assert c.move == per_minute_rate("0.03")
        assert c.park == (per_minute_rate("0.01"), per_minute_rate("0.08"))

    def test_cost_config_park_list_must_match(self):
        with pytest.raises(ValueError):
            CostConfig.from_usd("1", "0", ["0.01"], 2)


class TestTimeGrid:
    def test_steps(self):
        assert TimeGrid(60, 600).steps == 11

    def test_horizon_must_divide(self):
        with pytest.raises(ValueError):
            TimeGrid(60, 601)

    def test_dt_positive(self):
        with pytest.raises(ValueError):
            TimeGrid(0, 600)


class TestSnap:
    def test_interior_route(self):
        assert snap_times(70, 250, 60) == (60, 300)

    def test_aligned_route_unchanged(self):
        assert snap_times(60, 300, 60) == (60, 300)

    def test_minimum_width(self):
        # A single-instant span still occupies one full step.
        assert snap_times(120, 120, 60) == (120, 180)
        assert snap_times(125, 125, 60) == (120, 180)

    @given(
        start=st.integers(min_value=0, max_value=5000),
        dur=st.integers(min_value=0, max_value=5000),
        dt=st.sampled_from([1, 5, 15, 30, 60]),
    )
    def test_contains_span_and_positive_width(self, start, dur, dt):
        lo, hi = snap_times(start, start + dur, dt)
        assert lo <= start and start + dur <= hi
        assert hi - lo >= dt
        assert lo % dt == 0 and hi % dt == 0

    @given(
        start=st.integers(min_value=0, max_value=5000),
        dur=st.integers(min_value=0, max_value=5000),
    )
    def test_refinement_nests(self, start, dur):
        # Windows shrink (never grow) when the grid is refined along a
        # divisor chain, which is what makes objectives monotone in dt.
        spans = [snap_times(start, start + dur, dt) for dt in (60, 30, 15, 5, 1)]
        for (clo, chi), (flo, fhi) in zip(spans, spans[1:]):
            assert clo <= flo and fhi <= chi

    def test_snap_window_respects_horizon(self):
        route = PodRoute(0, 0, ((0, 550), (1, 605)))
        with pytest.raises(InstanceError):
            snap_window(route, TimeGrid(60, 600))

    def test_effective_travel_time(self):
        grid = TimeGrid(60, 600)
        assert effective_travel_time(0, grid) == 0
        assert effective_travel_time(1, grid) == 60
        assert effective_travel_time(60, grid) == 60
        assert effective_travel_time(61, grid) == 120


class TestRoutes:
    def test_route_endpoints(self):
        r = PodRoute(2, 1, ((0, 10), (3, 50)))
        assert (r.start_station, r.end_station) == (0, 3)
        assert (r.start_time, r.end_time) == (10, 50)
        assert r.label == "2.1"

    def test_visits_must_increase(self):
        with pytest.raises(ValueError):
            PodRoute(0, 0, ((0, 10), (1, 10)))

    def test_route_needs_visits(self):
        with pytest.raises(ValueError):
            PodRoute(0, 0, ())


class TestInstance:
    def test_json_round_trip(self, paper_instance):
        again = Instance.from_json(paper_instance.to_json())
        assert again == paper_instance

    def test_json_is_deterministic(self, paper_instance):
        assert paper_instance.to_json() == paper_instance.to_json()

    def test_grid_pads_horizon(self, small_instance):
        assert small_instance.grid(60).horizon == 600
        assert small_instance.grid(7).horizon == 602

    def test_default_horizon(self, small_instance):
        assert default_horizon(list(small_instance.runs), 60) == 660

    def test_validate_clean(self, paper_instance, small_instance):
        assert validate_instance(paper_instance) == []
        assert validate_instance(small_instance) == []

    def test_validate_flags_bad_station_ref(self):
        stations = (Station(0, "a"),)
        travel = TravelTimeMatrix.from_lists([[0]])
        runs = (BusRun(0, (Stop(5, 0, 1),)),)
        out = validate_instance(Instance(stations, travel, runs, 600))
        assert any("unknown station" in v.rule for v in out)

    def test_validate_flags_duplicate_labels(self):
        stations = (Station(0, "a"), Station(1, "a"))
        travel = TravelTimeMatrix.from_lists([[0, 10], [10, 0]])
        runs = (BusRun(0, (Stop(0, 0, 1), Stop(1, 60, 1))),)
        out = validate_instance(Instance(stations, travel, runs, 600))
        assert any("label" in v.rule for v in out)
