"""Synthetic instance generator properties."""

from __future__ import annotations

import math

import pytest

from podplan.decompose import decompose_instance
from podplan.matching import build_compatibility_dag
from podplan.core import validate_instance
from podplan.synth import gen_instance


class TestDeterminism:
    def test_same_seed_same_json(self):
        a = gen_instance(7, n_stations=5, n_runs=8)
        b = gen_instance(7, n_stations=5, n_runs=8)
        assert a.to_json() == b.to_json()

    def test_different_seed_differs(self):
        a = gen_instance(1, n_stations=5, n_runs=8)
        b = gen_instance(2, n_stations=5, n_runs=8)
        assert a.to_json() != b.to_json()


class TestValidity:
    @pytest.mark.parametrize("seed", range(10))
    def test_instances_validate_clean(self, seed):
        inst = gen_instance(seed, n_stations=5, n_runs=8)
        assert validate_instance(inst) == []

    @pytest.mark.parametrize("seed", range(5))
    def test_travel_matrix_is_metric(self, seed):
        inst = gen_instance(seed, n_stations=6, n_runs=1)
        n = inst.n_stations
        for a in range(n):
            for b in range(n):
                assert inst.travel(a, b) == inst.travel(b, a)
                for c in range(n):
                    # ceil() breaks exact triangle inequality by at most 2 s.
                    assert inst.travel(a, c) <= inst.travel(a, b) + inst.travel(b, c) + 2

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            gen_instance(0, n_stations=0, n_runs=1)
        with pytest.raises(ValueError):
            gen_instance(0, n_stations=3, n_runs=1, stops_per_run=(2, 5))

    def test_explicit_horizon_respected(self):
        inst = gen_instance(0, n_stations=4, n_runs=3, horizon_s=86_400)
        assert inst.horizon == 86_400


class TestDensity:
    def test_compatibility_graph_density(self):
        # Runs scattered over a long span make most earlier routes able to
        # reach most later ones, so the edge count approaches the all-pairs
        # half-count |R|^2/2.
        hits = 0
        total = 0
        for seed in range(10):
            inst = gen_instance(seed, n_stations=6, n_runs=12, span_s=14_400)
            routes = decompose_instance(inst)
            dag = build_compatibility_dag(routes, inst.travel)
            expect = len(routes) ** 2 / 2
            total += 1
            if abs(dag.n_edges - expect) <= 0.3 * expect:
                hits += 1
        assert hits >= 8  # within 30% of |R|^2/2 on nearly all seeds
