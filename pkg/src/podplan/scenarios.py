"""Named cost scenarios.

Prices are USD: a one-off fleet charge per pod, a per-minute empty-movement
rate, and per-minute parking rates (uniform or per-station). S5 draws each
station's parking price uniformly from {0.01, ..., 0.08} step 0.01, seeded
per (seed, station id) so adding stations never reshuffles existing prices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import CostConfig, per_minute_rate, usd_amount

_S5_CHOICES = ["0.01", "0.02", "0.03", "0.04", "0.05", "0.06", "0.07", "0.08"]


@dataclass(frozen=True)
class Scenario:
    name: str
    fleet_usd: str
    move_per_min: str
    park_per_min: str  # "varied" = per-station S5 draw
    notes: str

    def costs(self, n_stations: int, seed: int = 0) -> CostConfig:
        if self.park_per_min == "varied":
            park = tuple(
                per_minute_rate(random.Random(seed * 1_000_003 + s).choice(_S5_CHOICES))
                for s in range(n_stations)
            )
        else:
            park = (per_minute_rate(self.park_per_min),) * n_stations
        return CostConfig(usd_amount(self.fleet_usd), per_minute_rate(self.move_per_min), park)


SCENARIOS = {
    "S1": Scenario("S1", "13.7", "0.03", "0.03", "baseline, all costs"),
    "S2": Scenario("S2", "13.7", "0", "0", "fleet cost only"),
    "S3": Scenario("S3", "0", "0.03", "0.03", "movement and parking only"),
    "S4": Scenario("S4", "13.7", "0", "0.03", "no movement cost"),
    "S5": Scenario("S5", "13.7", "0.03", "varied", "per-station parking prices"),
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name.upper()]
    except KeyError:
        raise ValueError(f"unknown scenario {name!r}; expected one of {sorted(SCENARIOS)}") from None
