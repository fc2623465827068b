"""Fleet sizing and empty-pod routing for modular transit over fixed bus
schedules."""

from .core import (
    BusRun,
    CostConfig,
    Instance,
    InstanceError,
    PodRoute,
    Station,
    Stop,
    TimeGrid,
    TravelTimeMatrix,
    USD,
    Violation,
    default_horizon,
    per_minute_rate,
    units_to_usd_str,
    usd_amount,
    validate_instance,
)
from .decompose import decompose_bus_run, decompose_instance
from .flow import (
    Action,
    InfeasibleNetworkError,
    PodItinerary,
    check_constraints,
    solve_min_cost_circulation,
)
from .hierarchical import CapPolicy, InfeasibleIntervalError
from .matching import build_compatibility_dag, fleet_size, max_matching, reconstruct_chains
from .methods import (
    HIERARCHICAL,
    HIERARCHICAL_CAPPED,
    INTEGRATED,
    METHODS,
    PlanResult,
    solve,
    solve_hierarchical,
    solve_integrated,
)
from .scenarios import SCENARIOS, Scenario, get_scenario
from .synth import gen_instance
from .tsn import build_integrated_network, build_interval_network

__all__ = [
    "Action",
    "BusRun",
    "CapPolicy",
    "CostConfig",
    "HIERARCHICAL",
    "HIERARCHICAL_CAPPED",
    "INTEGRATED",
    "METHODS",
    "InfeasibleIntervalError",
    "InfeasibleNetworkError",
    "Instance",
    "InstanceError",
    "PlanResult",
    "PodItinerary",
    "PodRoute",
    "SCENARIOS",
    "Scenario",
    "Station",
    "Stop",
    "TimeGrid",
    "TravelTimeMatrix",
    "USD",
    "Violation",
    "build_compatibility_dag",
    "build_integrated_network",
    "build_interval_network",
    "check_constraints",
    "decompose_bus_run",
    "decompose_instance",
    "default_horizon",
    "fleet_size",
    "gen_instance",
    "get_scenario",
    "max_matching",
    "per_minute_rate",
    "reconstruct_chains",
    "solve",
    "solve_hierarchical",
    "solve_integrated",
    "solve_min_cost_circulation",
    "units_to_usd_str",
    "usd_amount",
    "validate_instance",
]
