"""Deterministic scenario-driven mock network.

Serves the hop-reveal, throughput, DNS, and HTTP endpoints with
configured delays, bandwidth caps, and cache behavior so probes and the
full platform can be verified at desk scale. All randomness flows from
the scenario seed through a counter-based keyed PRNG, so identical
request orders give identical behavior.
"""

from amigobench.simnet.prng import keyed_u64, keyed_uniform
from amigobench.simnet.scenario import (
    Asset,
    CachePolicy,
    DnsConfig,
    Scenario,
    TargetPath,
    ThroughputConfig,
    default_scenario,
    load_scenario,
    load_scenario_document,
    scenario_from_dict,
    scenario_to_dict,
    validate_scenario,
    check_scenario,
)
from amigobench.simnet.shaping import TokenBucket
from amigobench.simnet.model import ServiceModel, cache_decision
from amigobench.simnet.services import SimnetHarness, serve

__all__ = [name for name in dir() if not name.startswith("_")]
