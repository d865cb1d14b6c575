"""Deterministic behavior model shared by the live services and the demo.

The live simnet services sleep and stream for real; this model computes
the same quantities (delays, cache decisions, byte counts) as pure
functions of the scenario, so callers that cannot afford wall-clock time
(the demo's simulated days) produce measurements drawn from the same
distributions the live services would exhibit.
"""

from __future__ import annotations

import threading
from collections import defaultdict
from typing import Optional

from amigobench.domain.classify import CacheStatus
from amigobench.errors import ValidationError
from amigobench.simnet.prng import keyed_uniform
from amigobench.simnet.scenario import Asset, Scenario

DNS_RCODE_OK = 0
DNS_RCODE_NXDOMAIN = 3


def render_cache_headers(shield: CacheStatus, edge: CacheStatus, style: str) -> dict:
    """Render (shield, edge) per the asset's header style."""
    token = {CacheStatus.HIT: "HIT", CacheStatus.MISS: "MISS"}
    if style == "cf":
        return {"cf-cache-status": token.get(edge, "DYNAMIC")}
    if style == "x_cache_single":
        return {"x-cache": token.get(edge, "NONE")}
    return {"x-cache": f"{token.get(shield, 'NONE')}, {token.get(edge, 'NONE')}"}


def cache_decision(
    asset: Asset, request_index: int, seed: int
) -> tuple[CacheStatus, CacheStatus, dict]:
    """Decide (shield, edge) status for one request and render headers.

    hit_ratio draws are keyed by (seed, asset path, request index), so
    the nth request for an asset decides the same way regardless of what
    other requests ran around it.
    """
    policy = asset.cache_policy
    if policy.mode == "always_hit":
        shield = edge = CacheStatus.HIT
    elif policy.mode == "always_miss":
        shield = edge = CacheStatus.MISS
    else:
        edge_draw = keyed_uniform(seed, "cache-edge", asset.path, request_index)
        shield_draw = keyed_uniform(seed, "cache-shield", asset.path, request_index)
        edge = CacheStatus.HIT if edge_draw < policy.ratio else CacheStatus.MISS
        shield = CacheStatus.HIT if shield_draw < policy.ratio else CacheStatus.MISS
    headers = render_cache_headers(shield, edge, policy.header_style)
    # Styles that carry no shield token report shield Unknown on parse.
    if policy.header_style in ("cf", "x_cache_single"):
        shield_reported = CacheStatus.UNKNOWN
    else:
        shield_reported = shield
    return shield_reported, edge, headers


class ServiceModel:
    """Scenario math plus per-key request counters.

    Thread-safe: counters are the only mutable state.
    """

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self._counters: dict[tuple, int] = defaultdict(int)
        self._lock = threading.Lock()

    def next_index(self, *key: object) -> int:
        with self._lock:
            index = self._counters[key]
            self._counters[key] = index + 1
            return index

    def hop_address(self, target_name: str, hop_index: int) -> str:
        for i, target in enumerate(self.scenario.targets):
            if target.name == target_name:
                return f"10.{i + 1}.{hop_index}.1"
        raise ValidationError(f"target: unknown {target_name!r}")

    def hop_response(
        self, target_name: str, hop_index: int
    ) -> tuple[float, str, bool]:
        """Return (delay_ms, address, terminal) for one hop request.

        Requests past the terminal hop clamp to it.
        """
        target = self.scenario.target(target_name)
        if target is None:
            raise ValidationError(f"target: unknown {target_name!r}")
        length = len(target.hop_cumulative_delays_ms)
        k = min(hop_index, length)
        if k < 1:
            raise ValidationError("hop_index: must be >= 1")
        index = self.next_index("hop", target_name, k)
        jitter = target.jitter_ms * keyed_uniform(
            self.scenario.seed, "hop", target_name, k, index
        )
        delay = target.hop_cumulative_delays_ms[k - 1] + jitter
        return delay, self.hop_address(target_name, k), k == length

    def dns_response(self, domain: str) -> tuple[float, int, Optional[str]]:
        """Return (delay_ms, rcode, address) for one lookup."""
        dns = self.scenario.dns
        domain = domain.lower().rstrip(".")
        index = self.next_index("dns", domain)
        jitter = 0.05 * dns.delay_ms * keyed_uniform(
            self.scenario.seed, "dns", domain, index
        )
        delay = dns.delay_ms + jitter
        if domain in dns.fail_domains or domain not in dns.records:
            return delay, DNS_RCODE_NXDOMAIN, None
        return delay, DNS_RCODE_OK, dns.records[domain]

    def asset_response(
        self, path: str
    ) -> tuple[Asset, CacheStatus, CacheStatus, dict, int]:
        """Return (asset, shield, edge, headers, request_index) for a GET."""
        asset = self.scenario.asset(path)
        if asset is None:
            raise ValidationError(f"asset: unknown {path!r}")
        index = self.next_index("asset", path)
        shield, edge, headers = cache_decision(asset, index, self.scenario.seed)
        return asset, shield, edge, headers, index

    def speed_bytes(self, direction: str, duration_s: float) -> int:
        """Bytes the capped link moves in duration_s, with mild jitter.

        The draw stays within [96%, 100%] of the cap, mirroring the
        slight undershoot a token bucket with discrete refills shows.
        """
        cap = (
            self.scenario.throughput.down_mbps
            if direction == "down"
            else self.scenario.throughput.up_mbps
        )
        index = self.next_index("speed", direction)
        undershoot = 0.04 * keyed_uniform(
            self.scenario.seed, "speed", direction, index
        )
        return int(cap * 1e6 / 8 * duration_s * (1 - undershoot))
