"""Classifiers that bin raw measurements into reporting classes.

The thresholds are fixed policy, not tunables: changing them silently
would make reports from different fleet versions incomparable.
"""

from __future__ import annotations

import math
from enum import Enum

from amigobench.domain.records import ResolverClass, parse_ipv4
from amigobench.errors import ValidationError

# Public resolver anycast addresses attributed to Google DNS.
GOOGLE_DNS_ADDRESSES = frozenset({"8.8.8.8", "8.8.4.4"})

SPEED_SLOW_MAX_MBPS = 15.0  # inclusive
SPEED_FAST_MIN_MBPS = 30.0  # inclusive

LATENCY_EXCEPTIONAL_MAX_MS = 20.0
LATENCY_GOOD_MIN_MS = 50.0
LATENCY_GOOD_MAX_MS = 100.0
LATENCY_LESS_DESIRABLE_MIN_MS = 150.0

SPEED_INDEX_FAST_MAX_S = 3.4
SPEED_INDEX_SLOW_MIN_S = 5.8


class SpeedClass(str, Enum):
    SLOW = "slow"
    AVERAGE = "average"
    FAST = "fast"


class LatencyClass(str, Enum):
    EXCEPTIONAL = "exceptional"
    GOOD_TO_AVERAGE = "good_to_average"
    LESS_DESIRABLE = "less_desirable"
    UNCLASSIFIED = "unclassified"


class SpeedIndexClass(str, Enum):
    FAST = "fast"
    MODERATE = "moderate"
    SLOW = "slow"


class CacheStatus(str, Enum):
    HIT = "hit"
    MISS = "miss"
    UNKNOWN = "unknown"


def _require_finite_nonneg(value: float, name: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ValidationError(f"{name}: expected a number")
    value = float(value)
    if math.isnan(value) or math.isinf(value) or value < 0:
        raise ValidationError(f"{name}: must be finite and non-negative")
    return value


def classify_speed(mbps: float) -> SpeedClass:
    """Bin a throughput sample: slow <= 15 Mbps, fast >= 30 Mbps."""
    mbps = _require_finite_nonneg(mbps, "mbps")
    if mbps <= SPEED_SLOW_MAX_MBPS:
        return SpeedClass.SLOW
    if mbps < SPEED_FAST_MIN_MBPS:
        return SpeedClass.AVERAGE
    return SpeedClass.FAST


def classify_latency(rtt_ms: float) -> LatencyClass:
    """Bin an RTT sample; gaps between the named bands are unclassified."""
    rtt_ms = _require_finite_nonneg(rtt_ms, "rtt_ms")
    if rtt_ms <= LATENCY_EXCEPTIONAL_MAX_MS:
        return LatencyClass.EXCEPTIONAL
    if LATENCY_GOOD_MIN_MS <= rtt_ms <= LATENCY_GOOD_MAX_MS:
        return LatencyClass.GOOD_TO_AVERAGE
    if rtt_ms >= LATENCY_LESS_DESIRABLE_MIN_MS:
        return LatencyClass.LESS_DESIRABLE
    return LatencyClass.UNCLASSIFIED


def classify_speed_index(seconds: float) -> SpeedIndexClass:
    """Bin a rendering speed-index sample: fast <= 3.4 s, slow >= 5.8 s."""
    seconds = _require_finite_nonneg(seconds, "seconds")
    if seconds <= SPEED_INDEX_FAST_MAX_S:
        return SpeedIndexClass.FAST
    if seconds < SPEED_INDEX_SLOW_MIN_S:
        return SpeedIndexClass.MODERATE
    return SpeedIndexClass.SLOW


def classify_resolver(address: str) -> ResolverClass:
    """Attribute a resolver address to Google DNS or the operator.

    Raises:
        ValidationError: if the address is not valid IPv4.
    """
    canonical = parse_ipv4(address)
    if canonical in GOOGLE_DNS_ADDRESSES:
        return ResolverClass.GOOGLE_DNS
    return ResolverClass.OPERATOR_LOCAL
