"""Record types shared by the server, agents, probes, and analysis.

All types here are immutable values. Components communicate by exchanging
them (or their JSON forms, see `amigobench.domain.codec`); nothing in this
module performs IO.

Conventions: durations are seconds, sizes are bytes, rates are Mbps, and
timestamps are timezone-aware UTC datetimes unless a field name says
otherwise (`*_ms`, `*_pct`).
"""

from __future__ import annotations

import ipaddress
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping, Optional, Union

from amigobench.errors import ValidationError


class Connectivity(str, Enum):
    WIFI = "wifi"
    MOBILE = "mobile"
    BOTH = "both"
    NONE = "none"


class Continent(str, Enum):
    EUROPE = "europe"
    AUSTRALIA = "australia"
    ASIA = "asia"
    CENTRAL_SOUTH_AMERICA = "central_south_america"
    AFRICA = "africa"
    OTHER = "other"


class InstructionKind(str, Enum):
    PAUSE = "pause"
    RESUME = "resume"
    RUN_NOW = "run_now"
    OPEN_TUNNEL = "open_tunnel"
    UPDATE_CONFIG = "update_config"


class InstructionState(str, Enum):
    PENDING = "pending"
    DELIVERED = "delivered"
    ACKED = "acked"
    FAILED = "failed"


# Terminal states admit no further transitions.
_STATE_ORDER = {
    InstructionState.PENDING: 0,
    InstructionState.DELIVERED: 1,
    InstructionState.ACKED: 2,
    InstructionState.FAILED: 2,
}


class ExperimentKind(str, Enum):
    SPEEDTEST = "speedtest"
    LATENCY = "latency"
    DNS = "dns"
    CDN = "cdn"
    WEB = "web"
    YOUTUBE = "youtube"


# Kinds an agent can schedule. Youtube series are imported from player
# logs, never scheduled.
SCHEDULABLE_KINDS = frozenset(
    {
        ExperimentKind.SPEEDTEST,
        ExperimentKind.LATENCY,
        ExperimentKind.DNS,
        ExperimentKind.CDN,
        ExperimentKind.WEB,
    }
)

# Kinds whose params must name at least one target.
TARGETED_KINDS = frozenset(
    {
        ExperimentKind.LATENCY,
        ExperimentKind.DNS,
        ExperimentKind.CDN,
        ExperimentKind.WEB,
    }
)


class ResolverClass(str, Enum):
    GOOGLE_DNS = "google_dns"
    OPERATOR_LOCAL = "operator_local"


class Resolution(str, Enum):
    R144 = "r144"
    R240 = "r240"
    R360 = "r360"
    R480 = "r480"
    R720 = "r720"
    R1080 = "r1080"


class ConnectivityRule(str, Enum):
    MOBILE_ONLY = "mobile_only"
    ANY = "any"


def new_id() -> str:
    """Return a fresh 128-bit hex identifier."""
    return uuid.uuid4().hex


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _require_utc(value: datetime, name: str) -> None:
    _require(isinstance(value, datetime), f"{name}: expected datetime")
    _require(value.tzinfo is not None, f"{name}: naive datetime not allowed")


@dataclass(frozen=True)
class GpsFix:
    """Device position, WGS84 degrees."""

    lat: float
    lon: float


@dataclass(frozen=True)
class DeviceStatus:
    """One periodic health sample reported by an agent.

    battery_pct is None when the battery sensor could not be read; gate
    checks treat an unknown battery level as below the floor.
    """

    device_id: str
    timestamp: datetime
    battery_pct: Optional[int]
    connectivity: Connectivity
    operator_name: str
    network_id: str
    gps: Optional[GpsFix]
    data_used_today: int
    agent_version: str


def validate_device_status(status: DeviceStatus) -> None:
    """Check field-level constraints on a single status sample.

    Raises:
        ValidationError: naming the first offending field.
    """
    _require(bool(status.device_id), "device_id: must be non-empty")
    _require_utc(status.timestamp, "timestamp")
    if status.battery_pct is not None:
        _require(0 <= status.battery_pct <= 100, "battery_pct: outside [0, 100]")
    _require(
        isinstance(status.connectivity, Connectivity),
        "connectivity: unknown value",
    )
    _require(status.data_used_today >= 0, "data_used_today: negative")
    if status.gps is not None:
        _require(-90.0 <= status.gps.lat <= 90.0, "gps.lat: outside [-90, 90]")
        _require(-180.0 <= status.gps.lon <= 180.0, "gps.lon: outside [-180, 180]")
    _require(bool(status.agent_version), "agent_version: must be non-empty")


# Status report cadence; a device is stale after three missed reports.
REPORT_INTERVAL_S = 300.0


@dataclass(frozen=True)
class ScheduleRule:
    """Gating policy for one experiment.

    interval is seconds between runs; daily_data_cap is bytes per UTC day.
    Defaults follow the fleet policy: every 30 minutes, mobile connectivity
    only, 15% battery floor, 4 GiB/day budget.
    """

    interval: float = 1800.0
    connectivity_required: ConnectivityRule = ConnectivityRule.MOBILE_ONLY
    battery_floor_pct: int = 15
    daily_data_cap: int = 4 * 2**30


def validate_schedule_rule(rule: ScheduleRule) -> None:
    _require(rule.interval > 0, "schedule.interval: must be positive")
    _require(
        isinstance(rule.connectivity_required, ConnectivityRule),
        "schedule.connectivity_required: unknown value",
    )
    _require(
        0 <= rule.battery_floor_pct <= 100,
        "schedule.battery_floor_pct: outside [0, 100]",
    )
    _require(rule.daily_data_cap >= 0, "schedule.daily_data_cap: negative")


@dataclass(frozen=True)
class ExperimentSpec:
    """A schedulable experiment: what to measure and how often."""

    id: str
    kind: ExperimentKind
    params: Mapping[str, object]
    schedule: ScheduleRule = field(default_factory=ScheduleRule)


def validate_experiment_spec(spec: ExperimentSpec) -> None:
    """Check that a spec is well formed and schedulable.

    Raises:
        ValidationError: for empty ids, unschedulable kinds, missing
            targets, or a bad schedule rule.
    """
    _require(bool(spec.id), "experiment.id: must be non-empty")
    _require(
        spec.kind in SCHEDULABLE_KINDS,
        f"experiment.kind: {getattr(spec.kind, 'value', spec.kind)} is not schedulable",
    )
    if spec.kind in TARGETED_KINDS:
        targets = spec.params.get("targets")
        _require(
            isinstance(targets, (list, tuple)) and len(targets) > 0,
            f"experiment.params.targets: {spec.kind.value} needs at least one target",
        )
    validate_schedule_rule(spec.schedule)


@dataclass(frozen=True)
class Instruction:
    """A control-plane command addressed to one device.

    Lifecycle: pending -> delivered -> acked | failed. The server owns the
    state; `outcome` is the device-reported detail and is present exactly
    in the terminal states.
    """

    id: str
    device_id: str
    created_at: datetime
    kind: InstructionKind
    params: Mapping[str, object]
    state: InstructionState = InstructionState.PENDING
    outcome: Optional[str] = None


def instruction_transition_ok(old: InstructionState, new: InstructionState) -> bool:
    """Whether moving old -> new respects the one-way lifecycle."""
    if old in (InstructionState.ACKED, InstructionState.FAILED):
        return False
    return _STATE_ORDER[new] == _STATE_ORDER[old] + 1


_INSTRUCTION_PARAM_CHECKS = {
    InstructionKind.PAUSE: ("duration",),
    InstructionKind.RESUME: (),
    InstructionKind.RUN_NOW: ("experiment_id",),
    InstructionKind.OPEN_TUNNEL: ("host", "port"),
    InstructionKind.UPDATE_CONFIG: ("key", "value"),
}


def validate_instruction(instruction: Instruction) -> None:
    """Check id, addressing, kind-specific params, and state/outcome pairing."""
    _require(bool(instruction.id), "instruction.id: must be non-empty")
    _require(bool(instruction.device_id), "instruction.device_id: must be non-empty")
    _require_utc(instruction.created_at, "instruction.created_at")
    _require(
        isinstance(instruction.kind, InstructionKind), "instruction.kind: unknown value"
    )
    for key in _INSTRUCTION_PARAM_CHECKS[instruction.kind]:
        _require(
            key in instruction.params,
            f"instruction.params.{key}: required for kind {instruction.kind.value}",
        )
    if instruction.kind == InstructionKind.PAUSE:
        duration = instruction.params["duration"]
        _require(
            isinstance(duration, (int, float)) and duration > 0,
            "instruction.params.duration: must be a positive number of seconds",
        )
    terminal = instruction.state in (InstructionState.ACKED, InstructionState.FAILED)
    _require(
        (instruction.outcome is not None) == terminal,
        "instruction.outcome: present exactly in terminal states",
    )


@dataclass(frozen=True)
class SpeedtestResult:
    """Bulk TCP throughput against the capped test server.

    note carries quality flags (stalled transfer, duration shortfall); a
    flagged result is still a measurement.
    """

    down_mbps: float
    up_mbps: float
    bytes_down: int
    bytes_up: int
    duration_s: float
    note: Optional[str] = None


@dataclass(frozen=True)
class HopStat:
    """Per-hop summary from the hop-reveal protocol, hop_index is 1-based."""

    hop_index: int
    address: str
    sent: int
    lost: int
    avg_rtt_ms: float
    best_rtt_ms: float
    worst_rtt_ms: float


@dataclass(frozen=True)
class LatencyResult:
    """Path latency to one target.

    complete is False when the walk never reached a terminal hop; such
    results keep whatever hops were observed but carry no terminal RTT.
    """

    target: str
    hops: tuple[HopStat, ...]
    hop_count: int
    final_avg_rtt_ms: float
    complete: bool = True


@dataclass(frozen=True)
class DnsResult:
    """One lookup against one resolver."""

    domain: str
    resolver_ip: str
    resolver_class: ResolverClass
    lookup_ms: float
    success: bool


@dataclass(frozen=True)
class CdnResult:
    """One object fetch from a CDN edge, with cache-status attribution."""

    url: str
    cdn_name: str
    http_status: int
    shield_status: "CacheStatus"
    edge_status: "CacheStatus"
    total_ms: float
    bytes: int
    error: Optional[str] = None


@dataclass(frozen=True)
class WebResult:
    """Phase-timed page fetch.

    speed_index_s is imported from an external renderer, never computed
    here; failed_phase names the phase that timed out or was refused.
    """

    url: str
    dns_ms: float
    connect_ms: float
    ttfb_ms: float
    total_ms: float
    bytes: int
    speed_index_s: Optional[float] = None
    failed_phase: Optional[str] = None


@dataclass(frozen=True)
class YoutubeSample:
    """One stats-for-nerds sample from a playback session."""

    timestamp: datetime
    resolution: Resolution
    buffer_health_s: float
    dropped_frames: int


@dataclass(frozen=True)
class YoutubeStatSeries:
    """Time-ordered playback samples from one session."""

    samples: tuple[YoutubeSample, ...]


Payload = Union[
    SpeedtestResult,
    LatencyResult,
    DnsResult,
    CdnResult,
    WebResult,
    YoutubeStatSeries,
]

PAYLOAD_TYPES: dict[ExperimentKind, type] = {
    ExperimentKind.SPEEDTEST: SpeedtestResult,
    ExperimentKind.LATENCY: LatencyResult,
    ExperimentKind.DNS: DnsResult,
    ExperimentKind.CDN: CdnResult,
    ExperimentKind.WEB: WebResult,
    ExperimentKind.YOUTUBE: YoutubeStatSeries,
}


@dataclass(frozen=True)
class MeasurementRecord:
    """One measurement outcome, self-describing and idempotent by record_id."""

    record_id: str
    device_id: str
    network_id: str
    experiment_kind: ExperimentKind
    timestamp: datetime
    payload: Payload


def validate_record(record: MeasurementRecord) -> None:
    """Check identity fields and that the payload variant matches the kind.

    Raises:
        ValidationError: naming the offending field.
    """
    _require(bool(record.record_id), "record_id: must be non-empty")
    _require(bool(record.device_id), "device_id: must be non-empty")
    _require(bool(record.network_id), "network_id: must be non-empty")
    _require_utc(record.timestamp, "timestamp")
    expected = PAYLOAD_TYPES.get(record.experiment_kind)
    _require(expected is not None, "experiment_kind: unknown value")
    _require(
        isinstance(record.payload, expected),
        f"payload: expected {expected.__name__} for kind "
        f"{record.experiment_kind.value}, got {type(record.payload).__name__}",
    )
    if isinstance(record.payload, LatencyResult):
        payload = record.payload
        _require(
            payload.hop_count == len(payload.hops),
            "payload.hop_count: must equal len(hops)",
        )
        if payload.complete and payload.hops:
            _require(
                payload.final_avg_rtt_ms == payload.hops[-1].avg_rtt_ms,
                "payload.final_avg_rtt_ms: must equal the last hop average",
            )
    if isinstance(record.payload, DnsResult):
        _require(
            isinstance(record.payload.resolver_class, ResolverClass),
            "payload.resolver_class: unknown value",
        )


@dataclass(frozen=True)
class NetworkInfo:
    """Registry row mapping a network to its operator and geography."""

    operator_name: str
    country: str
    continent: Continent


@dataclass(frozen=True)
class NetworkRegistry:
    """Lookup table from network_id to operator metadata.

    Treated as immutable; build a new registry instead of mutating entries.
    """

    entries: Mapping[str, NetworkInfo]

    def lookup(self, network_id: str) -> Optional[NetworkInfo]:
        return self.entries.get(network_id)


def parse_ipv4(address: str) -> str:
    """Return the canonical form of an IPv4 address.

    Raises:
        ValidationError: if the address is not syntactically valid IPv4.
    """
    try:
        return str(ipaddress.IPv4Address(address))
    except (ipaddress.AddressValueError, ValueError) as exc:
        raise ValidationError(f"resolver_ip: {address!r} is not IPv4") from exc


def utc_now() -> datetime:
    return datetime.now(timezone.utc)
