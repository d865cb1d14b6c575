"""JSON wire codec for the domain types.

Encoding rules: field names match the dataclass fields, enums encode as
their lower-snake string values, timestamps encode as RFC 3339 UTC with a
trailing Z, and optional fields are omitted when None. Decoding a dict
produced by the matching encoder returns an equal value (round trip).

Lines written by `dumps` are canonical: sorted keys, compact separators.
That keeps logs and reports byte-stable across runs.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional, TypeVar

from amigobench.domain.classify import CacheStatus
from amigobench.domain.records import (
    CdnResult,
    Connectivity,
    ConnectivityRule,
    DeviceStatus,
    DnsResult,
    ExperimentKind,
    ExperimentSpec,
    GpsFix,
    HopStat,
    Instruction,
    InstructionKind,
    InstructionState,
    LatencyResult,
    MeasurementRecord,
    Payload,
    Resolution,
    ResolverClass,
    ScheduleRule,
    SpeedtestResult,
    WebResult,
    YoutubeSample,
    YoutubeStatSeries,
)
from amigobench.errors import ParseError

E = TypeVar("E")


def rfc3339(value: datetime) -> str:
    """Format a timezone-aware datetime as RFC 3339 UTC with a Z suffix."""
    if value.tzinfo is None:
        raise ParseError("timestamp: naive datetime not allowed")
    utc = value.astimezone(timezone.utc)
    return utc.isoformat().replace("+00:00", "Z")


def parse_rfc3339(text: str) -> datetime:
    """Parse an RFC 3339 timestamp into a UTC datetime.

    Raises:
        ParseError: for naive or malformed timestamps.
    """
    if not isinstance(text, str):
        raise ParseError(f"timestamp: expected string, got {type(text).__name__}")
    candidate = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    try:
        parsed = datetime.fromisoformat(candidate)
    except ValueError as exc:
        raise ParseError(f"timestamp: malformed {text!r}") from exc
    if parsed.tzinfo is None:
        raise ParseError(f"timestamp: missing zone in {text!r}")
    return parsed.astimezone(timezone.utc)


def dumps(obj: Mapping[str, Any]) -> str:
    """Serialize a dict in the canonical single-line form."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _need(data: Mapping[str, Any], key: str) -> Any:
    if key not in data:
        raise ParseError(f"{key}: missing field")
    return data[key]


def _enum(cls: type[E], value: Any, name: str) -> E:
    try:
        return cls(value)
    except ValueError as exc:
        raise ParseError(f"{name}: unknown value {value!r}") from exc


def _drop_none(data: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in data.items() if v is not None}


def device_status_to_dict(status: DeviceStatus) -> dict[str, Any]:
    gps = None
    if status.gps is not None:
        gps = {"lat": status.gps.lat, "lon": status.gps.lon}
    return _drop_none(
        {
            "device_id": status.device_id,
            "timestamp": rfc3339(status.timestamp),
            "battery_pct": status.battery_pct,
            "connectivity": status.connectivity.value,
            "operator_name": status.operator_name,
            "network_id": status.network_id,
            "gps": gps,
            "data_used_today": status.data_used_today,
            "agent_version": status.agent_version,
        }
    )


def device_status_from_dict(data: Mapping[str, Any]) -> DeviceStatus:
    gps = data.get("gps")
    fix = None
    if gps is not None:
        fix = GpsFix(lat=float(_need(gps, "lat")), lon=float(_need(gps, "lon")))
    return DeviceStatus(
        device_id=_need(data, "device_id"),
        timestamp=parse_rfc3339(_need(data, "timestamp")),
        battery_pct=data.get("battery_pct"),
        connectivity=_enum(Connectivity, _need(data, "connectivity"), "connectivity"),
        operator_name=_need(data, "operator_name"),
        network_id=_need(data, "network_id"),
        gps=fix,
        data_used_today=int(_need(data, "data_used_today")),
        agent_version=_need(data, "agent_version"),
    )


def schedule_rule_to_dict(rule: ScheduleRule) -> dict[str, Any]:
    return {
        "interval": rule.interval,
        "connectivity_required": rule.connectivity_required.value,
        "battery_floor_pct": rule.battery_floor_pct,
        "daily_data_cap": rule.daily_data_cap,
    }


def schedule_rule_from_dict(data: Mapping[str, Any]) -> ScheduleRule:
    return ScheduleRule(
        interval=float(_need(data, "interval")),
        connectivity_required=_enum(
            ConnectivityRule,
            _need(data, "connectivity_required"),
            "connectivity_required",
        ),
        battery_floor_pct=int(_need(data, "battery_floor_pct")),
        daily_data_cap=int(_need(data, "daily_data_cap")),
    )


def experiment_spec_to_dict(spec: ExperimentSpec) -> dict[str, Any]:
    return {
        "id": spec.id,
        "kind": spec.kind.value,
        "params": dict(spec.params),
        "schedule": schedule_rule_to_dict(spec.schedule),
    }


def experiment_spec_from_dict(data: Mapping[str, Any]) -> ExperimentSpec:
    return ExperimentSpec(
        id=_need(data, "id"),
        kind=_enum(ExperimentKind, _need(data, "kind"), "kind"),
        params=dict(_need(data, "params")),
        schedule=schedule_rule_from_dict(_need(data, "schedule")),
    )


def instruction_to_dict(instruction: Instruction) -> dict[str, Any]:
    return _drop_none(
        {
            "id": instruction.id,
            "device_id": instruction.device_id,
            "created_at": rfc3339(instruction.created_at),
            "kind": instruction.kind.value,
            "params": dict(instruction.params),
            "state": instruction.state.value,
            "outcome": instruction.outcome,
        }
    )


def instruction_from_dict(data: Mapping[str, Any]) -> Instruction:
    return Instruction(
        id=_need(data, "id"),
        device_id=_need(data, "device_id"),
        created_at=parse_rfc3339(_need(data, "created_at")),
        kind=_enum(InstructionKind, _need(data, "kind"), "kind"),
        params=dict(_need(data, "params")),
        state=_enum(InstructionState, _need(data, "state"), "state"),
        outcome=data.get("outcome"),
    )


def _speedtest_to_dict(payload: SpeedtestResult) -> dict[str, Any]:
    return _drop_none(
        {
            "down_mbps": payload.down_mbps,
            "up_mbps": payload.up_mbps,
            "bytes_down": payload.bytes_down,
            "bytes_up": payload.bytes_up,
            "duration_s": payload.duration_s,
            "note": payload.note,
        }
    )


def _speedtest_from_dict(data: Mapping[str, Any]) -> SpeedtestResult:
    return SpeedtestResult(
        down_mbps=float(_need(data, "down_mbps")),
        up_mbps=float(_need(data, "up_mbps")),
        bytes_down=int(_need(data, "bytes_down")),
        bytes_up=int(_need(data, "bytes_up")),
        duration_s=float(_need(data, "duration_s")),
        note=data.get("note"),
    )


def _hop_to_dict(hop: HopStat) -> dict[str, Any]:
    return {
        "hop_index": hop.hop_index,
        "address": hop.address,
        "sent": hop.sent,
        "lost": hop.lost,
        "avg_rtt_ms": hop.avg_rtt_ms,
        "best_rtt_ms": hop.best_rtt_ms,
        "worst_rtt_ms": hop.worst_rtt_ms,
    }


def _hop_from_dict(data: Mapping[str, Any]) -> HopStat:
    return HopStat(
        hop_index=int(_need(data, "hop_index")),
        address=_need(data, "address"),
        sent=int(_need(data, "sent")),
        lost=int(_need(data, "lost")),
        avg_rtt_ms=float(_need(data, "avg_rtt_ms")),
        best_rtt_ms=float(_need(data, "best_rtt_ms")),
        worst_rtt_ms=float(_need(data, "worst_rtt_ms")),
    )


def _latency_to_dict(payload: LatencyResult) -> dict[str, Any]:
    return {
        "target": payload.target,
        "hops": [_hop_to_dict(h) for h in payload.hops],
        "hop_count": payload.hop_count,
        "final_avg_rtt_ms": payload.final_avg_rtt_ms,
        "complete": payload.complete,
    }


def _latency_from_dict(data: Mapping[str, Any]) -> LatencyResult:
    return LatencyResult(
        target=_need(data, "target"),
        hops=tuple(_hop_from_dict(h) for h in _need(data, "hops")),
        hop_count=int(_need(data, "hop_count")),
        final_avg_rtt_ms=float(_need(data, "final_avg_rtt_ms")),
        complete=bool(data.get("complete", True)),
    )


def _dns_to_dict(payload: DnsResult) -> dict[str, Any]:
    return {
        "domain": payload.domain,
        "resolver_ip": payload.resolver_ip,
        "resolver_class": payload.resolver_class.value,
        "lookup_ms": payload.lookup_ms,
        "success": payload.success,
    }


def _dns_from_dict(data: Mapping[str, Any]) -> DnsResult:
    return DnsResult(
        domain=_need(data, "domain"),
        resolver_ip=_need(data, "resolver_ip"),
        resolver_class=_enum(
            ResolverClass, _need(data, "resolver_class"), "resolver_class"
        ),
        lookup_ms=float(_need(data, "lookup_ms")),
        success=bool(_need(data, "success")),
    )


def _cdn_to_dict(payload: CdnResult) -> dict[str, Any]:
    return _drop_none(
        {
            "url": payload.url,
            "cdn_name": payload.cdn_name,
            "http_status": payload.http_status,
            "shield_status": payload.shield_status.value,
            "edge_status": payload.edge_status.value,
            "total_ms": payload.total_ms,
            "bytes": payload.bytes,
            "error": payload.error,
        }
    )


def _cdn_from_dict(data: Mapping[str, Any]) -> CdnResult:
    return CdnResult(
        url=_need(data, "url"),
        cdn_name=_need(data, "cdn_name"),
        http_status=int(_need(data, "http_status")),
        shield_status=_enum(CacheStatus, _need(data, "shield_status"), "shield_status"),
        edge_status=_enum(CacheStatus, _need(data, "edge_status"), "edge_status"),
        total_ms=float(_need(data, "total_ms")),
        bytes=int(_need(data, "bytes")),
        error=data.get("error"),
    )


def _web_to_dict(payload: WebResult) -> dict[str, Any]:
    return _drop_none(
        {
            "url": payload.url,
            "dns_ms": payload.dns_ms,
            "connect_ms": payload.connect_ms,
            "ttfb_ms": payload.ttfb_ms,
            "total_ms": payload.total_ms,
            "bytes": payload.bytes,
            "speed_index_s": payload.speed_index_s,
            "failed_phase": payload.failed_phase,
        }
    )


def _web_from_dict(data: Mapping[str, Any]) -> WebResult:
    return WebResult(
        url=_need(data, "url"),
        dns_ms=float(_need(data, "dns_ms")),
        connect_ms=float(_need(data, "connect_ms")),
        ttfb_ms=float(_need(data, "ttfb_ms")),
        total_ms=float(_need(data, "total_ms")),
        bytes=int(_need(data, "bytes")),
        speed_index_s=data.get("speed_index_s"),
        failed_phase=data.get("failed_phase"),
    )


def _youtube_to_dict(payload: YoutubeStatSeries) -> dict[str, Any]:
    return {
        "samples": [
            {
                "timestamp": rfc3339(s.timestamp),
                "resolution": s.resolution.value,
                "buffer_health_s": s.buffer_health_s,
                "dropped_frames": s.dropped_frames,
            }
            for s in payload.samples
        ]
    }


def _youtube_from_dict(data: Mapping[str, Any]) -> YoutubeStatSeries:
    samples = []
    for item in _need(data, "samples"):
        samples.append(
            YoutubeSample(
                timestamp=parse_rfc3339(_need(item, "timestamp")),
                resolution=_enum(Resolution, _need(item, "resolution"), "resolution"),
                buffer_health_s=float(_need(item, "buffer_health_s")),
                dropped_frames=int(_need(item, "dropped_frames")),
            )
        )
    return YoutubeStatSeries(samples=tuple(samples))


_PAYLOAD_CODECS: dict[ExperimentKind, tuple[Callable, Callable]] = {
    ExperimentKind.SPEEDTEST: (_speedtest_to_dict, _speedtest_from_dict),
    ExperimentKind.LATENCY: (_latency_to_dict, _latency_from_dict),
    ExperimentKind.DNS: (_dns_to_dict, _dns_from_dict),
    ExperimentKind.CDN: (_cdn_to_dict, _cdn_from_dict),
    ExperimentKind.WEB: (_web_to_dict, _web_from_dict),
    ExperimentKind.YOUTUBE: (_youtube_to_dict, _youtube_from_dict),
}


def payload_to_dict(kind: ExperimentKind, payload: Payload) -> dict[str, Any]:
    encode, _ = _PAYLOAD_CODECS[kind]
    return encode(payload)


def payload_from_dict(kind: ExperimentKind, data: Mapping[str, Any]) -> Payload:
    _, decode = _PAYLOAD_CODECS[kind]
    return decode(data)


def record_to_dict(record: MeasurementRecord) -> dict[str, Any]:
    return {
        "record_id": record.record_id,
        "device_id": record.device_id,
        "network_id": record.network_id,
        "experiment_kind": record.experiment_kind.value,
        "timestamp": rfc3339(record.timestamp),
        "payload": payload_to_dict(record.experiment_kind, record.payload),
    }


def record_from_dict(data: Mapping[str, Any]) -> MeasurementRecord:
    kind = _enum(ExperimentKind, _need(data, "experiment_kind"), "experiment_kind")
    return MeasurementRecord(
        record_id=_need(data, "record_id"),
        device_id=_need(data, "device_id"),
        network_id=_need(data, "network_id"),
        experiment_kind=kind,
        timestamp=parse_rfc3339(_need(data, "timestamp")),
        payload=payload_from_dict(kind, _need(data, "payload")),
    )


def iter_jsonl(path) -> Iterator[dict[str, Any]]:
    """Yield one dict per non-blank line of a JSONL file.

    Raises:
        ParseError: naming the line number of the first bad line.
    """
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                parsed = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: bad JSON ({exc.msg})") from exc
            if not isinstance(parsed, dict):
                raise ParseError(f"{path}:{lineno}: expected an object")
            yield parsed


def write_jsonl(path, rows: Iterable[Mapping[str, Any]]) -> int:
    """Write rows as canonical JSONL, returning the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(dumps(row))
            handle.write("\n")
            count += 1
    return count
