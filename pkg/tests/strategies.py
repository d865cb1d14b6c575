"""Hypothesis strategies for domain values, shared across test modules.

Generated values satisfy the documented invariants (payload matches kind,
hop_count equals len(hops), outcome present only in terminal states) so
they pass the validators as well as the codecs.
"""

from datetime import datetime, timezone

from hypothesis import strategies as st

from amigobench.domain import (
    CacheStatus,
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
    Resolution,
    ResolverClass,
    ScheduleRule,
    SpeedtestResult,
    WebResult,
    YoutubeSample,
    YoutubeStatSeries,
)

utc_datetimes = st.datetimes(
    min_value=datetime(2020, 1, 1),
    max_value=datetime(2035, 1, 1),
    timezones=st.just(timezone.utc),
)

names = st.text(
    alphabet="abcdefghijklmnopqrstuvwxyz0123456789-_.", min_size=1, max_size=24
)

_ms = st.floats(min_value=0, max_value=60_000, allow_nan=False, allow_infinity=False)
_mbps = st.floats(min_value=0, max_value=2_000, allow_nan=False, allow_infinity=False)
_bytes = st.integers(min_value=0, max_value=2**40)

gps_fixes = st.builds(
    GpsFix,
    lat=st.floats(min_value=-90, max_value=90, allow_nan=False),
    lon=st.floats(min_value=-180, max_value=180, allow_nan=False),
)

device_statuses = st.builds(
    DeviceStatus,
    device_id=names,
    timestamp=utc_datetimes,
    battery_pct=st.one_of(st.none(), st.integers(min_value=0, max_value=100)),
    connectivity=st.sampled_from(list(Connectivity)),
    operator_name=names,
    network_id=names,
    gps=st.one_of(st.none(), gps_fixes),
    data_used_today=_bytes,
    agent_version=st.just("0.1.0"),
)

schedule_rules = st.builds(
    ScheduleRule,
    interval=st.floats(min_value=1, max_value=86_400, allow_nan=False),
    connectivity_required=st.sampled_from(list(ConnectivityRule)),
    battery_floor_pct=st.integers(min_value=0, max_value=100),
    daily_data_cap=_bytes,
)

_INSTRUCTION_PARAMS = {
    InstructionKind.PAUSE: st.fixed_dictionaries(
        {"duration": st.integers(min_value=1, max_value=86_400)}
    ),
    InstructionKind.RESUME: st.just({}),
    InstructionKind.RUN_NOW: st.fixed_dictionaries({"experiment_id": names}),
    InstructionKind.OPEN_TUNNEL: st.fixed_dictionaries(
        {"host": names, "port": st.integers(min_value=1, max_value=65_535)}
    ),
    InstructionKind.UPDATE_CONFIG: st.fixed_dictionaries(
        {"key": names, "value": st.one_of(st.integers(), names)}
    ),
}


@st.composite
def instructions(draw):
    kind = draw(st.sampled_from(list(InstructionKind)))
    state = draw(st.sampled_from(list(InstructionState)))
    terminal = state in (InstructionState.ACKED, InstructionState.FAILED)
    return Instruction(
        id=draw(names),
        device_id=draw(names),
        created_at=draw(utc_datetimes),
        kind=kind,
        params=draw(_INSTRUCTION_PARAMS[kind]),
        state=state,
        outcome=draw(names) if terminal else None,
    )


speedtest_results = st.builds(
    SpeedtestResult,
    down_mbps=_mbps,
    up_mbps=_mbps,
    bytes_down=_bytes,
    bytes_up=_bytes,
    duration_s=st.floats(min_value=0, max_value=600, allow_nan=False),
    note=st.one_of(st.none(), names),
)

hop_stats = st.builds(
    HopStat,
    hop_index=st.integers(min_value=1, max_value=64),
    address=names,
    sent=st.integers(min_value=1, max_value=10),
    lost=st.integers(min_value=0, max_value=10),
    avg_rtt_ms=_ms,
    best_rtt_ms=_ms,
    worst_rtt_ms=_ms,
)


@st.composite
def latency_results(draw):
    raw = draw(st.lists(hop_stats, min_size=0, max_size=8))
    # Reindex so hop_index is the 1-based position, as the protocol yields.
    hops = tuple(
        HopStat(
            hop_index=i + 1,
            address=h.address,
            sent=h.sent,
            lost=h.lost,
            avg_rtt_ms=h.avg_rtt_ms,
            best_rtt_ms=h.best_rtt_ms,
            worst_rtt_ms=h.worst_rtt_ms,
        )
        for i, h in enumerate(raw)
    )
    complete = bool(hops) and draw(st.booleans())
    return LatencyResult(
        target=draw(names),
        hops=hops,
        hop_count=len(hops),
        final_avg_rtt_ms=hops[-1].avg_rtt_ms if hops else 0.0,
        complete=complete,
    )


dns_results = st.builds(
    DnsResult,
    domain=names,
    resolver_ip=st.sampled_from(["8.8.8.8", "8.8.4.4", "10.0.0.53", "127.0.0.1"]),
    resolver_class=st.sampled_from(list(ResolverClass)),
    lookup_ms=_ms,
    success=st.booleans(),
)

cdn_results = st.builds(
    CdnResult,
    url=names.map(lambda n: f"http://{n}/asset"),
    cdn_name=names,
    http_status=st.sampled_from([200, 206, 301, 404, 503, 0]),
    shield_status=st.sampled_from(list(CacheStatus)),
    edge_status=st.sampled_from(list(CacheStatus)),
    total_ms=_ms,
    bytes=_bytes,
    error=st.one_of(st.none(), names),
)

web_results = st.builds(
    WebResult,
    url=names.map(lambda n: f"http://{n}/"),
    dns_ms=_ms,
    connect_ms=_ms,
    ttfb_ms=_ms,
    total_ms=_ms,
    bytes=_bytes,
    speed_index_s=st.one_of(
        st.none(), st.floats(min_value=0, max_value=60, allow_nan=False)
    ),
    failed_phase=st.one_of(st.none(), st.sampled_from(["dns", "connect", "ttfb", "total"])),
)

youtube_samples = st.builds(
    YoutubeSample,
    timestamp=utc_datetimes,
    resolution=st.sampled_from(list(Resolution)),
    buffer_health_s=st.floats(min_value=0, max_value=120, allow_nan=False),
    dropped_frames=st.integers(min_value=0, max_value=100_000),
)

youtube_series = st.builds(
    YoutubeStatSeries,
    samples=st.lists(youtube_samples, min_size=0, max_size=6).map(tuple),
)

_PAYLOADS = {
    ExperimentKind.SPEEDTEST: speedtest_results,
    ExperimentKind.LATENCY: latency_results(),
    ExperimentKind.DNS: dns_results,
    ExperimentKind.CDN: cdn_results,
    ExperimentKind.WEB: web_results,
    ExperimentKind.YOUTUBE: youtube_series,
}


@st.composite
def measurement_records(draw, kinds=tuple(ExperimentKind)):
    kind = draw(st.sampled_from(list(kinds)))
    return MeasurementRecord(
        record_id=draw(st.uuids()).hex,
        device_id=draw(names),
        network_id=draw(names),
        experiment_kind=kind,
        timestamp=draw(utc_datetimes),
        payload=draw(_PAYLOADS[kind]),
    )


_SPEC_PARAMS = {
    ExperimentKind.SPEEDTEST: st.fixed_dictionaries(
        {"host": names, "port": st.integers(1, 65_535), "duration": st.just(2.0)}
    ),
    ExperimentKind.LATENCY: st.fixed_dictionaries(
        {"targets": st.lists(names, min_size=1, max_size=3)}
    ),
    ExperimentKind.DNS: st.fixed_dictionaries(
        {
            "targets": st.lists(names, min_size=1, max_size=3),
            "resolver": st.just("8.8.8.8"),
        }
    ),
    ExperimentKind.CDN: st.fixed_dictionaries(
        {"targets": st.lists(names, min_size=1, max_size=3)}
    ),
    ExperimentKind.WEB: st.fixed_dictionaries(
        {"targets": st.lists(names, min_size=1, max_size=3)}
    ),
}


@st.composite
def experiment_specs(draw):
    kind = draw(st.sampled_from(sorted(_SPEC_PARAMS, key=lambda k: k.value)))
    return ExperimentSpec(
        id=draw(names),
        kind=kind,
        params=draw(_SPEC_PARAMS[kind]),
        schedule=draw(schedule_rules),
    )
