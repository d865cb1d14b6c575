"""Domain model: record types, classifiers, and wire codecs."""

from amigobench.domain.records import (
    CdnResult,
    Connectivity,
    ConnectivityRule,
    Continent,
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
    NetworkInfo,
    NetworkRegistry,
    PAYLOAD_TYPES,
    REPORT_INTERVAL_S,
    Resolution,
    ResolverClass,
    SCHEDULABLE_KINDS,
    ScheduleRule,
    SpeedtestResult,
    WebResult,
    YoutubeSample,
    YoutubeStatSeries,
    instruction_transition_ok,
    new_id,
    utc_now,
    validate_device_status,
    validate_experiment_spec,
    validate_instruction,
    validate_record,
)
from amigobench.domain.classify import (
    CacheStatus,
    GOOGLE_DNS_ADDRESSES,
    LatencyClass,
    SpeedClass,
    SpeedIndexClass,
    classify_latency,
    classify_resolver,
    classify_speed,
    classify_speed_index,
)
from amigobench.domain import codec

__all__ = [name for name in dir() if not name.startswith("_")]
