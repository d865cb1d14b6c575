"""Agent configuration: identity, server address, schedule, experiments.

Config files are TOML or JSON. Only device_id, server_url, and spool_dir
are required; schedule fields and experiment schedules inherit the fleet
defaults when omitted.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path
from typing import Any, Mapping

from amigobench.domain import codec
from amigobench.domain.records import (
    REPORT_INTERVAL_S,
    ExperimentSpec,
    ScheduleRule,
    validate_experiment_spec,
    validate_schedule_rule,
)
from amigobench.errors import ValidationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RESET_HOUR_UTC = 3


@dataclasses.dataclass(frozen=True)
class AgentConfig:
    device_id: str
    server_url: str
    spool_dir: str
    report_interval_s: float = REPORT_INTERVAL_S
    schedule: ScheduleRule = ScheduleRule()
    experiments: tuple[ExperimentSpec, ...] = ()
    reset_hour_utc: int = RESET_HOUR_UTC


def validate_agent_config(config: AgentConfig) -> None:
    """Raises ValidationError naming the offending field."""
    if not config.device_id:
        raise ValidationError("device_id: must be non-empty")
    if not config.server_url:
        raise ValidationError("server_url: must be non-empty")
    if not config.spool_dir:
        raise ValidationError("spool_dir: must be non-empty")
    if not config.report_interval_s > 0:
        raise ValidationError("report_interval_s: must be positive")
    if not 0 <= config.reset_hour_utc <= 23:
        raise ValidationError("reset_hour_utc: outside [0, 23]")
    validate_schedule_rule(config.schedule)
    seen = set()
    for spec in config.experiments:
        validate_experiment_spec(spec)
        if spec.id in seen:
            raise ValidationError(f"experiments: duplicate id {spec.id!r}")
        seen.add(spec.id)


def agent_config_from_dict(data: Mapping[str, Any]) -> AgentConfig:
    """Builds and validates a config, filling schedule defaults."""
    for field in ("device_id", "server_url", "spool_dir"):
        if field not in data:
            raise ValidationError(f"{field}: missing")
    defaults = ScheduleRule()
    schedule = defaults
    if "schedule" in data:
        merged = codec.schedule_rule_to_dict(defaults)
        merged.update(data["schedule"])
        schedule = codec.schedule_rule_from_dict(merged)
    experiments = []
    for index, raw in enumerate(data.get("experiments", [])):
        raw = dict(raw)
        # Partial per-experiment schedules inherit the fleet schedule.
        base = codec.schedule_rule_to_dict(schedule)
        override = raw.get("schedule", {})
        if not isinstance(override, Mapping):
            raise ValidationError(f"experiments[{index}].schedule: must be a table")
        base.update(override)
        raw["schedule"] = base
        experiments.append(codec.experiment_spec_from_dict(raw))
    config = AgentConfig(
        device_id=str(data["device_id"]),
        server_url=str(data["server_url"]),
        spool_dir=str(data["spool_dir"]),
        report_interval_s=float(data.get("report_interval_s", REPORT_INTERVAL_S)),
        schedule=schedule,
        experiments=tuple(experiments),
        reset_hour_utc=int(data.get("reset_hour_utc", RESET_HOUR_UTC)),
    )
    validate_agent_config(config)
    return config


def agent_config_to_dict(config: AgentConfig) -> dict[str, Any]:
    return {
        "device_id": config.device_id,
        "server_url": config.server_url,
        "spool_dir": config.spool_dir,
        "report_interval_s": config.report_interval_s,
        "schedule": codec.schedule_rule_to_dict(config.schedule),
        "experiments": [
            codec.experiment_spec_to_dict(s) for s in config.experiments
        ],
        "reset_hour_utc": config.reset_hour_utc,
    }


def load_agent_config(path) -> AgentConfig:
    """Reads TOML (.toml) or JSON (anything else) into an AgentConfig."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix == ".toml":
        data = tomllib.loads(raw.decode("utf-8"))
    else:
        data = json.loads(raw)
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: config must be a table/object")
    return agent_config_from_dict(data)
