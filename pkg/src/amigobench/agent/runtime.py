"""The agent loop: sense, report, obey, measure, spool, upload.

Drive an Agent by calling tick(now) with a monotonically advancing
clock (wall time in production, a simulated clock in tests and demos).
Each tick fires the nightly reset when due, exchanges with the server
at the report cadence, then evaluates every experiment against the five
scheduling gates. All probe results spool to disk first and upload in
FIFO order; the server deduplicates by record_id, so retries after an
outage store each record exactly once.
"""

from __future__ import annotations

import dataclasses
from datetime import date, datetime, time, timedelta
from typing import Optional

from amigobench import __version__
from amigobench.agent.config import AgentConfig, validate_agent_config
from amigobench.agent.runners import ProbeRunner
from amigobench.agent.scheduler import Decision, decide
from amigobench.agent.sensors import SensorReading, SensorSource
from amigobench.agent.spool import Spool
from amigobench.domain.records import (
    Connectivity,
    DeviceStatus,
    Instruction,
    InstructionKind,
    MeasurementRecord,
)
from amigobench.errors import (
    LifecycleError,
    NotFoundError,
    ProbeError,
    TransportError,
    ValidationError,
)

UPLOAD_BATCH = 100

_FAILSAFE_READING = SensorReading(
    battery_pct=None,
    connectivity=Connectivity.NONE,
    operator_name="unknown",
    network_id="unknown",
    gps=None,
)


@dataclasses.dataclass
class AgentState:
    """Transient agent state; the spool is the only durable part."""

    paused_until: Optional[datetime] = None
    last_run: dict[str, datetime] = dataclasses.field(default_factory=dict)
    ledger_day: Optional[date] = None
    ledger_bytes: int = 0


class Agent:
    def __init__(
        self,
        config: AgentConfig,
        sensors: SensorSource,
        client,
        runner: ProbeRunner,
        spool: Optional[Spool] = None,
    ) -> None:
        validate_agent_config(config)
        self.config = config
        self.sensors = sensors
        self.client = client
        self.runner = runner
        self.spool = spool if spool is not None else Spool(config.spool_dir)
        self.state = AgentState()
        self.decisions: list[Decision] = []
        self.rejected_uploads = 0
        self._forced: set[str] = set()
        self._last_report: Optional[datetime] = None
        self._last_reset_day: Optional[date] = None

    # Sensing and accounting

    def collect_status(self, now: datetime) -> DeviceStatus:
        """Snapshot the environment; a failed read degrades, never raises."""
        try:
            reading = self.sensors.read(now)
        except Exception:
            reading = _FAILSAFE_READING
        self._roll_ledger(now)
        return DeviceStatus(
            device_id=self.config.device_id,
            timestamp=now,
            battery_pct=reading.battery_pct,
            connectivity=reading.connectivity,
            operator_name=reading.operator_name or "unknown",
            network_id=reading.network_id or "unknown",
            gps=reading.gps,
            data_used_today=self.state.ledger_bytes,
            agent_version=__version__,
        )

    def _roll_ledger(self, now: datetime) -> None:
        day = now.date()
        if self.state.ledger_day != day:
            self.state.ledger_day = day
            self.state.ledger_bytes = 0

    def account_data(self, nbytes: int, now: datetime) -> None:
        if nbytes < 0:
            raise ValidationError("nbytes: negative")
        self._roll_ledger(now)
        self.state.ledger_bytes += nbytes

    # Instructions

    def apply_instruction(self, instruction: Instruction, now: datetime) -> tuple[str, str]:
        """Returns the (outcome, detail) pair to ack back to the server."""
        params = instruction.params
        try:
            if instruction.kind is InstructionKind.PAUSE:
                duration = float(params["duration"])
                self.state.paused_until = now + timedelta(seconds=duration)
                return "acked", f"paused until {self.state.paused_until.isoformat()}"
            if instruction.kind is InstructionKind.RESUME:
                self.state.paused_until = None
                return "acked", "resumed"
            if instruction.kind is InstructionKind.RUN_NOW:
                experiment_id = str(params["experiment_id"])
                if experiment_id not in {s.id for s in self.config.experiments}:
                    return "failed", f"unknown experiment {experiment_id!r}"
                self._forced.add(experiment_id)
                return "acked", f"run scheduled: {experiment_id}"
            if instruction.kind is InstructionKind.OPEN_TUNNEL:
                host, port = params["host"], params["port"]
                return "acked", f"stub: tunnel requested {host}:{port}"
            if instruction.kind is InstructionKind.UPDATE_CONFIG:
                return self._update_config(str(params["key"]), params["value"])
        except (KeyError, TypeError, ValueError) as exc:
            return "failed", f"bad params: {exc}"
        return "failed", f"unsupported kind {instruction.kind.value!r}"

    def _update_config(self, key: str, value) -> tuple[str, str]:
        if key not in {f.name for f in dataclasses.fields(AgentConfig)}:
            return "failed", f"unknown config key {key!r}"
        candidate = dataclasses.replace(self.config, **{key: value})
        try:
            validate_agent_config(candidate)
        except ValidationError as exc:
            return "failed", str(exc)
        self.config = candidate
        return "acked", f"{key}={value!r}"

    # Experiments

    def maybe_run_experiments(self, now: datetime) -> list[MeasurementRecord]:
        """Evaluate every experiment's gates once; run the ones that pass."""
        status = self.collect_status(now)
        produced: list[MeasurementRecord] = []
        for spec in self.config.experiments:
            forced = spec.id in self._forced
            decision = decide(
                spec,
                status,
                now,
                self.state.last_run.get(spec.id),
                self.state.paused_until,
                forced,
            )
            if forced:
                self._forced.discard(spec.id)  # one attempt per run_now
            self.decisions.append(decision)
            if not decision.ran:
                continue
            self.state.last_run[spec.id] = now
            try:
                outcomes = self.runner.run(spec, now)
            except ProbeError:
                continue
            stamp = now.strftime("%Y%m%dT%H%M%S")
            total_bytes = 0
            for index, (payload, nbytes) in enumerate(outcomes):
                record = MeasurementRecord(
                    record_id=f"{self.config.device_id}-{spec.id}-{stamp}-{index}",
                    device_id=self.config.device_id,
                    network_id=status.network_id,
                    experiment_kind=spec.kind,
                    timestamp=now,
                    payload=payload,
                )
                self.spool.append(record)
                produced.append(record)
                total_bytes += nbytes
            self.account_data(total_bytes, now)
            # Later experiments this tick must gate on the updated ledger.
            status = dataclasses.replace(
                status, data_used_today=self.state.ledger_bytes
            )
        return produced

    # Server exchange

    def report_tick(self, now: datetime) -> bool:
        """One status/instruction/upload exchange; False if unreachable."""
        status = self.collect_status(now)
        try:
            self.client.post_status(status)
        except TransportError:
            return False
        try:
            instructions = self.client.fetch_instructions(self.config.device_id)
        except TransportError:
            return False
        for instruction in instructions:
            outcome, detail = self.apply_instruction(instruction, now)
            try:
                self.client.ack(self.config.device_id, instruction.id, outcome, detail)
            except (TransportError, LifecycleError, NotFoundError):
                pass  # the effect is applied locally either way
        self._drain_spool()
        return True

    def _drain_spool(self) -> None:
        while True:
            batch = self.spool.pending(limit=UPLOAD_BATCH)
            if not batch:
                return
            try:
                _, rejected = self.client.submit_results(
                    self.config.device_id, batch
                )
            except TransportError:
                return  # cursor stays put; retry next tick
            self.rejected_uploads += len(rejected)
            # Accepted, duplicate, and rejected records are all settled.
            self.spool.mark_uploaded(len(batch))

    # Housekeeping

    def nightly_reset(self, now: datetime) -> None:
        """Clears transient state; spool and data ledger survive."""
        self.state.paused_until = None
        self._forced.clear()

    def tick(self, now: datetime) -> None:
        reset_at = time(self.config.reset_hour_utc)
        if self._last_reset_day is None:
            # Starting mid-day counts as already reset for today.
            self._last_reset_day = (
                now.date() if now.time() >= reset_at
                else now.date() - timedelta(days=1)
            )
        elif now.date() != self._last_reset_day and now.time() >= reset_at:
            self.nightly_reset(now)
            self._last_reset_day = now.date()
        if (
            self._last_report is None
            or (now - self._last_report).total_seconds() >= self.config.report_interval_s
        ):
            self.report_tick(now)
            self._last_report = now
        self.maybe_run_experiments(now)
