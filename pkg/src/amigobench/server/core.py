"""Fleet operations over the durable store.

A single lock serializes all mutations; the log append is the one
serialization point, so two concurrent drains of the same device's
instruction queue can never hand out the same pending instruction twice.
"""

from __future__ import annotations

import dataclasses
import threading
from datetime import datetime
from typing import Any, Callable, Optional

from amigobench.domain import codec
from amigobench.domain.records import (
    Connectivity,
    DeviceStatus,
    ExperimentKind,
    Instruction,
    InstructionState,
    MeasurementRecord,
    instruction_transition_ok,
    new_id,
    utc_now,
    validate_device_status,
    validate_instruction,
    validate_record,
)
from amigobench.errors import LifecycleError, NotFoundError, ValidationError
from amigobench.server.store import Store

# A device is stale after three missed 5-minute report intervals.
STALE_AFTER_S = 15 * 60


@dataclasses.dataclass(frozen=True)
class DeviceSummary:
    """Dashboard row: latest reported state plus the staleness flag."""

    device_id: str
    last_seen: datetime
    battery_pct: Optional[int]
    connectivity: Connectivity
    operator_name: str
    data_used_today: int
    stale: bool


def device_summary_to_dict(summary: DeviceSummary) -> dict[str, Any]:
    return {
        "device_id": summary.device_id,
        "last_seen": codec.rfc3339(summary.last_seen),
        "battery_pct": summary.battery_pct,
        "connectivity": summary.connectivity.value,
        "operator_name": summary.operator_name,
        "data_used_today": summary.data_used_today,
        "stale": summary.stale,
    }


class ControlServer:
    """All fleet operations; every public method is thread-safe."""

    def __init__(
        self,
        store: Store,
        clock: Callable[[], datetime] = utc_now,
        stale_after_s: float = STALE_AFTER_S,
    ) -> None:
        self.store = store
        self.clock = clock
        self.stale_after_s = stale_after_s
        self._lock = threading.RLock()

    def ingest_status(self, status: DeviceStatus) -> int:
        """Persist a status sample; returns the device's pending count.

        Raises:
            ValidationError: nothing is persisted for an invalid status.
        """
        validate_device_status(status)
        with self._lock:
            self.store.append(
                {
                    "entry": "status",
                    "received_at": codec.rfc3339(self.clock()),
                    "status": codec.device_status_to_dict(status),
                }
            )
            return len(self.store.pending.get(status.device_id, []))

    def fetch_instructions(self, device_id: str) -> list[Instruction]:
        """Drain the device's pending queue, transitioning to delivered.

        Unknown devices get an empty list; an immediate second fetch is
        empty because the drain is atomic.
        """
        with self._lock:
            if device_id not in self.store.devices:
                return []
            queue = list(self.store.pending.get(device_id, []))
            delivered = []
            for instruction_id in queue:
                self.store.append(
                    {
                        "entry": "instruction_state",
                        "id": instruction_id,
                        "state": InstructionState.DELIVERED.value,
                    }
                )
                delivered.append(self.store.instructions[instruction_id])
            return delivered

    def ack_instruction(
        self, device_id: str, instruction_id: str, outcome: str, detail: str = ""
    ) -> None:
        """Record the device-reported terminal state of an instruction.

        Raises:
            NotFoundError: unknown id, or the id belongs to another device.
            ValidationError: outcome not in {acked, failed}.
            LifecycleError: the instruction is not in state delivered.
        """
        if outcome not in (InstructionState.ACKED.value, InstructionState.FAILED.value):
            raise ValidationError(f"outcome: {outcome!r} is not acked|failed")
        with self._lock:
            instruction = self.store.instructions.get(instruction_id)
            if instruction is None or instruction.device_id != device_id:
                raise NotFoundError(f"instruction: unknown id {instruction_id!r}")
            new_state = InstructionState(outcome)
            if not instruction_transition_ok(instruction.state, new_state):
                raise LifecycleError(
                    f"instruction {instruction_id}: cannot move "
                    f"{instruction.state.value} -> {new_state.value}"
                )
            self.store.append(
                {
                    "entry": "instruction_state",
                    "id": instruction_id,
                    "state": new_state.value,
                    "outcome": detail,
                }
            )

    def submit_results(
        self, device_id: str, records: list[MeasurementRecord]
    ) -> tuple[int, list[dict[str, str]]]:
        """Store novel records; returns (accepted_count, rejects).

        Duplicates by record_id are skipped silently (idempotency);
        invalid records are rejected individually with reasons, without
        failing the rest of the batch.
        """
        accepted = 0
        rejected: list[dict[str, str]] = []
        with self._lock:
            for record in records:
                if record.device_id != device_id:
                    rejected.append(
                        {
                            "record_id": record.record_id,
                            "reason": "device_id mismatch",
                        }
                    )
                    continue
                try:
                    validate_record(record)
                except ValidationError as exc:
                    rejected.append(
                        {"record_id": record.record_id, "reason": str(exc)}
                    )
                    continue
                if record.record_id in self.store.records:
                    continue
                self.store.append(
                    {"entry": "record", "record": codec.record_to_dict(record)}
                )
                accepted += 1
        return accepted, rejected

    def enqueue_instruction(self, instruction: Instruction) -> str:
        """Persist a new pending instruction; returns its id.

        Missing id/created_at are assigned; state is forced to pending.

        Raises:
            ValidationError: malformed kind parameters.
        """
        instruction = dataclasses.replace(
            instruction,
            id=instruction.id or new_id(),
            created_at=instruction.created_at or self.clock(),
            state=InstructionState.PENDING,
            outcome=None,
        )
        validate_instruction(instruction)
        with self._lock:
            self.store.append(
                {
                    "entry": "instruction",
                    "instruction": codec.instruction_to_dict(instruction),
                }
            )
        return instruction.id

    def get_instruction(self, instruction_id: str) -> Instruction:
        with self._lock:
            instruction = self.store.instructions.get(instruction_id)
            if instruction is None:
                raise NotFoundError(f"instruction: unknown id {instruction_id!r}")
            return instruction

    def fleet_snapshot(self) -> list[DeviceSummary]:
        """One summary per known device, stale per the 15-minute rule."""
        now = self.clock()
        with self._lock:
            summaries = []
            for device_id in sorted(self.store.devices):
                track = self.store.devices[device_id]
                age_s = (now - track.last_seen).total_seconds()
                summaries.append(
                    DeviceSummary(
                        device_id=device_id,
                        last_seen=track.last_seen,
                        battery_pct=track.status.battery_pct,
                        connectivity=track.status.connectivity,
                        operator_name=track.status.operator_name,
                        data_used_today=track.status.data_used_today,
                        stale=age_s > self.stale_after_s,
                    )
                )
            return summaries

    def device_records(
        self,
        device_id: str,
        kind: Optional[ExperimentKind] = None,
        limit: Optional[int] = None,
    ) -> list[MeasurementRecord]:
        """Most-recent-first records for one device, optionally filtered."""
        with self._lock:
            ids = self.store.records_by_device.get(device_id, [])
            records = [self.store.records[i] for i in reversed(ids)]
        if kind is not None:
            records = [r for r in records if r.experiment_kind is kind]
        if limit is not None:
            records = records[: max(0, limit)]
        return records
