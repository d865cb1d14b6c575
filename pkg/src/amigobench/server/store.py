"""Durable state for the control server.

One append-only JSONL log holds every status, instruction event, and
measurement record. The in-memory index is rebuilt by replaying the log
at open, and live appends go through the same apply function as replay,
so recovery reproduces the pre-crash index exactly by construction.

Entry shapes (the `entry` field discriminates):
    {"entry": "status", "received_at": ts, "status": DeviceStatus}
    {"entry": "instruction", "instruction": Instruction}
    {"entry": "instruction_state", "id": ..., "state": ..., "outcome": ...}
    {"entry": "record", "record": MeasurementRecord}
"""

from __future__ import annotations

import dataclasses
import json
import os
import threading
from datetime import datetime
from pathlib import Path
from typing import Any, Mapping, Optional

from amigobench.domain import codec
from amigobench.domain.records import (
    DeviceStatus,
    Instruction,
    InstructionState,
    MeasurementRecord,
)
from amigobench.errors import ParseError

LOG_NAME = "store.jsonl"


@dataclasses.dataclass
class DeviceTrack:
    """Latest known state for one device."""

    status: DeviceStatus
    last_seen: datetime


class Store:
    """Append-only log plus the replayable in-memory index."""

    def __init__(self, data_dir) -> None:
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.path = self.data_dir / LOG_NAME
        self._lock = threading.Lock()
        self.devices: dict[str, DeviceTrack] = {}
        self.instructions: dict[str, Instruction] = {}
        self.pending: dict[str, list[str]] = {}
        self.records: dict[str, MeasurementRecord] = {}
        self.records_by_device: dict[str, list[str]] = {}
        if self.path.exists():
            self._replay()
        self._handle = open(self.path, "a", encoding="utf-8")

    def _replay(self) -> None:
        raw = self.path.read_bytes()
        good_end = 0
        for line in raw.splitlines(keepends=True):
            stripped = line.strip()
            if stripped:
                try:
                    entry = json.loads(stripped)
                except json.JSONDecodeError:
                    if good_end + len(line) < len(raw):
                        raise ParseError(
                            f"{self.path}: corrupt entry at byte {good_end}"
                        ) from None
                    break  # torn final append from a crash; discard it
                self._apply(entry)
            good_end += len(line)
        if good_end != len(raw):
            with open(self.path, "r+b") as handle:
                handle.truncate(good_end)

    def append(self, entry: Mapping[str, Any]) -> None:
        """Persist one entry and fold it into the index atomically."""
        line = codec.dumps(entry) + "\n"
        with self._lock:
            self._handle.write(line)
            self._handle.flush()
            os.fsync(self._handle.fileno())
            self._apply(entry)

    def _apply(self, entry: Mapping[str, Any]) -> None:
        kind = entry.get("entry")
        if kind == "status":
            status = codec.device_status_from_dict(entry["status"])
            self.devices[status.device_id] = DeviceTrack(
                status=status,
                last_seen=codec.parse_rfc3339(entry["received_at"]),
            )
        elif kind == "instruction":
            instruction = codec.instruction_from_dict(entry["instruction"])
            self.instructions[instruction.id] = instruction
            if instruction.state is InstructionState.PENDING:
                self.pending.setdefault(instruction.device_id, []).append(
                    instruction.id
                )
        elif kind == "instruction_state":
            instruction = self.instructions[entry["id"]]
            new_state = InstructionState(entry["state"])
            updated = dataclasses.replace(
                instruction, state=new_state, outcome=entry.get("outcome")
            )
            self.instructions[instruction.id] = updated
            if (
                instruction.state is InstructionState.PENDING
                and new_state is not InstructionState.PENDING
            ):
                queue = self.pending.get(instruction.device_id, [])
                if instruction.id in queue:
                    queue.remove(instruction.id)
        elif kind == "record":
            record = codec.record_from_dict(entry["record"])
            if record.record_id not in self.records:
                self.records[record.record_id] = record
                self.records_by_device.setdefault(record.device_id, []).append(
                    record.record_id
                )
        else:
            raise ParseError(f"store entry: unknown kind {kind!r}")

    def snapshot_state(self) -> dict[str, Any]:
        """A comparable view of the whole index, for equivalence checks."""
        return {
            "devices": {
                d: {
                    "status": codec.device_status_to_dict(t.status),
                    "last_seen": codec.rfc3339(t.last_seen),
                }
                for d, t in self.devices.items()
            },
            "instructions": {
                i: codec.instruction_to_dict(x) for i, x in self.instructions.items()
            },
            "pending": {d: list(q) for d, q in self.pending.items() if q},
            "records": sorted(self.records),
            "records_by_device": {
                d: list(ids) for d, ids in self.records_by_device.items()
            },
        }

    def close(self) -> None:
        self._handle.close()
