"""Durable FIFO of measurement records awaiting upload.

Records land in one JSONL file per UTC day (spool-YYYYMMDD.jsonl) in
append order; cursor.json counts how many records of each file have
been uploaded. Uploads that never get confirmed are simply retried from
the cursor, and the server deduplicates by record_id, so a crash
between upload and cursor advance costs a retransmit, never a loss.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from amigobench.domain import codec
from amigobench.domain.records import MeasurementRecord
from amigobench.errors import ValidationError

CURSOR_NAME = "cursor.json"


class Spool:
    def __init__(self, directory) -> None:
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._cursor_path = self.directory / CURSOR_NAME

    def _files(self) -> list[Path]:
        return sorted(self.directory.glob("spool-*.jsonl"))

    def _cursor(self) -> dict[str, int]:
        if not self._cursor_path.exists():
            return {}
        return json.loads(self._cursor_path.read_text())

    def _write_cursor(self, cursor: dict[str, int]) -> None:
        tmp = self._cursor_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(cursor, sort_keys=True))
        os.replace(tmp, self._cursor_path)

    def append(self, record: MeasurementRecord) -> None:
        day = record.timestamp.strftime("%Y%m%d")
        path = self.directory / f"spool-{day}.jsonl"
        line = codec.dumps(codec.record_to_dict(record)) + "\n"
        with open(path, "a", encoding="utf-8") as handle:
            handle.write(line)
            handle.flush()
            os.fsync(handle.fileno())

    def pending(self, limit: Optional[int] = None) -> list[MeasurementRecord]:
        """Oldest-first records not yet marked uploaded."""
        cursor = self._cursor()
        out: list[MeasurementRecord] = []
        for path in self._files():
            skip = cursor.get(path.name, 0)
            for index, entry in enumerate(codec.iter_jsonl(path)):
                if index < skip:
                    continue
                out.append(codec.record_from_dict(entry))
                if limit is not None and len(out) >= limit:
                    return out
        return out

    def pending_count(self) -> int:
        cursor = self._cursor()
        total = 0
        for path in self._files():
            lines = sum(1 for _ in codec.iter_jsonl(path))
            total += max(0, lines - cursor.get(path.name, 0))
        return total

    def mark_uploaded(self, count: int) -> None:
        """Advances the FIFO cursor past the first `count` pending records."""
        if count < 0:
            raise ValidationError("count: negative")
        if count == 0:
            return
        cursor = self._cursor()
        remaining = count
        for path in self._files():
            lines = sum(1 for _ in codec.iter_jsonl(path))
            done = cursor.get(path.name, 0)
            take = min(remaining, lines - done)
            if take > 0:
                cursor[path.name] = done + take
                remaining -= take
            if remaining == 0:
                break
        if remaining:
            raise ValidationError(f"count: only {count - remaining} records pending")
        self._write_cursor(cursor)

    def all_ids(self) -> set[str]:
        """Every record_id ever spooled, uploaded or not."""
        ids = set()
        for path in self._files():
            for entry in codec.iter_jsonl(path):
                ids.add(entry["record_id"])
        return ids
