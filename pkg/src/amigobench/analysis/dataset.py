"""Dataset assembly: records plus the network registry.

Records load from JSONL in either shape found in the field: server
store logs (mixed entries discriminated by an `entry` key, from which
only records are taken) and raw spool files (one record per line).
Records whose network_id is missing from the registry are quarantined,
never silently dropped.
"""

from __future__ import annotations

import csv
import dataclasses
from pathlib import Path
from typing import Iterable, Iterator, Optional

from amigobench.domain import codec
from amigobench.domain.records import (
    Continent,
    ExperimentKind,
    MeasurementRecord,
    NetworkInfo,
    NetworkRegistry,
)
from amigobench.errors import ParseError

REGISTRY_COLUMNS = ("network_id", "operator", "country", "continent")


@dataclasses.dataclass(frozen=True)
class Dataset:
    records: tuple[MeasurementRecord, ...]
    registry: NetworkRegistry
    quarantined: tuple[MeasurementRecord, ...] = ()

    def by_kind(self, kind: ExperimentKind) -> Iterator[MeasurementRecord]:
        return (r for r in self.records if r.experiment_kind is kind)

    def operator_of(self, network_id: str) -> Optional[str]:
        info = self.registry.lookup(network_id)
        return info.operator_name if info else None

    def continent_of(self, network_id: str) -> Optional[Continent]:
        info = self.registry.lookup(network_id)
        return info.continent if info else None


def load_registry_csv(path) -> NetworkRegistry:
    """Reads the registry CSV: network_id, operator, country, continent."""
    path = Path(path)
    entries: dict[str, NetworkInfo] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in REGISTRY_COLUMNS if c not in (reader.fieldnames or [])]
        if missing:
            raise ParseError(f"{path}: missing columns {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            network_id = row["network_id"].strip()
            if not network_id:
                raise ParseError(f"{path}:{lineno}: empty network_id")
            if network_id in entries:
                raise ParseError(f"{path}:{lineno}: duplicate network_id {network_id!r}")
            raw_continent = row["continent"].strip().lower()
            try:
                continent = Continent(raw_continent)
            except ValueError:
                raise ParseError(
                    f"{path}:{lineno}: unknown continent {row['continent']!r}"
                ) from None
            entries[network_id] = NetworkInfo(
                operator_name=row["operator"].strip(),
                country=row["country"].strip(),
                continent=continent,
            )
    return NetworkRegistry(entries=entries)


def load_records(paths: Iterable) -> list[MeasurementRecord]:
    """Reads records from store logs and/or spool files, in path order."""
    records: list[MeasurementRecord] = []
    for path in paths:
        path = Path(path)
        for index, entry in enumerate(codec.iter_jsonl(path), start=1):
            if "entry" in entry:
                if entry.get("entry") != "record":
                    continue  # status/instruction entries are not measurements
                records.append(codec.record_from_dict(entry["record"]))
            elif "record_id" in entry:
                records.append(codec.record_from_dict(entry))
            else:
                raise ParseError(f"{path}: entry {index} is not a record or store entry")
    return records


def build_dataset(
    records: Iterable[MeasurementRecord], registry: NetworkRegistry
) -> Dataset:
    known: list[MeasurementRecord] = []
    quarantined: list[MeasurementRecord] = []
    for record in records:
        if registry.lookup(record.network_id) is None:
            quarantined.append(record)
        else:
            known.append(record)
    return Dataset(
        records=tuple(known), registry=registry, quarantined=tuple(quarantined)
    )
