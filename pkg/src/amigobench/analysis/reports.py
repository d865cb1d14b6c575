"""Report sections and emission.

Six fixed sections, each emitted as plot-ready CSV plus a JSON mirror:
class_fractions, dns_lookup, cdn_by_status, cdn_by_continent,
cache_probability, youtube_resolutions. Row order and column order are
fixed so identical datasets produce byte-identical files.

Grouping policy:
  - Hit/miss download-time medians use records whose fetch completed
    (error is None); unknown cache statuses never enter them.
  - The continent view uses edge hits only.
  - cache_probability counts every CDN test; transport failures and
    headerless responses land in p_unknown, so rows still sum to 1.
"""

from __future__ import annotations

import csv
import dataclasses
import json
from pathlib import Path
from typing import Any, Callable, Mapping, Optional, Sequence

from amigobench.analysis.dataset import Dataset
from amigobench.analysis.stats import (
    METRICS,
    BoxStats,
    CdfSeries,
    box_stats,
    crux_cdf,
    metric_values,
    per_network_fraction,
)
from amigobench.domain.classify import CacheStatus
from amigobench.domain.records import (
    CdnResult,
    Continent,
    DnsResult,
    ExperimentKind,
    Resolution,
    ResolverClass,
    YoutubeStatSeries,
)
from amigobench.errors import ValidationError

FORMATS = ("json", "csv")

_BOX_COLUMNS = (
    "n", "min", "q1", "median", "q3", "max",
    "whisker_low", "whisker_high", "n_outliers",
)


def _box_row(box: Optional[BoxStats]) -> dict[str, Any]:
    if box is None:
        return {c: None for c in _BOX_COLUMNS}
    return {
        "n": box.n,
        "min": box.min,
        "q1": box.q1,
        "median": box.median,
        "q3": box.q3,
        "max": box.max,
        "whisker_low": box.whisker_low,
        "whisker_high": box.whisker_high,
        "n_outliers": len(box.outliers),
    }


def _cdf_payload(series: CdfSeries) -> dict[str, Any]:
    return {
        "sorted_fractions": list(series.sorted_values),
        "n_networks": series.n_networks,
    }


@dataclasses.dataclass(frozen=True)
class ReportSection:
    """One emitted table: fixed columns, ordered rows, JSON-only extras."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[dict[str, Any], ...]
    extra: Mapping[str, Any] = dataclasses.field(default_factory=dict)


@dataclasses.dataclass(frozen=True)
class DnsGroupStats:
    """Lookup-time summary for one (operator, resolver class) group.

    share is the group's slice of the operator's lookups, successful or
    not; box covers successful lookups only and is None when there were
    none.
    """

    operator: str
    resolver_class: ResolverClass
    n_lookups: int
    share: float
    box: Optional[BoxStats]


def dns_report(ds: Dataset) -> list[DnsGroupStats]:
    """Per-operator lookup-time stats split by resolver class.

    Operators with no lookups are omitted; an operator with lookups
    gets a row for every resolver class so zero usage reads as share
    0.0 rather than a missing row.
    """
    totals: dict[str, int] = {}
    counts: dict[tuple[str, ResolverClass], int] = {}
    times: dict[tuple[str, ResolverClass], list[float]] = {}
    for record in ds.by_kind(ExperimentKind.DNS):
        payload = record.payload
        assert isinstance(payload, DnsResult)
        operator = ds.operator_of(record.network_id) or record.network_id
        key = (operator, payload.resolver_class)
        totals[operator] = totals.get(operator, 0) + 1
        counts[key] = counts.get(key, 0) + 1
        if payload.success:
            times.setdefault(key, []).append(payload.lookup_ms)
    report = []
    for operator in sorted(totals):
        for resolver_class in sorted(ResolverClass, key=lambda r: r.value):
            key = (operator, resolver_class)
            samples = times.get(key, [])
            report.append(
                DnsGroupStats(
                    operator=operator,
                    resolver_class=resolver_class,
                    n_lookups=counts.get(key, 0),
                    share=counts.get(key, 0) / totals[operator],
                    box=box_stats(samples) if samples else None,
                )
            )
    return report


@dataclasses.dataclass(frozen=True)
class CdnReport:
    """Download-time summaries: per cache status, and per continent
    restricted to edge hits."""

    by_status: dict[tuple[str, CacheStatus], BoxStats]
    by_continent: dict[tuple[str, Continent], BoxStats]


def cdn_report(ds: Dataset) -> CdnReport:
    status_times: dict[tuple[str, CacheStatus], list[float]] = {}
    continent_times: dict[tuple[str, Continent], list[float]] = {}
    for record in ds.by_kind(ExperimentKind.CDN):
        payload = record.payload
        assert isinstance(payload, CdnResult)
        if payload.error is not None:
            continue
        if payload.edge_status is CacheStatus.UNKNOWN:
            continue
        status_times.setdefault(
            (payload.cdn_name, payload.edge_status), []
        ).append(payload.total_ms)
        if payload.edge_status is CacheStatus.HIT:
            continent = ds.continent_of(record.network_id)
            if continent is not None:
                continent_times.setdefault(
                    (payload.cdn_name, continent), []
                ).append(payload.total_ms)
    return CdnReport(
        by_status={k: box_stats(v) for k, v in status_times.items()},
        by_continent={k: box_stats(v) for k, v in continent_times.items()},
    )


def cache_probability(ds: Dataset) -> dict[tuple[str, str], tuple[float, float, float]]:
    """(network_id, cdn) -> (p_hit, p_miss, p_unknown) over edge status."""
    counts: dict[tuple[str, str], dict[CacheStatus, int]] = {}
    for record in ds.by_kind(ExperimentKind.CDN):
        payload = record.payload
        assert isinstance(payload, CdnResult)
        key = (record.network_id, payload.cdn_name)
        group = counts.setdefault(key, {s: 0 for s in CacheStatus})
        group[payload.edge_status] += 1
    result = {}
    for key, group in counts.items():
        total = sum(group.values())
        result[key] = (
            group[CacheStatus.HIT] / total,
            group[CacheStatus.MISS] / total,
            group[CacheStatus.UNKNOWN] / total,
        )
    return result


@dataclasses.dataclass(frozen=True)
class YoutubeReport:
    """Per-network playback-resolution shares plus network-level CDFs.

    shares covers every resolution for every network with at least one
    sample; cdfs maps each resolution to the CRuX-style CDF of those
    shares across networks.
    """

    shares: dict[str, dict[Resolution, float]]
    n_samples: dict[str, int]
    cdfs: dict[Resolution, CdfSeries]


def youtube_resolution_report(ds: Dataset) -> YoutubeReport:
    sample_counts: dict[str, dict[Resolution, int]] = {}
    for record in ds.by_kind(ExperimentKind.YOUTUBE):
        payload = record.payload
        assert isinstance(payload, YoutubeStatSeries)
        group = sample_counts.setdefault(
            record.network_id, {r: 0 for r in Resolution}
        )
        for sample in payload.samples:
            group[sample.resolution] += 1
    shares: dict[str, dict[Resolution, float]] = {}
    n_samples: dict[str, int] = {}
    for network_id, group in sample_counts.items():
        total = sum(group.values())
        if total == 0:
            continue  # records present but no samples: nothing to attribute
        shares[network_id] = {r: group[r] / total for r in Resolution}
        n_samples[network_id] = total
    cdfs = {}
    if shares:
        for resolution in Resolution:
            cdfs[resolution] = crux_cdf(
                {nid: shares[nid][resolution] for nid in shares}
            )
    return YoutubeReport(shares=shares, n_samples=n_samples, cdfs=cdfs)


def class_fractions_section(ds: Dataset) -> ReportSection:
    rows = []
    cdf_extra: dict[str, dict[str, Any]] = {}
    for name, selector in METRICS.items():
        if selector.classifier is None:
            continue
        counts = {
            nid: len(vals) for nid, vals in metric_values(ds, selector).items()
        }
        for klass in selector.classes:
            fractions = per_network_fraction(ds, selector, klass)
            if not fractions:
                continue
            for network_id in sorted(fractions):
                rows.append(
                    {
                        "metric": name,
                        "class": klass.value,
                        "network_id": network_id,
                        "n_tests": counts[network_id],
                        "fraction": fractions[network_id],
                    }
                )
            cdf_extra.setdefault(name, {})[klass.value] = _cdf_payload(
                crux_cdf(fractions)
            )
    return ReportSection(
        name="class_fractions",
        columns=("metric", "class", "network_id", "n_tests", "fraction"),
        rows=tuple(rows),
        extra={"cdf": cdf_extra},
    )


def dns_lookup_section(ds: Dataset) -> ReportSection:
    rows = []
    for group in dns_report(ds):
        row = {
            "operator": group.operator,
            "resolver_class": group.resolver_class.value,
            "n_lookups": group.n_lookups,
            "share": group.share,
        }
        row.update(_box_row(group.box))
        rows.append(row)
    return ReportSection(
        name="dns_lookup",
        columns=("operator", "resolver_class", "n_lookups", "share") + _BOX_COLUMNS,
        rows=tuple(rows),
    )


def cdn_by_status_section(ds: Dataset) -> ReportSection:
    report = cdn_report(ds)
    rows = []
    for cdn, status in sorted(report.by_status, key=lambda k: (k[0], k[1].value)):
        row = {"cdn": cdn, "edge_status": status.value}
        row.update(_box_row(report.by_status[(cdn, status)]))
        rows.append(row)
    return ReportSection(
        name="cdn_by_status",
        columns=("cdn", "edge_status") + _BOX_COLUMNS,
        rows=tuple(rows),
    )


def cdn_by_continent_section(ds: Dataset) -> ReportSection:
    report = cdn_report(ds)
    rows = []
    for cdn, continent in sorted(
        report.by_continent, key=lambda k: (k[0], k[1].value)
    ):
        row = {"cdn": cdn, "continent": continent.value}
        row.update(_box_row(report.by_continent[(cdn, continent)]))
        rows.append(row)
    return ReportSection(
        name="cdn_by_continent",
        columns=("cdn", "continent") + _BOX_COLUMNS,
        rows=tuple(rows),
    )


def cache_probability_section(ds: Dataset) -> ReportSection:
    probabilities = cache_probability(ds)
    counts = {
        key: 0 for key in probabilities
    }
    for record in ds.by_kind(ExperimentKind.CDN):
        payload = record.payload
        assert isinstance(payload, CdnResult)
        counts[(record.network_id, payload.cdn_name)] += 1
    rows = []
    for network_id, cdn in sorted(probabilities):
        p_hit, p_miss, p_unknown = probabilities[(network_id, cdn)]
        rows.append(
            {
                "network_id": network_id,
                "cdn": cdn,
                "n_tests": counts[(network_id, cdn)],
                "p_hit": p_hit,
                "p_miss": p_miss,
                "p_unknown": p_unknown,
            }
        )
    return ReportSection(
        name="cache_probability",
        columns=("network_id", "cdn", "n_tests", "p_hit", "p_miss", "p_unknown"),
        rows=tuple(rows),
    )


def youtube_resolutions_section(ds: Dataset) -> ReportSection:
    report = youtube_resolution_report(ds)
    rows = []
    for network_id in sorted(report.shares):
        row: dict[str, Any] = {
            "network_id": network_id,
            "n_samples": report.n_samples[network_id],
        }
        for resolution in Resolution:
            row[resolution.value] = report.shares[network_id][resolution]
        rows.append(row)
    cdf_extra = {
        resolution.value: _cdf_payload(series)
        for resolution, series in report.cdfs.items()
    }
    return ReportSection(
        name="youtube_resolutions",
        columns=("network_id", "n_samples") + tuple(r.value for r in Resolution),
        rows=tuple(rows),
        extra={"cdf": cdf_extra},
    )


SECTION_BUILDERS: dict[str, Callable[[Dataset], ReportSection]] = {
    "class_fractions": class_fractions_section,
    "dns_lookup": dns_lookup_section,
    "cdn_by_status": cdn_by_status_section,
    "cdn_by_continent": cdn_by_continent_section,
    "cache_probability": cache_probability_section,
    "youtube_resolutions": youtube_resolutions_section,
}


def build_report(ds: Dataset) -> dict[str, ReportSection]:
    return {name: build(ds) for name, build in SECTION_BUILDERS.items()}


def _write_json(path: Path, payload: Any) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    path.write_text(text, encoding="utf-8")


def _write_csv(path: Path, section: ReportSection) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(section.columns)
        for row in section.rows:
            writer.writerow(
                ["" if row[c] is None else row[c] for c in section.columns]
            )


def emit_report(
    ds: Dataset, out_dir, formats: Sequence[str] = FORMATS
) -> dict[str, Any]:
    """Writes every section to out_dir and a manifest describing them.

    Args:
        ds: dataset under analysis.
        out_dir: target directory, created if missing.
        formats: subset of {json, csv}, at least one.

    Returns:
        The manifest (also written as manifest.json): section names,
        row counts, and emitted file names relative to out_dir.

    Raises:
        ValidationError: unknown or empty format list.
        OSError: unwritable target, surfaced per file.
    """
    chosen = tuple(formats)
    unknown = [f for f in chosen if f not in FORMATS]
    if unknown:
        raise ValidationError(f"formats: unknown {', '.join(unknown)}")
    if not chosen:
        raise ValidationError("formats: empty")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest: dict[str, Any] = {"sections": []}
    for name, section in build_report(ds).items():
        files = {}
        if "json" in chosen:
            payload: dict[str, Any] = {"rows": list(section.rows)}
            payload.update(section.extra)
            _write_json(out_dir / f"{name}.json", payload)
            files["json"] = f"{name}.json"
        if "csv" in chosen:
            _write_csv(out_dir / f"{name}.csv", section)
            files["csv"] = f"{name}.csv"
        manifest["sections"].append(
            {"name": name, "rows": len(section.rows), "files": files}
        )
    _write_json(out_dir / "manifest.json", manifest)
    return manifest
