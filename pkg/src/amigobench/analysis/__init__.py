"""Offline analysis pipeline: datasets, statistics, report emission."""

from amigobench.analysis.dataset import (
    Dataset,
    build_dataset,
    load_records,
    load_registry_csv,
)
from amigobench.analysis.reports import (
    SECTION_BUILDERS,
    CdnReport,
    DnsGroupStats,
    ReportSection,
    YoutubeReport,
    build_report,
    cache_probability,
    cdn_report,
    dns_report,
    emit_report,
    youtube_resolution_report,
)
from amigobench.analysis.stats import (
    METRICS,
    BoxStats,
    CdfSeries,
    MetricSelector,
    box_stats,
    crux_cdf,
    metric_values,
    per_network_fraction,
)

__all__ = [
    "Dataset",
    "build_dataset",
    "load_records",
    "load_registry_csv",
    "SECTION_BUILDERS",
    "CdnReport",
    "DnsGroupStats",
    "ReportSection",
    "YoutubeReport",
    "build_report",
    "cache_probability",
    "cdn_report",
    "dns_report",
    "emit_report",
    "youtube_resolution_report",
    "METRICS",
    "BoxStats",
    "CdfSeries",
    "MetricSelector",
    "box_stats",
    "crux_cdf",
    "metric_values",
    "per_network_fraction",
]
