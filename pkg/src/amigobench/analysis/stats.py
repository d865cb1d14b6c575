"""Aggregation statistics: per-network class fractions, CDFs, box stats.

Conventions fixed here so report figures are reproducible:
  - Quartiles use linear interpolation between closest ranks (the
    `inclusive` method of statistics.quantiles).
  - Whiskers sit on the furthest data point within 1.5 x IQR of the
    quartiles and are clamped to the quartiles when no point reaches
    past them; remaining points are outliers.
  - Networks with zero applicable tests are omitted from CDFs rather
    than counted as fraction 0: the denominators are tested networks.
"""

from __future__ import annotations

import bisect
import dataclasses
import math
import statistics
from enum import Enum
from typing import Callable, Iterable, Mapping, Optional, Union

from amigobench.analysis.dataset import Dataset
from amigobench.domain.classify import (
    LatencyClass,
    SpeedClass,
    SpeedIndexClass,
    classify_latency,
    classify_speed,
    classify_speed_index,
)
from amigobench.domain.records import (
    DnsResult,
    ExperimentKind,
    LatencyResult,
    Payload,
    SpeedtestResult,
    WebResult,
)
from amigobench.errors import ValidationError


def _speed_down(payload: Payload) -> Optional[float]:
    assert isinstance(payload, SpeedtestResult)
    return payload.down_mbps if payload.down_mbps > 0 else None


def _speed_up(payload: Payload) -> Optional[float]:
    assert isinstance(payload, SpeedtestResult)
    return payload.up_mbps if payload.up_mbps > 0 else None


def _final_rtt(payload: Payload) -> Optional[float]:
    assert isinstance(payload, LatencyResult)
    return payload.final_avg_rtt_ms if payload.complete else None


def _speed_index(payload: Payload) -> Optional[float]:
    assert isinstance(payload, WebResult)
    if payload.failed_phase is not None:
        return None
    return payload.speed_index_s


def _lookup_ms(payload: Payload) -> Optional[float]:
    assert isinstance(payload, DnsResult)
    return payload.lookup_ms if payload.success else None


@dataclasses.dataclass(frozen=True)
class MetricSelector:
    """Extracts one numeric metric from records of a single kind.

    extract returns None when a record carries no usable sample for the
    metric (failed transfer, incomplete path walk, absent speed index);
    such records do not enter any denominator.
    """

    name: str
    kind: ExperimentKind
    extract: Callable[[Payload], Optional[float]]
    classifier: Optional[Callable[[float], Enum]] = None
    classes: tuple[Enum, ...] = ()


METRICS: dict[str, MetricSelector] = {
    selector.name: selector
    for selector in (
        MetricSelector(
            name="down_mbps",
            kind=ExperimentKind.SPEEDTEST,
            extract=_speed_down,
            classifier=classify_speed,
            classes=tuple(SpeedClass),
        ),
        MetricSelector(
            name="up_mbps",
            kind=ExperimentKind.SPEEDTEST,
            extract=_speed_up,
            classifier=classify_speed,
            classes=tuple(SpeedClass),
        ),
        MetricSelector(
            name="final_avg_rtt_ms",
            kind=ExperimentKind.LATENCY,
            extract=_final_rtt,
            classifier=classify_latency,
            classes=tuple(LatencyClass),
        ),
        MetricSelector(
            name="speed_index_s",
            kind=ExperimentKind.WEB,
            extract=_speed_index,
            classifier=classify_speed_index,
            classes=tuple(SpeedIndexClass),
        ),
        MetricSelector(
            name="lookup_ms",
            kind=ExperimentKind.DNS,
            extract=_lookup_ms,
        ),
    )
}


def resolve_metric(metric: Union[str, MetricSelector]) -> MetricSelector:
    if isinstance(metric, MetricSelector):
        return metric
    try:
        return METRICS[metric]
    except KeyError:
        raise ValidationError(f"metric: unknown selector {metric!r}") from None


def metric_values(ds: Dataset, metric: Union[str, MetricSelector]) -> dict[str, list[float]]:
    """Collects the metric's usable samples grouped by network_id."""
    selector = resolve_metric(metric)
    grouped: dict[str, list[float]] = {}
    for record in ds.by_kind(selector.kind):
        value = selector.extract(record.payload)
        if value is None:
            continue
        grouped.setdefault(record.network_id, []).append(value)
    return grouped


def per_network_fraction(
    ds: Dataset, metric: Union[str, MetricSelector], klass: Enum
) -> dict[str, float]:
    """Fraction of a network's usable tests falling in the target class.

    Args:
        ds: dataset under analysis.
        metric: selector name or MetricSelector with a classifier.
        klass: target class drawn from the selector's classifier.

    Returns:
        network_id -> fraction in [0, 1]; networks with zero usable
        tests for the metric are omitted.

    Raises:
        ValidationError: selector has no classifier, or klass is not
            one of its classes.
    """
    selector = resolve_metric(metric)
    if selector.classifier is None:
        raise ValidationError(f"metric {selector.name}: has no class bins")
    if klass not in selector.classes:
        raise ValidationError(
            f"class {klass!r}: not a {selector.name} class"
        )
    fractions: dict[str, float] = {}
    for network_id, values in metric_values(ds, selector).items():
        hits = sum(1 for v in values if selector.classifier(v) is klass)
        fractions[network_id] = hits / len(values)
    return fractions


@dataclasses.dataclass(frozen=True)
class CdfSeries:
    """Empirical distribution of per-network fractions.

    sorted_values is ascending; both CDF readings are exposed because
    figures are quoted either way ("X% of networks have >= Y% of
    tests ..." versus F(x)).
    """

    fractions: Mapping[str, float]
    sorted_values: tuple[float, ...]
    n_networks: int

    def at_least(self, p: float) -> float:
        """Share of networks whose fraction is >= p."""
        idx = bisect.bisect_left(self.sorted_values, p)
        return (self.n_networks - idx) / self.n_networks

    def cdf(self, x: float) -> float:
        """F(x): share of networks whose fraction is <= x."""
        return bisect.bisect_right(self.sorted_values, x) / self.n_networks


def crux_cdf(fractions: Mapping[str, float]) -> CdfSeries:
    """Builds the network-level CDF over per-network fractions.

    Raises:
        ValidationError: empty input or a fraction outside [0, 1].
    """
    if not fractions:
        raise ValidationError("fractions: empty input")
    for network_id, value in fractions.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValidationError(f"fractions[{network_id}]: expected a number")
        if math.isnan(value) or not 0.0 <= value <= 1.0:
            raise ValidationError(f"fractions[{network_id}]: outside [0, 1]")
    return CdfSeries(
        fractions=dict(fractions),
        sorted_values=tuple(sorted(float(v) for v in fractions.values())),
        n_networks=len(fractions),
    )


@dataclasses.dataclass(frozen=True)
class BoxStats:
    """Five-number summary with Tukey whiskers and explicit outliers."""

    n: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_low: float
    whisker_high: float
    outliers: tuple[float, ...]


def box_stats(values: Iterable[float]) -> BoxStats:
    """Summarizes values for a box plot.

    Whiskers extend to the furthest point within 1.5 x IQR of the
    quartiles; when no point lies beyond a quartile the whisker is
    clamped onto the quartile itself, so whisker_low <= q1 and
    q3 <= whisker_high always hold.

    Raises:
        ValidationError: empty input or a non-finite value.
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValidationError("box_stats: empty input")
    if any(math.isnan(v) or math.isinf(v) for v in vals):
        raise ValidationError("box_stats: values must be finite")
    n = len(vals)
    if n == 1:
        v = vals[0]
        return BoxStats(
            n=1, min=v, q1=v, median=v, q3=v, max=v,
            whisker_low=v, whisker_high=v, outliers=(),
        )
    q1, median, q3 = statistics.quantiles(vals, n=4, method="inclusive")
    reach = 1.5 * (q3 - q1)
    whisker_low = min(v for v in vals if v >= q1 - reach)
    if whisker_low > q1:
        whisker_low = q1
    whisker_high = max(v for v in vals if v <= q3 + reach)
    if whisker_high < q3:
        whisker_high = q3
    outliers = tuple(v for v in vals if v < whisker_low or v > whisker_high)
    return BoxStats(
        n=n,
        min=vals[0],
        q1=q1,
        median=median,
        q3=q3,
        max=vals[-1],
        whisker_low=whisker_low,
        whisker_high=whisker_high,
        outliers=outliers,
    )
