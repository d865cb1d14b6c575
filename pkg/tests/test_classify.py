"""Classifier boundary behaviour, pinned value by value.

The tables below are the reporting contract: every boundary is listed
with its expected class so a threshold regression fails loudly.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from amigobench.domain import (
    LatencyClass,
    ResolverClass,
    SpeedClass,
    SpeedIndexClass,
    classify_latency,
    classify_resolver,
    classify_speed,
    classify_speed_index,
)
from amigobench.errors import ValidationError

SPEED_TABLE = [
    (0.0, SpeedClass.SLOW),
    (14.999, SpeedClass.SLOW),
    (15.0, SpeedClass.SLOW),
    (15.001, SpeedClass.AVERAGE),
    (29.999, SpeedClass.AVERAGE),
    (30.0, SpeedClass.FAST),
    (120.0, SpeedClass.FAST),
]

LATENCY_TABLE = [
    (0.0, LatencyClass.EXCEPTIONAL),
    (20.0, LatencyClass.EXCEPTIONAL),
    (21.0, LatencyClass.UNCLASSIFIED),
    (49.999, LatencyClass.UNCLASSIFIED),
    (50.0, LatencyClass.GOOD_TO_AVERAGE),
    (100.0, LatencyClass.GOOD_TO_AVERAGE),
    (100.001, LatencyClass.UNCLASSIFIED),
    (149.0, LatencyClass.UNCLASSIFIED),
    (150.0, LatencyClass.LESS_DESIRABLE),
    (2000.0, LatencyClass.LESS_DESIRABLE),
]

SPEED_INDEX_TABLE = [
    (0.0, SpeedIndexClass.FAST),
    (3.4, SpeedIndexClass.FAST),
    (3.5, SpeedIndexClass.MODERATE),
    (5.799, SpeedIndexClass.MODERATE),
    (5.8, SpeedIndexClass.SLOW),
    (30.0, SpeedIndexClass.SLOW),
]


@pytest.mark.parametrize("mbps,expected", SPEED_TABLE)
def test_speed_boundaries(mbps, expected):
    assert classify_speed(mbps) is expected


@pytest.mark.parametrize("rtt,expected", LATENCY_TABLE)
def test_latency_boundaries(rtt, expected):
    assert classify_latency(rtt) is expected


@pytest.mark.parametrize("seconds,expected", SPEED_INDEX_TABLE)
def test_speed_index_boundaries(seconds, expected):
    assert classify_speed_index(seconds) is expected


@pytest.mark.parametrize(
    "classifier", [classify_speed, classify_latency, classify_speed_index]
)
@pytest.mark.parametrize("bad", [-0.001, -5, float("nan"), float("inf"), "12"])
def test_rejects_bad_samples(classifier, bad):
    with pytest.raises(ValidationError):
        classifier(bad)


@given(st.floats(min_value=0, max_value=10_000, allow_nan=False))
def test_every_speed_sample_gets_exactly_one_class(mbps):
    assert classify_speed(mbps) in set(SpeedClass)


@given(st.floats(min_value=0, max_value=100_000, allow_nan=False))
def test_every_latency_sample_gets_exactly_one_class(rtt):
    assert classify_latency(rtt) in set(LatencyClass)


@given(st.floats(min_value=0, max_value=1_000, allow_nan=False))
def test_speed_classes_are_monotone(mbps):
    # A faster sample never maps to a slower class.
    order = {SpeedClass.SLOW: 0, SpeedClass.AVERAGE: 1, SpeedClass.FAST: 2}
    assert order[classify_speed(mbps + 1.0)] >= order[classify_speed(mbps)]


@pytest.mark.parametrize(
    "address,expected",
    [
        ("8.8.8.8", ResolverClass.GOOGLE_DNS),
        ("8.8.4.4", ResolverClass.GOOGLE_DNS),
        ("8.8.8.9", ResolverClass.OPERATOR_LOCAL),
        ("1.1.1.1", ResolverClass.OPERATOR_LOCAL),
        ("10.20.0.1", ResolverClass.OPERATOR_LOCAL),
        ("127.0.0.1", ResolverClass.OPERATOR_LOCAL),
    ],
)
def test_resolver_attribution(address, expected):
    assert classify_resolver(address) is expected


@pytest.mark.parametrize(
    "bad", ["8.8.8", "8.8.8.256", "google-dns", "", "8.8.8.8.8", "::1"]
)
def test_resolver_rejects_malformed_addresses(bad):
    with pytest.raises(ValidationError):
        classify_resolver(bad)
