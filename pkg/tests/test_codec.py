"""Wire-codec round trips and format pinning.

Every encoder/decoder pair must satisfy decode(encode(x)) == x, and the
encoded form must follow the conventions: RFC 3339 UTC timestamps with a
Z suffix, lower-snake enum strings, optional fields omitted when None.
"""

import json
from datetime import datetime, timezone

import pytest
from hypothesis import given

from amigobench.domain import codec
from amigobench.domain import (
    CacheStatus,
    CdnResult,
    Connectivity,
    DeviceStatus,
    ExperimentKind,
    MeasurementRecord,
    SpeedtestResult,
    validate_instruction,
    validate_record,
)
from amigobench.errors import ParseError

from tests import strategies as m


def test_rfc3339_format_is_pinned():
    stamp = datetime(2024, 3, 5, 12, 30, 15, tzinfo=timezone.utc)
    assert codec.rfc3339(stamp) == "2024-03-05T12:30:15Z"
    micro = datetime(2024, 3, 5, 12, 30, 15, 250_000, tzinfo=timezone.utc)
    assert codec.rfc3339(micro) == "2024-03-05T12:30:15.250000Z"


def test_rfc3339_normalizes_offsets_to_utc():
    from datetime import timedelta

    offset = timezone(timedelta(hours=2))
    stamp = datetime(2024, 3, 5, 14, 30, 15, tzinfo=offset)
    assert codec.rfc3339(stamp) == "2024-03-05T12:30:15Z"


@pytest.mark.parametrize("bad", ["2024-03-05T12:30:15", "not-a-time", "", 42])
def test_parse_rfc3339_rejects_naive_or_malformed(bad):
    with pytest.raises(ParseError):
        codec.parse_rfc3339(bad)


@given(m.utc_datetimes)
def test_rfc3339_round_trip(stamp):
    assert codec.parse_rfc3339(codec.rfc3339(stamp)) == stamp


@given(m.device_statuses)
def test_device_status_round_trip(status):
    encoded = codec.device_status_to_dict(status)
    json.dumps(encoded)  # must be JSON-serializable as-is
    assert codec.device_status_from_dict(encoded) == status


@given(m.instructions())
def test_instruction_round_trip(instruction):
    validate_instruction(instruction)
    encoded = codec.instruction_to_dict(instruction)
    json.dumps(encoded)
    assert codec.instruction_from_dict(encoded) == instruction


@given(m.experiment_specs())
def test_experiment_spec_round_trip(spec):
    encoded = codec.experiment_spec_to_dict(spec)
    json.dumps(encoded)
    assert codec.experiment_spec_from_dict(encoded) == spec


@given(m.measurement_records())
def test_measurement_record_round_trip(record):
    validate_record(record)
    encoded = codec.record_to_dict(record)
    json.dumps(encoded)
    assert codec.record_from_dict(encoded) == record


@given(m.schedule_rules)
def test_schedule_rule_round_trip(rule):
    assert codec.schedule_rule_from_dict(codec.schedule_rule_to_dict(rule)) == rule


def test_enums_encode_as_lower_snake_strings():
    status = DeviceStatus(
        device_id="d01",
        timestamp=datetime(2024, 1, 1, tzinfo=timezone.utc),
        battery_pct=None,
        connectivity=Connectivity.MOBILE,
        operator_name="op",
        network_id="net-1",
        gps=None,
        data_used_today=0,
        agent_version="0.1.0",
    )
    encoded = codec.device_status_to_dict(status)
    assert encoded["connectivity"] == "mobile"
    # None-valued optionals are omitted, not serialized as null.
    assert "battery_pct" not in encoded
    assert "gps" not in encoded


def test_record_payload_field_names_are_pinned():
    record = MeasurementRecord(
        record_id="r1",
        device_id="d01",
        network_id="net-1",
        experiment_kind=ExperimentKind.SPEEDTEST,
        timestamp=datetime(2024, 1, 1, tzinfo=timezone.utc),
        payload=SpeedtestResult(
            down_mbps=21.5, up_mbps=4.2, bytes_down=10, bytes_up=2, duration_s=10.0
        ),
    )
    encoded = codec.record_to_dict(record)
    assert set(encoded) == {
        "record_id",
        "device_id",
        "network_id",
        "experiment_kind",
        "timestamp",
        "payload",
    }
    assert encoded["experiment_kind"] == "speedtest"
    assert set(encoded["payload"]) == {
        "down_mbps",
        "up_mbps",
        "bytes_down",
        "bytes_up",
        "duration_s",
    }


def test_decoder_names_missing_field():
    with pytest.raises(ParseError, match="connectivity"):
        codec.device_status_from_dict(
            {"device_id": "d01", "timestamp": "2024-01-01T00:00:00Z"}
        )


def test_decoder_names_unknown_enum_value():
    with pytest.raises(ParseError, match="experiment_kind"):
        codec.record_from_dict(
            {
                "record_id": "r1",
                "device_id": "d01",
                "network_id": "n",
                "experiment_kind": "warp",
                "timestamp": "2024-01-01T00:00:00Z",
                "payload": {},
            }
        )


def test_jsonl_round_trip(tmp_path):
    rows = [{"a": 1}, {"b": [1, 2, 3]}, {"c": "x"}]
    path = tmp_path / "rows.jsonl"
    assert codec.write_jsonl(path, rows) == 3
    assert list(codec.iter_jsonl(path)) == rows


def test_jsonl_reports_bad_line_number(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"ok": 1}\n{broken\n', encoding="utf-8")
    with pytest.raises(ParseError, match=":2:"):
        list(codec.iter_jsonl(path))


def test_dumps_is_canonical():
    assert codec.dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'
