"""HTTP API: routing, status codes, and JSON shapes over a live server."""

import threading
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from types import SimpleNamespace

import pytest
import requests

from amigobench.domain import classify, codec
from amigobench.domain.records import (
    Connectivity,
    DeviceStatus,
    ExperimentKind,
    MeasurementRecord,
    SpeedtestResult,
)
from amigobench.server import ControlServer, Store, make_http_server

T0 = datetime(2024, 1, 1, 0, 0, 0, tzinfo=timezone.utc)


class FakeClock:
    def __init__(self) -> None:
        self.now = T0

    def __call__(self) -> datetime:
        return self.now

    def advance(self, seconds: float) -> None:
        self.now += timedelta(seconds=seconds)


@pytest.fixture()
def api(tmp_path):
    store = Store(tmp_path / "data")
    clock = FakeClock()
    core = ControlServer(store, clock=clock)
    httpd = make_http_server(core)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{httpd.server_address[1]}"
    yield SimpleNamespace(base=base, core=core, clock=clock)
    httpd.shutdown()
    httpd.server_close()
    store.close()


def status_body(device_id="phone-01", **overrides):
    base = DeviceStatus(
        device_id=device_id,
        timestamp=T0,
        battery_pct=64,
        connectivity=Connectivity.MOBILE,
        operator_name="op-a",
        network_id="901-01",
        gps=None,
        data_used_today=2048,
        agent_version="0.1.0",
    )
    return codec.device_status_to_dict(replace(base, **overrides))


def record_body(record_id, device_id="phone-01"):
    record = MeasurementRecord(
        record_id=record_id,
        device_id=device_id,
        network_id="901-01",
        experiment_kind=ExperimentKind.SPEEDTEST,
        timestamp=T0,
        payload=SpeedtestResult(
            down_mbps=42.0, up_mbps=7.0, bytes_down=52_500_000, bytes_up=8_750_000,
            duration_s=10.0,
        ),
    )
    return codec.record_to_dict(record)


def test_status_roundtrip_reports_pending(api):
    resp = requests.post(f"{api.base}/api/v1/status", json=status_body())
    assert resp.status_code == 200
    assert resp.json() == {"pending": 0}
    requests.post(
        f"{api.base}/api/v1/admin/instructions",
        json={"device_id": "phone-01", "kind": "resume", "params": {}},
    )
    resp = requests.post(f"{api.base}/api/v1/status", json=status_body())
    assert resp.json() == {"pending": 1}


def test_invalid_status_is_400_naming_field(api):
    resp = requests.post(
        f"{api.base}/api/v1/status", json=status_body(battery_pct=150)
    )
    assert resp.status_code == 400
    body = resp.json()
    assert body["kind"] == "validation"
    assert "battery" in body["error"]


def test_malformed_json_is_400(api):
    resp = requests.post(
        f"{api.base}/api/v1/status",
        data=b"{nope",
        headers={"Content-Type": "application/json"},
    )
    assert resp.status_code == 400
    assert resp.json()["kind"] == "validation"


def test_instruction_flow_over_http(api):
    requests.post(f"{api.base}/api/v1/status", json=status_body())
    created = requests.post(
        f"{api.base}/api/v1/admin/instructions",
        json={"device_id": "phone-01", "kind": "pause", "params": {"duration": 60}},
    )
    assert created.status_code == 200
    instruction_id = created.json()["id"]

    fetched = requests.get(f"{api.base}/api/v1/instructions/phone-01")
    assert fetched.status_code == 200
    (item,) = fetched.json()
    assert item["id"] == instruction_id
    assert item["state"] == "delivered"
    assert requests.get(f"{api.base}/api/v1/instructions/phone-01").json() == []

    ack_url = f"{api.base}/api/v1/instructions/phone-01/{instruction_id}/ack"
    first = requests.post(ack_url, json={"outcome": "acked", "detail": "paused"})
    assert first.status_code == 200 and first.json() == {"ok": True}

    second = requests.post(ack_url, json={"outcome": "acked", "detail": "again"})
    assert second.status_code == 409
    assert second.json()["kind"] == "lifecycle"


def test_admin_instruction_state_is_pollable(api):
    requests.post(f"{api.base}/api/v1/status", json=status_body())
    created = requests.post(
        f"{api.base}/api/v1/admin/instructions",
        json={"device_id": "phone-01", "kind": "pause", "params": {"duration": 60}},
    )
    instruction_id = created.json()["id"]
    url = f"{api.base}/api/v1/admin/instructions/{instruction_id}"

    assert requests.get(url).json()["state"] == "pending"
    requests.get(f"{api.base}/api/v1/instructions/phone-01")
    assert requests.get(url).json()["state"] == "delivered"
    requests.post(
        f"{api.base}/api/v1/instructions/phone-01/{instruction_id}/ack",
        json={"outcome": "acked", "detail": "paused 60s"},
    )
    polled = requests.get(url).json()
    assert polled["state"] == "acked"
    assert polled["outcome"] == "paused 60s"

    missing = requests.get(f"{api.base}/api/v1/admin/instructions/missing")
    assert missing.status_code == 404
    assert missing.json()["kind"] == "not_found"


def test_ack_unknown_instruction_is_404(api):
    resp = requests.post(
        f"{api.base}/api/v1/instructions/phone-01/missing/ack",
        json={"outcome": "acked", "detail": ""},
    )
    assert resp.status_code == 404
    assert resp.json()["kind"] == "not_found"


def test_ack_requires_outcome_string(api):
    resp = requests.post(
        f"{api.base}/api/v1/instructions/phone-01/x/ack", json={"detail": "d"}
    )
    assert resp.status_code == 400


def test_admin_instruction_rejects_bad_params(api):
    resp = requests.post(
        f"{api.base}/api/v1/admin/instructions",
        json={"device_id": "phone-01", "kind": "pause", "params": {}},
    )
    assert resp.status_code == 400
    assert "duration" in resp.json()["error"]


def test_results_bare_array_roundtrip(api):
    url = f"{api.base}/api/v1/results/phone-01"
    batch = [record_body("r1"), record_body("r2")]
    first = requests.post(url, json=batch)
    assert first.status_code == 200
    assert first.json() == {"accepted": 2, "rejected": []}
    again = requests.post(url, json=batch)
    assert again.json() == {"accepted": 0, "rejected": []}


def test_results_mismatch_listed_in_rejected(api):
    resp = requests.post(
        f"{api.base}/api/v1/results/phone-02", json=[record_body("r9")]
    )
    assert resp.json()["accepted"] == 0
    (reject,) = resp.json()["rejected"]
    assert reject == {"record_id": "r9", "reason": "device_id mismatch"}


def test_results_body_must_be_an_array(api):
    resp = requests.post(
        f"{api.base}/api/v1/results/phone-01", json={"records": []}
    )
    assert resp.status_code == 400
    assert "list" in resp.json()["error"]


def test_fleet_reflects_staleness(api):
    requests.post(f"{api.base}/api/v1/status", json=status_body("old"))
    api.clock.advance(18 * 60)
    requests.post(f"{api.base}/api/v1/status", json=status_body("fresh"))
    api.clock.advance(2 * 60)
    rows = requests.get(f"{api.base}/api/v1/admin/fleet").json()
    assert [(r["device_id"], r["stale"]) for r in rows] == [
        ("fresh", False),
        ("old", True),
    ]
    assert rows[0]["last_seen"] == "2024-01-01T00:18:00Z"


def test_device_records_query_params(api):
    requests.post(
        f"{api.base}/api/v1/results/phone-01",
        json=[record_body(f"r{i}") for i in range(4)],
    )
    url = f"{api.base}/api/v1/admin/devices/phone-01/records"
    rows = requests.get(url, params={"kind": "speedtest", "limit": 2}).json()
    assert [r["record_id"] for r in rows] == ["r3", "r2"]
    assert requests.get(url, params={"kind": "latency"}).json() == []
    assert requests.get(url, params={"kind": "bogus"}).status_code == 400
    assert requests.get(url, params={"limit": "ten"}).status_code == 400


def test_thresholds_document_matches_domain_constants(api):
    doc = requests.get(f"{api.base}/api/v1/admin/thresholds").json()
    assert doc["speed_mbps"] == {
        "slow_max": classify.SPEED_SLOW_MAX_MBPS,
        "fast_min": classify.SPEED_FAST_MIN_MBPS,
    }
    assert doc["latency_ms"]["exceptional_max"] == 20.0
    assert doc["speed_index_s"] == {"fast_max": 3.4, "slow_min": 5.8}
    assert doc["battery_floor_pct"] == 15
    assert doc["daily_data_cap_bytes"] == 4 * 2**30
    assert doc["report_interval_s"] == 300.0
    assert doc["stale_after_s"] == 900


def test_cors_preflight_and_headers(api):
    preflight = requests.options(f"{api.base}/api/v1/admin/fleet")
    assert preflight.status_code == 204
    assert preflight.headers["Access-Control-Allow-Origin"] == "*"
    assert "POST" in preflight.headers["Access-Control-Allow-Methods"]
    normal = requests.get(f"{api.base}/api/v1/admin/fleet")
    assert normal.headers["Access-Control-Allow-Origin"] == "*"


def test_unknown_route_is_404(api):
    resp = requests.get(f"{api.base}/api/v1/admin/nope")
    assert resp.status_code == 404
    assert resp.json()["kind"] == "not_found"


def test_survives_many_concurrent_clients(api):
    requests.post(f"{api.base}/api/v1/status", json=status_body())
    errors: list[Exception] = []

    def hammer(n):
        try:
            for i in range(5):
                requests.post(
                    f"{api.base}/api/v1/results/phone-01",
                    json=[record_body(f"c{n}-{i}")],
                ).raise_for_status()
        except Exception as exc:  # pragma: no cover - failure detail
            errors.append(exc)

    threads = [threading.Thread(target=hammer, args=(n,)) for n in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    rows = requests.get(
        f"{api.base}/api/v1/admin/devices/phone-01/records"
    ).json()
    assert len(rows) == 30
