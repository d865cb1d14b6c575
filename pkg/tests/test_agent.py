"""Agent runtime: config, spool, instruction handling, upload retry."""

import json
from dataclasses import replace
from datetime import datetime, timedelta, timezone

import pytest

from amigobench.agent import (
    Agent,
    AgentConfig,
    ScriptedSensors,
    SensorReading,
    Spool,
    StubProbeRunner,
    agent_config_from_dict,
    load_agent_config,
    replay_violations,
)
from amigobench.domain.records import (
    Connectivity,
    DnsResult,
    ExperimentKind,
    ExperimentSpec,
    GpsFix,
    Instruction,
    InstructionKind,
    InstructionState,
    MeasurementRecord,
    ResolverClass,
    ScheduleRule,
    SpeedtestResult,
)
from amigobench.errors import TransportError, ValidationError

T0 = datetime(2024, 1, 1, 0, 0, 0, tzinfo=timezone.utc)
GIB = 2**30


def reading(battery=80, connectivity=Connectivity.MOBILE, gps=None):
    return SensorReading(
        battery_pct=battery,
        connectivity=connectivity,
        operator_name="op-a",
        network_id="901-01",
        gps=gps,
    )


def speed_payload():
    return SpeedtestResult(
        down_mbps=20.0, up_mbps=4.0, bytes_down=25_000_000, bytes_up=5_000_000,
        duration_s=10.0,
    )


def dns_payload():
    return DnsResult(
        domain="a.example", resolver_ip="8.8.8.8",
        resolver_class=ResolverClass.GOOGLE_DNS, lookup_ms=40.0, success=True,
    )


class FakeClient:
    """In-memory stand-in for ServerClient with a reachability switch."""

    def __init__(self):
        self.up = True
        self.statuses = []
        self.queue = []
        self.acks = []
        self.stored_ids = set()
        self.accepted_events = []

    def _check(self):
        if not self.up:
            raise TransportError("server unreachable")

    def post_status(self, status):
        self._check()
        self.statuses.append(status)
        return len(self.queue)

    def fetch_instructions(self, device_id):
        self._check()
        batch = [i for i in self.queue if i.device_id == device_id]
        self.queue = [i for i in self.queue if i.device_id != device_id]
        return [replace(i, state=InstructionState.DELIVERED) for i in batch]

    def ack(self, device_id, instruction_id, outcome, detail):
        self._check()
        self.acks.append((instruction_id, outcome, detail))

    def submit_results(self, device_id, records):
        self._check()
        fresh = [r for r in records if r.record_id not in self.stored_ids]
        self.stored_ids.update(r.record_id for r in fresh)
        self.accepted_events.append(len(fresh))
        return len(fresh), []


def make_config(tmp_path, experiments=(), **overrides):
    base = AgentConfig(
        device_id="phone-01",
        server_url="http://127.0.0.1:1",
        spool_dir=str(tmp_path / "spool"),
        experiments=tuple(experiments),
    )
    return replace(base, **overrides)


def speed_spec(spec_id="speed-1", **rule):
    return ExperimentSpec(
        id=spec_id,
        kind=ExperimentKind.SPEEDTEST,
        params={"host": "127.0.0.1", "port": 1, "duration_s": 10.0},
        schedule=replace(ScheduleRule(), **rule),
    )


def make_agent(tmp_path, experiments=(), sensors=None, runner=None, **overrides):
    config = make_config(tmp_path, experiments, **overrides)
    sensors = sensors or ScriptedSensors([(T0, reading())])
    runner = runner or StubProbeRunner(
        {ExperimentKind.SPEEDTEST: [(speed_payload(), 30_000_000)]}
    )
    client = FakeClient()
    return Agent(config, sensors, client, runner), client


def pause_instruction(duration_s=3600.0, instruction_id="i1"):
    return Instruction(
        id=instruction_id,
        device_id="phone-01",
        created_at=T0,
        kind=InstructionKind.PAUSE,
        params={"duration": duration_s},
        state=InstructionState.DELIVERED,
    )


# Config


def test_config_from_dict_fills_defaults(tmp_path):
    config = agent_config_from_dict(
        {
            "device_id": "phone-01",
            "server_url": "http://h:1",
            "spool_dir": str(tmp_path),
            "experiments": [
                {"id": "s1", "kind": "speedtest", "params": {"host": "h", "port": 1}}
            ],
        }
    )
    assert config.report_interval_s == 300.0
    assert config.schedule == ScheduleRule()
    assert config.experiments[0].schedule.interval == 1800.0
    assert config.reset_hour_utc == 3


def test_config_schedule_override_inherited_by_experiments(tmp_path):
    config = agent_config_from_dict(
        {
            "device_id": "d",
            "server_url": "u",
            "spool_dir": str(tmp_path),
            "schedule": {"interval": 600.0},
            "experiments": [
                {"id": "s1", "kind": "speedtest", "params": {"host": "h", "port": 1}}
            ],
        }
    )
    assert config.schedule.interval == 600.0
    assert config.schedule.battery_floor_pct == 15  # untouched default
    assert config.experiments[0].schedule.interval == 600.0


def test_config_partial_experiment_schedule_inherits_the_rest(tmp_path):
    config = agent_config_from_dict(
        {
            "device_id": "d",
            "server_url": "u",
            "spool_dir": str(tmp_path),
            "schedule": {"battery_floor_pct": 30},
            "experiments": [
                {
                    "id": "s1",
                    "kind": "speedtest",
                    "params": {"host": "h", "port": 1},
                    "schedule": {"interval": 600.0},
                }
            ],
        }
    )
    assert config.experiments[0].schedule.interval == 600.0
    assert config.experiments[0].schedule.battery_floor_pct == 30

    with pytest.raises(ValidationError, match=r"experiments\[0\].schedule"):
        agent_config_from_dict(
            {
                "device_id": "d",
                "server_url": "u",
                "spool_dir": str(tmp_path),
                "experiments": [
                    {
                        "id": "s1",
                        "kind": "speedtest",
                        "params": {"host": "h", "port": 1},
                        "schedule": "hourly",
                    }
                ],
            }
        )


@pytest.mark.parametrize(
    "broken,needle",
    [
        ({"server_url": ""}, "server_url"),
        ({"report_interval_s": 0}, "report_interval"),
        ({"reset_hour_utc": 24}, "reset_hour"),
    ],
)
def test_config_validation_names_field(tmp_path, broken, needle):
    data = {"device_id": "d", "server_url": "u", "spool_dir": str(tmp_path)}
    data.update(broken)
    with pytest.raises(ValidationError) as err:
        agent_config_from_dict(data)
    assert needle in str(err.value)


def test_config_rejects_duplicate_experiment_ids(tmp_path):
    spec = {"id": "s1", "kind": "speedtest", "params": {"host": "h", "port": 1}}
    with pytest.raises(ValidationError) as err:
        agent_config_from_dict(
            {
                "device_id": "d",
                "server_url": "u",
                "spool_dir": str(tmp_path),
                "experiments": [spec, dict(spec)],
            }
        )
    assert "duplicate" in str(err.value)


def test_load_agent_config_toml_and_json(tmp_path):
    toml_file = tmp_path / "agent.toml"
    toml_file.write_text(
        f'device_id = "phone-01"\n'
        f'server_url = "http://h:1"\n'
        f'spool_dir = "{tmp_path}/sp"\n'
        f"[schedule]\ninterval = 900.0\n"
        f'[[experiments]]\nid = "s1"\nkind = "speedtest"\n'
        f"[experiments.params]\nhost = \"h\"\nport = 1\n"
    )
    from_toml = load_agent_config(toml_file)
    assert from_toml.schedule.interval == 900.0
    assert from_toml.experiments[0].params["port"] == 1

    json_file = tmp_path / "agent.json"
    json_file.write_text(
        json.dumps(
            {"device_id": "phone-01", "server_url": "http://h:1", "spool_dir": "sp"}
        )
    )
    assert load_agent_config(json_file).device_id == "phone-01"


# Spool


def spooled_record(record_id, timestamp=T0):
    return MeasurementRecord(
        record_id=record_id,
        device_id="phone-01",
        network_id="901-01",
        experiment_kind=ExperimentKind.SPEEDTEST,
        timestamp=timestamp,
        payload=speed_payload(),
    )


def test_spool_fifo_across_days(tmp_path):
    spool = Spool(tmp_path)
    spool.append(spooled_record("r1", T0))
    spool.append(spooled_record("r2", T0 + timedelta(hours=1)))
    spool.append(spooled_record("r3", T0 + timedelta(days=1)))
    assert [r.record_id for r in spool.pending()] == ["r1", "r2", "r3"]
    assert len(list((tmp_path).glob("spool-*.jsonl"))) == 2
    spool.mark_uploaded(2)
    assert [r.record_id for r in spool.pending()] == ["r3"]
    assert spool.pending_count() == 1
    assert spool.all_ids() == {"r1", "r2", "r3"}


def test_spool_limit_and_overmark(tmp_path):
    spool = Spool(tmp_path)
    for i in range(5):
        spool.append(spooled_record(f"r{i}"))
    assert [r.record_id for r in spool.pending(limit=2)] == ["r0", "r1"]
    with pytest.raises(ValidationError):
        spool.mark_uploaded(6)
    assert spool.pending_count() == 5  # failed mark must not move the cursor


def test_spool_cursor_survives_reopen(tmp_path):
    spool = Spool(tmp_path)
    for i in range(3):
        spool.append(spooled_record(f"r{i}"))
    spool.mark_uploaded(1)
    reopened = Spool(tmp_path)
    assert [r.record_id for r in reopened.pending()] == ["r1", "r2"]


# Status collection and the data ledger


def test_collect_status_reflects_sensors_and_ledger(tmp_path):
    gps = GpsFix(lat=45.0, lon=7.6)
    agent, _ = make_agent(
        tmp_path, sensors=ScriptedSensors([(T0, reading(battery=64, gps=gps))])
    )
    agent.account_data(GIB, T0)
    status = agent.collect_status(T0)
    assert status.battery_pct == 64
    assert status.connectivity is Connectivity.MOBILE
    assert status.gps == gps
    assert status.data_used_today == GIB
    assert status.device_id == "phone-01"


def test_collect_status_survives_sensor_failure(tmp_path):
    class BrokenSensors:
        def read(self, now):
            raise OSError("no sensor bus")

    agent, _ = make_agent(tmp_path, sensors=BrokenSensors())
    status = agent.collect_status(T0)
    assert status.battery_pct is None
    assert status.connectivity is Connectivity.NONE
    assert status.gps is None


def test_ledger_accumulates_and_resets_on_utc_day(tmp_path):
    agent, _ = make_agent(tmp_path)
    agent.account_data(3 * GIB, T0)
    agent.account_data(2 * GIB, T0 + timedelta(hours=2))
    assert agent.state.ledger_bytes == 5 * GIB
    agent.account_data(10, T0 + timedelta(days=1))
    assert agent.state.ledger_bytes == 10
    agent.account_data(0, T0 + timedelta(days=1, hours=1))
    assert agent.state.ledger_bytes == 10


# Instructions


def test_pause_sets_and_resume_clears(tmp_path):
    agent, _ = make_agent(tmp_path, experiments=[speed_spec()])
    outcome, detail = agent.apply_instruction(pause_instruction(3600.0), T0)
    assert outcome == "acked"
    assert agent.state.paused_until == T0 + timedelta(hours=1)
    agent.maybe_run_experiments(T0 + timedelta(minutes=5))
    assert agent.decisions[-1].ran is False

    resume = Instruction(
        id="i2", device_id="phone-01", created_at=T0,
        kind=InstructionKind.RESUME, params={}, state=InstructionState.DELIVERED,
    )
    outcome, _ = agent.apply_instruction(resume, T0)
    assert outcome == "acked"
    assert agent.state.paused_until is None


def test_run_now_bypasses_interval_once(tmp_path):
    agent, _ = make_agent(tmp_path, experiments=[speed_spec()])
    agent.maybe_run_experiments(T0)
    assert agent.decisions[-1].ran is True
    agent.maybe_run_experiments(T0 + timedelta(minutes=5))
    assert agent.decisions[-1].ran is False  # within interval

    run_now = Instruction(
        id="i3", device_id="phone-01", created_at=T0,
        kind=InstructionKind.RUN_NOW, params={"experiment_id": "speed-1"},
        state=InstructionState.DELIVERED,
    )
    outcome, detail = agent.apply_instruction(run_now, T0 + timedelta(minutes=10))
    assert (outcome, detail) == ("acked", "run scheduled: speed-1")
    agent.maybe_run_experiments(T0 + timedelta(minutes=10))
    assert agent.decisions[-1].ran is True
    assert agent.decisions[-1].forced is True
    agent.maybe_run_experiments(T0 + timedelta(minutes=15))
    assert agent.decisions[-1].ran is False  # force was consumed


def test_run_now_of_unknown_experiment_fails(tmp_path):
    agent, _ = make_agent(tmp_path, experiments=[speed_spec()])
    run_now = Instruction(
        id="i4", device_id="phone-01", created_at=T0,
        kind=InstructionKind.RUN_NOW, params={"experiment_id": "nope"},
        state=InstructionState.DELIVERED,
    )
    outcome, detail = agent.apply_instruction(run_now, T0)
    assert outcome == "failed"
    assert "nope" in detail


def test_open_tunnel_acks_stub_detail(tmp_path):
    agent, _ = make_agent(tmp_path)
    tunnel = Instruction(
        id="i5", device_id="phone-01", created_at=T0,
        kind=InstructionKind.OPEN_TUNNEL, params={"host": "jump.example", "port": 2222},
        state=InstructionState.DELIVERED,
    )
    assert agent.apply_instruction(tunnel, T0) == (
        "acked", "stub: tunnel requested jump.example:2222"
    )


def test_update_config_applies_and_validates(tmp_path):
    agent, _ = make_agent(tmp_path)
    update = Instruction(
        id="i6", device_id="phone-01", created_at=T0,
        kind=InstructionKind.UPDATE_CONFIG,
        params={"key": "report_interval_s", "value": 600.0},
        state=InstructionState.DELIVERED,
    )
    outcome, _ = agent.apply_instruction(update, T0)
    assert outcome == "acked"
    assert agent.config.report_interval_s == 600.0

    bad_value = replace(update, params={"key": "report_interval_s", "value": -1})
    outcome, detail = agent.apply_instruction(bad_value, T0)
    assert outcome == "failed"
    assert agent.config.report_interval_s == 600.0  # unchanged on failure

    bad_key = replace(update, params={"key": "warp_speed", "value": 9})
    outcome, detail = agent.apply_instruction(bad_key, T0)
    assert (outcome, "warp_speed" in detail) == ("failed", True)


def test_bad_pause_params_fail_gracefully(tmp_path):
    agent, _ = make_agent(tmp_path)
    broken = pause_instruction()
    broken = replace(broken, params={"duration": "soon"})
    outcome, detail = agent.apply_instruction(broken, T0)
    assert outcome == "failed"
    assert agent.state.paused_until is None


# Report tick and upload retry


def test_report_tick_full_exchange(tmp_path):
    agent, client = make_agent(tmp_path, experiments=[speed_spec()])
    client.queue.append(pause_instruction(600.0, "i1"))
    client.queue.append(
        Instruction(
            id="i2", device_id="phone-01", created_at=T0,
            kind=InstructionKind.RESUME, params={}, state=InstructionState.PENDING,
        )
    )
    agent.maybe_run_experiments(T0)  # spools one record
    assert agent.report_tick(T0 + timedelta(minutes=5)) is True
    assert len(client.statuses) == 1
    assert [a[0] for a in client.acks] == ["i1", "i2"]
    assert client.stored_ids == {"phone-01-speed-1-20240101T000000-0"}
    assert agent.spool.pending_count() == 0


def test_report_tick_outage_keeps_state(tmp_path):
    agent, client = make_agent(tmp_path, experiments=[speed_spec()])
    agent.maybe_run_experiments(T0)
    client.up = False
    assert agent.report_tick(T0) is False
    assert agent.spool.pending_count() == 1
    assert client.statuses == []


def test_outage_then_recovery_stores_exactly_once(tmp_path):
    agent, client = make_agent(tmp_path, experiments=[speed_spec(interval=300.0)])
    client.up = False
    produced = []
    for minutes in (0, 5, 10):
        now = T0 + timedelta(minutes=minutes)
        produced += agent.maybe_run_experiments(now)
        agent.report_tick(now)
    assert agent.spool.pending_count() == 3
    client.up = True
    agent.report_tick(T0 + timedelta(minutes=15))
    assert client.stored_ids == {r.record_id for r in produced}
    assert agent.spool.pending_count() == 0
    assert all(n > 0 for n in client.accepted_events)  # no wasted resends


def test_crash_between_upload_and_cursor_is_safe(tmp_path):
    agent, client = make_agent(tmp_path, experiments=[speed_spec()])
    agent.maybe_run_experiments(T0)
    batch = agent.spool.pending()
    client.submit_results("phone-01", batch)  # uploaded, then crash before mark
    config = make_config(tmp_path, [speed_spec()])
    revived = Agent(
        config, ScriptedSensors([(T0, reading())]), client,
        StubProbeRunner({ExperimentKind.SPEEDTEST: [(speed_payload(), 1)]}),
    )
    assert revived.report_tick(T0 + timedelta(minutes=5)) is True
    assert len(client.stored_ids) == 1  # duplicate was deduplicated server-side
    assert revived.spool.pending_count() == 0


# Ticking, nightly reset, determinism


def two_day_sensors():
    steps = [(T0, reading())]
    steps.append((T0 + timedelta(hours=6), reading(battery=40)))
    steps.append((T0 + timedelta(hours=12), reading(connectivity=Connectivity.BOTH)))
    steps.append((T0 + timedelta(hours=14), reading()))
    steps.append((T0 + timedelta(days=1, hours=2), reading(battery=8)))
    steps.append((T0 + timedelta(days=1, hours=8), reading(battery=90)))
    return ScriptedSensors(steps)


def run_sim(tmp_path, name, hours=30, step_minutes=5):
    config = make_config(
        tmp_path / name,
        [speed_spec(), speed_spec("dns-1")],
    )
    runner = StubProbeRunner(
        {ExperimentKind.SPEEDTEST: [(speed_payload(), 30_000_000)]}
    )
    agent = Agent(config, two_day_sensors(), FakeClient(), runner)
    steps = int(hours * 60 / step_minutes)
    for i in range(steps):
        agent.tick(T0 + timedelta(minutes=step_minutes * i))
    return agent


def test_nightly_reset_clears_pause_preserves_rest(tmp_path):
    agent, client = make_agent(tmp_path, experiments=[speed_spec()])
    agent.tick(T0)  # day starts; reset for today considered pending (before 03:00)
    agent.apply_instruction(pause_instruction(12 * 3600), T0 + timedelta(hours=1))
    agent.account_data(123, T0 + timedelta(hours=1))
    spooled_before = agent.spool.pending_count()
    agent.tick(T0 + timedelta(hours=2, minutes=55))
    assert agent.state.paused_until is not None
    agent.tick(T0 + timedelta(hours=3))
    assert agent.state.paused_until is None  # 03:00 reset fired
    # Runs at 00:00 and 03:00 added 30 MB each; the reset itself zeroed
    # nothing (reset is not a day rollover), so the manual 123 survives.
    assert agent.state.ledger_bytes == 60_000_123
    assert agent.spool.pending_count() >= spooled_before


def test_sim_timeline_decisions_replay_clean(tmp_path):
    agent = run_sim(tmp_path, "a")
    assert len(agent.decisions) >= 200
    assert replay_violations(agent.decisions) == []
    ran = [d for d in agent.decisions if d.ran]
    assert ran, "timeline must exercise some runs"
    skipped_reasons = {
        check.gate
        for d in agent.decisions if not d.ran
        for check in d.gates if not check.ok
    }
    # The scripted timeline exercises every gate at least once.
    assert {"interval", "connectivity", "battery"} <= skipped_reasons


def test_sim_timeline_is_deterministic(tmp_path):
    first = run_sim(tmp_path, "a")
    second = run_sim(tmp_path, "b")
    assert first.decisions == second.decisions
