"""In-process fleet rehearsal.

Boots the simulated network, a real control server over HTTP, and a
handful of scripted-sensor agents driven by a simulated clock, then
runs the analysis pipeline over the collected store. Probe payloads
come from the model-backed runner (the same seeded model the simnet
services use), so a fixed seed reproduces the analysis outputs
byte-for-byte; the simnet harness is still booted and smoke-probed
live to prove the serving path works.

Stages run in order: scenario, simnet, server, agents, import,
analyze. Any failure raises StageError naming the stage. Shutdown is
ordered agents, then server, then simnet.
"""

from __future__ import annotations

import csv
import dataclasses
import threading
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable, Optional

from amigobench.agent.config import AgentConfig
from amigobench.agent.client import ServerClient
from amigobench.agent.runners import ModelProbeRunner
from amigobench.agent.runtime import Agent
from amigobench.agent.scheduler import replay_violations
from amigobench.agent.sensors import ScriptedSensors, SensorReading
from amigobench.analysis import (
    build_dataset,
    emit_report,
    load_records,
    load_registry_csv,
)
from amigobench.domain.records import (
    Connectivity,
    Continent,
    ExperimentKind,
    ExperimentSpec,
    Instruction,
    InstructionKind,
    InstructionState,
    MeasurementRecord,
)
from amigobench.errors import AmigoError, StageError, ValidationError
from amigobench.probes.dnsquery import probe_dns
from amigobench.probes.youtube import parse_youtube_stats
from amigobench.server.api import make_http_server
from amigobench.server.core import ControlServer
from amigobench.server.store import Store
from amigobench.simnet.model import ServiceModel
from amigobench.simnet.prng import keyed_uniform
from amigobench.simnet.scenario import Scenario, default_scenario, load_scenario
from amigobench.simnet.services import serve

T0 = datetime(2024, 1, 1, tzinfo=timezone.utc)
TICK_S = 300.0

# Fleet texture: operators, where they are, and how good their network
# is relative to the scenario baseline. Cycled when n_agents is larger.
_OPERATORS = (
    ("Savanna Mobile", "Kenya", Continent.AFRICA),
    ("Alpe Telecom", "Italy", Continent.EUROPE),
    ("Outback Wireless", "Australia", Continent.AUSTRALIA),
    ("Sakura Net", "Japan", Continent.ASIA),
    ("Selva Movel", "Brazil", Continent.CENTRAL_SOUTH_AMERICA),
    ("Aurora Cell", "Canada", Continent.OTHER),
)
_SPEED_FACTORS = (1.0, 0.3, 2.0, 0.12, 1.5, 0.6)
_DNS_FACTORS = (1.0, 3.5, 0.5, 6.0, 1.2, 2.0)

_RESOLUTION_DIMS = {
    "r144": "256x144",
    "r240": "426x240",
    "r360": "640x360",
    "r480": "854x480",
    "r720": "1280x720",
}

_ARTIFACTS = ("server", "registry.csv", "report", "spool", "youtube")


@dataclasses.dataclass(frozen=True)
class DemoParams:
    """Knobs for one rehearsal run.

    seed overrides the scenario's own seed when given, so one scenario
    file can drive distinct-but-reproducible fleets.
    """

    out_dir: Path
    scenario_path: Optional[Path] = None
    n_agents: int = 4
    sim_days: float = 2.0
    seed: Optional[int] = None
    formats: tuple[str, ...] = ("json", "csv")


def validate_demo_params(params: DemoParams) -> None:
    if params.n_agents < 1:
        raise ValidationError("n_agents: must be at least 1")
    if params.sim_days <= 0:
        raise ValidationError("sim_days: must be positive")


def _agent_scenario(base: Scenario, index: int) -> Scenario:
    """Derives one network's flavor of the scenario.

    Seeds diverge per agent so cache decisions and jitter differ across
    networks; caps and resolver delay scale to spread the fleet over
    the speed and latency classes.
    """
    speed = _SPEED_FACTORS[index % len(_SPEED_FACTORS)]
    dns_factor = _DNS_FACTORS[index % len(_DNS_FACTORS)]
    return dataclasses.replace(
        base,
        seed=base.seed + 1_000_003 * (index + 1),
        throughput=dataclasses.replace(
            base.throughput,
            down_mbps=base.throughput.down_mbps * speed,
            up_mbps=base.throughput.up_mbps * speed,
        ),
        dns=dataclasses.replace(base.dns, delay_ms=base.dns.delay_ms * dns_factor),
    )


def _experiments(scenario: Scenario, index: int) -> tuple[ExperimentSpec, ...]:
    """Builds the experiment list from whatever the scenario serves."""
    domains = sorted(scenario.dns.records)
    fail = list(scenario.dns.fail_domains)
    hosts = domains[:2] if len(domains) >= 2 else (domains or ["cdn.example"]) * 2
    assets = [a.path for a in scenario.assets]
    specs = [
        ExperimentSpec(
            id="speed-1",
            kind=ExperimentKind.SPEEDTEST,
            params={"host": "127.0.0.1", "port": 1, "duration_s": 10.0},
        ),
        ExperimentSpec(
            id="path-1",
            kind=ExperimentKind.LATENCY,
            params={
                "host": "127.0.0.1",
                "port": 1,
                "targets": [t.name for t in scenario.targets],
            },
        ),
        ExperimentSpec(
            id="dns-local",
            kind=ExperimentKind.DNS,
            params={
                "resolver_ip": f"10.{index + 1}.0.53",
                "targets": domains[:3] + fail[:1],
            },
        ),
        ExperimentSpec(
            id="dns-google",
            kind=ExperimentKind.DNS,
            params={"resolver_ip": "8.8.8.8", "targets": domains[:3]},
        ),
    ]
    if assets:
        half = (len(assets) + 1) // 2
        specs.append(
            ExperimentSpec(
                id="cdn-a",
                kind=ExperimentKind.CDN,
                params={
                    "cdn_name": "cdn-a",
                    "targets": [f"http://{hosts[0]}{p}" for p in assets[:half]]
                    + [f"http://{hosts[0]}/missing-object.bin"],
                },
            )
        )
        specs.append(
            ExperimentSpec(
                id="cdn-b",
                kind=ExperimentKind.CDN,
                params={
                    "cdn_name": "cdn-b",
                    "targets": [f"http://{hosts[1]}{p}" for p in assets[half:]],
                },
            )
        )
        specs.append(
            ExperimentSpec(
                id="web-1",
                kind=ExperimentKind.WEB,
                params={"targets": [f"http://{hosts[0]}{assets[-1]}"]},
            )
        )
    return tuple(s for s in specs if s.params.get("targets") != [])


def _sensor_timeline(
    index: int, device: dict[str, str], days: int
) -> ScriptedSensors:
    """Scripted environment: mostly healthy mobile, with planned dips.

    Every third agent loses battery 06:00-08:00; every third starting
    at two rides wifi 12:00-14:00; the fourth goes dark for an hour on
    day 1. Gates, not the timeline, decide what actually runs.
    """

    def reading(battery: int, connectivity: Connectivity) -> SensorReading:
        return SensorReading(
            battery_pct=battery,
            connectivity=connectivity,
            operator_name=device["operator"],
            network_id=device["network_id"],
        )

    timeline = [(T0, reading(85, Connectivity.MOBILE))]
    for day in range(days):
        start = T0 + timedelta(days=day)
        if index % 3 == 1:
            timeline.append((start + timedelta(hours=6), reading(8, Connectivity.MOBILE)))
            timeline.append((start + timedelta(hours=8), reading(85, Connectivity.MOBILE)))
        if index % 3 == 2:
            timeline.append((start + timedelta(hours=12), reading(85, Connectivity.WIFI)))
            timeline.append((start + timedelta(hours=14), reading(85, Connectivity.MOBILE)))
        if index % 4 == 3 and day == 1:
            timeline.append((start + timedelta(hours=20), reading(85, Connectivity.NONE)))
            timeline.append((start + timedelta(hours=21), reading(85, Connectivity.MOBILE)))
    return ScriptedSensors(sorted(timeline, key=lambda item: item[0]))


def _synth_youtube_log(seed: int, device_id: str, day: int, quality: float) -> str:
    """Renders a deterministic stats-for-nerds capture for one session.

    quality shifts the resolution ladder; 1080p is never emitted, so
    the imported fleet reproduces the all-zero 1080p shape.
    """
    ladder = list(_RESOLUTION_DIMS.values())
    blocks = []
    session_start = T0 + timedelta(days=day, hours=10)
    for j in range(12):
        u = keyed_uniform(seed, "youtube", device_id, day, j)
        rung = min(int(u * quality * len(ladder)), len(ladder) - 1)
        buffer_s = round(5.0 + 25.0 * keyed_uniform(seed, "yt-buffer", device_id, day, j), 1)
        dropped = int(40 * keyed_uniform(seed, "yt-drop", device_id, day, j))
        stamp = (session_start + timedelta(seconds=30 * j)).strftime(
            "%Y-%m-%dT%H:%M:%SZ"
        )
        blocks.append(
            f"[{stamp}]\n"
            f"Current / Optimal Res: {ladder[rung]}@30 / 1920x1080@30\n"
            f"Buffer Health: {buffer_s} s\n"
            f"Dropped Frames: {dropped} / 3000\n"
        )
    return "\n".join(blocks)


def _ensure_fresh(out_dir: Path) -> None:
    stale = [name for name in _ARTIFACTS if (out_dir / name).exists()]
    if stale:
        raise ValidationError(
            f"out_dir: {out_dir} already holds demo artifacts "
            f"({', '.join(stale)}); point at a fresh directory"
        )


def run_demo(
    params: DemoParams, log: Optional[Callable[[str], None]] = None
) -> dict[str, Any]:
    """Runs the full rehearsal; returns a summary with the manifest.

    Raises:
        ValidationError: bad parameters or a dirty output directory.
        StageError: any stage failure, named.
    """

    def say(message: str) -> None:
        if log is not None:
            log(message)

    validate_demo_params(params)
    out_dir = Path(params.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _ensure_fresh(out_dir)

    try:
        scenario = (
            load_scenario(params.scenario_path)
            if params.scenario_path is not None
            else default_scenario()
        )
        if params.seed is not None:
            scenario = dataclasses.replace(scenario, seed=params.seed)
    except (ValidationError, OSError) as exc:
        raise StageError("scenario", str(exc)) from exc
    say(f"stage scenario: seed {scenario.seed}, {len(scenario.assets)} assets")

    try:
        harness = serve(scenario, host="127.0.0.1")
    except AmigoError as exc:
        raise StageError("simnet", str(exc)) from exc
    try:
        smoke_domain = sorted(scenario.dns.records)[0] if scenario.dns.records else None
        if smoke_domain is not None:
            answer = probe_dns(smoke_domain, "127.0.0.1", port=harness.dns_port)
            if not answer.success:
                raise StageError("simnet", f"smoke lookup of {smoke_domain} failed")
        say(f"stage simnet: four services up on 127.0.0.1 (dns :{harness.dns_port})")

        try:
            store = Store(out_dir / "server")
            core = ControlServer(store)
            http_server = make_http_server(core)
        except (AmigoError, OSError) as exc:
            raise StageError("server", str(exc)) from exc
        server_thread = threading.Thread(
            target=http_server.serve_forever, daemon=True
        )
        server_thread.start()
        base_url = "http://127.0.0.1:%d" % http_server.server_address[1]
        say(f"stage server: control server at {base_url}")
        try:
            summary = _run_fleet(params, scenario, core, base_url, out_dir, say)
        finally:
            http_server.shutdown()
            http_server.server_close()
            server_thread.join(timeout=5)
    finally:
        harness.shutdown()
    return summary


def _run_fleet(
    params: DemoParams,
    scenario: Scenario,
    core: ControlServer,
    base_url: str,
    out_dir: Path,
    say: Callable[[str], None],
) -> dict[str, Any]:
    devices = []
    for i in range(params.n_agents):
        operator, country, continent = _OPERATORS[i % len(_OPERATORS)]
        suffix = "" if i < len(_OPERATORS) else f" {i // len(_OPERATORS) + 1}"
        devices.append(
            {
                "device_id": f"phone-{i + 1:02d}",
                "network_id": f"net-{i + 1:02d}",
                "operator": operator + suffix,
                "country": country,
                "continent": continent.value,
            }
        )
    registry_path = out_dir / "registry.csv"
    with open(registry_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["network_id", "operator", "country", "continent"])
        for device in devices:
            writer.writerow(
                [
                    device["network_id"],
                    device["operator"],
                    device["country"],
                    device["continent"],
                ]
            )

    try:
        days = int(params.sim_days) + 2
        agents = []
        for i, device in enumerate(devices):
            config = AgentConfig(
                device_id=device["device_id"],
                server_url=base_url,
                spool_dir=str(out_dir / "spool" / device["device_id"]),
                experiments=_experiments(scenario, i),
            )
            agents.append(
                Agent(
                    config=config,
                    sensors=_sensor_timeline(i, device, days),
                    client=ServerClient(base_url),
                    runner=ModelProbeRunner(ServiceModel(_agent_scenario(scenario, i))),
                )
            )
    except AmigoError as exc:
        raise StageError("agents", str(exc)) from exc

    # Control-plane exercises fire at fixed sim instants (step index),
    # so reruns issue the same instructions at the same fleet state.
    planned: list[tuple[int, Instruction]] = []

    def plan(step: int, agent_index: int, kind: InstructionKind, instruction_params: dict) -> None:
        if agent_index < params.n_agents:
            planned.append(
                (
                    step,
                    Instruction(
                        id="",
                        device_id=devices[agent_index]["device_id"],
                        created_at=None,
                        kind=kind,
                        params=instruction_params,
                    ),
                )
            )

    plan(12, 0, InstructionKind.PAUSE, {"duration": 1800.0})
    plan(24, 1, InstructionKind.RUN_NOW, {"experiment_id": "speed-1"})
    plan(36, 2, InstructionKind.UPDATE_CONFIG, {"key": "report_interval_s", "value": 600.0})
    plan(48, 3, InstructionKind.OPEN_TUNNEL, {"host": "10.99.0.1", "port": 2222})

    steps = int(round(params.sim_days * 86400 / TICK_S))
    issued: list[str] = []
    try:
        for step in range(steps):
            now = T0 + timedelta(seconds=step * TICK_S)
            for due_step, instruction in planned:
                if due_step == step:
                    issued.append(core.enqueue_instruction(instruction))
            for agent in agents:
                agent.tick(now)
        end = T0 + timedelta(seconds=steps * TICK_S)
        for agent in agents:
            agent.report_tick(end)  # flush anything still spooled
    except AmigoError as exc:
        raise StageError("agents", str(exc)) from exc

    decisions = sum(len(agent.decisions) for agent in agents)
    for agent in agents:
        problems = replay_violations(agent.decisions)
        if problems:
            raise StageError("agents", f"{agent.config.device_id}: {problems[0]}")
    not_acked = [
        i for i in issued if core.get_instruction(i).state is not InstructionState.ACKED
    ]
    if not_acked:
        raise StageError("agents", f"instructions never acked: {', '.join(not_acked)}")
    say(
        f"stage agents: {params.n_agents} agents, {steps} ticks, "
        f"{decisions} gate decisions, 0 violations, {len(issued)} instructions acked"
    )

    try:
        youtube_dir = out_dir / "youtube"
        youtube_dir.mkdir()
        imported = 0
        for i, (device, agent) in enumerate(zip(devices, agents)):
            quality = 0.8 + 0.7 * (_SPEED_FACTORS[i % len(_SPEED_FACTORS)] / 2.0)
            records = []
            for day in range(int(params.sim_days) or 1):
                text = _synth_youtube_log(
                    scenario.seed, device["device_id"], day, quality
                )
                log_path = youtube_dir / f"{device['device_id']}-day{day}.log"
                log_path.write_text(text, encoding="utf-8")
                series = parse_youtube_stats(text)
                records.append(
                    MeasurementRecord(
                        record_id=f"{device['device_id']}-yt-day{day}",
                        device_id=device["device_id"],
                        network_id=device["network_id"],
                        experiment_kind=ExperimentKind.YOUTUBE,
                        timestamp=T0 + timedelta(days=day, hours=10),
                        payload=series,
                    )
                )
            accepted, rejected = agent.client.submit_results(
                device["device_id"], records
            )
            if rejected:
                raise StageError("import", f"rejected: {rejected[0]}")
            imported += accepted
        say(f"stage import: {imported} playback series imported")
    except StageError:
        raise
    except (AmigoError, OSError) as exc:
        raise StageError("import", str(exc)) from exc

    try:
        records = load_records([out_dir / "server" / "store.jsonl"])
        registry = load_registry_csv(registry_path)
        dataset = build_dataset(records, registry)
        if dataset.quarantined:
            stray = dataset.quarantined[0]
            raise StageError(
                "analyze", f"record {stray.record_id}: unknown network {stray.network_id}"
            )
        report_dir = out_dir / "report"
        manifest = emit_report(dataset, report_dir, formats=params.formats)
    except StageError:
        raise
    except (AmigoError, OSError) as exc:
        raise StageError("analyze", str(exc)) from exc
    say(
        f"stage analyze: {len(records)} records -> "
        f"{len(manifest['sections'])} sections in {report_dir}"
    )
    return {
        "report_dir": str(report_dir),
        "manifest": manifest,
        "records": len(records),
        "decisions": decisions,
        "instructions_acked": len(issued),
        "agents": params.n_agents,
        "steps": steps,
    }
