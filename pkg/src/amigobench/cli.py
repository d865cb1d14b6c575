"""Single entry point wiring the platform together: `amigo-bench`.

Subcommands: `server` and `simnet` run the long-lived services, `agent`
runs a measurement endpoint against a server, `analyze` turns record
logs into report files, `scenario-check` lints a scenario file, and
`demo` rehearses the whole platform inside one process.

Exit codes: 0 success, 1 validation failure, 2 runtime failure, 3 I/O
failure. Usage errors (unknown flags, missing arguments) count as
validation. `server` flags may instead come from environment variables
named like the flags upper-snake-cased (LISTEN, DATA_DIR); an explicit
flag wins over the environment.
"""

from __future__ import annotations

import argparse
import os
import sys
import threading
import time as time_module
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

from amigobench.agent.client import ServerClient
from amigobench.agent.config import load_agent_config
from amigobench.agent.runners import LiveProbeRunner
from amigobench.agent.runtime import Agent
from amigobench.agent.sensors import HostSensors, load_sensor_timeline
from amigobench.analysis.dataset import (
    build_dataset,
    load_records,
    load_registry_csv,
)
from amigobench.analysis.reports import FORMATS, emit_report
from amigobench.demo import DemoParams, run_demo
from amigobench.errors import AmigoError, ValidationError
from amigobench.server.api import make_http_server
from amigobench.server.core import ControlServer
from amigobench.server.store import Store
from amigobench.simnet.scenario import (
    load_scenario,
    load_scenario_document,
    scenario_from_dict,
    validate_scenario,
)
from amigobench.simnet.services import serve as serve_simnet

SIM_TICK_S = 300.0
SIM_START = datetime(2024, 1, 1, tzinfo=timezone.utc)

# scenario-check names one invariant per row; a problem string from
# validate_scenario is attributed to the first row whose marker it
# contains, so every failure lands under the invariant it violated.
_SCENARIO_CHECKS: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("seed", ("seed:",)),
    ("target names", (".name:", "targets:")),
    ("hop delays", (".hop_cumulative_delays_ms:",)),
    ("jitter", (".jitter_ms:",)),
    ("dns config", ("dns.",)),
    ("throughput caps", ("throughput.",)),
    ("asset paths", (".path:", "assets:")),
    ("asset sizes", (".bytes:", ".think_time_ms:")),
    ("cache policy", (".cache_policy",)),
)


def _flag_or_env(value: Optional[str], env_name: str) -> Optional[str]:
    return value if value is not None else os.environ.get(env_name)


def _split_hostport(value: str, flag: str) -> tuple[str, int]:
    host, sep, port_text = value.rpartition(":")
    if not sep or not host:
        raise ValidationError(f"{flag}: expected host:port, got {value!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise ValidationError(f"{flag}: port {port_text!r} is not an integer")
    if not 0 <= port <= 65535:
        raise ValidationError(f"{flag}: port {port} outside [0, 65535]")
    return host, port


def _split_formats(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


def _cmd_server(args: argparse.Namespace) -> int:
    listen = _flag_or_env(args.listen, "LISTEN") or "127.0.0.1:8080"
    data_dir = _flag_or_env(args.data_dir, "DATA_DIR")
    if data_dir is None:
        raise ValidationError("data-dir: pass --data-dir or set DATA_DIR")
    host, port = _split_hostport(listen, "listen")
    store = Store(Path(data_dir))
    core = ControlServer(store)
    http_server = make_http_server(core, host=host, port=port)
    bound_host, bound_port = http_server.server_address[:2]
    print(
        f"control server on http://{bound_host}:{bound_port} "
        f"(store {store.path})",
        flush=True,
    )
    try:
        http_server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        http_server.server_close()
    return 0


def _run_agent_simulated(agent: Agent, start: datetime, sim_days: float) -> int:
    steps = int(sim_days * 86400.0 / SIM_TICK_S)
    if steps < 1:
        raise ValidationError("sim-days: shorter than one tick")
    now = start
    for _ in range(steps):
        agent.tick(now)
        now += timedelta(seconds=SIM_TICK_S)
    agent.report_tick(now)  # flush whatever the last tick spooled
    print(
        f"agent {agent.config.device_id}: {steps} ticks, "
        f"{len(agent.decisions)} gate decisions, "
        f"{len(agent.spool.pending(limit=10**9))} records still spooled",
        flush=True,
    )
    return 0


def _run_agent_wall(agent: Agent) -> int:
    print(
        f"agent {agent.config.device_id}: reporting to "
        f"{agent.config.server_url} every {agent.config.report_interval_s:g} s",
        flush=True,
    )
    try:
        while True:
            agent.tick(datetime.now(timezone.utc))
            time_module.sleep(1.0)
    except KeyboardInterrupt:
        return 0


def _cmd_agent(args: argparse.Namespace) -> int:
    config = load_agent_config(args.config)
    if args.scripted_sensors is not None:
        sensors = load_sensor_timeline(args.scripted_sensors)
    else:
        sensors = HostSensors()
    agent = Agent(
        config,
        sensors=sensors,
        client=ServerClient(config.server_url),
        runner=LiveProbeRunner(),
    )
    if args.clock == "simulated":
        start = sensors.start if hasattr(sensors, "start") else SIM_START
        return _run_agent_simulated(agent, start, args.sim_days)
    return _run_agent_wall(agent)


def _cmd_simnet(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    host, base_port = _split_hostport(args.bind, "bind")
    harness = serve_simnet(scenario, host=host, base_port=base_port)
    try:
        print(f"simnet up (scenario seed {scenario.seed})", flush=True)
        for name in ("hop", "throughput", "dns", "http"):
            port = getattr(harness, f"{name}_port")
            transport = "udp" if name == "dns" else "tcp"
            print(f"  {name:<10} {transport} {harness.host}:{port}", flush=True)
        threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        harness.shutdown()
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    formats = _split_formats(args.format)
    registry = load_registry_csv(args.registry)
    dataset = build_dataset(load_records(args.input), registry)
    if dataset.quarantined:
        print(
            f"analyze: quarantined {len(dataset.quarantined)} records "
            "with network_ids missing from the registry",
            file=sys.stderr,
            flush=True,
        )
    manifest = emit_report(dataset, Path(args.out), formats=formats)
    for section in manifest["sections"]:
        print(
            f"{section['name']}: {section['rows']} rows "
            f"-> {', '.join(section['files'])}",
            flush=True,
        )
    print(f"report written to {args.out}", flush=True)
    return 0


def _cmd_scenario_check(args: argparse.Namespace) -> int:
    try:
        scenario = scenario_from_dict(load_scenario_document(args.path))
    except ValidationError as exc:
        # Unreadable structure: nothing to check invariant by invariant.
        print(f"FAIL structure: {exc}", flush=True)
        return 1
    print("ok   structure", flush=True)
    problems = validate_scenario(scenario)
    remaining = list(problems)
    failed = False
    for name, markers in _SCENARIO_CHECKS:
        hits = [p for p in remaining if any(m in p for m in markers)]
        remaining = [p for p in remaining if p not in hits]
        if hits:
            failed = True
            for problem in hits:
                print(f"FAIL {name}: {problem}", flush=True)
        else:
            print(f"ok   {name}", flush=True)
    for problem in remaining:  # defensive: validator grew a new rule
        failed = True
        print(f"FAIL other: {problem}", flush=True)
    return 1 if failed else 0


def _cmd_demo(args: argparse.Namespace) -> int:
    params = DemoParams(
        out_dir=Path(args.out),
        scenario_path=None if args.scenario is None else Path(args.scenario),
        n_agents=args.agents,
        sim_days=args.days,
        seed=args.seed,
        formats=_split_formats(args.format),
    )
    summary = run_demo(params, log=lambda line: print(f"demo: {line}", flush=True))
    print(f"demo: report at {summary['report_dir']}", flush=True)
    return 0


class _Parser(argparse.ArgumentParser):
    """argparse exits usage errors with 2; here they are validation (1)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="amigo-bench",
        description="Desk-scale mobile-measurement test bed.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("server", parents=[], help="run the control server")
    p.add_argument("--listen", default=None, metavar="HOST:PORT",
                   help="bind address (default 127.0.0.1:8080; env LISTEN)")
    p.add_argument("--data-dir", default=None, metavar="PATH",
                   help="store directory (env DATA_DIR)")
    p.set_defaults(handler=_cmd_server)

    p = sub.add_parser("agent", help="run a measurement agent")
    p.add_argument("--config", required=True, metavar="FILE",
                   help="agent config, TOML or JSON")
    p.add_argument("--scripted-sensors", default=None, metavar="FILE",
                   help="JSON sensor timeline instead of host sensors")
    p.add_argument("--clock", choices=("wall", "simulated"), default="wall",
                   help="wall runs forever; simulated replays --sim-days")
    p.add_argument("--sim-days", type=float, default=1.0, metavar="DAYS",
                   help="simulated-clock span (default 1.0)")
    p.set_defaults(handler=_cmd_agent)

    p = sub.add_parser("simnet", help="serve a scenario as a mock network")
    p.add_argument("--scenario", required=True, metavar="FILE",
                   help="scenario file, TOML or JSON")
    p.add_argument("--bind", default="127.0.0.1:0", metavar="HOST:PORT",
                   help="first port of four consecutive (0 = ephemeral)")
    p.set_defaults(handler=_cmd_simnet)

    p = sub.add_parser("analyze", help="build reports from record logs")
    p.add_argument("--input", required=True, nargs="+", metavar="FILE",
                   help="JSONL record files (server store or agent spools)")
    p.add_argument("--registry", required=True, metavar="FILE",
                   help="network registry CSV")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="report output directory")
    p.add_argument("--format", default=",".join(FORMATS), metavar="LIST",
                   help="comma-separated subset of json,csv")
    p.set_defaults(handler=_cmd_analyze)

    p = sub.add_parser("scenario-check", help="lint a scenario file")
    p.add_argument("path", metavar="FILE", help="scenario file to check")
    p.set_defaults(handler=_cmd_scenario_check)

    p = sub.add_parser("demo", help="rehearse the whole platform in-process")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="fresh directory for all demo artifacts")
    p.add_argument("--scenario", default=None, metavar="FILE",
                   help="scenario file (default: built-in scenario)")
    p.add_argument("--agents", type=int, default=4, metavar="N",
                   help="fleet size (default 4)")
    p.add_argument("--days", type=float, default=2.0, metavar="DAYS",
                   help="simulated span (default 2.0)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed")
    p.add_argument("--format", default=",".join(FORMATS), metavar="LIST",
                   help="comma-separated subset of json,csv")
    p.set_defaults(handler=_cmd_demo)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"amigo-bench: error: {exc}", file=sys.stderr, flush=True)
        return 1
    except OSError as exc:
        print(f"amigo-bench: io error: {exc}", file=sys.stderr, flush=True)
        return 3
    except AmigoError as exc:
        print(f"amigo-bench: error: {exc}", file=sys.stderr, flush=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
