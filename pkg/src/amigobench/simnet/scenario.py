"""Scenario documents: what the simulated network should behave like.

A scenario is a TOML or JSON file naming hop paths, DNS behavior,
throughput caps, and cacheable assets. The seed fully determines every
random draw the network makes.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from amigobench.domain.records import parse_ipv4
from amigobench.errors import ValidationError

CACHE_MODES = ("always_hit", "always_miss", "hit_ratio")
HEADER_STYLES = ("cf", "x_cache_single", "x_cache_dual")


@dataclass(frozen=True)
class TargetPath:
    """A named path with cumulative per-hop delays; the last hop is terminal."""

    name: str
    hop_cumulative_delays_ms: tuple[float, ...]
    jitter_ms: float = 0.0


@dataclass(frozen=True)
class DnsConfig:
    """Resolver behavior: fixed delay, answer table, forced failures."""

    delay_ms: float
    records: Mapping[str, str]
    fail_domains: tuple[str, ...] = ()


@dataclass(frozen=True)
class ThroughputConfig:
    """Per-direction bandwidth caps for the throughput service."""

    down_mbps: float
    up_mbps: float


@dataclass(frozen=True)
class CachePolicy:
    """How an asset reports cache status.

    ratio only applies to mode hit_ratio; header_style picks which
    header carries the status and whether a shield token appears.
    """

    mode: str
    header_style: str
    ratio: float = 1.0


@dataclass(frozen=True)
class Asset:
    """One HTTP object the simulated CDN serves."""

    path: str
    bytes: int
    think_time_ms: float
    cache_policy: CachePolicy


@dataclass(frozen=True)
class Scenario:
    seed: int
    targets: tuple[TargetPath, ...]
    dns: DnsConfig
    throughput: ThroughputConfig
    assets: tuple[Asset, ...]

    def target(self, name: str) -> TargetPath | None:
        for t in self.targets:
            if t.name == name:
                return t
        return None

    def asset(self, path: str) -> Asset | None:
        for a in self.assets:
            if a.path == path:
                return a
        return None


def validate_scenario(scenario: Scenario) -> list[str]:
    """Return the list of violated invariants, empty when valid.

    Each entry names the offending field so scenario authors can fix it;
    `check_scenario` raises instead for programmatic use.
    """
    problems: list[str] = []
    if not isinstance(scenario.seed, int) or isinstance(scenario.seed, bool):
        problems.append("seed: must be an integer")
    seen_targets = set()
    for i, target in enumerate(scenario.targets):
        where = f"targets[{i}]"
        if not target.name:
            problems.append(f"{where}.name: must be non-empty")
        if target.name in seen_targets:
            problems.append(f"targets: duplicate name {target.name!r}")
        seen_targets.add(target.name)
        delays = target.hop_cumulative_delays_ms
        if not delays:
            problems.append(f"{where}.hop_cumulative_delays_ms: must be non-empty")
        if any(d <= 0 for d in delays):
            problems.append(f"{where}.hop_cumulative_delays_ms: must be positive")
        if any(b <= a for a, b in zip(delays, delays[1:])):
            problems.append(
                f"{where}.hop_cumulative_delays_ms: not strictly increasing"
            )
        if target.jitter_ms < 0:
            problems.append(f"{where}.jitter_ms: negative")
    if scenario.dns.delay_ms < 0:
        problems.append("dns.delay_ms: negative")
    for domain, address in scenario.dns.records.items():
        try:
            parse_ipv4(address)
        except ValidationError:
            problems.append(f"dns.records[{domain}]: {address!r} is not IPv4")
    if scenario.throughput.down_mbps <= 0:
        problems.append("throughput.down_mbps: must be positive")
    if scenario.throughput.up_mbps <= 0:
        problems.append("throughput.up_mbps: must be positive")
    seen_paths = set()
    for i, asset in enumerate(scenario.assets):
        where = f"assets[{i}]"
        if not asset.path.startswith("/"):
            problems.append(f"{where}.path: must start with /")
        if asset.path in seen_paths:
            problems.append(f"assets: duplicate path {asset.path!r}")
        seen_paths.add(asset.path)
        if asset.bytes < 0:
            problems.append(f"{where}.bytes: negative")
        if asset.think_time_ms < 0:
            problems.append(f"{where}.think_time_ms: negative")
        policy = asset.cache_policy
        if policy.mode not in CACHE_MODES:
            problems.append(f"{where}.cache_policy.mode: unknown {policy.mode!r}")
        if policy.header_style not in HEADER_STYLES:
            problems.append(
                f"{where}.cache_policy.header_style: unknown {policy.header_style!r}"
            )
        if not 0.0 <= policy.ratio <= 1.0:
            problems.append(f"{where}.cache_policy.ratio: outside [0, 1]")
    return problems


def check_scenario(scenario: Scenario) -> Scenario:
    """Raise on the first batch of invariant violations."""
    problems = validate_scenario(scenario)
    if problems:
        raise ValidationError("; ".join(problems))
    return scenario


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    """Build a Scenario from a parsed document (no invariant checks)."""

    def need(mapping: Mapping[str, Any], key: str, where: str) -> Any:
        if key not in mapping:
            raise ValidationError(f"{where}.{key}: missing field")
        return mapping[key]

    targets = tuple(
        TargetPath(
            name=need(t, "name", f"targets[{i}]"),
            hop_cumulative_delays_ms=tuple(
                float(d) for d in need(t, "hop_cumulative_delays_ms", f"targets[{i}]")
            ),
            jitter_ms=float(t.get("jitter_ms", 0.0)),
        )
        for i, t in enumerate(doc.get("targets", []))
    )
    dns_doc = need(doc, "dns", "scenario")
    dns = DnsConfig(
        delay_ms=float(need(dns_doc, "delay_ms", "dns")),
        records=dict(dns_doc.get("records", {})),
        fail_domains=tuple(dns_doc.get("fail_domains", [])),
    )
    thr_doc = need(doc, "throughput", "scenario")
    throughput = ThroughputConfig(
        down_mbps=float(need(thr_doc, "down_mbps", "throughput")),
        up_mbps=float(need(thr_doc, "up_mbps", "throughput")),
    )
    assets = tuple(
        Asset(
            path=need(a, "path", f"assets[{i}]"),
            bytes=int(need(a, "bytes", f"assets[{i}]")),
            think_time_ms=float(a.get("think_time_ms", 0.0)),
            cache_policy=CachePolicy(
                mode=need(
                    need(a, "cache_policy", f"assets[{i}]"),
                    "mode",
                    f"assets[{i}].cache_policy",
                ),
                header_style=need(
                    a["cache_policy"], "header_style", f"assets[{i}].cache_policy"
                ),
                ratio=float(a["cache_policy"].get("ratio", 1.0)),
            ),
        )
        for i, a in enumerate(doc.get("assets", []))
    )
    return Scenario(
        seed=need(doc, "seed", "scenario"),
        targets=targets,
        dns=dns,
        throughput=throughput,
        assets=assets,
    )


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    return {
        "seed": scenario.seed,
        "targets": [
            {
                "name": t.name,
                "hop_cumulative_delays_ms": list(t.hop_cumulative_delays_ms),
                "jitter_ms": t.jitter_ms,
            }
            for t in scenario.targets
        ],
        "dns": {
            "delay_ms": scenario.dns.delay_ms,
            "records": dict(scenario.dns.records),
            "fail_domains": list(scenario.dns.fail_domains),
        },
        "throughput": {
            "down_mbps": scenario.throughput.down_mbps,
            "up_mbps": scenario.throughput.up_mbps,
        },
        "assets": [
            {
                "path": a.path,
                "bytes": a.bytes,
                "think_time_ms": a.think_time_ms,
                "cache_policy": {
                    "mode": a.cache_policy.mode,
                    "header_style": a.cache_policy.header_style,
                    "ratio": a.cache_policy.ratio,
                },
            }
            for a in scenario.assets
        ],
    }


def load_scenario_document(path) -> dict:
    """Parse a scenario file (TOML or JSON by extension), no checks.

    Raises:
        ValidationError: for unparseable documents or a bad extension.
        OSError: if the file cannot be read.
    """
    text_path = str(path)
    if text_path.endswith(".toml"):
        with open(path, "rb") as handle:
            try:
                doc = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ValidationError(f"{path}: bad TOML ({exc})") from exc
    elif text_path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as handle:
            try:
                doc = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}: bad JSON ({exc.msg})") from exc
    else:
        raise ValidationError(f"{path}: expected a .toml or .json scenario file")
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: scenario must be a table/object")
    return doc


def load_scenario(path) -> Scenario:
    """Load and validate a scenario file (TOML or JSON by extension).

    Raises:
        ValidationError: for unparseable documents or violated invariants.
        OSError: if the file cannot be read.
    """
    return check_scenario(scenario_from_dict(load_scenario_document(path)))


def default_scenario(seed: int = 20240101) -> Scenario:
    """A small mixed scenario used by the demo and smoke scripts."""
    return Scenario(
        seed=seed,
        targets=(
            TargetPath("edge-a", (10.0, 25.0, 60.0), jitter_ms=2.0),
            TargetPath("edge-b", (15.0, 40.0, 80.0, 120.0), jitter_ms=3.0),
        ),
        dns=DnsConfig(
            delay_ms=40.0,
            records={
                "cdn-a.example": "192.0.2.10",
                "cdn-b.example": "192.0.2.20",
                "news.example": "192.0.2.30",
                "video.example": "192.0.2.40",
            },
            fail_domains=("missing.example",),
        ),
        throughput=ThroughputConfig(down_mbps=30.0, up_mbps=8.0),
        assets=(
            Asset(
                "/lib/app.js",
                90_000,
                5.0,
                CachePolicy(mode="hit_ratio", header_style="cf", ratio=0.8),
            ),
            Asset(
                "/lib/vendor.js",
                150_000,
                8.0,
                CachePolicy(mode="hit_ratio", header_style="x_cache_dual", ratio=0.5),
            ),
            Asset(
                "/img/hero.jpg",
                300_000,
                3.0,
                CachePolicy(mode="always_hit", header_style="x_cache_single"),
            ),
            Asset(
                "/page/index.html",
                60_000,
                50.0,
                CachePolicy(mode="always_miss", header_style="cf"),
            ),
        ),
    )
