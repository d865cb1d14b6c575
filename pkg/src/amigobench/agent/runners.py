"""Experiment execution strategies.

A ProbeRunner turns one ExperimentSpec into measurement payloads plus
the bytes each one consumed. Three strategies cover every use:

- LiveProbeRunner drives the real probes over sockets (production and
  integration tests).
- ModelProbeRunner computes what those probes would measure against a
  simulated-network scenario, using the same seeded model the services
  use, without any I/O. Fully deterministic, so simulations replay
  byte-for-byte.
- StubProbeRunner returns canned payloads for unit tests.

Spec params by kind:
    speedtest: host, port, duration_s
    latency:   host, port, targets, probes_per_hop?, max_hops?
    dns:       resolver_ip, port?, targets (domains)
    cdn:       targets (URLs), cdn_name?
    web:       targets (URLs)
"""

from __future__ import annotations

from datetime import datetime
from typing import Any, Protocol
from urllib.parse import urlsplit

from amigobench.domain.classify import CacheStatus, classify_resolver
from amigobench.domain.records import (
    CdnResult,
    DnsResult,
    ExperimentKind,
    ExperimentSpec,
    HopStat,
    LatencyResult,
    SpeedtestResult,
    WebResult,
)
from amigobench.errors import ProbeError, ValidationError
from amigobench.probes import (
    compute_throughput,
    parse_cache_headers,
    probe_cdn,
    probe_dns,
    probe_latency,
    probe_web,
    run_speedtest,
)
from amigobench.probes.dnsquery import build_query, build_response
from amigobench.probes.meter import ByteMeter
from amigobench.simnet.model import ServiceModel
from amigobench.simnet.prng import keyed_uniform

Outcome = tuple[Any, int]  # (payload, bytes consumed)


class ProbeRunner(Protocol):
    def run(self, spec: ExperimentSpec, now: datetime) -> list[Outcome]: ...


def _targets(spec: ExperimentSpec) -> list[str]:
    return [str(t) for t in spec.params.get("targets", [])]


class LiveProbeRunner:
    """Runs real probes; per-target failures become failure payloads."""

    def __init__(self, timeout_s: float = 10.0) -> None:
        self.timeout_s = timeout_s

    def run(self, spec: ExperimentSpec, now: datetime) -> list[Outcome]:
        kind = spec.kind
        params = spec.params
        if kind is ExperimentKind.SPEEDTEST:
            meter = ByteMeter()
            try:
                payload = run_speedtest(
                    str(params["host"]),
                    int(params["port"]),
                    float(params.get("duration_s", 5.0)),
                    timeout_s=self.timeout_s,
                    meter=meter,
                )
            except ProbeError as exc:
                payload = SpeedtestResult(
                    down_mbps=0.0, up_mbps=0.0, bytes_down=0, bytes_up=0,
                    duration_s=0.0, note=f"error: {exc}",
                )
            return [(payload, meter.total)]
        if kind is ExperimentKind.LATENCY:
            outcomes = []
            for target in _targets(spec):
                meter = ByteMeter()
                payload = probe_latency(
                    str(params["host"]),
                    int(params["port"]),
                    target,
                    max_hops=int(params.get("max_hops", 30)),
                    probes_per_hop=int(params.get("probes_per_hop", 3)),
                    timeout_s=self.timeout_s,
                    meter=meter,
                )
                outcomes.append((payload, meter.total))
            return outcomes
        if kind is ExperimentKind.DNS:
            outcomes = []
            for domain in _targets(spec):
                meter = ByteMeter()
                payload = probe_dns(
                    domain,
                    str(params["resolver_ip"]),
                    port=int(params.get("port", 53)),
                    timeout_s=self.timeout_s,
                    meter=meter,
                )
                outcomes.append((payload, meter.total))
            return outcomes
        if kind is ExperimentKind.CDN:
            outcomes = []
            for url in _targets(spec):
                meter = ByteMeter()
                payload = probe_cdn(
                    url,
                    cdn_name=params.get("cdn_name"),
                    timeout_s=self.timeout_s,
                    meter=meter,
                )
                outcomes.append((payload, meter.total))
            return outcomes
        if kind is ExperimentKind.WEB:
            outcomes = []
            for url in _targets(spec):
                meter = ByteMeter()
                payload = probe_web(url, timeout_s=self.timeout_s, meter=meter)
                outcomes.append((payload, meter.total))
            return outcomes
        raise ProbeError(f"kind {kind.value} is not runnable")


class ModelProbeRunner:
    """Computes probe outcomes from a scenario model, no sockets.

    Latency, DNS, and throughput figures follow the exact same seeded
    draws the simulated services make; HTTP timings add a modeled
    transfer term and an origin-fetch penalty on cache misses, and web
    fetches synthesize a SpeedIndex from think time and transfer time
    (the live probe cannot measure rendering, so it reports none).
    """

    MISS_PENALTY = 3.0

    def __init__(self, model: ServiceModel) -> None:
        self.model = model

    def run(self, spec: ExperimentSpec, now: datetime) -> list[Outcome]:
        kind = spec.kind
        if kind is ExperimentKind.SPEEDTEST:
            return [self._speedtest(spec)]
        if kind is ExperimentKind.LATENCY:
            return [self._latency(t, spec) for t in _targets(spec)]
        if kind is ExperimentKind.DNS:
            return [self._dns(t, spec) for t in _targets(spec)]
        if kind is ExperimentKind.CDN:
            return [self._cdn(t, spec) for t in _targets(spec)]
        if kind is ExperimentKind.WEB:
            return [self._web(t) for t in _targets(spec)]
        raise ProbeError(f"kind {kind.value} is not runnable")

    def _speedtest(self, spec: ExperimentSpec) -> Outcome:
        duration = float(spec.params.get("duration_s", 5.0))
        bytes_down = self.model.speed_bytes("down", duration)
        bytes_up = self.model.speed_bytes("up", duration)
        payload = SpeedtestResult(
            down_mbps=compute_throughput(bytes_down, duration),
            up_mbps=compute_throughput(bytes_up, duration),
            bytes_down=bytes_down,
            bytes_up=bytes_up,
            duration_s=duration,
        )
        return payload, bytes_down + bytes_up

    def _latency(self, target: str, spec: ExperimentSpec) -> Outcome:
        probes_per_hop = int(spec.params.get("probes_per_hop", 3))
        max_hops = int(spec.params.get("max_hops", 30))
        if self.model.scenario.target(target) is None:
            # The live probe would see ERR replies and give up at hop 1.
            wire = probes_per_hop * (
                len(f"HOP {target} 1\n") + len("ERR unknown-target\n")
            )
            return LatencyResult(target, (), 0, 0.0, complete=False), wire
        hops = []
        wire = 0
        complete = False
        for k in range(1, max_hops + 1):
            rtts = []
            address = ""
            terminal = False
            for _ in range(probes_per_hop):
                delay_ms, address, terminal = self.model.hop_response(target, k)
                rtts.append(delay_ms)
                verb = "END" if terminal else "HOP"
                wire += len(f"HOP {target} {k}\n") + len(f"{verb} {k} {address}\n")
            hops.append(
                HopStat(
                    hop_index=k,
                    address=address,
                    sent=probes_per_hop,
                    lost=0,
                    avg_rtt_ms=sum(rtts) / len(rtts),
                    best_rtt_ms=min(rtts),
                    worst_rtt_ms=max(rtts),
                )
            )
            if terminal:
                complete = True
                break
        payload = LatencyResult(
            target=target,
            hops=tuple(hops),
            hop_count=len(hops),
            final_avg_rtt_ms=hops[-1].avg_rtt_ms if complete else 0.0,
            complete=complete,
        )
        return payload, wire

    def _dns(self, domain: str, spec: ExperimentSpec) -> Outcome:
        resolver_ip = str(spec.params["resolver_ip"])
        delay_ms, rcode, address = self.model.dns_response(domain)
        addresses = [address] if address else []
        wire = len(build_query(0, domain)) + len(
            build_response(0, domain, rcode, addresses)
        )
        payload = DnsResult(
            domain=domain,
            resolver_ip=resolver_ip,
            resolver_class=classify_resolver(resolver_ip),
            lookup_ms=delay_ms,
            success=rcode == 0 and bool(addresses),
        )
        return payload, wire

    def _http_ms(self, path: str, nbytes: int, edge: CacheStatus, index: int) -> float:
        asset = self.model.scenario.asset(path)
        think = asset.think_time_ms if asset else 0.0
        down_mbps = self.model.scenario.throughput.down_mbps
        transfer_ms = nbytes * 8 / (down_mbps * 1e6) * 1000
        total = think + transfer_ms + 2.0
        if edge is not CacheStatus.HIT:
            total *= self.MISS_PENALTY
        jitter = keyed_uniform(self.model.scenario.seed, "http-ms", path, index)
        return total * (1.0 + 0.05 * jitter)

    def _cdn(self, url: str, spec: ExperimentSpec) -> Outcome:
        split = urlsplit(url)
        path = split.path or "/"
        try:
            asset, _, edge, headers, index = self.model.asset_response(path)
        except ValidationError:
            body = f"not found: {path}".encode()
            payload = CdnResult(
                url=url,
                cdn_name=str(spec.params.get("cdn_name") or split.hostname or ""),
                http_status=404,
                shield_status=CacheStatus.UNKNOWN,
                edge_status=CacheStatus.UNKNOWN,
                total_ms=2.0,
                bytes=len(body),
                error=None,
            )
            return payload, len(body)
        parsed = parse_cache_headers(headers)
        payload = CdnResult(
            url=url,
            cdn_name=str(spec.params.get("cdn_name") or split.hostname or ""),
            http_status=200,
            shield_status=parsed.shield_status,
            edge_status=parsed.edge_status,
            total_ms=self._http_ms(path, asset.bytes, edge, index),
            bytes=asset.bytes,
            error=None,
        )
        return payload, asset.bytes

    def _web(self, url: str) -> Outcome:
        split = urlsplit(url)
        path = split.path or "/"
        try:
            asset, _, edge, _, index = self.model.asset_response(path)
        except ValidationError:
            payload = WebResult(
                url=url, dns_ms=0.0, connect_ms=0.0, ttfb_ms=0.0, total_ms=0.0,
                bytes=0, failed_phase="connect",
            )
            return payload, 0
        total_ms = self._http_ms(path, asset.bytes, edge, index)
        ttfb_ms = (asset.think_time_ms if asset.think_time_ms else 1.0) + 1.0
        speed_index_s = (ttfb_ms + 2.5 * (total_ms - ttfb_ms) + 300.0) / 1000.0
        payload = WebResult(
            url=url,
            dns_ms=1.0,
            connect_ms=1.0,
            ttfb_ms=min(ttfb_ms, total_ms),
            total_ms=total_ms,
            bytes=asset.bytes,
            speed_index_s=round(speed_index_s, 4),
        )
        return payload, asset.bytes


class StubProbeRunner:
    """Returns pre-canned (payload, bytes) outcomes; records every call."""

    def __init__(self, outcomes_by_kind: dict[ExperimentKind, list[Outcome]]) -> None:
        self.outcomes_by_kind = outcomes_by_kind
        self.calls: list[tuple[str, datetime]] = []

    def run(self, spec: ExperimentSpec, now: datetime) -> list[Outcome]:
        self.calls.append((spec.id, now))
        return list(self.outcomes_by_kind.get(spec.kind, []))
