"""Path latency probe over the hop-reveal protocol, plus report codecs.

The probe walks hops 1..max_hops over one TCP connection: it sends
`HOP <target> <k>\\n` and times the reply (`HOP <k> <address>` for an
intermediate hop, `END <k> <address>` for the terminal one). This stands
in for TTL-limited traceroute, which needs raw sockets; externally
produced hop reports enter through `parse_hop_report`.
"""

from __future__ import annotations

import json
import socket
import time
from typing import Optional

from amigobench.domain.records import HopStat, LatencyResult
from amigobench.errors import ParseError
from amigobench.probes.meter import ByteMeter

DEFAULT_MAX_HOPS = 30
DEFAULT_PROBES_PER_HOP = 3


def probe_latency(
    host: str,
    port: int,
    target: str,
    max_hops: int = DEFAULT_MAX_HOPS,
    probes_per_hop: int = DEFAULT_PROBES_PER_HOP,
    timeout_s: float = 5.0,
    meter: Optional[ByteMeter] = None,
) -> LatencyResult:
    """Walk the path to `target` through the hop-reveal service.

    The result is flagged incomplete when no terminal hop was reached
    (timeout, truncation by max_hops, or an unreachable service).
    """
    meter = meter if meter is not None else ByteMeter()
    try:
        sock = socket.create_connection((host, port), timeout=timeout_s)
    except OSError:
        return LatencyResult(target, (), 0, 0.0, complete=False)
    sock.settimeout(timeout_s)
    hops: list[HopStat] = []
    complete = False
    try:
        reader = sock.makefile("rb")
        for k in range(1, max_hops + 1):
            rtts: list[float] = []
            lost = 0
            address = ""
            terminal = False
            for _ in range(probes_per_hop):
                request = f"HOP {target} {k}\n".encode("ascii")
                start = time.perf_counter()
                try:
                    sock.sendall(request)
                    line = reader.readline()
                except OSError:
                    lost += 1
                    continue
                rtt_ms = (time.perf_counter() - start) * 1000
                meter.add(len(request) + len(line))
                text = line.decode("ascii", errors="replace").strip()
                parts = text.split()
                if len(parts) != 3 or parts[0] not in ("HOP", "END"):
                    lost += 1
                    continue
                rtts.append(rtt_ms)
                address = parts[2]
                if parts[0] == "END":
                    terminal = True
            if not rtts:
                break  # nothing answered at this depth; give up
            hops.append(
                HopStat(
                    hop_index=k,
                    address=address,
                    sent=probes_per_hop,
                    lost=lost,
                    avg_rtt_ms=sum(rtts) / len(rtts),
                    best_rtt_ms=min(rtts),
                    worst_rtt_ms=max(rtts),
                )
            )
            if terminal:
                complete = True
                break
    finally:
        sock.close()
    final = hops[-1].avg_rtt_ms if (hops and complete) else 0.0
    return LatencyResult(
        target=target,
        hops=tuple(hops),
        hop_count=len(hops),
        final_avg_rtt_ms=final,
        complete=complete,
    )


def emit_hop_report(result: LatencyResult) -> str:
    """Serialize a complete result as a hop-report JSON document."""
    hubs = [
        {
            "hop": h.hop_index,
            "address": h.address,
            "sent": h.sent,
            "lost": h.lost,
            "avg_ms": h.avg_rtt_ms,
            "best_ms": h.best_rtt_ms,
            "worst_ms": h.worst_rtt_ms,
        }
        for h in result.hops
    ]
    probes = result.hops[0].sent if result.hops else 0
    return json.dumps(
        {"target": result.target, "probes_per_hop": probes, "hubs": hubs},
        sort_keys=True,
    )


_HUB_FIELDS = ("hop", "address", "sent", "lost", "avg_ms", "best_ms", "worst_ms")


def parse_hop_report(text: str) -> LatencyResult:
    """Parse a hop-report document into a LatencyResult.

    Raises:
        ParseError: on malformed JSON, missing fields (named), hubs out
            of order, or an empty hub list (no terminal hop).
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"hop report: bad JSON ({exc.msg})") from exc
    if not isinstance(doc, dict):
        raise ParseError("hop report: expected an object")
    for key in ("target", "probes_per_hop", "hubs"):
        if key not in doc:
            raise ParseError(f"hop report: missing field {key}")
    hubs = doc["hubs"]
    if not isinstance(hubs, list) or not hubs:
        raise ParseError("hop report: hubs must be a non-empty list")
    hops: list[HopStat] = []
    previous = 0
    for i, hub in enumerate(hubs):
        for key in _HUB_FIELDS:
            if key not in hub:
                raise ParseError(f"hop report: hub {i}: missing field {key}")
        hop_index = int(hub["hop"])
        if hop_index <= previous:
            raise ParseError(
                f"hop report: hubs out of order at hop {hop_index} after {previous}"
            )
        previous = hop_index
        hops.append(
            HopStat(
                hop_index=hop_index,
                address=str(hub["address"]),
                sent=int(hub["sent"]),
                lost=int(hub["lost"]),
                avg_rtt_ms=float(hub["avg_ms"]),
                best_rtt_ms=float(hub["best_ms"]),
                worst_rtt_ms=float(hub["worst_ms"]),
            )
        )
    return LatencyResult(
        target=str(doc["target"]),
        hops=tuple(hops),
        hop_count=len(hops),
        final_avg_rtt_ms=hops[-1].avg_rtt_ms,
        complete=True,
    )
