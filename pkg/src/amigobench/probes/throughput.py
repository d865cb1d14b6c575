"""Bulk TCP throughput probe.

Protocol (line-prefixed TCP): the client sends `DOWN <seconds>\\n` or
`UP <seconds>\\n`. For DOWN the server streams arbitrary bytes for the
duration then closes. For UP the client streams for the duration, then
half-closes; the server replies `OK <bytes>\\n`.

Rates are computed from bytes actually moved and the measured elapsed
time, not the requested duration, so a stalled transfer reads as slow
rather than as a short fast one.
"""

from __future__ import annotations

import socket
import time
from dataclasses import dataclass
from typing import Optional

from amigobench.domain.records import SpeedtestResult
from amigobench.errors import ProbeError, ValidationError
from amigobench.probes.meter import ByteMeter

CHUNK = 64 * 1024
# A transfer that ends more than this fraction short of the requested
# duration gets flagged; the measurement itself is still kept.
SHORTFALL_TOLERANCE = 0.10


def compute_throughput(nbytes: int, seconds: float) -> float:
    """Convert a byte count over a duration to Mbps.

    Linear in nbytes and inversely linear in seconds.

    Raises:
        ValidationError: for negative bytes or non-positive duration.
    """
    if nbytes < 0:
        raise ValidationError("nbytes: negative")
    if seconds <= 0:
        raise ValidationError("seconds: must be positive")
    return nbytes * 8 / seconds / 1e6


@dataclass(frozen=True)
class ProbeOutcome:
    """One direction of a throughput test."""

    direction: str
    nbytes: int
    elapsed_s: float
    mbps: float
    note: Optional[str] = None


def probe_speed(
    host: str, port: int, direction: str, duration_s: float, timeout_s: float = 10.0
) -> ProbeOutcome:
    """Run one direction of the throughput protocol.

    Args:
        direction: "down" or "up".
        duration_s: requested transfer duration.

    Raises:
        ProbeError: if the server is unreachable.
        ValidationError: for a bad direction or duration.
    """
    if direction not in ("down", "up"):
        raise ValidationError(f"direction: {direction!r} is not down|up")
    if duration_s <= 0:
        raise ValidationError("duration_s: must be positive")
    try:
        sock = socket.create_connection((host, port), timeout=duration_s + timeout_s)
    except OSError as exc:
        raise ProbeError(f"throughput connect {host}:{port}: {exc}") from exc
    try:
        if direction == "down":
            return _run_down(sock, duration_s)
        return _run_up(sock, duration_s)
    finally:
        sock.close()


def _run_down(sock: socket.socket, duration_s: float) -> ProbeOutcome:
    sock.sendall(f"DOWN {duration_s}\n".encode("ascii"))
    total = 0
    start = time.perf_counter()
    while True:
        try:
            chunk = sock.recv(CHUNK)
        except socket.timeout:
            break
        if not chunk:
            break
        total += len(chunk)
    elapsed = time.perf_counter() - start
    return _finish("down", total, elapsed, duration_s)


def _run_up(sock: socket.socket, duration_s: float) -> ProbeOutcome:
    # A small send buffer keeps unread in-flight bytes bounded, so the
    # server-confirmed count converges on what was really transferred.
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF, 128 * 1024)
    sock.sendall(f"UP {duration_s}\n".encode("ascii"))
    blob = b"u" * CHUNK
    sent = 0
    start = time.perf_counter()
    deadline = start + duration_s
    while time.perf_counter() < deadline:
        try:
            sock.sendall(blob)
        except OSError:
            break
        sent += len(blob)
    # Half-close signals end-of-stream; the server replies with the byte
    # count it actually read, which is authoritative (client-side counts
    # include bytes still sitting in socket buffers).
    try:
        sock.shutdown(socket.SHUT_WR)
        reply = _read_line(sock)
    except OSError:
        reply = ""
    elapsed = time.perf_counter() - start
    note = None
    total = sent
    if reply.startswith("OK "):
        try:
            total = int(reply.split()[1])
        except (IndexError, ValueError):
            note = "bad upload confirmation"
    else:
        note = "no upload confirmation"
    return _finish("up", total, elapsed, duration_s, note)


def _read_line(sock: socket.socket) -> str:
    buf = bytearray()
    while not buf.endswith(b"\n") and len(buf) < 256:
        chunk = sock.recv(1)
        if not chunk:
            break
        buf.extend(chunk)
    return buf.decode("ascii", errors="replace").strip()


def _finish(
    direction: str,
    total: int,
    elapsed: float,
    duration_s: float,
    note: Optional[str] = None,
) -> ProbeOutcome:
    if total == 0:
        return ProbeOutcome(direction, 0, elapsed, 0.0, note or "stalled: zero bytes")
    if note is None and elapsed < duration_s * (1 - SHORTFALL_TOLERANCE):
        note = f"duration shortfall: {elapsed:.2f}s of {duration_s:.2f}s"
    mbps = compute_throughput(total, elapsed) if elapsed > 0 else 0.0
    return ProbeOutcome(direction, total, elapsed, mbps, note)


def run_speedtest(
    host: str,
    port: int,
    duration_s: float,
    timeout_s: float = 10.0,
    meter: Optional[ByteMeter] = None,
) -> SpeedtestResult:
    """Run both directions back to back and combine into one result."""
    down = probe_speed(host, port, "down", duration_s, timeout_s)
    up = probe_speed(host, port, "up", duration_s, timeout_s)
    if meter is not None:
        meter.add(down.nbytes + up.nbytes)
    notes = [n for n in (down.note, up.note) if n]
    return SpeedtestResult(
        down_mbps=down.mbps,
        up_mbps=up.mbps,
        bytes_down=down.nbytes,
        bytes_up=up.nbytes,
        duration_s=down.elapsed_s + up.elapsed_s,
        note="; ".join(notes) if notes else None,
    )
