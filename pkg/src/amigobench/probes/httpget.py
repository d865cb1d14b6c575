"""Plain HTTP/1.1 GET with per-phase timing.

Uses a raw socket so the dns / connect / ttfb / total phase boundaries
are observable; high-level clients hide them. No TLS, no redirects, no
chunked encoding: the measured endpoints speak simple HTTP/1.1 with
Content-Length, and `Connection: close` bounds the body otherwise.
"""

from __future__ import annotations

import ipaddress
import socket
import time
from dataclasses import dataclass
from typing import Optional
from urllib.parse import urlsplit

from amigobench.errors import ProbeError, ValidationError
from amigobench.probes.meter import ByteMeter

CHUNK = 64 * 1024


class HttpPhaseError(ProbeError):
    """Transport failure attributed to one timing phase."""

    def __init__(self, phase: str, message: str):
        super().__init__(f"{phase}: {message}")
        self.phase = phase


@dataclass(frozen=True)
class PhaseTimings:
    """Durations of the non-overlapping fetch phases, milliseconds."""

    dns_ms: float
    connect_ms: float
    ttfb_ms: float
    total_ms: float


@dataclass(frozen=True)
class HttpFetch:
    """A completed fetch: status, headers as received, body, timings."""

    status: int
    headers: dict[str, str]
    body: bytes
    timings: PhaseTimings
    wire_bytes: int


def _is_literal_ip(host: str) -> bool:
    try:
        ipaddress.ip_address(host)
        return True
    except ValueError:
        return False


def http_get(
    url: str, timeout_s: float = 10.0, meter: Optional[ByteMeter] = None
) -> HttpFetch:
    """Fetch a URL, timing each phase.

    Raises:
        HttpPhaseError: on transport failure, carrying the failing phase.
        ValidationError: for non-http or hostless URLs.
    """
    parts = urlsplit(url)
    if parts.scheme != "http":
        raise ValidationError(f"url: only http supported, got {url!r}")
    if not parts.hostname:
        raise ValidationError(f"url: missing host in {url!r}")
    host = parts.hostname
    port = parts.port or 80
    path = parts.path or "/"
    if parts.query:
        path = f"{path}?{parts.query}"

    start = time.perf_counter()
    if _is_literal_ip(host):
        address = host
        dns_ms = 0.0
    else:
        try:
            infos = socket.getaddrinfo(host, port, socket.AF_INET, socket.SOCK_STREAM)
            address = infos[0][4][0]
        except OSError as exc:
            raise HttpPhaseError("dns", str(exc)) from exc
        dns_ms = (time.perf_counter() - start) * 1000

    connect_start = time.perf_counter()
    try:
        sock = socket.create_connection((address, port), timeout=timeout_s)
    except OSError as exc:
        raise HttpPhaseError("connect", str(exc)) from exc
    connect_ms = (time.perf_counter() - connect_start) * 1000

    request = (
        f"GET {path} HTTP/1.1\r\n"
        f"Host: {host}\r\n"
        "User-Agent: amigo-bench/0.1\r\n"
        "Accept: */*\r\n"
        "Connection: close\r\n"
        "\r\n"
    ).encode("ascii")
    try:
        sock.settimeout(timeout_s)
        send_start = time.perf_counter()
        try:
            sock.sendall(request)
            first = sock.recv(CHUNK)
        except OSError as exc:
            raise HttpPhaseError("ttfb", str(exc)) from exc
        if not first:
            raise HttpPhaseError("ttfb", "connection closed before response")
        ttfb_ms = (time.perf_counter() - send_start) * 1000

        raw = bytearray(first)
        while b"\r\n\r\n" not in raw:
            try:
                chunk = sock.recv(CHUNK)
            except OSError as exc:
                raise HttpPhaseError("total", str(exc)) from exc
            if not chunk:
                break
            raw.extend(chunk)
        head, _, rest = bytes(raw).partition(b"\r\n\r\n")
        status, headers = _parse_head(head)
        if headers.get("transfer-encoding", "").lower() == "chunked":
            raise HttpPhaseError("total", "chunked encoding not supported")

        body = bytearray(rest)
        length = headers.get("content-length")
        want = int(length) if length is not None else None
        while want is None or len(body) < want:
            try:
                chunk = sock.recv(CHUNK)
            except OSError as exc:
                raise HttpPhaseError("total", str(exc)) from exc
            if not chunk:
                break
            body.extend(chunk)
        total_ms = (time.perf_counter() - start) * 1000
    finally:
        sock.close()

    wire = len(head) + 4 + len(body)
    if meter is not None:
        meter.add(wire)
    return HttpFetch(
        status=status,
        headers=headers,
        body=bytes(body),
        timings=PhaseTimings(dns_ms, connect_ms, ttfb_ms, total_ms),
        wire_bytes=wire,
    )


def _parse_head(head: bytes) -> tuple[int, dict[str, str]]:
    lines = head.decode("latin-1").split("\r\n")
    status_parts = lines[0].split(" ", 2)
    if len(status_parts) < 2 or not status_parts[1].isdigit():
        raise HttpPhaseError("ttfb", f"bad status line {lines[0]!r}")
    status = int(status_parts[1])
    headers: dict[str, str] = {}
    for line in lines[1:]:
        if not line or ":" not in line:
            continue
        name, _, value = line.partition(":")
        key = name.strip().lower()
        value = value.strip()
        # Duplicate headers fold into one comma-joined value.
        headers[key] = f"{headers[key]}, {value}" if key in headers else value
    return status, headers
