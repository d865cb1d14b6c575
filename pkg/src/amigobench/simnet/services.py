"""Live loopback services driven by a scenario.

Four endpoints: hop-reveal (TCP), throughput (TCP), DNS (UDP), and HTTP
assets with a /metrics dump. Each service handles concurrent
connections; shared state is the metrics registry and the per-key
request counters inside the model, both lock-protected.

Responses carry no wall-clock headers, so identical request orders give
identical response bytes (timing aside).
"""

from __future__ import annotations

import copy
import json
import socket
import socketserver
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from amigobench.domain.classify import CacheStatus
from amigobench.errors import StageError, ValidationError
from amigobench.probes import dnsquery
from amigobench.simnet.model import ServiceModel
from amigobench.simnet.scenario import Scenario, check_scenario
from amigobench.simnet.shaping import TokenBucket

CHUNK = 64 * 1024
UP_GRACE_S = 5.0


class Metrics:
    """Per-service counters; snapshot() returns a deep copy."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data = {
            "hop": {"requests": 0, "bytes": 0},
            "throughput": {"requests": 0, "bytes_down": 0, "bytes_up": 0},
            "dns": {"requests": 0, "bytes": 0},
            "http": {"requests": 0, "bytes": 0, "assets": {}},
        }

    def incr(self, service: str, field: str, amount: int = 1) -> None:
        with self._lock:
            self._data[service][field] += amount

    def asset_tally(self, path: str, edge: CacheStatus) -> None:
        with self._lock:
            tallies = self._data["http"]["assets"].setdefault(
                path, {"hit": 0, "miss": 0, "unknown": 0}
            )
            tallies[edge.value] += 1

    def snapshot(self) -> dict:
        with self._lock:
            return copy.deepcopy(self._data)


def _asset_body(path: str, nbytes: int) -> bytes:
    # Deterministic filler derived from the path, no randomness.
    block = (path.encode("ascii", errors="replace") + b"-") * 8
    repeats = nbytes // len(block) + 1
    return (block * repeats)[:nbytes]


class _HopHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        harness: SimnetHarness = self.server.harness  # type: ignore[attr-defined]
        while True:
            line = self.rfile.readline()
            if not line:
                return
            harness.metrics.incr("hop", "requests")
            reply = self._reply_for(harness, line)
            harness.metrics.incr("hop", "bytes", len(line) + len(reply))
            try:
                self.wfile.write(reply)
            except OSError:
                return

    def _reply_for(self, harness: "SimnetHarness", line: bytes) -> bytes:
        parts = line.decode("ascii", errors="replace").split()
        if len(parts) != 3 or parts[0] != "HOP" or not parts[2].isdigit():
            return b"ERR bad-request\n"
        target, k = parts[1], int(parts[2])
        try:
            delay_ms, address, terminal = harness.model.hop_response(target, k)
        except ValidationError:
            return b"ERR unknown-target\n"
        time.sleep(delay_ms / 1000)
        verb = "END" if terminal else "HOP"
        shown = min(k, len(harness.model.scenario.target(target).hop_cumulative_delays_ms))
        return f"{verb} {shown} {address}\n".encode("ascii")


class _ThroughputHandler(socketserver.StreamRequestHandler):
    timeout = 30

    def handle(self) -> None:
        harness: SimnetHarness = self.server.harness  # type: ignore[attr-defined]
        line = self.rfile.readline().decode("ascii", errors="replace").split()
        if len(line) != 2 or line[0] not in ("DOWN", "UP"):
            return
        try:
            duration_s = float(line[1])
        except ValueError:
            return
        if duration_s <= 0 or duration_s > 120:
            return
        harness.metrics.incr("throughput", "requests")
        caps = harness.model.scenario.throughput
        if line[0] == "DOWN":
            self._serve_down(harness, caps.down_mbps, duration_s)
        else:
            self._serve_up(harness, caps.up_mbps, duration_s)

    def _serve_down(self, harness, cap_mbps: float, duration_s: float) -> None:
        bucket = TokenBucket(cap_mbps * 1e6 / 8)
        blob = b"d" * CHUNK
        deadline = time.monotonic() + duration_s
        sent = 0
        while time.monotonic() < deadline:
            granted = bucket.take(CHUNK)
            if granted == 0:
                time.sleep(bucket.backoff_s())
                continue
            try:
                self.wfile.write(blob[:granted])
            except OSError:
                break
            sent += granted
        harness.metrics.incr("throughput", "bytes_down", sent)
        # Closing the connection marks end-of-transfer for the client.

    def _serve_up(self, harness, cap_mbps: float, duration_s: float) -> None:
        bucket = TokenBucket(cap_mbps * 1e6 / 8)
        deadline = time.monotonic() + duration_s + UP_GRACE_S
        received = 0
        self.connection.settimeout(1.0)
        while time.monotonic() < deadline:
            granted = bucket.take(CHUNK)
            if granted == 0:
                time.sleep(bucket.backoff_s())
                continue
            try:
                chunk = self.connection.recv(granted)
            except socket.timeout:
                continue
            except OSError:
                break
            if not chunk:
                break
            received += len(chunk)
        harness.metrics.incr("throughput", "bytes_up", received)
        try:
            self.wfile.write(f"OK {received}\n".encode("ascii"))
        except OSError:
            pass


class _DnsHandler(socketserver.BaseRequestHandler):
    def handle(self) -> None:
        harness: SimnetHarness = self.server.harness  # type: ignore[attr-defined]
        data, sock = self.request
        harness.metrics.incr("dns", "requests")
        try:
            txn_id, domain = dnsquery.parse_query(data)
        except Exception:
            return  # unparseable queries are dropped, clients time out
        delay_ms, rcode, address = harness.model.dns_response(domain)
        time.sleep(delay_ms / 1000)
        addresses = (address,) if address else ()
        reply = dnsquery.build_response(txn_id, domain, rcode, addresses)
        harness.metrics.incr("dns", "bytes", len(data) + len(reply))
        try:
            sock.sendto(reply, self.client_address)
        except OSError:
            pass


class _HttpHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, *args) -> None:
        pass

    _REASONS = {200: "OK", 404: "Not Found"}

    def _frame(self, status: int, headers: dict[str, str], body: bytes) -> bytes:
        # Written raw: the base class would add Date/Server headers, and
        # responses must not embed wall-clock values.
        lines = [f"HTTP/1.1 {status} {self._REASONS.get(status, 'X')}"]
        lines.extend(f"{name}: {value}" for name, value in headers.items())
        lines.append(f"Content-Length: {len(body)}")
        return "\r\n".join(lines).encode("latin-1") + b"\r\n\r\n" + body

    def _send(self, wire: bytes) -> None:
        try:
            self.wfile.write(wire)
        except OSError:
            pass

    def do_GET(self) -> None:
        harness: SimnetHarness = self.server.harness  # type: ignore[attr-defined]
        harness.metrics.incr("http", "requests")
        if self.path == "/metrics":
            body = json.dumps(harness.metrics.snapshot(), sort_keys=True).encode()
            self._send(self._frame(200, {"Content-Type": "application/json"}, body))
            return
        try:
            asset, _, edge, headers, _ = harness.model.asset_response(self.path)
        except ValidationError:
            wire = self._frame(404, {"Content-Type": "text/plain"}, b"not found\n")
            harness.metrics.incr("http", "bytes", len(wire))
            self._send(wire)
            return
        if asset.think_time_ms:
            time.sleep(asset.think_time_ms / 1000)
        body = _asset_body(asset.path, asset.bytes)
        all_headers = {"Content-Type": "application/octet-stream"}
        all_headers.update(headers)
        wire = self._frame(200, all_headers, body)
        # Account before the bytes hit the wire: a fast client can read
        # the whole response and then /metrics before this thread runs
        # again, and tallies must already be visible by then.
        harness.metrics.incr("http", "bytes", len(wire))
        harness.metrics.asset_tally(asset.path, edge)
        self._send(wire)


class _TcpServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class _UdpServer(socketserver.ThreadingUDPServer):
    allow_reuse_address = True
    daemon_threads = True


class SimnetHarness:
    """A running simnet: four services plus shared model and metrics."""

    def __init__(self, scenario: Scenario, host: str = "127.0.0.1", base_port: int = 0):
        check_scenario(scenario)
        self.model = ServiceModel(scenario)
        self.metrics = Metrics()
        self.host = host
        self._base_port = base_port
        self._servers: list = []
        self._threads: list[threading.Thread] = []
        self.hop_port = 0
        self.throughput_port = 0
        self.dns_port = 0
        self.http_port = 0

    def start(self) -> "SimnetHarness":
        """Bind and serve all four services; raises StageError on failure."""
        spec = [
            ("hop", _TcpServer, _HopHandler),
            ("throughput", _TcpServer, _ThroughputHandler),
            ("dns", _UdpServer, _DnsHandler),
            ("http", ThreadingHTTPServer, _HttpHandler),
        ]
        try:
            for offset, (name, server_cls, handler) in enumerate(spec):
                port = 0 if self._base_port == 0 else self._base_port + offset
                server = server_cls((self.host, port), handler)
                server.harness = self  # type: ignore[attr-defined]
                if isinstance(server, ThreadingHTTPServer):
                    server.daemon_threads = True
                self._servers.append(server)
                setattr(self, f"{name}_port", server.server_address[1])
        except OSError as exc:
            # serve_forever never ran, so only close the bound sockets.
            for server in self._servers:
                server.server_close()
            self._servers = []
            raise StageError("simnet", f"bind failed: {exc}") from exc
        for server in self._servers:
            thread = threading.Thread(target=server.serve_forever, daemon=True)
            thread.start()
            self._threads.append(thread)
        return self

    def metrics_snapshot(self) -> dict:
        return self.metrics.snapshot()

    def shutdown(self) -> None:
        for server in self._servers:
            server.shutdown()
            server.server_close()
        for thread in self._threads:
            thread.join(timeout=5)
        self._servers = []
        self._threads = []


def serve(scenario: Scenario, host: str = "127.0.0.1", base_port: int = 0) -> SimnetHarness:
    """Validate, bind, and start a simnet; returns the running handle."""
    return SimnetHarness(scenario, host=host, base_port=base_port).start()
