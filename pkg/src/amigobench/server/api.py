"""HTTP/JSON front end for the control server.

Thin translation layer: decode JSON, call one ControlServer method,
encode the reply. Domain errors map to status codes uniformly:
ValidationError/ParseError 400, NotFoundError 404, LifecycleError 409,
each as {"error": message, "kind": name}. CORS is wide open so the
dashboard can be served from any origin.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Optional
from urllib.parse import parse_qs, urlsplit

from amigobench.domain import classify, codec
from amigobench.domain.records import REPORT_INTERVAL_S, ExperimentKind, ScheduleRule
from amigobench.errors import (
    LifecycleError,
    NotFoundError,
    ParseError,
    ValidationError,
)
from amigobench.server.core import ControlServer, device_summary_to_dict

_MAX_BODY = 16 * 2**20


def threshold_document(core: ControlServer) -> dict[str, Any]:
    """Classifier cut points and fleet policy in one JSON document.

    Dashboards render badges from this instead of hard-coding numbers,
    so the two sides cannot drift apart.
    """
    defaults = ScheduleRule()
    return {
        "speed_mbps": {
            "slow_max": classify.SPEED_SLOW_MAX_MBPS,
            "fast_min": classify.SPEED_FAST_MIN_MBPS,
        },
        "latency_ms": {
            "exceptional_max": classify.LATENCY_EXCEPTIONAL_MAX_MS,
            "good_min": classify.LATENCY_GOOD_MIN_MS,
            "good_max": classify.LATENCY_GOOD_MAX_MS,
            "less_desirable_min": classify.LATENCY_LESS_DESIRABLE_MIN_MS,
        },
        "speed_index_s": {
            "fast_max": classify.SPEED_INDEX_FAST_MAX_S,
            "slow_min": classify.SPEED_INDEX_SLOW_MIN_S,
        },
        "battery_floor_pct": defaults.battery_floor_pct,
        "daily_data_cap_bytes": defaults.daily_data_cap,
        "report_interval_s": REPORT_INTERVAL_S,
        "stale_after_s": core.stale_after_s,
    }


class _ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "amigobench"
    sys_version = ""
    # Headers and body go out as separate writes; without TCP_NODELAY
    # the second one sits behind the peer's delayed ACK (~40 ms per
    # request), which dominates tight agent loops on localhost.
    disable_nagle_algorithm = True

    @property
    def core(self) -> ControlServer:
        return self.server.core  # type: ignore[attr-defined]

    def log_message(self, format: str, *args: Any) -> None:
        pass

    # Dispatch

    def do_OPTIONS(self) -> None:
        self.send_response(204)
        self._cors()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        url = urlsplit(self.path)
        parts = [p for p in url.path.split("/") if p]
        try:
            handled = self._route(method, parts, parse_qs(url.query))
        except (ValidationError, ParseError) as exc:
            self._send_json(400, {"error": str(exc), "kind": "validation"})
            return
        except NotFoundError as exc:
            self._send_json(404, {"error": str(exc), "kind": "not_found"})
            return
        except LifecycleError as exc:
            self._send_json(409, {"error": str(exc), "kind": "lifecycle"})
            return
        if not handled:
            self._send_json(404, {"error": f"no route: {self.path}", "kind": "not_found"})

    def _route(self, method: str, parts: list[str], query: dict[str, list[str]]) -> bool:
        if len(parts) < 3 or parts[0] != "api" or parts[1] != "v1":
            return False
        tail = parts[2:]
        if method == "POST" and tail == ["status"]:
            self._post_status()
        elif method == "GET" and len(tail) == 2 and tail[0] == "instructions":
            self._get_instructions(tail[1])
        elif (
            method == "POST"
            and len(tail) == 4
            and tail[0] == "instructions"
            and tail[3] == "ack"
        ):
            self._post_ack(tail[1], tail[2])
        elif method == "POST" and len(tail) == 2 and tail[0] == "results":
            self._post_results(tail[1])
        elif method == "POST" and tail == ["admin", "instructions"]:
            self._post_admin_instruction()
        elif method == "GET" and len(tail) == 3 and tail[:2] == ["admin", "instructions"]:
            self._get_admin_instruction(tail[2])
        elif method == "GET" and tail == ["admin", "fleet"]:
            self._get_fleet()
        elif (
            method == "GET"
            and len(tail) == 4
            and tail[:2] == ["admin", "devices"]
            and tail[3] == "records"
        ):
            self._get_device_records(tail[2], query)
        elif method == "GET" and tail == ["admin", "thresholds"]:
            self._send_json(200, threshold_document(self.core))
        else:
            return False
        return True

    # Endpoint bodies

    def _post_status(self) -> None:
        status = codec.device_status_from_dict(self._read_json(dict))
        pending = self.core.ingest_status(status)
        self._send_json(200, {"pending": pending})

    def _get_instructions(self, device_id: str) -> None:
        instructions = self.core.fetch_instructions(device_id)
        self._send_json(200, [codec.instruction_to_dict(i) for i in instructions])

    def _post_ack(self, device_id: str, instruction_id: str) -> None:
        body = self._read_json(dict)
        outcome = body.get("outcome")
        if not isinstance(outcome, str):
            raise ValidationError("outcome: missing")
        detail = body.get("detail", "")
        if not isinstance(detail, str):
            raise ValidationError("detail: must be a string")
        self.core.ack_instruction(device_id, instruction_id, outcome, detail)
        self._send_json(200, {"ok": True})

    def _post_results(self, device_id: str) -> None:
        body = self._read_json(list)
        records = [codec.record_from_dict(item) for item in body]
        accepted, rejected = self.core.submit_results(device_id, records)
        self._send_json(200, {"accepted": accepted, "rejected": rejected})

    def _post_admin_instruction(self) -> None:
        body = self._read_json(dict)
        # The operator supplies intent; the server owns identity and state.
        body.setdefault("id", "")
        body.setdefault("created_at", codec.rfc3339(self.core.clock()))
        body.setdefault("state", "pending")
        instruction = codec.instruction_from_dict(body)
        instruction_id = self.core.enqueue_instruction(instruction)
        self._send_json(200, {"id": instruction_id})

    def _get_admin_instruction(self, instruction_id: str) -> None:
        instruction = self.core.get_instruction(instruction_id)
        self._send_json(200, codec.instruction_to_dict(instruction))

    def _get_fleet(self) -> None:
        summaries = self.core.fleet_snapshot()
        self._send_json(200, [device_summary_to_dict(s) for s in summaries])

    def _get_device_records(self, device_id: str, query: dict[str, list[str]]) -> None:
        kind: Optional[ExperimentKind] = None
        limit: Optional[int] = None
        if query.get("kind", [""])[0]:
            raw = query["kind"][0]
            try:
                kind = ExperimentKind(raw)
            except ValueError:
                raise ValidationError(f"kind: unknown value {raw!r}") from None
        if query.get("limit", [""])[0]:
            raw = query["limit"][0]
            try:
                limit = int(raw)
            except ValueError:
                raise ValidationError(f"limit: not an integer {raw!r}") from None
            if limit < 0:
                raise ValidationError("limit: must be non-negative")
        records = self.core.device_records(device_id, kind=kind, limit=limit)
        self._send_json(200, [codec.record_to_dict(r) for r in records])

    # Plumbing

    def _read_json(self, expected: type) -> Any:
        length = int(self.headers.get("Content-Length", 0))
        if length > _MAX_BODY:
            raise ValidationError(f"body: exceeds {_MAX_BODY} bytes")
        raw = self.rfile.read(length)
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"body: invalid JSON ({exc.msg})") from None
        if not isinstance(body, expected):
            raise ValidationError(f"body: expected {expected.__name__}")
        return body

    def _send_json(self, status: int, payload: Any) -> None:
        data = json.dumps(payload, sort_keys=True).encode("ascii")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")


def make_http_server(
    core: ControlServer, host: str = "127.0.0.1", port: int = 0
) -> ThreadingHTTPServer:
    """Bind the API to host:port (0 picks a free port) without serving yet.

    Callers run serve_forever (often in a thread) and shutdown/server_close
    when done; the bound port is server.server_address[1].
    """
    server = ThreadingHTTPServer((host, port), _ApiHandler)
    server.daemon_threads = True
    server.core = core  # type: ignore[attr-defined]
    return server
