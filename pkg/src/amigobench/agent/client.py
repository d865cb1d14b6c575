"""HTTP client for the control server's agent-facing endpoints.

Network trouble surfaces as TransportError so the runtime can retry
next tick; structured server rejections map back to the domain error
they carried (validation, not_found, lifecycle).
"""

from __future__ import annotations

from typing import Any, Optional

import requests

from amigobench.domain import codec
from amigobench.domain.records import DeviceStatus, Instruction, MeasurementRecord
from amigobench.errors import (
    LifecycleError,
    NotFoundError,
    TransportError,
    ValidationError,
)

_ERROR_KINDS = {
    "validation": ValidationError,
    "not_found": NotFoundError,
    "lifecycle": LifecycleError,
}


class ServerClient:
    def __init__(
        self,
        base_url: str,
        timeout_s: float = 10.0,
        session: Optional[requests.Session] = None,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout_s = timeout_s
        self.session = session or requests.Session()

    def _call(self, method: str, path: str, body: Any = None) -> Any:
        url = f"{self.base_url}{path}"
        try:
            response = self.session.request(
                method, url, json=body, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise TransportError(f"{method} {path}: {exc}") from None
        if response.status_code >= 400:
            try:
                payload = response.json()
            except ValueError:
                payload = {}
            kind = _ERROR_KINDS.get(payload.get("kind"))
            if kind is not None:
                raise kind(payload.get("error", f"HTTP {response.status_code}"))
            raise TransportError(f"{method} {path}: HTTP {response.status_code}")
        return response.json()

    def post_status(self, status: DeviceStatus) -> int:
        """Returns the count of instructions pending for this device."""
        reply = self._call("POST", "/api/v1/status", codec.device_status_to_dict(status))
        return int(reply["pending"])

    def fetch_instructions(self, device_id: str) -> list[Instruction]:
        reply = self._call("GET", f"/api/v1/instructions/{device_id}")
        return [codec.instruction_from_dict(item) for item in reply]

    def ack(self, device_id: str, instruction_id: str, outcome: str, detail: str) -> None:
        self._call(
            "POST",
            f"/api/v1/instructions/{device_id}/{instruction_id}/ack",
            {"outcome": outcome, "detail": detail},
        )

    def submit_results(
        self, device_id: str, records: list[MeasurementRecord]
    ) -> tuple[int, list[dict[str, str]]]:
        reply = self._call(
            "POST",
            f"/api/v1/results/{device_id}",
            [codec.record_to_dict(r) for r in records],
        )
        return int(reply["accepted"]), list(reply["rejected"])
