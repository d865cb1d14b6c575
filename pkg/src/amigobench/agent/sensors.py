"""Environment sensing: battery, connectivity, network identity, GPS.

Two sources implement the same read(now) interface: ScriptedSensors
replays a timeline (deterministic, for tests and simulation), and
HostSensors reads whatever the local system exposes, degrading field by
field rather than failing.
"""

from __future__ import annotations

import bisect
import dataclasses
import json
from datetime import datetime
from pathlib import Path
from typing import Optional, Protocol, Sequence

from amigobench.domain import codec
from amigobench.domain.records import Connectivity, GpsFix
from amigobench.errors import ParseError, ValidationError


@dataclasses.dataclass(frozen=True)
class SensorReading:
    """One observation of the device environment."""

    battery_pct: Optional[int]
    connectivity: Connectivity
    operator_name: str
    network_id: str
    gps: Optional[GpsFix] = None


class SensorSource(Protocol):
    def read(self, now: datetime) -> SensorReading: ...


class ScriptedSensors:
    """Replays (instant, reading) steps; the latest step at or before
    `now` wins, and reads before the first step see the first step."""

    def __init__(self, timeline: Sequence[tuple[datetime, SensorReading]]) -> None:
        if not timeline:
            raise ValidationError("timeline: must be non-empty")
        steps = sorted(timeline, key=lambda step: step[0])
        self._times = [t for t, _ in steps]
        self._readings = [r for _, r in steps]

    def read(self, now: datetime) -> SensorReading:
        index = bisect.bisect_right(self._times, now) - 1
        return self._readings[max(index, 0)]

    @property
    def start(self) -> datetime:
        """Instant of the earliest step; a natural simulated-clock origin."""
        return self._times[0]


def load_sensor_timeline(path) -> ScriptedSensors:
    """Reads a JSON timeline file into a ScriptedSensors source.

    The file holds a list of steps, each an object with `at` (RFC 3339)
    and `connectivity`; `battery_pct`, `operator_name`, `network_id`,
    and `gps` ({lat, lon}) are optional.

    Args:
        path: timeline file location.

    Returns:
        A ScriptedSensors replaying the file's steps.

    Raises:
        ParseError: malformed JSON or a bad step, named by index.
        OSError: unreadable file.
    """
    path = Path(path)
    try:
        steps = json.loads(path.read_text("utf-8"))
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if not isinstance(steps, list):
        raise ParseError(f"{path}: timeline must be a JSON list")
    timeline = []
    for index, step in enumerate(steps):
        where = f"{path}: step {index}"
        if not isinstance(step, dict):
            raise ParseError(f"{where}: must be an object")
        try:
            at = codec.parse_rfc3339(str(step["at"]))
            connectivity = Connectivity(str(step["connectivity"]))
        except KeyError as exc:
            raise ParseError(f"{where}: missing {exc.args[0]}") from None
        except (ValueError, ValidationError) as exc:
            raise ParseError(f"{where}: {exc}") from None
        battery = step.get("battery_pct")
        gps = step.get("gps")
        try:
            reading = SensorReading(
                battery_pct=None if battery is None else int(battery),
                connectivity=connectivity,
                operator_name=str(step.get("operator_name", "unknown")),
                network_id=str(step.get("network_id", "unknown")),
                gps=None
                if gps is None
                else GpsFix(lat=float(gps["lat"]), lon=float(gps["lon"])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{where}: {exc}") from None
        timeline.append((at, reading))
    if not timeline:
        raise ParseError(f"{path}: timeline must be non-empty")
    return ScriptedSensors(timeline)


class HostSensors:
    """Best-effort reads from the local system; every field degrades
    independently so a read never raises."""

    def __init__(self, operator_name: str = "unknown", network_id: str = "unknown"):
        self.operator_name = operator_name
        self.network_id = network_id

    def read(self, now: datetime) -> SensorReading:
        return SensorReading(
            battery_pct=self._battery(),
            connectivity=self._connectivity(),
            operator_name=self.operator_name,
            network_id=self.network_id,
            gps=None,  # no portable GPS source on a plain host
        )

    @staticmethod
    def _battery() -> Optional[int]:
        for supply in sorted(Path("/sys/class/power_supply").glob("*")):
            try:
                value = int((supply / "capacity").read_text().strip())
            except (OSError, ValueError):
                continue
            if 0 <= value <= 100:
                return value
        return None

    @staticmethod
    def _connectivity() -> Connectivity:
        # Default-route interface name is the best portable signal.
        try:
            lines = Path("/proc/net/route").read_text().splitlines()[1:]
        except OSError:
            return Connectivity.NONE
        for line in lines:
            fields = line.split()
            if len(fields) >= 2 and fields[1] == "00000000":
                name = fields[0]
                if name.startswith(("wwan", "rmnet", "ccmni")):
                    return Connectivity.MOBILE
                if name.startswith(("wlan", "wlp", "wl")):
                    return Connectivity.WIFI
                return Connectivity.WIFI  # wired hosts count as non-mobile
        return Connectivity.NONE
