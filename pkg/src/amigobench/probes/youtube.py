"""Parser for player diagnostic logs (stats-for-nerds captures).

Playback measurement happens in a GUI we do not automate; operators
export the overlay values as timestamped text blocks and import them
here. Label matching is tolerant because capture tooling varies:

    [2024-01-01T10:00:00Z]
    Current / Optimal Res: 1280x720@30 / 1920x1080@30
    Buffer Health: 25.4 s
    Dropped Frames: 12 / 3000

A block must carry a parseable current resolution to become a sample;
buffer health and dropped frames default to zero when absent.
"""

from __future__ import annotations

import re

from amigobench.domain.codec import parse_rfc3339
from amigobench.domain.records import Resolution, YoutubeSample, YoutubeStatSeries
from amigobench.errors import ParseError

_BLOCK_START = re.compile(r"^\[(?P<stamp>[^\]]+)\]\s*$")
_RES_TOKEN = re.compile(r"(\d{2,5})x(\d{2,5})(?:@[\d.]+)?")
_FLOAT = re.compile(r"(\d+(?:\.\d+)?)")
_INT = re.compile(r"(\d+)")

_HEIGHT_TO_RESOLUTION = {
    144: Resolution.R144,
    240: Resolution.R240,
    360: Resolution.R360,
    480: Resolution.R480,
    720: Resolution.R720,
    1080: Resolution.R1080,
}


def _parse_block(stamp: str, lines: list[str]) -> YoutubeSample | None:
    resolution = None
    buffer_health = 0.0
    dropped = 0
    for line in lines:
        label, _, value = line.partition(":")
        label = label.strip().lower()
        value = value.strip()
        if "res" in label:
            token = _RES_TOKEN.search(value)
            if token:
                height = int(token.group(2))
                resolution = _HEIGHT_TO_RESOLUTION.get(height)
        elif "buffer" in label:
            match = _FLOAT.search(value)
            if match:
                buffer_health = float(match.group(1))
        elif "dropped" in label:
            match = _INT.search(value)
            if match:
                dropped = int(match.group(1))
    if resolution is None:
        return None
    try:
        timestamp = parse_rfc3339(stamp)
    except ParseError:
        return None
    return YoutubeSample(
        timestamp=timestamp,
        resolution=resolution,
        buffer_health_s=buffer_health,
        dropped_frames=dropped,
    )


def parse_youtube_stats_detailed(log_text: str) -> tuple[YoutubeStatSeries, int]:
    """Parse a capture log, returning (series, skipped block count).

    Raises:
        ParseError: when the text is non-blank but contains no blocks.
    """
    blocks: list[tuple[str, list[str]]] = []
    current: tuple[str, list[str]] | None = None
    for raw in log_text.splitlines():
        line = raw.strip()
        if not line:
            continue
        started = _BLOCK_START.match(line)
        if started:
            current = (started.group("stamp"), [])
            blocks.append(current)
        elif current is not None:
            current[1].append(line)
    if not blocks:
        if log_text.strip():
            raise ParseError("youtube stats: no timestamped blocks found")
        return YoutubeStatSeries(samples=()), 0
    samples = []
    skipped = 0
    for stamp, lines in blocks:
        sample = _parse_block(stamp, lines)
        if sample is None:
            skipped += 1
        else:
            samples.append(sample)
    samples.sort(key=lambda s: s.timestamp)
    return YoutubeStatSeries(samples=tuple(samples)), skipped


def parse_youtube_stats(log_text: str) -> YoutubeStatSeries:
    """Parse a capture log into an ordered sample series."""
    series, _ = parse_youtube_stats_detailed(log_text)
    return series
