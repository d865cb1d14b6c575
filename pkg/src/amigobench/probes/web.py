"""Phase-timed page fetch.

A timing-level proxy for page-load measurement: no rendering happens
here, so speed_index_s stays unset and is only ever imported from an
external renderer's output.
"""

from __future__ import annotations

from typing import Optional

from amigobench.domain.records import WebResult
from amigobench.errors import ProbeError
from amigobench.probes.httpget import HttpPhaseError, http_get
from amigobench.probes.meter import ByteMeter


def probe_web(
    url: str, timeout_s: float = 10.0, meter: Optional[ByteMeter] = None
) -> WebResult:
    """Fetch a page and report per-phase timings.

    Transport failures yield a result flagged with the failing phase and
    zeroed timings from that phase onward.
    """
    try:
        fetch = http_get(url, timeout_s=timeout_s, meter=meter)
    except HttpPhaseError as exc:
        return WebResult(
            url=url,
            dns_ms=0.0,
            connect_ms=0.0,
            ttfb_ms=0.0,
            total_ms=0.0,
            bytes=0,
            failed_phase=exc.phase,
        )
    except ProbeError:
        return WebResult(
            url=url,
            dns_ms=0.0,
            connect_ms=0.0,
            ttfb_ms=0.0,
            total_ms=0.0,
            bytes=0,
            failed_phase="connect",
        )
    timings = fetch.timings
    return WebResult(
        url=url,
        dns_ms=timings.dns_ms,
        connect_ms=timings.connect_ms,
        ttfb_ms=timings.ttfb_ms,
        total_ms=timings.total_ms,
        bytes=len(fetch.body),
    )
