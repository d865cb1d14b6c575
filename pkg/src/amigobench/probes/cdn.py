"""CDN object fetch with cache-status attribution.

Cache status comes from two response headers. `cf-cache-status` reports
the edge cache directly. `x-cache` carries one token for the edge, or
two tokens where the first is the shield (mid-tier) and the second the
edge. When both headers appear, `cf-cache-status` wins as the more
specific signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Optional
from urllib.parse import urlsplit

from amigobench.domain.classify import CacheStatus
from amigobench.domain.records import CdnResult
from amigobench.errors import ProbeError, ValidationError
from amigobench.probes.httpget import http_get
from amigobench.probes.meter import ByteMeter


class HeaderSource(str, Enum):
    X_CACHE = "x_cache"
    CF_CACHE_STATUS = "cf_cache_status"
    NONE = "none"


@dataclass(frozen=True)
class CacheHeaderParse:
    """Outcome of cache-header inspection; source none means no signal."""

    shield_status: CacheStatus
    edge_status: CacheStatus
    source_header: HeaderSource


def _token_status(token: str) -> CacheStatus:
    token = token.strip().lower()
    if token == "hit":
        return CacheStatus.HIT
    if token == "miss":
        return CacheStatus.MISS
    return CacheStatus.UNKNOWN


def parse_cache_headers(headers: Mapping[str, str]) -> CacheHeaderParse:
    """Attribute shield and edge cache status from response headers.

    Total and deterministic: any header map yields a parse. Names match
    case-insensitively; tokens other than HIT/MISS map to Unknown.
    """
    lowered = {str(k).lower(): str(v) for k, v in headers.items()}
    cf_value = lowered.get("cf-cache-status")
    if cf_value is not None:
        return CacheHeaderParse(
            shield_status=CacheStatus.UNKNOWN,
            edge_status=_token_status(cf_value),
            source_header=HeaderSource.CF_CACHE_STATUS,
        )
    x_value = lowered.get("x-cache")
    if x_value is not None:
        tokens = [t for t in x_value.split(",")]
        if len(tokens) >= 2:
            return CacheHeaderParse(
                shield_status=_token_status(tokens[0]),
                edge_status=_token_status(tokens[1]),
                source_header=HeaderSource.X_CACHE,
            )
        return CacheHeaderParse(
            shield_status=CacheStatus.UNKNOWN,
            edge_status=_token_status(tokens[0]) if tokens else CacheStatus.UNKNOWN,
            source_header=HeaderSource.X_CACHE,
        )
    return CacheHeaderParse(
        shield_status=CacheStatus.UNKNOWN,
        edge_status=CacheStatus.UNKNOWN,
        source_header=HeaderSource.NONE,
    )


def probe_cdn(
    url: str,
    cdn_name: Optional[str] = None,
    timeout_s: float = 10.0,
    meter: Optional[ByteMeter] = None,
) -> CdnResult:
    """Fetch one CDN object and attribute its cache status.

    Non-2xx responses are recorded with statuses Unknown; transport
    failures come back as an error result with http_status 0.
    """
    if cdn_name is None:
        cdn_name = urlsplit(url).hostname or "unknown"
    try:
        fetch = http_get(url, timeout_s=timeout_s, meter=meter)
    except ProbeError as exc:
        return CdnResult(
            url=url,
            cdn_name=cdn_name,
            http_status=0,
            shield_status=CacheStatus.UNKNOWN,
            edge_status=CacheStatus.UNKNOWN,
            total_ms=0.0,
            bytes=0,
            error=str(exc),
        )
    if 200 <= fetch.status < 300:
        parsed = parse_cache_headers(fetch.headers)
        shield, edge = parsed.shield_status, parsed.edge_status
    else:
        shield = edge = CacheStatus.UNKNOWN
    return CdnResult(
        url=url,
        cdn_name=cdn_name,
        http_status=fetch.status,
        shield_status=shield,
        edge_status=edge,
        total_ms=fetch.timings.total_ms,
        bytes=len(fetch.body),
    )
