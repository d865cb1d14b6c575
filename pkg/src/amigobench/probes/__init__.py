"""Active measurement probes and their wire-format parsers.

Each probe is a blocking, single-connection operation returning a domain
payload plus the byte count it consumed (for data-ledger accounting).
Probes never raise on expected network failures; they return flagged
payloads so a failed measurement still produces a record.
"""

from amigobench.probes.throughput import ProbeOutcome, compute_throughput, probe_speed, run_speedtest
from amigobench.probes.latency import emit_hop_report, parse_hop_report, probe_latency
from amigobench.probes.dnsquery import probe_dns
from amigobench.probes.httpget import http_get
from amigobench.probes.cdn import CacheHeaderParse, HeaderSource, parse_cache_headers, probe_cdn
from amigobench.probes.web import probe_web
from amigobench.probes.youtube import parse_youtube_stats, parse_youtube_stats_detailed

__all__ = [name for name in dir() if not name.startswith("_")]
