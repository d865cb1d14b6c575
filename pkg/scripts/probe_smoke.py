#!/usr/bin/env python3
"""Fire each live probe once against a freshly booted simnet.

A quick fidelity check: hop counts, RTTs, throughput, DNS delay, and
cache statuses should all line up with the scenario that simnet serves.
Runs in a few seconds; nonzero exit means some probe misbehaved.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from amigobench.probes.cdn import probe_cdn
from amigobench.probes.dnsquery import probe_dns
from amigobench.probes.latency import probe_latency
from amigobench.probes.throughput import run_speedtest
from amigobench.probes.web import probe_web
from amigobench.simnet.scenario import default_scenario, load_scenario
from amigobench.simnet.services import serve


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--scenario", type=Path, default=None,
                        help="scenario file (default: built-in)")
    parser.add_argument("--seconds", type=float, default=2.0,
                        help="speedtest duration per direction")
    args = parser.parse_args()

    scenario = (
        load_scenario(args.scenario) if args.scenario else default_scenario()
    )
    harness = serve(scenario, host="127.0.0.1")
    ok = True
    try:
        target = scenario.targets[0]
        lat = probe_latency("127.0.0.1", harness.hop_port, target.name)
        print(
            f"latency   {target.name}: {lat.hop_count} hops, "
            f"final rtt {lat.final_avg_rtt_ms:.1f} ms, complete={lat.complete}"
        )
        ok &= lat.complete and lat.hop_count == len(target.hop_cumulative_delays_ms)

        speed = run_speedtest("127.0.0.1", harness.throughput_port, args.seconds)
        print(
            f"speedtest down {speed.down_mbps:.1f} Mbps / "
            f"up {speed.up_mbps:.1f} Mbps over {args.seconds:g} s each way"
        )
        ok &= speed.down_mbps > 0 and speed.up_mbps > 0

        domain = sorted(scenario.dns.records)[0]
        dns = probe_dns(domain, "127.0.0.1", port=harness.dns_port)
        print(
            f"dns       {domain}: {dns.lookup_ms:.1f} ms, "
            f"class {dns.resolver_class.value}, success={dns.success}"
        )
        ok &= dns.success

        base = f"http://127.0.0.1:{harness.http_port}"
        asset = scenario.assets[0]
        cdn = probe_cdn(f"{base}{asset.path}", cdn_name="smoke-edge")
        print(
            f"cdn       {asset.path}: {cdn.total_ms:.1f} ms, "
            f"edge {cdn.edge_status.value}, {cdn.bytes} bytes"
        )
        ok &= cdn.error is None and cdn.bytes == asset.bytes

        web = probe_web(f"{base}{scenario.assets[-1].path}")
        print(
            f"web       {scenario.assets[-1].path}: ttfb {web.ttfb_ms:.1f} ms, "
            f"total {web.total_ms:.1f} ms, failed_phase={web.failed_phase}"
        )
        ok &= web.failed_phase is None
    finally:
        harness.shutdown()

    print("all probes healthy" if ok else "PROBE MISMATCH", flush=True)
    return 0 if ok else 2


if __name__ == "__main__":
    sys.exit(main())
