#!/usr/bin/env python3
"""Run the full-platform rehearsal and summarize the report it produced.

Boots simnet, the control server, and a small scripted fleet on a
simulated clock, then analyzes the collected store. Each stage logs one
line; the section table at the end comes from the emitted manifest.
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone
from pathlib import Path

from amigobench.demo import DemoParams, run_demo
from amigobench.errors import AmigoError, ValidationError


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=None,
                        help="artifact directory (default: demo-out/<utc stamp>)")
    parser.add_argument("--scenario", type=Path, default=None,
                        help="scenario file (default: built-in)")
    parser.add_argument("--agents", type=int, default=4)
    parser.add_argument("--days", type=float, default=2.0)
    parser.add_argument("--seed", type=int, default=20240101)
    args = parser.parse_args()

    out_dir = args.out
    if out_dir is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        out_dir = Path("demo-out") / stamp

    params = DemoParams(
        out_dir=out_dir,
        scenario_path=args.scenario,
        n_agents=args.agents,
        sim_days=args.days,
        seed=args.seed,
    )
    try:
        summary = run_demo(params, log=lambda line: print(line, flush=True))
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AmigoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    print()
    print(f"{'section':<24} rows")
    for section in summary["manifest"]["sections"]:
        print(f"{section['name']:<24} {section['rows']}")
    print(f"\nreport: {summary['report_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
