"""Experiment gating policy and its auditable decision log.

Five gates must all pass for an experiment to run: interval elapsed,
connectivity satisfies the rule (mobile_only means connected to mobile
and nothing else), battery at or above the floor, daily data usage
strictly under the cap, and not paused. A forced run (run_now) bypasses
the interval gate only.

Every evaluation is recorded as a Decision carrying the raw inputs, so
a separate checker can re-derive the verdict without trusting this
module's logic.
"""

from __future__ import annotations

import dataclasses
from datetime import datetime
from typing import Optional

from amigobench.domain import codec
from amigobench.domain.records import (
    Connectivity,
    ConnectivityRule,
    DeviceStatus,
    ExperimentSpec,
)

GATES = ("interval", "connectivity", "battery", "data_cap", "pause")


@dataclasses.dataclass(frozen=True)
class GateCheck:
    gate: str
    ok: bool
    detail: str


@dataclasses.dataclass(frozen=True)
class Decision:
    """One should_run evaluation with the inputs it saw."""

    now: datetime
    experiment_id: str
    forced: bool
    interval_s: float
    connectivity_rule: ConnectivityRule
    battery_floor_pct: int
    daily_data_cap: int
    last_run: Optional[datetime]
    paused_until: Optional[datetime]
    connectivity: Connectivity
    battery_pct: Optional[int]
    data_used_today: int
    gates: tuple[GateCheck, ...]
    ran: bool


def evaluate_gates(
    spec: ExperimentSpec,
    status: DeviceStatus,
    now: datetime,
    last_run: Optional[datetime],
    paused_until: Optional[datetime],
    forced: bool = False,
) -> tuple[GateCheck, ...]:
    rule = spec.schedule
    checks = []

    if forced:
        checks.append(GateCheck("interval", True, "bypassed by run_now"))
    elif last_run is None:
        checks.append(GateCheck("interval", True, "never run"))
    else:
        due = (now - last_run).total_seconds() >= rule.interval
        checks.append(
            GateCheck(
                "interval",
                due,
                f"last run {codec.rfc3339(last_run)}, every {rule.interval:g}s",
            )
        )

    if rule.connectivity_required is ConnectivityRule.MOBILE_ONLY:
        ok = status.connectivity is Connectivity.MOBILE
    else:
        ok = status.connectivity is not Connectivity.NONE
    checks.append(
        GateCheck(
            "connectivity",
            ok,
            f"{status.connectivity.value} under {rule.connectivity_required.value}",
        )
    )

    # An unreadable battery fails closed: no run without a known level.
    battery_ok = (
        status.battery_pct is not None
        and status.battery_pct >= rule.battery_floor_pct
    )
    checks.append(
        GateCheck(
            "battery",
            battery_ok,
            f"{status.battery_pct} vs floor {rule.battery_floor_pct}",
        )
    )

    checks.append(
        GateCheck(
            "data_cap",
            status.data_used_today < rule.daily_data_cap,
            f"{status.data_used_today} of {rule.daily_data_cap} bytes",
        )
    )

    paused = paused_until is not None and paused_until > now
    checks.append(
        GateCheck(
            "pause",
            not paused,
            "not paused" if paused_until is None else f"until {codec.rfc3339(paused_until)}",
        )
    )
    return tuple(checks)


def should_run(
    spec: ExperimentSpec,
    status: DeviceStatus,
    now: datetime,
    last_run: Optional[datetime],
    paused_until: Optional[datetime],
    forced: bool = False,
) -> bool:
    return all(
        check.ok
        for check in evaluate_gates(spec, status, now, last_run, paused_until, forced)
    )


def decide(
    spec: ExperimentSpec,
    status: DeviceStatus,
    now: datetime,
    last_run: Optional[datetime],
    paused_until: Optional[datetime],
    forced: bool = False,
) -> Decision:
    gates = evaluate_gates(spec, status, now, last_run, paused_until, forced)
    return Decision(
        now=now,
        experiment_id=spec.id,
        forced=forced,
        interval_s=spec.schedule.interval,
        connectivity_rule=spec.schedule.connectivity_required,
        battery_floor_pct=spec.schedule.battery_floor_pct,
        daily_data_cap=spec.schedule.daily_data_cap,
        last_run=last_run,
        paused_until=paused_until,
        connectivity=status.connectivity,
        battery_pct=status.battery_pct,
        data_used_today=status.data_used_today,
        gates=gates,
        ran=all(check.ok for check in gates),
    )


def replay_violations(decisions: list[Decision]) -> list[str]:
    """Re-derives every verdict from the recorded raw inputs.

    Deliberately written as bare comparisons, not calls back into
    evaluate_gates, so it catches bugs in the gate logic itself.
    Returns one message per violation; empty means the log is sound.
    """
    problems = []
    for index, d in enumerate(decisions):
        reasons = []
        if not d.forced and d.last_run is not None:
            if (d.now - d.last_run).total_seconds() < d.interval_s:
                reasons.append("within interval of previous run")
        if d.connectivity_rule is ConnectivityRule.MOBILE_ONLY:
            if d.connectivity is not Connectivity.MOBILE:
                reasons.append(f"connectivity {d.connectivity.value}")
        elif d.connectivity is Connectivity.NONE:
            reasons.append("no connectivity")
        if d.battery_pct is None or d.battery_pct < d.battery_floor_pct:
            reasons.append(f"battery {d.battery_pct}")
        if d.data_used_today >= d.daily_data_cap:
            reasons.append(f"ledger {d.data_used_today} at cap")
        if d.paused_until is not None and d.paused_until > d.now:
            reasons.append("paused")
        expected = not reasons
        if d.ran != expected:
            what = "ran despite: " + "; ".join(reasons) if d.ran else "skipped with all gates clear"
            problems.append(
                f"decision {index} ({d.experiment_id} at {codec.rfc3339(d.now)}): {what}"
            )
    return problems
