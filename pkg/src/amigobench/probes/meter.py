"""Byte accounting for the agent's data ledger.

Probes add the application-layer bytes they moved (both directions) to a
meter supplied by the caller; the agent charges the total against the
daily data cap. Counting matches what the simulated network tallies on
its side, so conservation can be asserted end to end.
"""

from __future__ import annotations


class ByteMeter:
    """Accumulates bytes consumed by one experiment run."""

    def __init__(self) -> None:
        self.total = 0

    def add(self, nbytes: int) -> None:
        self.total += int(nbytes)
