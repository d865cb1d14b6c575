"""Token-bucket bandwidth shaping.

Refill happens in discrete 100 ms quanta and the bucket holds at most
one quantum of burst, so bytes granted over any window w never exceed
rate x (w + 0.1 s). That bound is what the throughput acceptance bands
rely on.
"""

from __future__ import annotations

import time
from typing import Callable

REFILL_QUANTUM_S = 0.1


class TokenBucket:
    """Grants up to rate_bytes_per_s, with a 0.1 s burst allowance."""

    def __init__(
        self,
        rate_bytes_per_s: float,
        clock: Callable[[], float] = time.monotonic,
    ) -> None:
        if rate_bytes_per_s <= 0:
            raise ValueError("rate_bytes_per_s must be positive")
        self.rate = float(rate_bytes_per_s)
        self.clock = clock
        self.quantum_tokens = self.rate * REFILL_QUANTUM_S
        self.tokens = self.quantum_tokens
        self.last_refill = clock()

    def _refill(self) -> None:
        now = self.clock()
        quanta = int((now - self.last_refill) / REFILL_QUANTUM_S)
        if quanta > 0:
            self.tokens = min(
                self.quantum_tokens, self.tokens + quanta * self.quantum_tokens
            )
            self.last_refill += quanta * REFILL_QUANTUM_S

    def take(self, want: int) -> int:
        """Grant up to `want` bytes; 0 means the caller should back off."""
        self._refill()
        granted = int(min(want, self.tokens))
        self.tokens -= granted
        return granted

    def backoff_s(self) -> float:
        """How long to sleep before tokens are worth checking again."""
        return REFILL_QUANTUM_S / 4
