"""Injectable time sources.

Modules that stamp timestamps take a zero-argument callable returning
UNIX seconds. Production code passes nothing and gets wall time; tests
and deterministic demos pass a :class:`SimulatedClock` they can step.
"""

from __future__ import annotations

import time


def wall_clock() -> int:
    return int(time.time())


class SimulatedClock:
    """Manually advanced clock; usable directly as a clock callable."""

    def __init__(self, start: int = 0):
        self._now = int(start)

    def now(self) -> int:
        return self._now

    def advance(self, seconds: int) -> int:
        if seconds < 0:
            raise ValueError("clocks only move forward")
        self._now += int(seconds)
        return self._now

    def __call__(self) -> int:
        return self._now
