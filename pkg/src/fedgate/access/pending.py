"""Bounded table of in-flight access requests.

The table holds at most ``capacity`` live entries, keyed by request
nonce, and every entry dies after ``ttl`` seconds whether or not anyone
sweeps explicitly — insertion sweeps first. ``peak_size`` records the
high-water mark so load tests can assert the bound actually held.
"""

from __future__ import annotations

import threading
from typing import Callable


class PendingTable:
    def __init__(self, capacity: int, ttl_seconds: int, clock: Callable[[], int]):
        if capacity < 1 or ttl_seconds < 1:
            raise ValueError("capacity and ttl must be positive")
        self.capacity = capacity
        self.ttl = ttl_seconds
        self._clock = clock
        self._entries: dict[str, tuple[int, object]] = {}
        self._lock = threading.Lock()
        self._peak = 0

    def try_insert(self, nonce: str, request: object) -> bool:
        """Atomic check-and-insert; False when full or the nonce is live."""
        now = int(self._clock())
        with self._lock:
            self._sweep_locked(now)
            if nonce in self._entries or len(self._entries) >= self.capacity:
                return False
            self._entries[nonce] = (now, request)
            self._peak = max(self._peak, len(self._entries))
            return True

    def contains(self, nonce: str) -> bool:
        with self._lock:
            return nonce in self._entries

    def remove(self, nonce: str) -> None:
        with self._lock:
            self._entries.pop(nonce, None)

    def sweep(self, now: int | None = None) -> int:
        """Drop entries older than ttl; returns how many were evicted."""
        now = int(self._clock()) if now is None else int(now)
        with self._lock:
            return self._sweep_locked(now)

    def _sweep_locked(self, now: int) -> int:
        dead = [n for n, (born, _) in self._entries.items() if now - born >= self.ttl]
        for nonce in dead:
            del self._entries[nonce]
        return len(dead)

    @property
    def size(self) -> int:
        return len(self._entries)

    @property
    def peak_size(self) -> int:
        return self._peak
