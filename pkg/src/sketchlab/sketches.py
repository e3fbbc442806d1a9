"""Deterministic frequency summaries and a randomized reference baseline.

MisraGries is the classic deterministic frequent-elements summary for
positive streams; two instances (one per sign class) give a signed
estimator with additive error max(P, N)/S on turnstile streams.
CountSketch is included only as the randomized comparison point.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Optional

import numpy as np


class MisraGries:
    """Frequent-elements summary with at most `capacity` live counters.

    Estimates satisfy the sandwich bound

        x_i - processed/capacity <= estimate(i) <= x_i

    for the true positive-stream count x_i.  Eviction is realized with a
    shared group-decrement offset: stored raw counts are interpreted
    relative to `_offset`, so a decrement-all step is O(1) bookkeeping plus
    an eviction scan that is amortized O(1) per update.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.processed = 0
        self._raw: dict[int, int] = {}
        self._offset = 0

    def update(self, item: int, count: int = 1) -> None:
        """Process `count` occurrences of item (a run of identical arrivals)."""
        if count < 1:
            raise ValueError("positive increments only")
        self.processed += count
        raw = self._raw
        if item in raw:
            raw[item] += count
            return
        if len(raw) < self.capacity:
            raw[item] = self._offset + count
            return
        # Full table: the run keeps decrementing everything (consuming one
        # arrival per decrement) until either the run is exhausted or some
        # counter dies and frees a slot for the remaining occurrences.
        smallest = min(raw.values()) - self._offset
        if count <= smallest:
            self._offset += count
            if count == smallest:
                self._evict()
            return
        self._offset += smallest
        self._evict()
        self.update(item, count - smallest)

    def _evict(self) -> None:
        off = self._offset
        dead = [k for k, v in self._raw.items() if v <= off]
        for k in dead:
            del self._raw[k]

    def estimate(self, item: int) -> int:
        """Counter value or 0; a lower bound on the true count."""
        raw = self._raw.get(item)
        return raw - self._offset if raw is not None else 0

    def items(self) -> dict[int, int]:
        """Tracked items and their current estimates."""
        off = self._offset
        return {k: v - off for k, v in self._raw.items()}

    def error_bound(self) -> float:
        return self.processed / self.capacity

    def __len__(self) -> int:
        return len(self._raw)

    # The counter list plus the processed total is the whole summary state;
    # it is what gets handed from player to player in reduction experiments.
    def to_json(self) -> str:
        return json.dumps(
            {
                "capacity": self.capacity,
                "processed": self.processed,
                "counters": sorted(self.items().items()),
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "MisraGries":
        obj = json.loads(payload)
        mg = cls(obj["capacity"])
        mg.processed = obj["processed"]
        mg._raw = {int(k): int(v) for k, v in obj["counters"]}
        return mg


def signed_estimate(pos: MisraGries, neg: MisraGries, item: int) -> tuple[int, float]:
    """Estimate of x_i from the positive/negative summaries with its bound.

    |estimate - x_i| <= max(P, N)/S <= (P + N)/S for capacity-S summaries.
    """
    value = pos.estimate(item) - neg.estimate(item)
    bound = max(pos.error_bound(), neg.error_bound())
    return value, bound


def _mix64(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; stateless hashing for CountSketch rows.
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(30)
    x = (x * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(27)
    x = (x * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    x ^= x >> np.uint64(31)
    return x


class CountSketch:
    """Median-of-rows randomized frequency sketch (reference baseline)."""

    def __init__(self, width: int, depth: int, seed: int, universe: Optional[int] = None):
        if width < 1 or depth < 1:
            raise ValueError("width and depth must be >= 1")
        self.width = width
        self.depth = depth
        self.seed = seed
        self.universe = universe
        self.table = np.zeros((depth, width), dtype=np.int64)

    def _row_hashes(self, items: np.ndarray, row: int) -> tuple[np.ndarray, np.ndarray]:
        items = np.asarray(items, dtype=np.uint64)
        key = ((self.seed << 8) ^ (2 * row)) & 0xFFFFFFFFFFFFFFFF
        h = _mix64(items ^ _mix64(np.uint64(key)))
        s = _mix64(items ^ _mix64(np.uint64(key | 1)))
        buckets = (h % np.uint64(self.width)).astype(np.int64)
        signs = np.where((s & np.uint64(1)) == 1, 1, -1).astype(np.int64)
        return buckets, signs

    def update(self, item: int, delta: int = 1) -> None:
        arr = np.asarray([item])
        for row in range(self.depth):
            b, s = self._row_hashes(arr, row)
            self.table[row, b[0]] += int(s[0]) * delta

    def estimate(self, item: int) -> int:
        arr = np.asarray([item])
        vals = []
        for row in range(self.depth):
            b, s = self._row_hashes(arr, row)
            vals.append(int(s[0]) * int(self.table[row, b[0]]))
        return int(np.median(vals))

    def estimate_all(self, n: int) -> np.ndarray:
        items = np.arange(n)
        per_row = np.empty((self.depth, n), dtype=np.int64)
        for row in range(self.depth):
            b, s = self._row_hashes(items, row)
            per_row[row] = s * self.table[row, b]
        return np.median(per_row, axis=0).astype(np.int64)

    def l2_estimate(self) -> float:
        return float(np.median(np.sum(self.table.astype(np.float64) ** 2, axis=1)) ** 0.5)

    def heavy_hitters(self, eps: float) -> set[int]:
        if self.universe is None:
            raise ValueError("universe size required for a full scan")
        est = self.estimate_all(self.universe)
        thresh = eps * self.l2_estimate()
        return {int(i) for i in np.nonzero(np.abs(est) >= thresh)[0] if est[i] != 0}
