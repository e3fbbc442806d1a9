"""Deterministic l2 heavy hitters for bounded-length +-1 turnstile streams.

Three structures run in parallel: a frequent-elements summary on the
positive updates, one on the negative updates (sign-flipped), and an exact
S-sparse syndrome sketch.  With S = ceil((4L/eps)^(2/3)) the state is
O((L/eps)^(2/3)) words.

Strict mode: when P - N <= S the stream vector is recovered exactly and the
query returns its exact eps-heavy hitters; otherwise items whose signed
estimate exceeds 3L/S are returned.  Non-strict mode returns the estimate
vector with the l_inf/l_2 guarantee instead of a heavy-hitter set.
"""

from __future__ import annotations

import json
import math
import struct
from typing import Optional

import numpy as np

from .errors import LengthBudgetError, StrictPromiseError
from .sketches import MisraGries
from .sparse_recovery import SyndromeSketch


def space_budget(length_bound: int, eps: float) -> int:
    """Sketch sparsity S = ceil((L/eps')^(2/3)) at the internal eps' = eps/4."""
    return math.ceil((4.0 * length_bound / eps) ** (2.0 / 3.0))


class BoundedTurnstileHH:
    """Heavy-hitter state for a declared-length +-1 turnstile stream."""

    # word_count() <= SPACE_CONSTANT * (L/eps)^(2/3) for every tested config.
    SPACE_CONSTANT = 17

    def __init__(self, universe: int, eps: float, length_bound: int,
                 sparsity: Optional[int] = None):
        if not 0 < eps < 1:
            raise ValueError("eps must be in (0, 1)")
        if length_bound < 1:
            raise ValueError("length bound must be >= 1")
        self.universe = universe
        self.eps = eps
        self.length_bound = length_bound
        self.sparsity = sparsity if sparsity is not None else space_budget(length_bound, eps)
        self.mg_pos = MisraGries(self.sparsity)
        self.mg_neg = MisraGries(self.sparsity)
        self.syndromes = SyndromeSketch(universe, self.sparsity)
        self.positive = 0
        self.negative = 0

    @property
    def length(self) -> int:
        """Observed stream length L = P + N."""
        return self.positive + self.negative

    def update(self, index: int, sign: int) -> None:
        if sign not in (1, -1):
            raise ValueError("updates must be +-1")
        if self.length + 1 > self.length_bound:
            raise LengthBudgetError(
                f"stream exceeds the declared bound of {self.length_bound} updates"
            )
        if sign > 0:
            self.mg_pos.update(index)
            self.positive += 1
        else:
            self.mg_neg.update(index)
            self.negative += 1
        self.syndromes.update(index, sign)

    def ingest_runs(self, indices: np.ndarray, counts: np.ndarray, signs: np.ndarray) -> None:
        """Batched ingest of runs of identical updates.

        Equivalent to calling update() counts[r] times per run r in order;
        the frequent-elements summaries consume whole runs and the linear
        sketch absorbs net per-index deltas.
        """
        indices = np.asarray(indices, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        signs = np.asarray(signs, dtype=np.int64)
        total = int(counts.sum())
        if self.length + total > self.length_bound:
            raise LengthBudgetError(
                f"stream exceeds the declared bound of {self.length_bound} updates"
            )
        for idx, cnt, sgn in zip(indices.tolist(), counts.tolist(), signs.tolist()):
            if cnt == 0:
                continue
            if sgn > 0:
                self.mg_pos.update(idx, cnt)
                self.positive += cnt
            else:
                self.mg_neg.update(idx, cnt)
                self.negative += cnt
        net = signs * counts
        keys = np.unique(indices)
        sums = np.zeros(keys.shape[0], dtype=np.int64)
        pos = np.searchsorted(keys, indices)
        np.add.at(sums, pos, net)
        live = sums != 0
        before = self.syndromes.update_count
        if np.any(live):
            self.syndromes.update_bulk(keys[live], sums[live])
        self.syndromes.update_count = before + total

    def signed_estimates(self) -> dict[int, int]:
        """x_hat over every tracked item; untracked items estimate to 0."""
        est = dict(self.mg_pos.items())
        for item, neg in self.mg_neg.items().items():
            est[item] = est.get(item, 0) - neg
        return est

    def query_strict(self) -> list[int]:
        """Heavy-hitter set under the strict promise (x >= 0 throughout).

        Sparse branch (P - N <= S): decode the exact vector and return its
        exact eps-heavy hitters.  Dense branch: return items whose signed
        estimate strictly exceeds 3L/S.
        """
        L = self.length
        S = self.sparsity
        if self.positive - self.negative <= S:
            # Under the promise ||x||_0 <= ||x||_1 = P - N, which certifies
            # the support bound handed to the decoder.
            decoded = self.syndromes.decode(max_support=self.positive - self.negative)
            if decoded is None:
                raise StrictPromiseError(
                    "exact recovery failed although ||x||_1 <= S; "
                    "the stream violates the strict-turnstile promise"
                )
            norm = math.sqrt(sum(v * v for v in decoded.values()))
            return sorted(i for i, v in decoded.items() if v > 0 and v >= self.eps * norm)
        threshold = 3.0 * L / S
        return sorted(i for i, v in self.signed_estimates().items() if v > threshold)

    def query_linf(self) -> tuple[dict[int, int], float]:
        """Estimate vector with ||z - x||_inf <= 2L/S <= eps*||x||_2.

        Valid without the strict promise.  Requires the configured sparsity
        to be at least 2(L_bound/eps)^(2/3).
        """
        needed = 2.0 * (self.length_bound / self.eps) ** (2.0 / 3.0)
        if self.sparsity < needed:
            raise ValueError(
                f"sparsity {self.sparsity} below the 2(L/eps)^(2/3) = {needed:.1f} "
                "requirement for the l_inf/l_2 guarantee"
            )
        L = self.length
        S = self.sparsity
        xhat = self.signed_estimates()
        decoded = self.syndromes.decode()
        if decoded is not None:
            support = set(decoded) | set(xhat)
            diff = max(
                (abs(decoded.get(i, 0) - xhat.get(i, 0)) for i in support),
                default=0,
            )
            if diff <= L / S:
                return decoded, 2.0 * L / S
        return xhat, 2.0 * L / S

    def word_count(self) -> int:
        """Machine words held: syndromes, both counter tables, counters."""
        mg_words = 2 * (2 * self.sparsity + 2)
        return 2 * self.sparsity + mg_words + 4

    def to_bytes(self) -> bytes:
        head = json.dumps(
            {
                "universe": self.universe,
                "eps": self.eps,
                "length_bound": self.length_bound,
                "sparsity": self.sparsity,
                "positive": self.positive,
                "negative": self.negative,
                "mg_pos": self.mg_pos.to_json(),
                "mg_neg": self.mg_neg.to_json(),
            }
        ).encode()
        syn = self.syndromes.to_bytes()
        return struct.pack("<I", len(head)) + head + syn

    @classmethod
    def from_bytes(cls, data: bytes) -> "BoundedTurnstileHH":
        (head_len,) = struct.unpack_from("<I", data, 0)
        head = json.loads(data[4 : 4 + head_len].decode())
        state = cls(
            head["universe"], head["eps"], head["length_bound"], head["sparsity"]
        )
        state.positive = head["positive"]
        state.negative = head["negative"]
        state.mg_pos = MisraGries.from_json(head["mg_pos"])
        state.mg_neg = MisraGries.from_json(head["mg_neg"])
        state.syndromes = SyndromeSketch.from_bytes(data[4 + head_len :], head["universe"])
        return state
