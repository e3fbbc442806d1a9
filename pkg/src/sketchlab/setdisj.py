"""Upper-bound protocols for the mostly-disjoint promise problem.

These are structured blackboard protocols over k x n bit matrices rather
than per-bit message tables: players hold whole rows and the interesting
quantities are output correctness and exact bit costs.

deterministic_disj_protocol: one announcement per universe element carrying
its owner count (alphabet {0..k}, first owner speaks), so every run costs
exactly n*ceil(log2(k+1)) bits and the output is error-free under the
promise: a count of 2 or more can only be the popular element.

epsilon_publish_protocol: every player publishes each owned element
independently with probability eps; a collision (same element from two
distinct players) proves YES, so the protocol never reports a false YES.
On a popular instance detection fails exactly when fewer than two of the l
owners publish, which happens with probability
(1-eps)^l + l*eps*(1-eps)^(l-1).

pigeonhole_promise_protocol: the contrasting protocol for the classic
promise (an element common to all k sets): walk the players until one
admits a small set, post that set, and let the next player confirm the
intersection; O((n/k)log n + k) bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .blackboard import Transcript, _bits_for
from .instances import DisjInstance
from . import rng as rngmod

Rows = Union[DisjInstance, np.ndarray]


@dataclass(frozen=True)
class ProtocolRun:
    output: int
    transcript: Transcript
    per_player_bits: tuple[int, ...]

    @property
    def bit_cost(self) -> int:
        return self.transcript.bit_cost


def _as_rows(inputs: Rows) -> np.ndarray:
    if isinstance(inputs, DisjInstance):
        return inputs.rows
    rows = np.asarray(inputs, dtype=np.uint8)
    if rows.ndim != 2:
        raise ValueError("expected a k x n bit matrix")
    return rows


@dataclass(frozen=True)
class DeterministicDisjProtocol:
    n: int
    k: int

    def max_bits(self) -> int:
        return self.n * _bits_for(self.k + 1)

    def run(self, inputs: Rows, seed: int = 0) -> ProtocolRun:
        rows = _as_rows(inputs)
        if rows.shape != (self.k, self.n):
            raise ValueError(f"expected a {self.k} x {self.n} matrix")
        weights = rows.sum(axis=0, dtype=np.int64)
        # First owner announces; the first player stands in for empty columns.
        first_owner = np.argmax(rows > 0, axis=0)
        symbol_bits = _bits_for(self.k + 1)
        per_player = [0] * self.k
        messages = []
        for i in range(self.n):
            speaker = int(first_owner[i]) if weights[i] > 0 else 0
            messages.append((speaker, int(weights[i])))
            per_player[speaker] += symbol_bits
        output = int(np.any(weights >= 2))
        transcript = Transcript(messages=tuple(messages), bit_cost=self.n * symbol_bits)
        return ProtocolRun(output, transcript, tuple(per_player))


@dataclass(frozen=True)
class EpsilonPublishProtocol:
    n: int
    k: int
    l: int
    eps: float

    def run(self, inputs: Rows, seed: int = 0) -> ProtocolRun:
        rows = _as_rows(inputs)
        if rows.shape != (self.k, self.n):
            raise ValueError(f"expected a {self.k} x {self.n} matrix")
        id_bits = _bits_for(self.n)
        len_bits = _bits_for(self.n + 1)
        per_player = []
        messages = []
        seen: dict[int, int] = {}
        collision = False
        for j in range(self.k):
            owned = np.nonzero(rows[j])[0]
            if owned.size and self.eps > 0:
                if self.eps >= 1.0:
                    published = owned
                else:
                    gen = rngmod.stream(seed, j, 0)
                    published = owned[gen.random(owned.size) < self.eps]
            else:
                published = owned[:0]
            for e in published.tolist():
                if e in seen and seen[e] != j:
                    collision = True
                seen.setdefault(e, j)
            messages.append((j, tuple(int(e) for e in published.tolist())))
            per_player.append(len_bits + id_bits * int(published.size))
        transcript = Transcript(messages=tuple(messages), bit_cost=sum(per_player))
        return ProtocolRun(int(collision), transcript, tuple(per_player))

    def yes_failure_probability(self) -> float:
        """Exact failure rate on popular instances: under two owners publish."""
        e, l = self.eps, self.l
        return (1.0 - e) ** l + l * e * (1.0 - e) ** (l - 1)


@dataclass(frozen=True)
class PigeonholePromiseProtocol:
    """Classic promise disjointness (a common element in all k sets).

    Output is only specified for inputs meeting that promise; the small-set
    threshold ceil(n/k) always exists by pigeonhole under it.
    """

    n: int
    k: int

    def run(self, inputs: Rows, seed: int = 0) -> ProtocolRun:
        rows = _as_rows(inputs)
        if rows.shape != (self.k, self.n):
            raise ValueError(f"expected a {self.k} x {self.n} matrix")
        id_bits = _bits_for(self.n)
        len_bits = _bits_for(self.n + 1)
        threshold = math.ceil(self.n / self.k)
        per_player = [0] * self.k
        messages = []
        sizes = rows.sum(axis=1, dtype=np.int64)
        poster = None
        for j in range(self.k):
            small = int(sizes[j] <= threshold)
            messages.append((j, small))
            per_player[j] += 1
            if small:
                poster = j
                break
        if poster is None:
            # Promise violated (no small set); report NO with what was paid.
            transcript = Transcript(tuple(messages), sum(per_player))
            return ProtocolRun(0, transcript, tuple(per_player))
        posted = np.nonzero(rows[poster])[0]
        messages.append((poster, tuple(int(e) for e in posted.tolist())))
        per_player[poster] += len_bits + id_bits * int(posted.size)
        if self.k == 1:
            output = int(posted.size > 0)
            transcript = Transcript(tuple(messages), sum(per_player))
            return ProtocolRun(output, transcript, tuple(per_player))
        confirmer = (poster + 1) % self.k
        common = np.nonzero(rows[confirmer][posted])[0]
        witness = int(posted[common[0]]) if common.size else None
        messages.append((confirmer, witness if witness is not None else -1))
        per_player[confirmer] += len_bits
        transcript = Transcript(tuple(messages), sum(per_player))
        return ProtocolRun(int(witness is not None), transcript, tuple(per_player))


def deterministic_disj_protocol(n: int, k: int) -> DeterministicDisjProtocol:
    return DeterministicDisjProtocol(n, k)


def epsilon_publish_protocol(n: int, k: int, l: int, eps: float) -> EpsilonPublishProtocol:
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    return EpsilonPublishProtocol(n, k, l, eps)


def pigeonhole_promise_protocol(n: int, k: int) -> PigeonholePromiseProtocol:
    return PigeonholePromiseProtocol(n, k)
