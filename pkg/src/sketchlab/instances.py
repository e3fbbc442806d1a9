"""Mostly-disjoint promise instances and their hard input distribution.

An instance gives k players one row of a k x n 0/1 matrix each.  NO: every
column has weight at most 1.  YES: a unique popular column has weight
exactly l (2 <= l <= k) and every other column has weight at most 1.

The hard distribution assigns each column a uniformly random owner that
holds a uniform bit; in the popular case a uniform size-l player set is
written over a uniformly chosen column.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InfeasibleInstanceError
from . import rng as rngmod

YES = "YES"
NO = "NO"


@dataclass
class DisjInstance:
    n: int
    k: int
    l: int
    rows: np.ndarray  # k x n, uint8
    label: str
    star: Optional[int] = None

    def row_sets(self) -> list[np.ndarray]:
        """Per-player sorted element lists."""
        return [np.nonzero(self.rows[j])[0] for j in range(self.k)]

    def column_weights(self) -> np.ndarray:
        return self.rows.sum(axis=0, dtype=np.int64)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "k": self.k,
                "l": self.l,
                "rows": [r.tolist() for r in self.row_sets()],
                "label": self.label,
                "star": self.star,
            }
        )

    @classmethod
    def from_json(cls, payload: str) -> "DisjInstance":
        obj = json.loads(payload)
        rows = np.zeros((obj["k"], obj["n"]), dtype=np.uint8)
        for j, elems in enumerate(obj["rows"]):
            rows[j, elems] = 1
        return cls(obj["n"], obj["k"], obj["l"], rows, obj["label"], obj.get("star"))


@dataclass(frozen=True)
class PromiseReport:
    """Outcome of verify_promise: a label, or the offending columns."""

    label: Optional[str]
    star: Optional[int]
    violations: tuple[tuple[int, int], ...]  # (column, weight)

    @property
    def ok(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class HardDistSample:
    instance: DisjInstance
    owners: np.ndarray        # D_i: per-column owner
    special: int              # I: the potentially popular column
    case_bit: int             # Z
    owner_set: Optional[np.ndarray]  # S when Z = 1


def _validate(n: int, k: int, l: int, need_popular: bool) -> None:
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if not 1 <= l <= k:
        raise ValueError("l must satisfy 1 <= l <= k")
    if need_popular and l < 2:
        raise ValueError("a popular column needs l >= 2 to be distinguishable")


def sample_eta(n: int, k: int, l: int, z: int, seed: int) -> HardDistSample:
    """Draw an instance from the hard distribution, conditioned on the case bit.

    Each column i gets a uniform owner D_i whose bit is uniform; all other
    players hold 0 there.  With z = 1, a uniform column I is overwritten so
    that exactly a uniform size-l player set holds it.
    """
    _validate(n, k, l, need_popular=z == 1)
    if z not in (0, 1):
        raise ValueError("z must be 0 or 1")
    gen = rngmod.stream(seed, 0, 0)
    owners = gen.integers(0, k, size=n)
    held = gen.integers(0, 2, size=n)
    rows = np.zeros((k, n), dtype=np.uint8)
    cols = np.nonzero(held)[0]
    rows[owners[cols], cols] = 1
    special = int(gen.integers(0, n))
    owner_set = None
    if z == 1:
        owner_set = np.sort(gen.choice(k, size=l, replace=False))
        rows[:, special] = 0
        rows[owner_set, special] = 1
        label, star = YES, special
    else:
        label, star = NO, None
    inst = DisjInstance(n, k, l, rows, label, star)
    return HardDistSample(inst, owners, special, z, owner_set)


def verify_promise(instance: DisjInstance) -> PromiseReport:
    """Recompute column weights and classify, or report violating columns."""
    weights = instance.column_weights()
    heavy = np.nonzero(weights >= 2)[0]
    if heavy.shape[0] == 0:
        return PromiseReport(NO, None, ())
    if heavy.shape[0] == 1 and int(weights[heavy[0]]) == instance.l and instance.l >= 2:
        return PromiseReport(YES, int(heavy[0]), ())
    return PromiseReport(None, None, tuple((int(i), int(weights[i])) for i in heavy))


def adversarial_no_instance(n: int, k: int, l: int, seed: int) -> DisjInstance:
    """NO instance with every column weight exactly 1 (maximal player sets)."""
    _validate(n, k, l, need_popular=False)
    gen = rngmod.stream(seed, 0, 1)
    owners = gen.permuted(np.arange(n) % k)
    rows = np.zeros((k, n), dtype=np.uint8)
    rows[owners, np.arange(n)] = 1
    return DisjInstance(n, k, l, rows, NO, None)


def adversarial_yes_instance(n: int, k: int, l: int, seed: int) -> DisjInstance:
    """YES instance: popular column of weight l, all others weight 1."""
    _validate(n, k, l, need_popular=True)
    if n < 1:
        raise InfeasibleInstanceError("need at least one column for the star")
    gen = rngmod.stream(seed, 0, 2)
    star = int(gen.integers(0, n))
    owner_set = gen.choice(k, size=l, replace=False)
    rest = np.delete(np.arange(n), star)
    owners = gen.permuted(rest % k)
    rows = np.zeros((k, n), dtype=np.uint8)
    rows[owners, rest] = 1
    rows[:, star] = 0
    rows[owner_set, star] = 1
    return DisjInstance(n, k, l, rows, YES, star)


def default_popularity(k: int, c: float = 0.5) -> int:
    """Popular-column multiplicity l = ceil(c*k); c = 1/2 by default."""
    return math.ceil(c * k)
