"""Sparse-row low-rank hard instances and the midpoint identification step.

sqrt(d) player sets over [d], each of size sqrt(d)/2, arrive as runs of
standard basis rows.  Disjoint sets mean every element shows up once; in
the popular case a unique element occurs in ceil(2 sqrt(d)/3) sets and the
sets are otherwise disjoint, so its count after the first half of the sets
is already at least ceil(2 sqrt(d)/3) - floor(sqrt(d)/2) >= sqrt(d)/6.

For basis-row matrices A^T A = diag(counts), so the rank-1 residual of a
unit vector v is sum(c) - sum(c_i v_i^2) exactly, and any v whose residual
is within a factor APPROX_C of optimal must put mass at least
mass_threshold() on the popular coordinate.  identify_star then checks
which candidate coordinates recur in the second half of the stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleInstanceError
from . import rng as rngmod

YES = "YES"
NO = "NO"

# Smallest approximation factor keeping mass_threshold() >= 0.1 at both
# tested dimensions (computed from the exact midpoint counting bounds).
APPROX_C = 1.02
TAU_DEFAULT = 0.05
CANDIDATE_CAP = 20


@dataclass
class RowStreamInstance:
    d: int
    sets: list[np.ndarray]
    label: str
    star: Optional[int]

    @property
    def num_sets(self) -> int:
        return len(self.sets)

    def rows(self) -> np.ndarray:
        """Basis-row indices in arrival order (set by set)."""
        return np.concatenate(self.sets)

    def first_half_rows(self) -> np.ndarray:
        return np.concatenate(self.sets[: self.num_sets // 2])

    def second_half_rows(self) -> np.ndarray:
        return np.concatenate(self.sets[self.num_sets // 2:])

    def to_json_obj(self) -> dict:
        return {
            "d": self.d,
            "sets": [s.tolist() for s in self.sets],
            "label": self.label,
            "star": self.star,
        }


def gen_lowrank_instance(d: int, label: str, seed: int) -> RowStreamInstance:
    """Instance with sqrt(d) sets of size ceil(sqrt(d)/2) over [d].

    For non-square d or odd sqrt(d) the set size rounds up; feasibility of
    the disjoint packing is checked explicitly.
    """
    root = math.isqrt(d)
    if root * root != d:
        raise InfeasibleInstanceError("d must be a perfect square")
    num_sets = root
    size = (root + 1) // 2 if root % 2 else root // 2
    if label == NO:
        if num_sets * size > d:
            raise InfeasibleInstanceError("disjoint sets do not fit in [d]")
        gen = rngmod.stream(seed, 0, 3)
        pool = gen.permutation(d)[: num_sets * size]
        sets = [np.sort(pool[j * size:(j + 1) * size]) for j in range(num_sets)]
        return RowStreamInstance(d, sets, NO, None)
    if label != YES:
        raise ValueError("label must be YES or NO")
    occurrences = math.ceil(2 * root / 3)
    if occurrences > num_sets or size < 1:
        raise InfeasibleInstanceError("popular element cannot fit")
    distinct_needed = 1 + num_sets * size - occurrences
    if distinct_needed > d:
        raise InfeasibleInstanceError("popular packing does not fit in [d]")
    gen = rngmod.stream(seed, 0, 4)
    pool = gen.permutation(d)
    star = int(pool[0])
    rest = pool[1:]
    star_sets = set(gen.choice(num_sets, size=occurrences, replace=False).tolist())
    sets = []
    cursor = 0
    for j in range(num_sets):
        if j in star_sets:
            take = rest[cursor: cursor + size - 1]
            cursor += size - 1
            sets.append(np.sort(np.append(take, star)))
        else:
            take = rest[cursor: cursor + size]
            cursor += size
            sets.append(np.sort(take))
    return RowStreamInstance(d, sets, YES, star)


def counts_from_rows(d: int, rows: np.ndarray) -> np.ndarray:
    """c_i = number of arrived basis rows equal to e_i."""
    return np.bincount(np.asarray(rows, dtype=np.int64), minlength=d).astype(np.int64)


def residual_rank1(counts: np.ndarray, v: np.ndarray) -> float:
    """||A - A v v^T||_F^2 = sum(c) - sum(c_i v_i^2) for unit v."""
    v = np.asarray(v, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise ValueError("v must be a unit vector")
    c = np.asarray(counts, dtype=np.float64)
    return float(np.sum(c) - np.sum(c * v * v))


def optimal_rank1_residual(counts: np.ndarray) -> float:
    return float(np.sum(counts) - np.max(counts))


def top_right_singular_vector(counts: np.ndarray) -> np.ndarray:
    """Exact diagonalization: A^T A = diag(c), so the top vector is a basis one."""
    v = np.zeros(len(counts), dtype=np.float64)
    v[int(np.argmax(counts))] = 1.0
    return v


def midpoint_star_floor(d: int) -> float:
    """Guaranteed popular count after half the sets: sqrt(d)/6."""
    return math.sqrt(d) / 6.0


def mass_threshold(d: int, approx_c: float = APPROX_C) -> float:
    """Popular-coordinate mass forced by a approx_c-optimal midpoint v.

    From residual >= ||A||_F^2 - 1 - c_star v_star^2 and
    residual <= approx_c * (||A||_F^2 - c_star), with the worst-case exact
    midpoint quantities: c_star >= ceil(2 sqrt(d)/3) - floor(sqrt(d)/2) and
    ||A||_F^2 = floor(sqrt(d)/2) * (sqrt(d)/2).
    """
    root = math.isqrt(d)
    size = (root + 1) // 2 if root % 2 else root // 2
    c_star = math.ceil(2 * root / 3) - root // 2
    fro = (root // 2) * size
    return approx_c - ((approx_c - 1.0) * fro + 1.0) / c_star


def identify_star(v: np.ndarray, tau: float, second_half_rows: Sequence[int],
                  candidate_cap: int = CANDIDATE_CAP) -> str:
    """YES iff exactly one tau-heavy coordinate of v recurs in the second half.

    Requires v to come from an algorithm with residual <= APPROX_C * optimal
    at the stream midpoint; ||v||^2 = 1 caps the candidate set at 1/tau.
    """
    v = np.asarray(v, dtype=np.float64)
    candidates = set(np.nonzero(v * v >= tau)[0].tolist())
    if len(candidates) > candidate_cap:
        raise ValueError(
            f"{len(candidates)} candidates exceed the configured cap {candidate_cap}"
        )
    seen = candidates & set(int(r) for r in np.asarray(second_half_rows).tolist())
    return YES if len(seen) == 1 else NO
