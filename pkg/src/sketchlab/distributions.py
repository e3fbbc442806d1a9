"""Finite distributions, divergences in bits, and the overlap decomposition.

Distributions are sparse maps from hashable atoms to probabilities.  All
divergences use log base 2 (communication is measured in bits), so
Pinsker's inequality reads KL(P,Q) >= (2/ln 2) * tv(P,Q)^2.

`decompose` splits a pair (D0, D1) with a weight alpha into a common part
and two disjointly-supported remainders:

    D0 = (1-alpha)(1-delta) C + (1 - (1-alpha)(1-delta)) Z
    D1 = (1-delta) C + delta O,     supp(Z) & supp(O) = {}

with C proportional to min(D0/(1-alpha), D1) and delta the normalization
deficit.  When the inputs are exact fractions the arithmetic stays exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Union

Atom = Hashable
Prob = Union[float, Fraction]

SUM_TOL = 1e-12

# Reserved atoms for massless remainder parts; they keep support
# disjointness checkable when the construction leaves a part arbitrary.
FRESH_ZERO = "__fresh0__"
FRESH_ONE = "__fresh1__"


class FiniteDistribution:
    """Probability distribution over a finite set of hashable atoms."""

    __slots__ = ("probs",)

    def __init__(self, probs: Mapping[Atom, Prob], validate: bool = True):
        self.probs = {a: p for a, p in probs.items() if p != 0}
        if validate:
            if any(p < 0 for p in self.probs.values()):
                raise ValueError("negative probability")
            total = sum(self.probs.values())
            if abs(float(total) - 1.0) > SUM_TOL:
                raise ValueError(f"probabilities sum to {float(total)}, not 1")

    def support(self) -> set[Atom]:
        return set(self.probs)

    def prob(self, atom: Atom) -> Prob:
        return self.probs.get(atom, 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteDistribution) and self.probs == other.probs

    def __repr__(self) -> str:
        inner = ", ".join(f"{a!r}: {float(p):.6g}" for a, p in sorted_items(self.probs))
        return f"FiniteDistribution({{{inner}}})"

    def to_json(self) -> str:
        return json.dumps({str(a): float(p) for a, p in sorted_items(self.probs)})

    @classmethod
    def from_json(cls, payload: str) -> "FiniteDistribution":
        raw = json.loads(payload)
        out = {}
        for key, p in raw.items():
            try:
                atom: Atom = int(key)
            except ValueError:
                atom = key
            out[atom] = p
        return cls(out)

    @classmethod
    def point_mass(cls, atom: Atom) -> "FiniteDistribution":
        return cls({atom: 1})

    @classmethod
    def uniform(cls, atoms) -> "FiniteDistribution":
        atoms = list(atoms)
        w = Fraction(1, len(atoms))
        return cls({a: w for a in atoms})


def sorted_items(probs: Mapping[Atom, Prob]):
    return sorted(probs.items(), key=lambda kv: repr(kv[0]))


def tv_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Total variation distance (1/2) * ||P - Q||_1, in [0, 1]."""
    atoms = p.support() | q.support()
    return float(sum(abs(p.prob(a) - q.prob(a)) for a in atoms)) / 2.0


def kl_divergence(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """KL divergence in bits; +inf when supp(P) is not within supp(Q)."""
    total = 0.0
    for atom, pa in p.probs.items():
        qa = q.prob(atom)
        if qa == 0:
            return math.inf
        total += float(pa) * math.log2(float(pa) / float(qa))
    return total


def js_divergence(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Jensen-Shannon divergence in bits: mean KL to the midpoint mixture."""
    atoms = p.support() | q.support()
    mid = FiniteDistribution(
        {a: (float(p.prob(a)) + float(q.prob(a))) / 2.0 for a in atoms}, validate=False
    )
    return 0.5 * (kl_divergence(p, mid) + kl_divergence(q, mid))


@dataclass(frozen=True)
class Decomposition:
    """Common/remainder split of a distribution pair (see module docstring)."""

    common: FiniteDistribution
    zero_part: FiniteDistribution
    one_part: FiniteDistribution
    delta: Prob
    alpha: Prob

    def check(self, d0: FiniteDistribution, d1: FiniteDistribution, tol: float = SUM_TOL) -> None:
        """Assert the two mixture identities and support disjointness."""
        if self.zero_part.support() & self.one_part.support():
            raise AssertionError("remainder supports overlap")
        w0 = (1 - self.alpha) * (1 - self.delta)
        w1 = 1 - self.delta
        atoms = (
            d0.support() | d1.support() | self.common.support()
            | self.zero_part.support() | self.one_part.support()
        )
        for a in atoms:
            lhs0 = w0 * self.common.prob(a) + (1 - w0) * self.zero_part.prob(a)
            lhs1 = w1 * self.common.prob(a) + self.delta * self.one_part.prob(a)
            if abs(float(lhs0) - float(d0.prob(a))) > tol:
                raise AssertionError(f"zero-side mixture off at atom {a!r}")
            if abs(float(lhs1) - float(d1.prob(a))) > tol:
                raise AssertionError(f"one-side mixture off at atom {a!r}")


def decompose(d0: FiniteDistribution, d1: FiniteDistribution, alpha: Prob) -> Decomposition:
    """Split (D0, D1) into common and disjoint remainder parts.

    The common part is min(D0/(1-alpha), D1) rescaled by 1/(1-delta), where
    delta is the normalization deficit.  Degenerate cases: alpha = 1 gives
    delta = 0 with the one-side remainder left as a reserved point mass, and
    disjoint inputs give delta = 1.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha == 1:
        return Decomposition(
            common=d1,
            zero_part=d0,
            one_part=FiniteDistribution.point_mass(FRESH_ONE),
            delta=_zero_like(alpha),
            alpha=alpha,
        )
    if not d0.support() & d1.support():
        return Decomposition(
            common=FiniteDistribution.point_mass(FRESH_ZERO),
            zero_part=d0,
            one_part=d1,
            delta=_one_like(alpha),
            alpha=alpha,
        )
    scale = 1 - alpha
    overlap = {}
    for a in d0.support() | d1.support():
        m = min(d0.prob(a) / scale, d1.prob(a))
        if m != 0:
            overlap[a] = m
    mass = sum(overlap.values())
    delta = _clip01(1 - mass)
    if mass == 0:
        common = FiniteDistribution.point_mass(FRESH_ZERO)
    else:
        common = FiniteDistribution({a: m / mass for a, m in overlap.items()}, validate=False)
    w0 = scale * mass  # (1-alpha)(1-delta)
    zero = {}
    one = {}
    for a in d0.support() | d1.support():
        lifted0 = d0.prob(a) / scale
        p1 = d1.prob(a)
        if lifted0 > p1 and w0 != 1:
            zero[a] = (d0.prob(a) - scale * p1) / (1 - w0)
        elif p1 > lifted0 and delta != 0:
            one[a] = (p1 - lifted0) / delta
    zero_part = (
        FiniteDistribution(zero, validate=False)
        if zero
        else FiniteDistribution.point_mass(FRESH_ZERO)
    )
    one_part = (
        FiniteDistribution(one, validate=False)
        if one
        else FiniteDistribution.point_mass(FRESH_ONE)
    )
    return Decomposition(common=common, zero_part=zero_part, one_part=one_part,
                         delta=delta, alpha=alpha)


def _clip01(x: Prob) -> Prob:
    if x < 0:
        return _zero_like(x)
    if x > 1:
        return _one_like(x)
    return x


def _zero_like(template: Prob) -> Prob:
    return Fraction(0) if isinstance(template, Fraction) else 0.0


def _one_like(template: Prob) -> Prob:
    return Fraction(1) if isinstance(template, Fraction) else 1.0
