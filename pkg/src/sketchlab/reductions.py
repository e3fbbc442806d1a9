"""Stream constructions turning promise instances into hard inputs.

Heavy hitters: pad the universe to 2n, preload the top half with ones, and
let each player insert its row on the bottom half.  A popular column of
weight l = ceil(eps*(4n)^(1/p)) becomes an eps-heavy hitter; in the
disjoint case every bottom-half frequency is at most 1 while the p-th
moment is at least n.

Power law: preload padding coordinate i in [2, n+1] so its p-th power is
2 n^(p*zeta) * i^(-p*zeta); the popular column (weight n^zeta) is then an
eps-heavy hitter for every eps^p below 1/(2 + 2 H_{p*zeta}), the disjoint
case keeps all heavy hitters inside the padding, and the final vector is
power-law shaped with parameter zeta.

Frequency moments: no padding; with l = k/2 and (k/2)^p >= 2n the popular
case has F_p at least twice the disjoint case's.

Linear-sketch adversary: for any r x n sketch matrix with r/n <= 0.29,
build nonnegative x1, x2 with equal sketches where a quarter-heavy hitter
exists only in x1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .instances import DisjInstance
from .streams import StreamHeader, exact_heavy_hitters, lp_moment

HARMONIC_TOL = 1e-9

# Power-law envelope constants: sorted magnitudes must satisfy
#   c_lo * f1 * i^-zeta - additive <= |f_(i)| <= c_hi * f1 * i^-zeta + additive
POWERLAW_C_LO = 0.5
POWERLAW_C_HI = 4.0
POWERLAW_ADDITIVE = 1.0


@dataclass
class ReducedStream:
    """Preloaded vector plus per-player insertion blocks and ground truth."""

    universe: int
    initial: np.ndarray
    player_blocks: list[np.ndarray]
    label: str
    star: Optional[int]
    header: StreamHeader
    zeta: Optional[float] = None

    def replay(self) -> np.ndarray:
        x = self.initial.astype(np.int64).copy()
        for block in self.player_blocks:
            np.add.at(x, block, 1)
        return x

    def closed_form(self) -> np.ndarray:
        """Preload plus per-coordinate insertion counts (no sequential replay)."""
        counts = (
            np.bincount(np.concatenate(self.player_blocks), minlength=self.universe)
            if self.player_blocks
            else np.zeros(self.universe, dtype=np.int64)
        )
        return self.initial.astype(np.int64) + counts.astype(np.int64)

    def update_count(self) -> int:
        return int(sum(b.size for b in self.player_blocks))

    def expanded_updates(self) -> tuple[np.ndarray, np.ndarray]:
        """Preload expanded to +1 updates, then the player blocks in order."""
        pre_idx = np.repeat(np.arange(self.universe), self.initial.astype(np.int64))
        rest = [pre_idx] + [b for b in self.player_blocks]
        idx = np.concatenate(rest) if rest else np.zeros(0, dtype=np.int64)
        return idx.astype(np.int64), np.ones(idx.shape[0], dtype=np.int64)

    def multipass_blocks(self, passes: int) -> list[np.ndarray]:
        """The update blocks replayed `passes` times, as in multi-pass runs."""
        return [b for _ in range(passes) for b in self.player_blocks]


def per_player_message_count(stream: ReducedStream, passes: int) -> int:
    """Number of state hand-offs across `passes` replays: passes * k."""
    return passes * len(stream.player_blocks)


def hh_reduction_params(n: int, p: float, eps: float) -> tuple[int, int]:
    """(k, l) = (ceil(2 eps (4n)^(1/p)), ceil(eps (4n)^(1/p)))."""
    if not 1.0 / n ** (1.0 / p) < eps < 0.5:
        raise ValueError("eps must lie in (n^(-1/p), 1/2)")
    base = eps * (4.0 * n) ** (1.0 / p)
    return math.ceil(2.0 * base), math.ceil(base)


def to_hh_stream(instance: DisjInstance, p: float, eps: float) -> ReducedStream:
    """Padded heavy-hitter stream over universe 2n (Theorem-parameter check)."""
    k, l = hh_reduction_params(instance.n, p, eps)
    if instance.k != k or instance.l != l:
        raise ValueError(
            f"instance has (k={instance.k}, l={instance.l}); "
            f"these parameters require (k={k}, l={l})"
        )
    if l < 2:
        raise ValueError("rounded popularity l is below 2; pick a larger n or eps")
    n = instance.n
    initial = np.zeros(2 * n, dtype=np.int64)
    initial[n:] = 1
    blocks = [np.nonzero(instance.rows[j])[0].astype(np.int64) for j in range(instance.k)]
    header = StreamHeader(n=n, k=instance.k, l=instance.l, p=p, label=instance.label)
    stream = ReducedStream(2 * n, initial, blocks, instance.label, instance.star, header)
    _check_hh_separation(stream, p, eps)
    return stream


def _check_hh_separation(stream: ReducedStream, p: float, eps: float) -> None:
    # Rounding is re-verified numerically rather than assumed.
    final = stream.replay()
    n = stream.header.n
    hitters = exact_heavy_hitters(final, eps, p) & set(range(n))
    if stream.label == "YES" and stream.star not in hitters:
        raise ValueError("rounded parameters broke the popular-side separation")
    if stream.label == "NO" and hitters:
        raise ValueError("rounded parameters broke the disjoint-side separation")


def harmonic_power(m: float, head: int = 1_000_000) -> float:
    """H_m = sum_{i>=1} i^-m for m > 1, via summation with a tail correction.

    The first `head` terms are summed directly; the remainder uses the
    Euler-Maclaurin tail I^(1-m)/(m-1) + I^-m/2 - m I^-(m+1)/12, whose error
    is far below HARMONIC_TOL for the exponents used here.
    """
    if m <= 1.0:
        raise ValueError("the series diverges for m <= 1")
    i = np.arange(1, head + 1, dtype=np.float64)
    s = float(np.sum(i ** (-m)))
    tail = head ** (1.0 - m) / (m - 1.0) + 0.5 * head ** (-m) - m * head ** (-m - 1.0) / 12.0
    return s + tail


def powerlaw_reduction_params(n: int, zeta: float) -> tuple[int, int]:
    """(k, l) = (ceil(2 n^zeta), ceil(n^zeta))."""
    base = float(n) ** zeta
    return math.ceil(2.0 * base), math.ceil(base)


def powerlaw_eps_bound(p: float, zeta: float) -> float:
    """Largest eps (exclusive) for the popular-side guarantee: eps^p < 1/(2+2H)."""
    return (1.0 / (2.0 + 2.0 * harmonic_power(p * zeta))) ** (1.0 / p)


def to_powerlaw_stream(instance: DisjInstance, p: float, zeta: float) -> ReducedStream:
    """Power-law-shaped heavy-hitter stream over universe 2n.

    Padding coordinate i in [2, n+1] is preloaded to
    ceil((2 n^(p zeta) i^(-p zeta))^(1/p)), i.e. its p-th power carries the
    weight 2 n^(p zeta) i^(-p zeta) that the separation argument needs.
    """
    if not 1.0 / p < zeta <= 1.0:
        raise ValueError("zeta must lie in (1/p, 1] so H_{p*zeta} is finite")
    k, l = powerlaw_reduction_params(instance.n, zeta)
    if instance.k != k or instance.l != l:
        raise ValueError(
            f"instance has (k={instance.k}, l={instance.l}); "
            f"these parameters require (k={k}, l={l})"
        )
    n = instance.n
    pad_index = np.arange(2, n + 2, dtype=np.float64)
    pad = np.ceil(
        (2.0 * float(n) ** (p * zeta) * pad_index ** (-p * zeta)) ** (1.0 / p)
    ).astype(np.int64)
    initial = np.zeros(2 * n, dtype=np.int64)
    initial[n:] = pad
    blocks = [np.nonzero(instance.rows[j])[0].astype(np.int64) for j in range(instance.k)]
    header = StreamHeader(n=n, k=instance.k, l=instance.l, p=p, label=instance.label)
    return ReducedStream(2 * n, initial, blocks, instance.label, instance.star,
                         header, zeta=zeta)


def is_power_law(values: np.ndarray, zeta: float,
                 c_lo: float = POWERLAW_C_LO, c_hi: float = POWERLAW_C_HI,
                 additive: float = POWERLAW_ADDITIVE) -> bool:
    """Check the sorted-magnitude envelope with the recorded constants."""
    mags = np.sort(np.abs(np.asarray(values, dtype=np.float64)))[::-1]
    if mags[0] == 0:
        return False
    ranks = np.arange(1, mags.shape[0] + 1, dtype=np.float64)
    ideal = mags[0] * ranks ** (-zeta)
    return bool(
        np.all(mags <= c_hi * ideal + additive)
        and np.all(mags >= c_lo * ideal - additive)
    )


def fp_reduction_params(n: int, p: float) -> tuple[int, int]:
    """Smallest even k with (k/2)^p >= 2n, and l = k/2."""
    l = math.ceil((2.0 * n) ** (1.0 / p))
    return 2 * l, l


def to_fp_stream(instance: DisjInstance, p: float) -> ReducedStream:
    """Unpadded moment-gap stream: F_p(popular) >= 2 F_p(disjoint)."""
    if instance.l * 2 != instance.k:
        raise ValueError("moment reduction requires l = k/2 exactly")
    if float(instance.l) ** p < 2.0 * instance.n:
        raise ValueError("(k/2)^p >= 2n fails; the gap is not guaranteed")
    n = instance.n
    initial = np.zeros(n, dtype=np.int64)
    blocks = [np.nonzero(instance.rows[j])[0].astype(np.int64) for j in range(instance.k)]
    header = StreamHeader(n=n, k=instance.k, l=instance.l, p=p, label=instance.label)
    return ReducedStream(n, initial, blocks, instance.label, instance.star, header)


def compute_fp(x: np.ndarray, p: float) -> float:
    return lp_moment(x, p)


@dataclass(frozen=True)
class SketchAdversary:
    x1: np.ndarray
    x2: np.ndarray
    istar: int


def linear_sketch_adversary(matrix: np.ndarray, max_ratio: float = 0.29) -> SketchAdversary:
    """Nonnegative pair with equal sketches; only x1 has a 1/4-heavy hitter.

    Rows are orthonormalized if they are not already.  Requires
    r/n <= max_ratio so the guaranteed coordinate mass (1 - r/n)^2 >= 1/2
    goes through.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("matrix must be 2-d")
    r, n = m.shape
    if r / n > max_ratio:
        raise ValueError(
            f"r/n = {r / n:.3f} exceeds {max_ratio}; the construction needs "
            "(1 - r/n)^2 >= 1/2"
        )
    if not np.allclose(m @ m.T, np.eye(r), atol=1e-9):
        q, _ = np.linalg.qr(m.T)
        m = q.T[:r]
    # diag(M^T M) equals ||M^T M e_i||^2 for a projection, and sums to r.
    leverage = np.sum(m * m, axis=0)
    istar = int(np.argmin(leverage))
    v = -(m.T @ m[:, istar])
    v[istar] += 1.0
    w = np.abs(v)
    w[istar] = 0.0
    return SketchAdversary(x1=w + v, x2=w, istar=istar)
