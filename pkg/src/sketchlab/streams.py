"""Frequency vectors, the exact heavy-hitter oracle, and stream files.

A stream is a sequence of (index, +-1) updates against a frequency vector.
The text format is a header line "n k l p label" followed by one "i +1" or
"i -1" line per update; the binary format packs each update as a
little-endian u32 index and an i8 sign.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np


@dataclass(frozen=True)
class StreamHeader:
    n: int
    k: int
    l: int
    p: float
    label: str


def replay_updates(universe: int, indices: np.ndarray, signs: np.ndarray,
                   initial: Optional[np.ndarray] = None) -> np.ndarray:
    """Final frequency vector after applying the updates in order."""
    x = np.zeros(universe, dtype=np.int64) if initial is None else initial.astype(np.int64).copy()
    np.add.at(x, np.asarray(indices, dtype=np.int64), np.asarray(signs, dtype=np.int64))
    return x


def lp_moment(x: np.ndarray, p: float) -> float:
    """F_p = sum_i |x_i|^p."""
    ax = np.abs(np.asarray(x, dtype=np.float64))
    return float(np.sum(ax ** p))


def exact_heavy_hitters(x: np.ndarray, eps: float, p: float = 2.0) -> set[int]:
    """Indices with |x_i|^p >= eps^p * ||x||_p^p and x_i != 0.

    This is the ground-truth oracle used by tests and verifiers; the zero
    vector has no heavy hitters by convention.
    """
    ax = np.abs(np.asarray(x, dtype=np.float64))
    total = float(np.sum(ax ** p))
    if total == 0.0:
        return set()
    thresh = (eps ** p) * total
    return {int(i) for i in np.nonzero((ax ** p >= thresh) & (ax > 0))[0]}


def heavy_hitter_set_valid(output: Iterable[int], x: np.ndarray, eps: float,
                           p: float = 2.0) -> bool:
    """Check the two-sided guarantee: all eps-heavy in, nothing eps/2-light in."""
    out = set(int(i) for i in output)
    must = exact_heavy_hitters(x, eps, p)
    allowed = exact_heavy_hitters(x, eps / 2.0, p)
    return must <= out <= allowed


def write_stream_text(fh: TextIO, header: StreamHeader,
                      indices: np.ndarray, signs: np.ndarray) -> None:
    fh.write(f"{header.n} {header.k} {header.l} {header.p} {header.label}\n")
    for i, s in zip(np.asarray(indices).tolist(), np.asarray(signs).tolist()):
        fh.write(f"{i} {'+1' if s > 0 else '-1'}\n")


def read_stream_text(fh: TextIO) -> tuple[StreamHeader, np.ndarray, np.ndarray]:
    first = fh.readline().split()
    if len(first) != 5:
        raise ValueError("malformed stream header")
    header = StreamHeader(int(first[0]), int(first[1]), int(first[2]),
                          float(first[3]), first[4])
    idx, sgn = [], []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        i, s = line.split()
        idx.append(int(i))
        sgn.append(1 if s == "+1" else -1)
    return header, np.asarray(idx, dtype=np.int64), np.asarray(sgn, dtype=np.int64)


def write_stream_binary(path: str, indices: np.ndarray, signs: np.ndarray) -> None:
    indices = np.asarray(indices, dtype="<u4")
    signs = np.asarray(signs, dtype="i1")
    with open(path, "wb") as fh:
        for i, s in zip(indices.tolist(), signs.tolist()):
            fh.write(struct.pack("<Ib", i, s))


def read_stream_binary(path: str) -> tuple[np.ndarray, np.ndarray]:
    raw = np.fromfile(path, dtype=np.dtype([("i", "<u4"), ("s", "i1")]))
    return raw["i"].astype(np.int64), raw["s"].astype(np.int64)
