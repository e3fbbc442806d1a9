"""Arithmetic in GF(q) for the Mersenne prime q = 2^61 - 1.

Scalar ops use Python ints; the hot paths (syndrome evaluation, locator
root scans) use numpy uint64 arrays.  A 61x61-bit product needs 122 bits,
so vectorized multiplication splits each operand into a 29-bit high part
and a 32-bit low part and folds partial products with 2^61 = 1 (mod q).
All partial sums stay below 2^64.
"""

from __future__ import annotations

import numpy as np

Q = (1 << 61) - 1
# Generator of the full multiplicative group; primitivity is checked in the
# test suite against the factorization of q - 1.
GENERATOR = 37

_MASK32 = np.uint64(0xFFFFFFFF)
_MASK61 = np.uint64(Q)
_U64 = np.uint64


def _fold(x: np.ndarray) -> np.ndarray:
    # x < 2^64; two folds bring it under 2^61, then one conditional subtract.
    x = (x >> _U64(61)) + (x & _MASK61)
    x = (x >> _U64(61)) + (x & _MASK61)
    return x - np.where(x >= _MASK61, _MASK61, _U64(0))


def mul_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise a*b mod q for uint64 arrays of canonical residues."""
    a = np.asarray(a, dtype=_U64)
    b = np.asarray(b, dtype=_U64)
    a_hi = a >> _U64(32)
    a_lo = a & _MASK32
    b_hi = b >> _U64(32)
    b_lo = b & _MASK32
    # a*b = a_hi*b_hi*2^64 + (a_hi*b_lo + a_lo*b_hi)*2^32 + a_lo*b_lo
    hi = a_hi * b_hi                      # < 2^58, and 2^64 = 8 (mod q)
    mid = a_hi * b_lo + a_lo * b_hi       # < 2^62
    mid_hi = mid >> _U64(29)              # * 2^61 = 1 (mod q)
    mid_lo = (mid & _U64(0x1FFFFFFF)) << _U64(32)
    lo = a_lo * b_lo                      # < 2^64
    lo_red = (lo >> _U64(61)) + (lo & _MASK61)
    total = _fold(hi * _U64(8)) + _fold(mid_hi + mid_lo) + _fold(lo_red)
    return _fold(total)


def add_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    s = np.asarray(a, dtype=_U64) + np.asarray(b, dtype=_U64)
    return s - np.where(s >= _MASK61, _MASK61, _U64(0))


def sub_vec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=_U64)
    b = np.asarray(b, dtype=_U64)
    return a + np.where(a >= b, _U64(0), _MASK61) - b


def neg_vec(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=_U64)
    return np.where(a == 0, a, _MASK61 - a)


def inv(a: int) -> int:
    if a % Q == 0:
        raise ZeroDivisionError("0 has no inverse in GF(q)")
    return pow(a, Q - 2, Q)


def inv_vec(a: np.ndarray) -> np.ndarray:
    # Batch inversion (Montgomery's trick): one exponentiation total.
    a = np.asarray(a, dtype=_U64)
    if np.any(a == 0):
        raise ZeroDivisionError("0 has no inverse in GF(q)")
    n = a.shape[0]
    prefix = np.empty(n, dtype=_U64)
    acc = _U64(1)
    for i in range(n):
        prefix[i] = acc
        acc = mul_vec(acc, a[i])
    acc_inv = _U64(inv(int(acc)))
    out = np.empty(n, dtype=_U64)
    for i in range(n - 1, -1, -1):
        out[i] = mul_vec(acc_inv, prefix[i])
        acc_inv = mul_vec(acc_inv, a[i])
    return out


def sum_vec(a: np.ndarray) -> int:
    """Sum of canonical residues mod q, overflow-safe for < 2^31 elements."""
    a = np.asarray(a, dtype=_U64)
    lo = int(np.sum(a & _MASK32, dtype=_U64))
    hi = int(np.sum(a >> _U64(32), dtype=_U64))
    return ((hi << 32) + lo) % Q


def powers_vec(base: np.ndarray, count: int) -> np.ndarray:
    """Rows j = base**j mod q, shape (count, len(base))."""
    base = np.asarray(base, dtype=_U64)
    out = np.empty((count, base.shape[0]), dtype=_U64)
    if count == 0:
        return out
    out[0] = _U64(1)
    for j in range(1, count):
        out[j] = mul_vec(out[j - 1], base)
    return out


def power_table(base: np.ndarray, count: int) -> np.ndarray:
    """Columns j = base**j mod q, shape (len(base), count), by block doubling."""
    base = np.asarray(base, dtype=_U64).reshape(-1)
    table = np.ones((base.shape[0], 1), dtype=_U64)
    step = base.reshape(-1, 1)
    while table.shape[1] < count:
        take = min(table.shape[1], count - table.shape[1])
        table = np.concatenate([table, mul_vec(table[:, :take], step)], axis=1)
        if table.shape[1] < count:
            step = mul_vec(step, step)
    return table


def col_sum(a: np.ndarray) -> np.ndarray:
    """Column sums mod q of a 2-d residue array (< 2^31 rows)."""
    a = np.asarray(a, dtype=_U64)
    lo = np.sum(a & _MASK32, axis=0, dtype=_U64)
    hi = np.sum(a >> _U64(32), axis=0, dtype=_U64)
    shifted = mul_vec(_fold(hi), np.full(hi.shape, _U64((1 << 32) % Q)))
    return add_vec(shifted, _fold(lo))


def eval_points(n: int, g: int = GENERATOR) -> np.ndarray:
    """alpha_i = g^i for i in [0, n); distinct while n < q - 1."""
    if not 0 < n < Q - 1:
        raise ValueError("universe size must be in [1, q-2]")
    out = np.empty(n, dtype=_U64)
    acc = 1
    gg = g % Q
    for i in range(n):
        out[i] = acc
        acc = (acc * gg) % Q
    return out


def encode_signed(value: int) -> int:
    """Map a signed integer with |value| < q/2 into its canonical residue."""
    return value % Q


def decode_signed(residue: int) -> int:
    """Inverse of encode_signed: representative in (-q/2, q/2)."""
    residue %= Q
    return residue - Q if residue > Q // 2 else residue
