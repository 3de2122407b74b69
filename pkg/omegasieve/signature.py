"""
omegasieve/signature.py
Multiplicity signatures: for every n in a segment, how many distinct primes
divide n exactly once, exactly twice, ... plus h-free / h-full classification.

Bulk work goes through sieve_segment; factor_signature_oracle is the slow
trial-division reference it is checked against.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from omegasieve.errors import DomainError, InsufficientPrimesError
from omegasieve.primes import PrimeTable, primes_up_to

# ─── Config ────────────────────────────────────────────────────────────────────
SEGMENT_SPAN = 1 << 20           # integers classified per segment
PACKED_MULTIPLICITIES = 6        # omega_1..omega_6 kept dense; larger k kept sparse


class NumberSet(str, Enum):
    H_FREE = "hfree"
    H_FULL = "hfull"
    ALL = "all"


# ─── Single-number signatures ──────────────────────────────────────────────────

@dataclass(frozen=True)
class FactorSignature:
    """Multiplicity k -> number of distinct primes of n with exactly that multiplicity."""

    counts: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(k < 1 or c < 1 for k, c in self.counts.items()):
            raise DomainError(f"signature entries must be positive: {self.counts}")

    @classmethod
    def from_exponents(cls, exponents) -> "FactorSignature":
        counts: dict[int, int] = {}
        for e in exponents:
            counts[e] = counts.get(e, 0) + 1
        return cls(counts=dict(sorted(counts.items())))

    @property
    def omega(self) -> int:
        return sum(self.counts.values())

    @property
    def big_omega(self) -> int:
        return sum(k * c for k, c in self.counts.items())

    @property
    def max_multiplicity(self) -> int:
        return max(self.counts, default=0)

    @property
    def min_multiplicity(self) -> int:
        return min(self.counts, default=0)

    def omega_k(self, k: int) -> int:
        return omega_k(self, k)

    def big_omega_k(self, k: int) -> int:
        return k * omega_k(self, k)


def factor_signature_oracle(n: int) -> FactorSignature:
    """Exact signature by trial division up to sqrt(n)."""
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    exponents = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            e = 0
            while n % d == 0:
                n //= d
                e += 1
            exponents.append(e)
        d += 1 if d == 2 else 2
    if n > 1:
        exponents.append(1)
    return FactorSignature.from_exponents(exponents)


def omega_k(sig: FactorSignature, k: int) -> int:
    if k < 1:
        raise DomainError(f"multiplicity k must be >= 1, got {k}")
    return sig.counts.get(k, 0)


def is_h_free(sig: FactorSignature, h: int) -> bool:
    _check_h(h)
    return sig.max_multiplicity <= h - 1


def is_h_full(sig: FactorSignature, h: int) -> bool:
    _check_h(h)
    return not sig.counts or sig.min_multiplicity >= h


def _check_h(h: int):
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")


# ─── Bulk signatures ───────────────────────────────────────────────────────────

@dataclass
class SignatureArrays:
    """
    Compact per-number summaries for the integers in `numbers`.
    min_mult is 0 for n = 1. Multiplicities above PACKED_MULTIPLICITIES are kept
    as (position, multiplicity) pairs, one pair per prime.
    """

    numbers: np.ndarray
    omega: np.ndarray
    big_omega: np.ndarray
    max_mult: np.ndarray
    min_mult: np.ndarray
    packed: np.ndarray
    overflow_pos: np.ndarray
    overflow_k: np.ndarray

    def __len__(self) -> int:
        return int(self.numbers.size)

    def omega_k(self, k: int) -> np.ndarray:
        if k < 1:
            raise DomainError(f"multiplicity k must be >= 1, got {k}")
        if k <= PACKED_MULTIPLICITIES:
            return self.packed[k - 1].astype(np.int64)
        pos = self.overflow_pos[self.overflow_k == k]
        return np.bincount(pos, minlength=len(self)).astype(np.int64)

    def statistic(self, k: int) -> np.ndarray:
        """omega_k for k >= 1, omega itself for k = 0."""
        if k == 0:
            return self.omega.astype(np.int64)
        return self.omega_k(k)

    def h_free_mask(self, h: int) -> np.ndarray:
        _check_h(h)
        return self.max_mult <= h - 1

    def h_full_mask(self, h: int) -> np.ndarray:
        _check_h(h)
        return (self.min_mult >= h) | (self.omega == 0)

    def membership(self, kind: NumberSet, h: int) -> np.ndarray:
        kind = NumberSet(kind)
        if kind is NumberSet.H_FREE:
            return self.h_free_mask(h)
        if kind is NumberSet.H_FULL:
            return self.h_full_mask(h)
        return np.ones(len(self), dtype=bool)

    def signature(self, n: int) -> FactorSignature:
        """Rebuild the full map for one n of this block."""
        i = int(np.searchsorted(self.numbers, n))
        if i >= len(self) or int(self.numbers[i]) != n:
            raise DomainError(f"{n} is not in this block")
        counts = {k + 1: int(c) for k, c in enumerate(self.packed[:, i]) if c}
        for k in self.overflow_k[self.overflow_pos == i]:
            counts[int(k)] = counts.get(int(k), 0) + 1
        return FactorSignature(counts=dict(sorted(counts.items())))

    def select(self, mask: np.ndarray) -> "SignatureArrays":
        """Sub-block of the positions where mask holds."""
        where = np.flatnonzero(mask)
        remap = np.full(len(self), -1, dtype=np.int64)
        remap[where] = np.arange(where.size)
        keep = mask[self.overflow_pos]
        return SignatureArrays(
            numbers=self.numbers[where],
            omega=self.omega[where],
            big_omega=self.big_omega[where],
            max_mult=self.max_mult[where],
            min_mult=self.min_mult[where],
            packed=self.packed[:, where],
            overflow_pos=remap[self.overflow_pos[keep]],
            overflow_k=self.overflow_k[keep],
        )


@dataclass
class ClassifiedSegment(SignatureArrays):
    """Signatures of every n in [lo, hi], with flags for the configured h."""

    lo: int = 1
    hi: int = 1
    h: int = 2

    @property
    def h_free(self) -> np.ndarray:
        return self.h_free_mask(self.h)

    @property
    def h_full(self) -> np.ndarray:
        return self.h_full_mask(self.h)


def sieve_segment(lo: int, hi: int, primes: PrimeTable, h: int = 2) -> ClassifiedSegment:
    """
    Divide out the full power of every prime <= sqrt(hi) from each n in [lo, hi].
    Whatever survives is 1 or a single prime above sqrt(hi), counted at multiplicity 1.
    """
    lo, hi = int(lo), int(hi)
    if not 1 <= lo <= hi:
        raise DomainError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
    _check_h(h)
    root = math.isqrt(hi)
    if primes.limit < root:
        raise InsufficientPrimesError(f"primes up to {primes.limit} cannot sieve up to {hi}")

    size = hi - lo + 1
    rem = np.arange(lo, hi + 1, dtype=np.int64)
    omega = np.zeros(size, dtype=np.uint8)
    big_omega = np.zeros(size, dtype=np.uint8)
    max_mult = np.zeros(size, dtype=np.uint8)
    min_mult = np.full(size, 255, dtype=np.uint8)
    packed = np.zeros((PACKED_MULTIPLICITIES, size), dtype=np.uint8)
    over_pos, over_k = [], []

    for p in primes.upto(root):
        p = int(p)
        idx = np.arange((-lo) % p, size, p)
        if not idx.size:
            continue
        rem[idx] //= p
        e = np.ones(idx.size, dtype=np.uint8)
        live = np.arange(idx.size)
        while live.size:
            divisible = rem[idx[live]] % p == 0
            live = live[divisible]
            rem[idx[live]] //= p
            e[live] += 1

        omega[idx] += 1
        big_omega[idx] += e
        max_mult[idx] = np.maximum(max_mult[idx], e)
        min_mult[idx] = np.minimum(min_mult[idx], e)
        small = e <= PACKED_MULTIPLICITIES
        packed[e[small] - 1, idx[small]] += 1
        if not small.all():
            over_pos.append(idx[~small])
            over_k.append(e[~small])

    tail = np.flatnonzero(rem > 1)
    if __debug__:
        assert np.all(rem[tail] > root), "residual cofactor must be a single large prime"
    omega[tail] += 1
    big_omega[tail] += 1
    packed[0, tail] += 1
    max_mult[tail] = np.maximum(max_mult[tail], 1)
    min_mult[tail] = np.minimum(min_mult[tail], 1)
    min_mult[min_mult == 255] = 0

    return ClassifiedSegment(
        numbers=np.arange(lo, hi + 1, dtype=np.int64),
        omega=omega,
        big_omega=big_omega,
        max_mult=max_mult,
        min_mult=min_mult,
        packed=packed,
        overflow_pos=np.concatenate(over_pos) if over_pos else np.zeros(0, dtype=np.int64),
        overflow_k=np.concatenate(over_k) if over_k else np.zeros(0, dtype=np.uint8),
        lo=lo,
        hi=hi,
        h=h,
    )


def segment_bounds(lo: int, hi: int, span: int = SEGMENT_SPAN, breaks=()) -> list[tuple[int, int]]:
    """Split [lo, hi] into consecutive windows of at most `span`, also cutting after each break."""
    cuts = sorted({int(b) for b in breaks if lo <= b < hi})
    bounds = []
    start = lo
    for stop in cuts + [hi]:
        while start <= stop:
            end = min(start + span - 1, stop)
            bounds.append((start, end))
            start = end + 1
    return bounds


# ─── h-full enumeration ────────────────────────────────────────────────────────

def integer_root(x: int, h: int) -> int:
    """Largest r with r**h <= x."""
    if x < 1:
        return 0
    r = int(round(x ** (1.0 / h)))
    while r ** h > x:
        r -= 1
    while (r + 1) ** h <= x:
        r += 1
    return r


def enumerate_h_full(x: int, h: int, primes: PrimeTable | None = None) -> SignatureArrays:
    """
    Every h-full n <= x with its signature, by depth-first search over prime
    powers p^e (e >= h). Touches O(x^(1/h)) numbers instead of sieving all of [1, x].
    """
    _check_h(h)
    x = int(x)
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    root = integer_root(x, h)
    if primes is None:
        primes = primes_up_to(root)
    ps = [int(p) for p in primes.upto(root)]

    found: list[tuple[int, tuple[int, ...]]] = []
    stack = [(0, 1, ())]
    while stack:
        start, n, exps = stack.pop()
        found.append((n, exps))
        for i in range(start, len(ps)):
            p = ps[i]
            m = n * p ** h
            if m > x:
                break
            e = h
            while m <= x:
                stack.append((i + 1, m, exps + (e,)))
                m *= p
                e += 1

    found.sort()
    return _arrays_from_exponents(found)


def _arrays_from_exponents(found) -> SignatureArrays:
    size = len(found)
    numbers = np.fromiter((n for n, _ in found), dtype=np.int64, count=size)
    omega = np.zeros(size, dtype=np.uint8)
    big_omega = np.zeros(size, dtype=np.uint8)
    max_mult = np.zeros(size, dtype=np.uint8)
    min_mult = np.zeros(size, dtype=np.uint8)
    packed = np.zeros((PACKED_MULTIPLICITIES, size), dtype=np.uint8)
    over_pos, over_k = [], []
    for i, (_, exps) in enumerate(found):
        if not exps:
            continue
        omega[i] = len(exps)
        big_omega[i] = sum(exps)
        max_mult[i] = max(exps)
        min_mult[i] = min(exps)
        for e in exps:
            if e <= PACKED_MULTIPLICITIES:
                packed[e - 1, i] += 1
            else:
                over_pos.append(i)
                over_k.append(e)
    return SignatureArrays(
        numbers=numbers,
        omega=omega,
        big_omega=big_omega,
        max_mult=max_mult,
        min_mult=min_mult,
        packed=packed,
        overflow_pos=np.array(over_pos, dtype=np.int64),
        overflow_k=np.array(over_k, dtype=np.uint8),
    )
