"""
omegasieve/primes.py
Prime generation by an odd-only segmented sieve of Eratosthenes.
Every other module gets its primes from here, through PrimeTable.
"""

import math
import threading
from dataclasses import dataclass

import numpy as np

from omegasieve.errors import CapacityError, DomainError
from omegasieve.run_log import log_event

# ─── Config ────────────────────────────────────────────────────────────────────
SEGMENT_BYTES = 1 << 22          # one byte per odd number in a segment
MAX_PRIME_LIMIT = 10**9          # ~51M primes, ~400 MB as int64


@dataclass(frozen=True)
class PrimeTable:
    """All primes <= limit, ascending, as a read-only int64 array."""

    limit: int
    primes: np.ndarray

    def __len__(self) -> int:
        return int(self.primes.size)

    def __contains__(self, n) -> bool:
        n = int(n)
        if n < 2 or n > self.limit:
            return False
        i = int(np.searchsorted(self.primes, n))
        return i < self.primes.size and int(self.primes[i]) == n

    def __iter__(self):
        return (int(p) for p in self.primes)

    def upto(self, bound: int) -> np.ndarray:
        """View of the primes <= bound (bound may exceed limit only if it adds nothing)."""
        if bound > self.limit:
            raise DomainError(f"table stops at {self.limit}, asked for primes up to {bound}")
        return self.primes[: int(np.searchsorted(self.primes, bound, side="right"))]

    def prefix(self, bound: int) -> "PrimeTable":
        return PrimeTable(limit=bound, primes=self.upto(bound))


# ─── Sieves ────────────────────────────────────────────────────────────────────

def sieve_unsegmented(limit: int) -> np.ndarray:
    """Plain odd-only sieve in one array; the reference for the segmented one."""
    if limit < 2:
        return np.array([], dtype=np.int64)
    if limit < 3:
        return np.array([2], dtype=np.int64)
    odd = np.ones((limit - 1) // 2, dtype=bool)   # odd[i] <-> 2i + 3
    for i in range(math.isqrt(limit) // 2):
        if odd[i]:
            p = 2 * i + 3
            odd[(p * p - 3) // 2::p] = False
    found = 2 * np.flatnonzero(odd).astype(np.int64) + 3
    return np.concatenate((np.array([2], dtype=np.int64), found))


def _sieve_odd_window(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    """Primes among the odd numbers of [lo, hi); lo is odd and > 2."""
    mask = np.ones((hi - lo + 1) // 2, dtype=bool)
    for p in base:
        p = int(p)
        if p == 2:
            continue
        if p * p >= hi:
            break
        start = max(p * p, ((lo + p - 1) // p) * p)
        if start % 2 == 0:
            start += p
        if start >= hi:
            continue
        mask[(start - lo) // 2::p] = False
    return lo + 2 * np.flatnonzero(mask).astype(np.int64)


def sieve_segmented(limit: int, segment_bytes: int = SEGMENT_BYTES) -> np.ndarray:
    if limit < 2:
        return np.array([], dtype=np.int64)
    base = sieve_unsegmented(math.isqrt(limit))
    span = 2 * segment_bytes
    chunks = [np.array([2], dtype=np.int64)]
    lo = 3
    while lo <= limit:
        hi = min(lo + span, limit + 1)
        chunks.append(_sieve_odd_window(lo, hi, base))
        lo += span
    return np.concatenate(chunks)


# ─── Shared table cache ────────────────────────────────────────────────────────

_cache_lock = threading.Lock()
_largest: PrimeTable | None = None


def primes_up_to(limit: int) -> PrimeTable:
    """Exactly the primes <= limit. Served from the largest table built so far when possible."""
    global _largest
    limit = int(limit)
    if limit < 0:
        raise DomainError(f"limit must be >= 0, got {limit}")
    if limit > MAX_PRIME_LIMIT:
        raise CapacityError(f"prime limit {limit} exceeds budget {MAX_PRIME_LIMIT}")

    with _cache_lock:
        cached = _largest
        if cached is not None and cached.limit >= limit:
            return cached.prefix(limit)

        primes = sieve_segmented(limit)
        primes.setflags(write=False)
        table = PrimeTable(limit=limit, primes=primes)
        _largest = table
        log_event("PRIMES_SIEVED", f"limit={limit} count={primes.size}")
        return table


def mertens_check(x: int) -> float:
    """sum_{p <= x} 1/p - log log x - B1; tends to 0 like 1/log x."""
    from omegasieve.constants import mertens_b1

    x = int(x)
    if x < 3:
        raise DomainError(f"mertens_check needs x >= 3, got {x}")
    reciprocal = 1.0 / primes_up_to(x).primes.astype(np.float64)
    return math.fsum(reciprocal) - math.log(math.log(x)) - mertens_b1().mid
