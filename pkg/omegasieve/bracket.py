"""
omegasieve/bracket.py
ConstantBracket: a closed interval [lo, hi] guaranteed to contain a constant,
with outward-rounded arithmetic so the guarantee survives floating point.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

# libm exp/log are not correctly rounded; pad their results by a few ulps
LIBM_ULPS = 4


class Method(str, Enum):
    DIRECT_SUM = "direct-sum"
    EULER_PRODUCT = "euler-product"
    COMPOSITE = "composite"


class TailMethod(str, Enum):
    NONE = "none"
    INTEGRAL = "integral"            # sum over all integers >= cutoff
    PRIME_COUNT = "prime-count"      # explicit pi(x) bounds
    PRIME_ZETA = "prime-zeta"        # leading powers through P(s), remainder majorised
    EULER_MACLAURIN = "euler-maclaurin"


def down(v: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        v = math.nextafter(v, -math.inf)
    return v


def up(v: float, ulps: int = 1) -> float:
    for _ in range(ulps):
        v = math.nextafter(v, math.inf)
    return v


@dataclass(frozen=True)
class ConstantBracket:
    lo: float
    hi: float
    cutoff: int = 0
    method: Method = Method.COMPOSITE
    tail: TailMethod = TailMethod.NONE
    name: str = ""
    estimate: float | None = None

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty bracket [{self.lo}, {self.hi}] for {self.name or 'constant'}")

    # ─── Construction ─────────────────────────────────────────────────────────

    @classmethod
    def exact(cls, value: float, name: str = "") -> "ConstantBracket":
        """Bracket for a value that is exact in binary (integers, dyadic rationals)."""
        return cls(value, value, name=name)

    @classmethod
    def around(cls, value: float, ulps: int = 1, name: str = "") -> "ConstantBracket":
        return cls(down(value, ulps), up(value, ulps), name=name)

    @classmethod
    def log_of(cls, value: int, name: str = "") -> "ConstantBracket":
        """Natural log of a positive integer."""
        v = math.log(value)
        return cls(down(v, LIBM_ULPS), up(v, LIBM_ULPS), name=name)

    # ─── Queries ──────────────────────────────────────────────────────────────

    @property
    def mid(self) -> float:
        return self.lo + (self.hi - self.lo) / 2

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float) -> bool:
        return self.lo <= value <= self.hi

    def intersects(self, other: "ConstantBracket") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: "ConstantBracket") -> "ConstantBracket":
        """Both enclose the same constant, so their overlap does too."""
        if not self.intersects(other):
            raise ValueError(f"disjoint enclosures for {self.name}: {self} vs {other}")
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        best = self if self.width <= other.width else other
        return replace(best, lo=lo, hi=hi)

    def named(self, name: str, **changes) -> "ConstantBracket":
        return replace(self, name=name, **changes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lo": self.lo,
            "hi": self.hi,
            "cutoff": self.cutoff,
            "method": self.method.value,
            "tail": self.tail.value,
            "estimate": self.estimate,
        }

    # ─── Arithmetic ───────────────────────────────────────────────────────────

    def _composite(self, lo: float, hi: float, other=None) -> "ConstantBracket":
        cutoffs = [self.cutoff] + ([other.cutoff] if isinstance(other, ConstantBracket) else [])
        cutoff = min((c for c in cutoffs if c), default=0)
        return ConstantBracket(lo, hi, cutoff=cutoff, method=Method.COMPOSITE)

    @staticmethod
    def _coerce(other) -> "ConstantBracket":
        if isinstance(other, ConstantBracket):
            return other
        return ConstantBracket.exact(float(other))

    def __add__(self, other):
        o = self._coerce(other)
        return self._composite(down(self.lo + o.lo), up(self.hi + o.hi), other)

    __radd__ = __add__

    def __neg__(self):
        return replace(self, lo=-self.hi, hi=-self.lo, name="")

    def __sub__(self, other):
        o = self._coerce(other)
        return self._composite(down(self.lo - o.hi), up(self.hi - o.lo), other)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return self._composite(down(min(products)), up(max(products)), other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o.lo <= 0.0 <= o.hi:
            raise ZeroDivisionError(f"divisor bracket [{o.lo}, {o.hi}] contains 0")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return self._composite(down(min(quotients)), up(max(quotients)), other)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def square(self) -> "ConstantBracket":
        if self.lo >= 0:
            lo, hi = self.lo * self.lo, self.hi * self.hi
        elif self.hi <= 0:
            lo, hi = self.hi * self.hi, self.lo * self.lo
        else:
            lo, hi = 0.0, max(self.lo * self.lo, self.hi * self.hi)
        return self._composite(max(0.0, down(lo)), up(hi))

    def exp(self) -> "ConstantBracket":
        return self._composite(max(0.0, down(math.exp(self.lo), LIBM_ULPS)),
                               up(math.exp(self.hi), LIBM_ULPS))

    def log(self) -> "ConstantBracket":
        if self.lo <= 0:
            raise ValueError(f"log of bracket reaching {self.lo}")
        return self._composite(down(math.log(self.lo), LIBM_ULPS), up(math.log(self.hi), LIBM_ULPS))

    def __repr__(self) -> str:
        label = f"{self.name} " if self.name else ""
        return f"{label}[{self.lo!r}, {self.hi!r}] (cutoff={self.cutoff}, {self.method.value}/{self.tail.value})"


def fsum_bracket(terms, rel_error: float) -> ConstantBracket:
    """
    Enclose the exact sum of reals whose float images carry relative error
    <= rel_error each. math.fsum is correctly rounded, so the only slack is
    the per-term error plus one rounding of the total.
    """
    terms = np.asarray(terms, dtype=np.float64)
    total = math.fsum(terms.tolist())
    slack = rel_error * float(np.abs(terms).sum()) * (1 + 1e-12)
    return ConstantBracket(down(total - slack, 2), up(total + slack, 2))
