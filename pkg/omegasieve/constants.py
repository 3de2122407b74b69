"""
omegasieve/constants.py
Certified brackets for every constant the moment formulas use: zeta(s), P(k),
B1, gamma_{0,h}, L_h(r), the prime-sum families F1..F8, and the composites
C1, C2, D1, D2, eta_{h,k}.

A constant is evaluated at the cutoffs of CUTOFF_LADDER in turn, each bracket
intersected with the ones before it, until the width drops below the tolerance.
A forced cutoff returns the bracket at that cutoff alone.
"""

import math
from dataclasses import dataclass
from enum import Enum

from omegasieve.bracket import ConstantBracket, Method, TailMethod
from omegasieve.errors import CapacityError, DomainError
from omegasieve.prime_series import (
    PrimeSeries,
    evaluate,
    eta_series,
    f1_like_series,
    f2_series,
    f3_series,
    f4_series,
    f5_series,
    f6_series,
    f7_series,
    gamma_0h_series,
    lhr_series,
    mertens_series,
    partial_power_sum,
    prime_zeta_full,
    prime_zeta_series,
    zeta_minus_one,
)
from omegasieve.run_log import log_event

# ─── Config ────────────────────────────────────────────────────────────────────
DEFAULT_TOL = 1e-10
CUTOFF_LADDER = (10**4, 10**5, 10**6, 10**7, 10**8)
# relative widening a raw bracket may show at a larger cutoff: rounding of the extra terms
WIDTH_ROUNDING = 1e-14

# Euler-Mascheroni constant to 30 digits (OEIS A001620).
EULER_GAMMA = 0.577215664901532860606512090082


def _check_tol(tol: float):
    if not tol > 0:
        raise DomainError(f"tolerance must be > 0, got {tol}")


def _check_h(h: int):
    if int(h) != h or h < 2:
        raise DomainError(f"h must be an integer >= 2, got {h}")


# ─── Ladder search ─────────────────────────────────────────────────────────────

def _refined(series: PrimeSeries, cutoff: int) -> ConstantBracket:
    """Bracket at `cutoff`, intersected with every smaller rung of the ladder."""
    rungs = [c for c in CUTOFF_LADDER if c < cutoff] + [cutoff]
    best = evaluate(series, rungs[0])
    for rung in rungs[1:]:
        best = evaluate(series, rung).intersect(best)
    return best


def _certify(series: PrimeSeries, tol: float, cutoff: int | None = None) -> ConstantBracket:
    _check_tol(tol)
    if cutoff is not None:
        # a forced cutoff answers with that rung alone
        return evaluate(series, int(cutoff))
    for rung in CUTOFF_LADDER:
        bracket = _refined(series, rung)
        if bracket.width <= tol:
            log_event("CONSTANT_CERTIFIED",
                      f"name={series.key} width={bracket.width:.3e} cutoff={bracket.cutoff} "
                      f"tail={bracket.tail.value}")
            return bracket
    raise CapacityError(f"{series.key}: width {bracket.width:.3e} > tol {tol:g} at the largest cutoff")


def _finish(bracket: ConstantBracket, name: str, tol: float, cutoff: int | None) -> ConstantBracket:
    """Name a composite and hold it to the tolerance when no cutoff was forced."""
    bracket = bracket.named(name)
    if cutoff is None and bracket.width > tol:
        raise CapacityError(f"{name}: composite width {bracket.width:.3e} > tol {tol:g}")
    return bracket


# ─── Single-series constants ───────────────────────────────────────────────────

def zeta(s: float, tol: float = DEFAULT_TOL) -> ConstantBracket:
    """Riemann zeta for real s > 1 (Euler-Maclaurin, independent of any cutoff)."""
    _check_tol(tol)
    bracket = (zeta_minus_one(float(s)) + 1.0).named(
        f"zeta({s:g})", method=Method.DIRECT_SUM, tail=TailMethod.EULER_MACLAURIN)
    if bracket.width > tol:
        raise CapacityError(f"zeta({s:g}): width {bracket.width:.3e} > tol {tol:g}")
    return bracket


def primepower_estimate(k: float, x: float) -> float:
    """Asymptotic sum_{p >= x} p^-k ~ 1/((k-1) x^(k-1) log x); an estimate, never an enclosure."""
    return 1.0 / ((k - 1.0) * x ** (k - 1.0) * math.log(x))


def prime_zeta(k: float, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """P(k) = sum_p p^-k, with the prime-power tail estimate attached as `estimate`."""
    k = float(k)
    if not k > 1:
        raise DomainError(f"P(k) needs k > 1, got {k:g}")
    bracket = _certify(prime_zeta_series(k), tol, cutoff)
    n = bracket.cutoff
    estimate = partial_power_sum(k, n).mid + primepower_estimate(k, n + 1)
    return bracket.named(f"P({k:g})", estimate=estimate)


def primepower_check(k: float, x: int) -> float:
    """
    |sum_{p >= x} p^-k - estimate| * x^(k-1) (log x)^2: the constant implied by
    the O(1/(x^(k-1) (log x)^2)) error of the prime-power tail estimate.
    """
    k, x = float(k), int(x)
    if not k > 1:
        raise DomainError(f"k must be > 1, got {k:g}")
    if x < 3:
        raise DomainError(f"x must be >= 3, got {x}")
    tail = (prime_zeta_full(k) - partial_power_sum(k, x - 1)).mid
    ln = math.log(x)
    return abs(tail - primepower_estimate(k, x)) * x ** (k - 1.0) * ln * ln


def mertens_b1(tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """B1 = gamma + sum_p (log(1 - 1/p) + 1/p)."""
    prime_part = _certify(mertens_series(), tol / 2, cutoff)
    total = ConstantBracket.around(EULER_GAMMA) + prime_part
    return total.named("B1", cutoff=prime_part.cutoff, method=Method.DIRECT_SUM, tail=prime_part.tail)


def gamma_0h(h: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    _check_h(h)
    return _certify(gamma_0h_series(int(h)), tol, cutoff).named(f"gamma0(h={h})")


def l_h_r(h: int, r: float, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """L_h(r) = sum_p 1/(p^(r/h - 1) (p - p^(1 - 1/h) + 1)), defined for r > h."""
    _check_h(h)
    if not r > h:
        raise DomainError(f"L_h(r) needs r > h, got h={h} r={r:g}")
    return _certify(lhr_series(int(h), float(r)), tol, cutoff).named(f"L(h={h},r={r:g})")


# ─── Prime-sum families ────────────────────────────────────────────────────────

class FamilyId(str, Enum):
    F1 = "F1"   # (p^h - p^(h-1))/(p^k (p^h - 1))
    F2 = "F2"   # F1 term squared
    F3 = "F3"   # (p^(h-1) - 1)/(p (p^h - 1))
    F4 = "F4"   # ((p^(h-1) - p^(h-2))/(p^h - 1))^2
    F5 = "F5"   # ((p^(1/h) - 1)/(p^(1+1/h) - p + p^(1/h)))^2
    F6 = "F6"   # ((p^(1/h) - 1)/(p^(1+2/h) - p^(1+1/h) + p^(2/h)))^2
    F7 = "F7"   # ((p^(1/h) - 1)/(p^((k+1)/h) - p^(k/h) + p^((k+1-h)/h)))^2
    F8 = "F8"   # (p - 1)/(p (p^h - 1)), the omega correction over h-free numbers


_NEEDS_K = {FamilyId.F1, FamilyId.F2, FamilyId.F7}


@dataclass(frozen=True)
class PrimeSumFamily:
    family_id: FamilyId
    h: int
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "family_id", FamilyId(self.family_id))
        self.validate()

    def validate(self):
        _check_h(self.h)
        fid, h, k = self.family_id, self.h, self.k
        if fid in _NEEDS_K and k is None:
            raise DomainError(f"{fid.value} needs k")
        if fid in (FamilyId.F1, FamilyId.F2) and not 2 <= k <= h - 1:
            raise DomainError(f"{fid.value} needs 2 <= k <= h-1, got h={h} k={k}")
        if fid is FamilyId.F7 and not k > h + 1:
            raise DomainError(f"F7 needs k > h+1, got h={h} k={k}")

    @property
    def label(self) -> str:
        params = f"h={self.h}" + (f",k={self.k}" if self.family_id in _NEEDS_K else "")
        return f"{self.family_id.value}({params})"

    def series(self) -> PrimeSeries:
        fid, h, k = self.family_id, self.h, self.k
        if fid is FamilyId.F1:
            return f1_like_series(self.label, h, k)
        if fid is FamilyId.F2:
            return f2_series(h, k)
        if fid is FamilyId.F3:
            return f3_series(h)
        if fid is FamilyId.F4:
            return f4_series(h)
        if fid is FamilyId.F5:
            return f5_series(h)
        if fid is FamilyId.F6:
            return f6_series(h)
        if fid is FamilyId.F7:
            return f7_series(h, k)
        return f1_like_series(self.label, h, h)


def prime_sum(family: PrimeSumFamily, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    return _certify(family.series(), tol, cutoff).named(family.label)


# ─── Composites ────────────────────────────────────────────────────────────────
# Each input is certified to a fraction of tol; interval widths add.

def c1(h: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """C1 = B1 - sum_p (p^(h-1) - 1)/(p (p^h - 1))."""
    part = tol / 4
    value = mertens_b1(part, cutoff) - prime_sum(PrimeSumFamily(FamilyId.F3, h), part, cutoff)
    return _finish(value, f"C1(h={h})", tol, cutoff)


def c2(h: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """C2 = C1^2 + C1 - zeta(2) - F4, exactly as printed."""
    part = tol / 16
    one = c1(h, part, cutoff)
    value = one.square() + one - zeta(2.0, part) - prime_sum(PrimeSumFamily(FamilyId.F4, h), part, cutoff)
    return _finish(value, f"C2(h={h})", tol, cutoff)


def d1(h: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """D1 = B1 - log h - L_h(2h)."""
    _check_h(h)
    part = tol / 4
    value = mertens_b1(part, cutoff) - ConstantBracket.log_of(h) - l_h_r(h, 2 * h, part, cutoff)
    return _finish(value, f"D1(h={h})", tol, cutoff)


def d2(h: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """D2 = D1^2 + D1 - zeta(2) - F5, exactly as printed."""
    part = tol / 16
    one = d1(h, part, cutoff)
    value = one.square() + one - zeta(2.0, part) - prime_sum(PrimeSumFamily(FamilyId.F5, h), part, cutoff)
    return _finish(value, f"D2(h={h})", tol, cutoff)


def eta_hk(h: int, k: int, tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """prod_p (1 - 1/p)(1 - p^(-1/h) + p^-1 - p^(-k/h))/(1 - p^(-1/h)), for k > h."""
    _check_h(h)
    if not k > h:
        raise DomainError(f"eta_(h,k) needs k > h, got h={h} k={k}")
    return _certify(eta_series(int(h), int(k)), tol, cutoff).named(f"eta(h={h},k={k})")


# ─── Lookup by name ────────────────────────────────────────────────────────────

CONSTANT_NAMES = ("zeta", "B1", "Pk", "gamma0h", "Lhr", "C1", "C2", "D1", "D2", "eta",
                  *(f.value for f in FamilyId))


def constant(name: str, h: int | None = None, k: float | None = None, r: float | None = None,
             tol: float = DEFAULT_TOL, cutoff: int | None = None) -> ConstantBracket:
    """Evaluate a constant by its command-line name; `k` doubles as s for zeta."""

    def need(value, what):
        if value is None:
            raise DomainError(f"{name} needs --{what}")
        return value

    if name == "zeta":
        return zeta(need(k, "k"), tol)
    if name == "B1":
        return mertens_b1(tol, cutoff)
    if name == "Pk":
        return prime_zeta(need(k, "k"), tol, cutoff)
    if name == "gamma0h":
        return gamma_0h(need(h, "h"), tol, cutoff)
    if name == "Lhr":
        return l_h_r(need(h, "h"), need(r, "r"), tol, cutoff)
    if name in ("C1", "C2", "D1", "D2"):
        fn = {"C1": c1, "C2": c2, "D1": d1, "D2": d2}[name]
        return fn(need(h, "h"), tol, cutoff)
    if name == "eta":
        return eta_hk(need(h, "h"), _integral(need(k, "k"), "k"), tol, cutoff)
    if name in FamilyId.__members__:
        family = PrimeSumFamily(FamilyId(name), _integral(need(h, "h"), "h"),
                                None if k is None else _integral(k, "k"))
        return prime_sum(family, tol, cutoff)
    raise DomainError(f"unknown constant {name!r}; expected one of {', '.join(CONSTANT_NAMES)}")


def _integral(value: float, what: str) -> int:
    if float(value) != int(value):
        raise DomainError(f"{what} must be an integer, got {value:g}")
    return int(value)


def refinement_chain(name: str, cutoffs=CUTOFF_LADDER[:4], **params) -> list[ConstantBracket]:
    """
    Raw brackets for one constant at increasing cutoffs, each computed at its
    own cutoff with nothing carried over from the smaller ones.
    """
    return [constant(name, cutoff=cutoff, **params) for cutoff in sorted(cutoffs)]


def chain_is_nested(chain: list[ConstantBracket]) -> bool:
    """Every pair of links overlaps and no link is wider than the one before it."""
    overlapping = all(a.intersects(b) for i, a in enumerate(chain) for b in chain[i + 1:])
    narrowing = all(b.width <= a.width + WIDTH_ROUNDING * max(1.0, abs(b.mid))
                    for a, b in zip(chain, chain[1:]))
    return overlapping and narrowing
