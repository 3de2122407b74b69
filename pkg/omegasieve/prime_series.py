"""
omegasieve/prime_series.py
Certified evaluation of sums over primes, sum_p f(p), and of Euler products
prod_p F(p) (summed as log F(p)).

A series is summed exactly (up to rounding) over p <= cutoff. Its tail beyond
the cutoff is enclosed two ways and the enclosures intersected:

  elementary   |f(p)| <= c p^-a, and sum_{p > N} p^-a bounded by an integral
               over all integers > N, or by explicit pi(x) bounds;
  prime-zeta   f(p) = sum_j c_j p^-s_j + r(p): the leading powers are summed
               over p > N exactly through P(s) = sum_m mu(m)/m log zeta(ms),
               and only the remainder r(p) is majorised.

Terms are written in x = p^(-1/h), u = 1/p so that no evaluation cancels.
"""

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from omegasieve.bracket import ConstantBracket, Method, TailMethod, down, fsum_bracket, up
from omegasieve.errors import DomainError
from omegasieve.primes import primes_up_to

EPS = 2.0 ** -53
TERM_REL_ERROR = 64 * EPS

# ─── Riemann zeta by Euler-Maclaurin ───────────────────────────────────────────

EM_START = 16
EM_TERMS = 10
_BERNOULLI = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
              Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138)]


def _em_correction(s: float, n: int, j: int) -> float:
    """B_2j/(2j)! * s(s+1)...(s+2j-2) * n^(-s-2j+1)."""
    rising = 1.0
    for i in range(2 * j - 1):
        rising *= s + i
    coef = float(_BERNOULLI[j - 1] / math.factorial(2 * j))
    return coef * rising * n ** (-s - 2 * j + 1)


@lru_cache(maxsize=4096)
def zeta_minus_one(s: float) -> ConstantBracket:
    """
    zeta(s) - 1 for real s > 1: sum_{2 <= n < N} n^-s, the integral and
    half-term at N, and EM_TERMS Bernoulli corrections. For real s the
    remainder is bounded by the first omitted correction.
    """
    if not s > 1:
        raise DomainError(f"zeta needs s > 1, got {s}")
    n = EM_START
    terms = [k ** -s for k in range(2, n)]
    terms.append(n ** (1 - s) / (s - 1))
    terms.append(n ** -s / 2)
    terms.extend(_em_correction(s, n, j) for j in range(1, EM_TERMS + 1))
    remainder = abs(_em_correction(s, n, EM_TERMS + 1))
    core = fsum_bracket(terms, TERM_REL_ERROR)
    return ConstantBracket(down(core.lo - remainder), up(core.hi + remainder),
                           cutoff=n - 1, method=Method.DIRECT_SUM, tail=TailMethod.EULER_MACLAURIN)


def _log1p_bracket(b: ConstantBracket) -> ConstantBracket:
    return ConstantBracket(down(math.log1p(b.lo), 4), up(math.log1p(b.hi), 4))


# ─── Prime zeta P(s) and its tails ─────────────────────────────────────────────

@lru_cache(maxsize=None)
def _mobius(m: int) -> int:
    result, d = 1, 2
    while d * d <= m:
        if m % d == 0:
            m //= d
            if m % d == 0:
                return 0
            result = -result
        d += 1
    return -result if m > 1 else result


@lru_cache(maxsize=1024)
def prime_zeta_full(s: float) -> ConstantBracket:
    """P(s) = sum_p p^-s for real s > 1, by Moebius inversion of log zeta."""
    if not s > 1:
        raise DomainError(f"prime zeta needs s > 1, got {s}")
    m_max = max(2, math.ceil(100.0 / s))
    lo_terms, hi_terms = [], []
    for m in range(1, m_max + 1):
        mu = _mobius(m)
        if mu == 0:
            continue
        lz = _log1p_bracket(zeta_minus_one(m * s))
        a, b = mu * lz.lo / m, mu * lz.hi / m
        lo_terms.append(min(a, b))
        hi_terms.append(max(a, b))
    # |sum_{m > M} mu(m)/m log zeta(ms)| <= 3 * 2^-(M+1)s / ((M+1)(1 - 2^-s))
    rest = 3.0 * 2.0 ** (-(m_max + 1) * s) / ((m_max + 1) * (1.0 - 2.0 ** -s))
    lo = math.fsum(lo_terms) - rest
    hi = math.fsum(hi_terms) + rest
    pad = 8 * EPS * (abs(lo) + abs(hi))
    return ConstantBracket(down(lo - pad), up(hi + pad), method=Method.COMPOSITE)


def _prime_array(cutoff: int) -> np.ndarray:
    return primes_up_to(cutoff).primes.astype(np.float64)


@lru_cache(maxsize=512)
def partial_power_sum(s: float, cutoff: int) -> ConstantBracket:
    """sum_{p <= cutoff} p^-s."""
    return fsum_bracket(np.power(_prime_array(cutoff), -s), TERM_REL_ERROR)


def integral_tail(a: float, cutoff: int) -> ConstantBracket:
    """sum_{p > N} p^-a <= sum_{n > N} n^-a <= N^(1-a)/(a-1)."""
    hi = cutoff ** (1.0 - a) / (a - 1.0)
    return ConstantBracket(0.0, up(hi * (1 + 1e-12)), cutoff=cutoff, tail=TailMethod.INTEGRAL)


# pi(x) <= x/log x (1 + 1.2762/log x) for x > 1; pi(x) >= x/log x (1 + 1/log x) for x >= 599
PI_UPPER_C = 1.2762
PI_LOWER_C = 1.0
PI_LOWER_FROM = 599


def prime_count_tail(a: float, cutoff: int) -> ConstantBracket | None:
    """
    sum_{p > N} p^-a by partial summation against explicit pi(x) bounds:
    <= (U(N) - L(N)) N^-a + (1 + (c-1)/log N)/log N * N^(1-a)/(a-1).
    """
    if cutoff < PI_LOWER_FROM:
        return None
    ln = math.log(cutoff)
    gap = (PI_UPPER_C - PI_LOWER_C) * cutoff / (ln * ln)
    slope = (1.0 + (PI_UPPER_C - 1.0) / ln) / ln
    hi = gap * cutoff ** -a + slope * cutoff ** (1.0 - a) / (a - 1.0)
    return ConstantBracket(0.0, up(hi * (1 + 1e-12)), cutoff=cutoff, tail=TailMethod.PRIME_COUNT)


def zeta_tail(s: float, cutoff: int) -> ConstantBracket:
    """sum_{p > N} p^-s = P(s) - sum_{p <= N} p^-s."""
    diff = prime_zeta_full(s) - partial_power_sum(s, cutoff)
    return ConstantBracket(max(0.0, diff.lo), max(0.0, diff.hi), cutoff=cutoff, tail=TailMethod.PRIME_ZETA)


def power_tail(a: float, cutoff: int, exact: bool = True) -> ConstantBracket:
    """Best available enclosure of sum_{p > N} p^-a."""
    best = integral_tail(a, cutoff)
    counted = prime_count_tail(a, cutoff)
    if counted is not None:
        best = best.intersect(counted)
    if exact and a < 600:
        best = best.intersect(zeta_tail(a, cutoff))
    return best


# ─── Series definitions ────────────────────────────────────────────────────────

Majorant = tuple[float, float, float]   # (c_lo, c_hi, a): value(p) in [c_lo p^-a, c_hi p^-a] for p > N


@dataclass(frozen=True)
class PrimeSeries:
    """
    key        cache key, e.g. "F1(h=3,k=2)"
    term       float64 primes -> float64 terms (log-factors when product=True)
    leading    N -> ((coef, s), ...), the powers summed exactly over the tail
    remainder  N -> majorant of term - leading
    bound      N -> majorant of the whole term
    """

    key: str
    term: Callable[[np.ndarray], np.ndarray]
    leading: Callable[[int], tuple]
    remainder: Callable[[int], Majorant]
    bound: Callable[[int], Majorant]
    product: bool = False


def _scaled(maj: Majorant, cutoff: int, exact: bool) -> ConstantBracket:
    c_lo, c_hi, a = maj
    if c_lo == 0.0 and c_hi == 0.0:
        return ConstantBracket.exact(0.0)
    return ConstantBracket(c_lo, c_hi) * power_tail(a, cutoff, exact=exact)


def tail_enclosures(series: PrimeSeries, cutoff: int) -> list[ConstantBracket]:
    elementary = _scaled(series.bound(cutoff), cutoff, exact=False)
    elementary = elementary.named("", tail=TailMethod.PRIME_COUNT if cutoff >= PI_LOWER_FROM else TailMethod.INTEGRAL)

    accelerated = _scaled(series.remainder(cutoff), cutoff, exact=True)
    for coef, s in series.leading(cutoff):
        accelerated = accelerated + ConstantBracket.exact(coef) * zeta_tail(s, cutoff)
    accelerated = accelerated.named("", tail=TailMethod.PRIME_ZETA)
    return [elementary, accelerated]


_memo_lock = threading.Lock()
_memo: dict[tuple[str, int], ConstantBracket] = {}


def evaluate(series: PrimeSeries, cutoff: int) -> ConstantBracket:
    """Certified bracket for the full series, from its partial sum up to cutoff."""
    with _memo_lock:
        hit = _memo.get((series.key, cutoff))
    if hit is not None:
        return hit

    primes = _prime_array(cutoff)
    partial = fsum_bracket(series.term(primes), TERM_REL_ERROR)
    enclosures = tail_enclosures(series, cutoff)
    tail = enclosures[0]
    for other in enclosures[1:]:
        tail = tail.intersect(other)
    narrowest = min(enclosures, key=lambda b: b.width)

    total = partial + tail
    largest = int(primes[-1]) if primes.size else 0
    if series.product:
        total = total.exp()
        method = Method.EULER_PRODUCT
    else:
        method = Method.DIRECT_SUM
    result = total.named(series.key, cutoff=largest, method=method, tail=narrowest.tail)

    with _memo_lock:
        _memo[(series.key, cutoff)] = result
    return result


# ─── Polynomials in x = p^(-1/h) ───────────────────────────────────────────────

def _poly_mul(a: dict, b: dict) -> dict:
    out: dict[int, float] = {}
    for i, ca in a.items():
        for j, cb in b.items():
            out[i + j] = out.get(i + j, 0.0) + ca * cb
    return {e: c for e, c in out.items() if c != 0.0}


def _poly_add(a: dict, b: dict, scale: float = 1.0) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0.0) + scale * c
    return {e: c for e, c in out.items() if c != 0.0}


def _log1p_expansion(w: dict, h: int, cutoff: int, drop_linear: bool = False):
    """
    log1p(w) for a polynomial w in x: leading part w - w^2/2 + w^3/3 (minus w
    when drop_linear), remainder |.| <= |w|^4 / (4 (1 - |w|)).
    Returns (leading, remainder majorant, bound majorant).
    """
    x_n = cutoff ** (-1.0 / h)
    low = min(w)
    weight = sum(abs(c) for c in w.values())
    w_max = weight * x_n ** low
    if w_max >= 0.5:
        raise DomainError(f"cutoff {cutoff} too small for the log expansion (|w| up to {w_max})")

    w2 = _poly_mul(w, w)
    w3 = _poly_mul(w2, w)
    lead = _poly_add(_poly_add({} if drop_linear else w, w2, -0.5), w3, 1.0 / 3.0)
    leading = tuple((c, e / h) for e, c in sorted(lead.items()))

    r = weight ** 4 / (4.0 * (1.0 - w_max))
    remainder = (-r, r, 4.0 * low / h)
    if drop_linear:
        c = weight ** 2 / (2.0 * (1.0 - w_max))
        bound = (-c, c, 2.0 * low / h)
    else:
        c = weight / (1.0 - w_max)
        bound = (-c, c, low / h)
    return leading, remainder, bound


def _log1p_minus_linear(v: np.ndarray) -> np.ndarray:
    """log1p(v) - v without cancellation for small |v|."""
    small = np.abs(v) <= 2.0 ** -3
    series = np.zeros_like(v)
    power = v * v
    for j in range(2, 28):
        series += (-1) ** (j + 1) * power / j
        power = power * v
    return np.where(small, series, np.log1p(v) - v)


def _x(p: np.ndarray, h: int) -> np.ndarray:
    return np.power(p, -1.0 / h)


# ─── Concrete series ───────────────────────────────────────────────────────────

def prime_zeta_series(k: float) -> PrimeSeries:
    return PrimeSeries(
        key=f"P({k:g})",
        term=lambda p: np.power(p, -float(k)),
        leading=lambda n: ((1.0, float(k)),),
        remainder=lambda n: (0.0, 0.0, float(k) + 1.0),
        bound=lambda n: (0.0, 1.0, float(k)),
    )


def mertens_series() -> PrimeSeries:
    """log(1 - 1/p) + 1/p."""
    def expansion(n):
        return _log1p_expansion({1: -1.0}, 1, n, drop_linear=True)

    return PrimeSeries(
        key="B1-sum",
        term=lambda p: _log1p_minus_linear(-1.0 / p),
        leading=lambda n: expansion(n)[0],
        remainder=lambda n: expansion(n)[1],
        bound=lambda n: expansion(n)[2],
    )


def gamma_0h_series(h: int) -> PrimeSeries:
    """log of 1 + (p - p^(1/h))/(p^2 (p^(1/h) - 1)) = log1p(sum_{j=1}^{h-1} x^(h+j))."""
    w = {h + j: 1.0 for j in range(1, h)}

    def term(p):
        x = _x(p, h)
        t = np.zeros_like(p)
        for j in range(1, h):
            t += np.power(x, h + j)
        return np.log1p(t)

    return PrimeSeries(
        key=f"gamma0(h={h})",
        term=term,
        leading=lambda n: _log1p_expansion(w, h, n)[0],
        remainder=lambda n: _log1p_expansion(w, h, n)[1],
        bound=lambda n: _log1p_expansion(w, h, n)[2],
        product=True,
    )


def eta_series(h: int, k: int) -> PrimeSeries:
    """
    log of (1 - 1/p)(1 - p^(-1/h) + p^-1 - p^(-k/h))/(1 - p^(-1/h)).
    The factor is (1 - x^h)(1 + sum_{j=h}^{k-1} x^j) = 1 + w with
    w = sum_{j=h+1}^{k-1} x^j - sum_{j=h}^{k-1} x^(h+j).
    """
    w = _poly_add({j: 1.0 for j in range(h + 1, k)}, {h + j: 1.0 for j in range(h, k)}, -1.0)

    def term(p):
        x = _x(p, h)
        up_part = np.zeros_like(p)
        for j in range(h + 1, k):
            up_part += np.power(x, j)
        down_part = np.zeros_like(p)
        for j in range(h, k):
            down_part += np.power(x, h + j)
        return np.log1p(up_part - down_part)

    return PrimeSeries(
        key=f"eta(h={h},k={k})",
        term=term,
        leading=lambda n: _log1p_expansion(w, h, n)[0],
        remainder=lambda n: _log1p_expansion(w, h, n)[1],
        bound=lambda n: _log1p_expansion(w, h, n)[2],
        product=True,
    )


def lhr_series(h: int, r: float) -> PrimeSeries:
    """1/(p^(r/h - 1)(p - p^(1-1/h) + 1)) = p^(-r/h) / (1 - x + x^h)."""
    r = float(r)
    depth = max(1, math.ceil(4 * h - r - 1))      # remainder decays like p^-4 or faster
    c = [1.0]
    for j in range(1, depth + 1):
        c.append(c[j - 1] - (c[j - h] if j >= h else 0.0))
    # 1 - (1 - x + x^h) * sum_{j<=depth} c_j x^j leaves only powers depth+1 .. depth+h
    denom = {0: 1.0, 1: -1.0, h: 1.0}
    numerator = _poly_add({0: 1.0}, _poly_mul(denom, dict(enumerate(c))), -1.0)
    spill = sum(abs(v) for e, v in numerator.items() if e > depth)

    def remainder(n):
        bound = spill / (1.0 - n ** (-1.0 / h))
        return (-bound, bound, (r + depth + 1) / h)

    return PrimeSeries(
        key=f"L(h={h},r={r:g})",
        term=lambda p: np.power(p, -r / h) / (1.0 - _x(p, h) + 1.0 / p),
        leading=lambda n: tuple((cj, (r + j) / h) for j, cj in enumerate(c) if cj != 0.0),
        remainder=remainder,
        bound=lambda n: (0.0, 1.0 / (1.0 - n ** (-1.0 / h)), r / h),
    )


def f1_like_series(key: str, h: int, k: int) -> PrimeSeries:
    """(p^h - p^(h-1))/(p^k (p^h - 1)) = p^-k (1 - u)/(1 - u^h)."""
    return PrimeSeries(
        key=key,
        term=lambda p: np.power(p, -float(k)) * (1.0 - 1.0 / p) / (1.0 - np.power(p, -float(h))),
        leading=lambda n: ((1.0, float(k)), (-1.0, float(k + 1))),
        remainder=lambda n: (0.0, 1.0 / (1.0 - float(n) ** -h), float(k + h)),
        bound=lambda n: (0.0, 1.0, float(k)),
    )


def f2_series(h: int, k: int) -> PrimeSeries:
    def term(p):
        inner = np.power(p, -float(k)) * (1.0 - 1.0 / p) / (1.0 - np.power(p, -float(h)))
        return inner * inner

    return PrimeSeries(
        key=f"F2(h={h},k={k})",
        term=term,
        leading=lambda n: ((1.0, 2.0 * k),),
        remainder=lambda n: (-2.0, 0.0, 2.0 * k + 1),
        bound=lambda n: (0.0, 1.0, 2.0 * k),
    )


def f3_series(h: int) -> PrimeSeries:
    """(p^(h-1) - 1)/(p (p^h - 1)) = p^-2 (1 - u^(h-1))/(1 - u^h)."""
    return PrimeSeries(
        key=f"F3(h={h})",
        term=lambda p: (1.0 - np.power(p, 1.0 - h)) / (p * p * (1.0 - np.power(p, -float(h)))),
        leading=lambda n: ((1.0, 2.0),),
        remainder=lambda n: (-1.0, 0.0, float(h + 1)),
        bound=lambda n: (0.0, 1.0, 2.0),
    )


def f4_series(h: int) -> PrimeSeries:
    """((p^(h-1) - p^(h-2))/(p^h - 1))^2 = p^-2 ((1 - u)/(1 - u^h))^2."""
    def term(p):
        inner = (1.0 - 1.0 / p) / (p * (1.0 - np.power(p, -float(h))))
        return inner * inner

    return PrimeSeries(
        key=f"F4(h={h})",
        term=term,
        leading=lambda n: ((1.0, 2.0), (-2.0, 3.0)),
        remainder=lambda n: (0.0, 1.0 + 2.0 / (1.0 - float(n) ** -2) ** 2, 4.0),
        bound=lambda n: (0.0, 1.0, 2.0),
    )


def _damped_square(key: str, h: int, lead_power: float) -> PrimeSeries:
    """
    (p^-lead / (1 + eps))^2 with eps = u/(1 - x); covers the squared terms
    inside D2 (lead 1) and the h-full second moments (lead k/h).
    """
    def term(p):
        eps = (1.0 / p) / (1.0 - _x(p, h))
        inner = np.power(p, -lead_power) / (1.0 + eps)
        return inner * inner

    return PrimeSeries(
        key=key,
        term=term,
        leading=lambda n: ((1.0, 2.0 * lead_power),),
        remainder=lambda n: (-2.0 / (1.0 - n ** (-1.0 / h)), 0.0, 2.0 * lead_power + 1.0),
        bound=lambda n: (0.0, 1.0, 2.0 * lead_power),
    )


def f5_series(h: int) -> PrimeSeries:
    """((p^(1/h) - 1)/(p^(1+1/h) - p + p^(1/h)))^2."""
    return _damped_square(f"F5(h={h})", h, 1.0)


def f6_series(h: int) -> PrimeSeries:
    """((p^(1/h) - 1)/(p^(1+2/h) - p^(1+1/h) + p^(2/h)))^2."""
    return _damped_square(f"F6(h={h})", h, (h + 1) / h)


def f7_series(h: int, k: int) -> PrimeSeries:
    """((p^(1/h) - 1)/(p^((k+1)/h) - p^(k/h) + p^((k+1-h)/h)))^2."""
    return _damped_square(f"F7(h={h},k={k})", h, k / h)
