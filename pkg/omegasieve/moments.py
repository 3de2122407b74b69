"""
omegasieve/moments.py
First and second moments of omega_k over h-free numbers, h-full numbers and
all naturals: exact sums streamed from the sieve, the predicted main terms,
and residual scans across a grid of x.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np

from omegasieve import constants as const
from omegasieve.bracket import ConstantBracket
from omegasieve.errors import CapacityError, DomainError, UncoveredCombinationError
from omegasieve.primes import primes_up_to
from omegasieve.run_log import log_event, log_warning
from omegasieve.segment_pool import DEFAULT_THREADS, run_segments
from omegasieve.signature import NumberSet, SignatureArrays, enumerate_h_full

# ─── Config ────────────────────────────────────────────────────────────────────
MAX_X = 10**9
MIN_GRID_X = 10**3
# |normalized residual| a scan is expected to stay under
NORMALIZED_BOUND = 10.0

CSV_COLUMNS = ("x", "set", "h", "k", "order", "empirical", "predicted",
               "residual", "error_scale", "normalized_residual")


class Strategy(str, Enum):
    SIEVE = "sieve"              # classify every n <= x
    ENUMERATE = "enumerate"      # walk the h-full numbers directly


# ─── Accumulators ──────────────────────────────────────────────────────────────

@dataclass
class MomentAccumulator:
    """
    Sums over the members n <= x of a set, for f = omega_k (omega when k = 0):
    count = sum 1, sum_f = sum f, sum_f2 = sum f^2, sum_big = sum Omega_k
    (Omega itself when k = 0).
    """

    set: NumberSet
    h: int
    k: int
    count: int = 0
    sum_f: int = 0
    sum_f2: int = 0
    sum_big: int = 0
    x: int = 0

    @classmethod
    def from_arrays(cls, arrays: SignatureArrays, kind: NumberSet, h: int, k: int, x: int) -> "MomentAccumulator":
        mask = arrays.membership(kind, h)
        f = arrays.statistic(k)[mask]
        big = arrays.big_omega[mask].astype(np.int64) if k == 0 else k * f
        return cls(
            set=NumberSet(kind),
            h=h,
            k=k,
            count=int(mask.sum()),
            sum_f=int(f.sum()),
            sum_f2=int(np.dot(f, f)),
            sum_big=int(big.sum()),
            x=int(x),
        )

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if (self.set, self.h, self.k) != (other.set, other.h, other.k):
            raise DomainError(f"cannot merge {self.set.value}/h={self.h}/k={self.k} "
                              f"with {other.set.value}/h={other.h}/k={other.k}")
        return MomentAccumulator(
            set=self.set,
            h=self.h,
            k=self.k,
            count=self.count + other.count,
            sum_f=self.sum_f + other.sum_f,
            sum_f2=self.sum_f2 + other.sum_f2,
            sum_big=self.sum_big + other.sum_big,
            x=max(self.x, other.x),
        )

    def moment(self, order: int) -> int:
        _check_order(order)
        return self.sum_f if order == 1 else self.sum_f2


def _check_order(order: int):
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")


def _check_request(kind: NumberSet, h: int, k: int, x: int):
    if h < 2:
        raise DomainError(f"h must be >= 2, got {h}")
    if k < 0:
        raise DomainError(f"k must be >= 0, got {k}")
    if x < 1:
        raise DomainError(f"x must be >= 1, got {x}")
    if x > MAX_X:
        raise CapacityError(f"x = {x} exceeds the budget MAX_X = {MAX_X}")
    NumberSet(kind)


def _strategy_for(kind: NumberSet, strategy: Strategy | None) -> Strategy:
    if strategy is None:
        return Strategy.ENUMERATE if kind is NumberSet.H_FULL else Strategy.SIEVE
    strategy = Strategy(strategy)
    if strategy is Strategy.ENUMERATE and kind is not NumberSet.H_FULL:
        raise DomainError(f"only h-full numbers can be enumerated directly, not {kind.value}")
    return strategy


def accumulate_grid(
    kind: NumberSet,
    h: int,
    k: int,
    grid,
    threads: int = DEFAULT_THREADS,
    strategy: Strategy | None = None,
) -> list[MomentAccumulator]:
    """One accumulator per grid point, from a single pass over [1, max(grid)]."""
    kind = NumberSet(kind)
    grid = sorted({int(g) for g in grid})
    if not grid:
        raise DomainError("empty grid")
    top = grid[-1]
    _check_request(kind, h, k, grid[0])
    _check_request(kind, h, k, top)
    strategy = _strategy_for(kind, strategy)

    if strategy is Strategy.ENUMERATE:
        members = enumerate_h_full(top, h)
        return [
            MomentAccumulator.from_arrays(members.select(members.numbers <= g), kind, h, k, g)
            for g in grid
        ]

    primes = primes_up_to(math.isqrt(top))
    parts = run_segments(
        1, top,
        lambda seg: MomentAccumulator.from_arrays(seg, kind, h, k, seg.hi),
        primes, h=h, threads=threads, breaks=grid,
    )
    out, running, i = [], MomentAccumulator(kind, h, k), 0
    for g in grid:
        while i < len(parts) and parts[i].x <= g:
            running = running.merge(parts[i])
            i += 1
        out.append(replace(running, x=g))
    return out


def accumulate(
    kind: NumberSet,
    h: int,
    k: int,
    x: int,
    order: int = 1,
    threads: int = DEFAULT_THREADS,
    strategy: Strategy | None = None,
) -> MomentAccumulator:
    """
    Exact sums of omega_k(n)^order over the set members n <= x. Both orders are
    carried; `order` only selects what moment() returns by default.
    """
    _check_order(order)
    acc = accumulate_grid(kind, h, k, [x], threads=threads, strategy=strategy)[0]
    log_event("MOMENTS_ACCUMULATED",
              f"set={acc.set.value} h={h} k={k} x={x} count={acc.count} "
              f"sum_f={acc.sum_f} sum_f2={acc.sum_f2}")
    return acc


# ─── Predicted main terms ──────────────────────────────────────────────────────

@dataclass
class Prediction:
    value: float
    error_scale: float
    constants: dict[str, ConstantBracket] = field(default_factory=dict)


def _mid(brackets: dict, bracket: ConstantBracket) -> float:
    brackets[bracket.name] = bracket
    return bracket.mid


def predict(kind: NumberSet, h: int, k: int, order: int, x: float,
            tol: float = const.DEFAULT_TOL) -> Prediction:
    """Main terms of the moment formula for (set, h, k, order) at x, from bracket midpoints."""
    kind = NumberSet(kind)
    _check_order(order)
    if h < 2 or k < 0:
        raise DomainError(f"need h >= 2 and k >= 0, got h={h} k={k}")
    if x < 3:
        raise DomainError(f"predictions need x >= 3, got {x}")
    x = float(x)
    used: dict[str, ConstantBracket] = {}
    ll = math.log(math.log(x))
    lx = math.log(x)

    def uncovered():
        return UncoveredCombinationError(
            f"no formula for set={kind.value} h={h} k={k} order={order}")

    if kind is NumberSet.H_FREE:
        if k >= h:
            return Prediction(0.0, 1.0)
        scale = x / _mid(used, const.zeta(h, tol))
        if k == 0:
            if order == 2:
                raise uncovered()
            b1 = _mid(used, const.mertens_b1(tol))
            f8 = _mid(used, const.prime_sum(const.PrimeSumFamily(const.FamilyId.F8, h), tol))
            return Prediction(scale * (ll + b1 - f8), x / lx, used)
        if k == 1:
            c1 = _mid(used, const.c1(h, tol))
            if order == 1:
                return Prediction(scale * (ll + c1), x / lx, used)
            c2 = _mid(used, const.c2(h, tol))
            return Prediction(scale * (ll * ll + (2 * c1 + 1) * ll + c2), x / lx, used)
        f1 = _mid(used, const.prime_sum(const.PrimeSumFamily(const.FamilyId.F1, h, k), tol))
        if order == 1:
            return Prediction(f1 * scale, x ** (1.0 / k) / lx, used)
        f2 = _mid(used, const.prime_sum(const.PrimeSumFamily(const.FamilyId.F2, h, k), tol))
        return Prediction((f1 * f1 - f2 + f1) * scale, x ** (1.0 / k) * ll / lx, used)

    if kind is NumberSet.H_FULL:
        if 1 <= k <= h - 1:
            return Prediction(0.0, 1.0)
        root = x ** (1.0 / h)
        scale = _mid(used, const.gamma_0h(h, tol)) * root
        if k == 0:
            if order == 2:
                raise uncovered()
            b1 = _mid(used, const.mertens_b1(tol))
            lead = _mid(used, const.l_h_r(h, h + 1, tol)) - _mid(used, const.l_h_r(h, 2 * h, tol))
            return Prediction(scale * (ll + b1 - math.log(h) + lead), root / lx, used)
        if k == h:
            dd1 = _mid(used, const.d1(h, tol))
            if order == 1:
                return Prediction(scale * (ll + dd1), root / lx, used)
            dd2 = _mid(used, const.d2(h, tol))
            return Prediction(scale * (ll * ll + (2 * dd1 + 1) * ll + dd2), root * ll / lx, used)
        delta = _mid(used, const.l_h_r(h, k, tol)) - _mid(used, const.l_h_r(h, k + 1, tol))
        small = x ** (1.0 / (h + 1))
        if k == h + 1:
            if order == 1:
                return Prediction(delta * scale, small * ll, used)
            f6 = _mid(used, const.prime_sum(const.PrimeSumFamily(const.FamilyId.F6, h), tol))
            return Prediction((delta * delta + delta - f6) * scale, small * ll * ll, used)
        if order == 1:
            return Prediction(delta * scale, small, used)
        f7 = _mid(used, const.prime_sum(const.PrimeSumFamily(const.FamilyId.F7, h, k), tol))
        return Prediction((delta * delta + delta - f7) * scale, small, used)

    # all naturals
    if order == 2:
        raise uncovered()
    if k == 0:
        return Prediction(x * ll + _mid(used, const.mertens_b1(tol)) * x, x / lx, used)
    if k == 1:
        b1 = _mid(used, const.mertens_b1(tol))
        p2 = _mid(used, const.prime_zeta(2, tol))
        return Prediction(x * ll + (b1 - p2) * x, x / lx, used)
    diff = _mid(used, const.prime_zeta(k, tol)) - _mid(used, const.prime_zeta(k + 1, tol))
    return Prediction(diff * x, x ** ((k + 1) / (3 * k - 1)) * lx * lx, used)


# ─── Residual scans ────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class VerificationRow:
    x: int
    set: NumberSet
    h: int
    k: int
    order: int
    empirical: int
    predicted: float
    residual: float
    error_scale: float
    normalized_residual: float

    @classmethod
    def compare(cls, acc: MomentAccumulator, order: int, prediction: Prediction) -> "VerificationRow":
        empirical = acc.moment(order)
        residual = empirical - prediction.value
        return cls(
            x=acc.x,
            set=acc.set,
            h=acc.h,
            k=acc.k,
            order=order,
            empirical=empirical,
            predicted=prediction.value,
            residual=residual,
            error_scale=prediction.error_scale,
            normalized_residual=residual / prediction.error_scale,
        )

    def to_dict(self) -> dict:
        row = asdict(self)
        row["set"] = self.set.value
        return {c: row[c] for c in CSV_COLUMNS}


@dataclass
class ScanResult:
    rows: list[VerificationRow]
    max_abs_normalized: float
    slope: float | None            # of log|residual| against log(error_scale); None when undefined
    constants: dict[str, ConstantBracket] = field(default_factory=dict)

    @property
    def offset(self) -> float:
        """Mean normalized residual: the systematic part the error term does not absorb."""
        return float(np.mean([r.normalized_residual for r in self.rows]))

    @property
    def inversions(self) -> int:
        """Grid steps where |normalized residual| grows instead of shrinking."""
        sizes = [abs(r.normalized_residual) for r in self.rows]
        return sum(b > a for a, b in zip(sizes, sizes[1:]))

    @property
    def within_bound(self) -> bool:
        return self.max_abs_normalized <= NORMALIZED_BOUND

    def summary(self) -> dict:
        return {"max_abs_normalized": self.max_abs_normalized, "slope": self.slope,
                "offset": self.offset, "inversions": self.inversions,
                "within_bound": self.within_bound, "bound": NORMALIZED_BOUND}


def trend_slope(rows: list[VerificationRow]) -> float | None:
    if len(rows) < 2:
        return None
    residual = np.array([abs(r.residual) for r in rows])
    scale = np.array([r.error_scale for r in rows])
    if np.any(residual == 0) or np.ptp(np.log(scale)) == 0:
        return None
    slope, _ = np.polyfit(np.log(scale), np.log(residual), 1)
    return float(slope)


def residual_scan(
    kind: NumberSet,
    h: int,
    k: int,
    order: int,
    grid,
    threads: int = DEFAULT_THREADS,
    strategy: Strategy | None = None,
    tol: float = const.DEFAULT_TOL,
) -> ScanResult:
    grid = [int(g) for g in grid]
    if not grid:
        raise DomainError("empty grid")
    if grid != sorted(grid) or len(set(grid)) != len(grid):
        raise DomainError(f"grid must be strictly ascending, got {grid}")
    if grid[0] < MIN_GRID_X:
        raise DomainError(f"grid points must be >= {MIN_GRID_X}, got {grid[0]}")
    _check_order(order)
    # fail on uncovered combinations before any sieving
    predict(kind, h, k, order, grid[0], tol)

    rows, used = [], {}
    for acc in accumulate_grid(kind, h, k, grid, threads=threads, strategy=strategy):
        prediction = predict(kind, h, k, order, acc.x, tol)
        used.update(prediction.constants)
        row = VerificationRow.compare(acc, order, prediction)
        log_event("VERIFY_ROW",
                  f"x={row.x} set={row.set.value} h={h} k={k} order={order} "
                  f"empirical={row.empirical} predicted={row.predicted:.6g} "
                  f"normalized={row.normalized_residual:.4g}")
        rows.append(row)

    scan = ScanResult(
        rows=rows,
        max_abs_normalized=max(abs(r.normalized_residual) for r in rows),
        slope=trend_slope(rows),
        constants=used,
    )
    if not scan.within_bound or scan.inversions:
        log_warning("VERIFY_OFFSET",
                    f"set={kind.value} h={h} k={k} order={order} offset={scan.offset:.4g} "
                    f"max={scan.max_abs_normalized:.4g} inversions={scan.inversions}")
    return scan
