"""
omegasieve/cli.py
Command-line orchestration: parse and validate a RunConfig, dispatch the
subcommand, write artifacts and run.json, map failures to exit codes.
"""

import argparse
import logging
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from decimal import Decimal, InvalidOperation
from pathlib import Path

from omegasieve import constants as const
from omegasieve import distribution as dist
from omegasieve import moments
from omegasieve.artifacts import ArtifactWriter, json_bytes
from omegasieve.errors import CapacityError, ConfigError, InsufficientPrimesError, OmegaSieveError
from omegasieve.run_log import enable_console, log_event, log_failure
from omegasieve.segment_pool import DEFAULT_THREADS
from omegasieve.selftest import LEMMA_COLUMNS, ORACLE_LIMIT, run_lemmas, run_selftest
from omegasieve.signature import NumberSet

# ─── Config ────────────────────────────────────────────────────────────────────
COMMANDS = ("constants", "verify", "ekac", "density", "lemmas", "selftest")
DEFAULT_OUT = "omegasieve-out"

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_INVALID = 2
EXIT_RESOURCES = 3
EXIT_INTERNAL = 4

# theorem -> (set, default k given h, allowed orders)
THEOREMS = {
    "1.1": (NumberSet.H_FREE, lambda h: 1, (1, 2)),
    "1.2": (NumberSet.H_FREE, lambda h: 2, (1, 2)),
    "1.3": (NumberSet.H_FULL, lambda h: h, (1,)),
    "1.4": (NumberSet.H_FULL, lambda h: h, (2,)),
}


def parse_count(text) -> int:
    """'1e7', '10000000' or 10**7 -> 10000000; rejects anything non-integral."""
    try:
        d = Decimal(str(text).strip())
    except InvalidOperation:
        raise ConfigError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value():
        raise ConfigError(f"not an integer: {text!r}")
    return int(d)


def parse_grid(text: str) -> list[int]:
    return [parse_count(part) for part in str(text).split(",") if part.strip()]


@dataclass
class RunConfig:
    command: str
    h: int = 2
    k: int | None = None
    r: float | None = None
    order: int | None = None
    theorem: str | None = None
    set: str | None = None
    f: str = "omega1"
    x: int | None = None
    grid: list[int] = field(default_factory=list)
    name: str | None = None
    tol: float = const.DEFAULT_TOL
    cutoff: int | None = None
    q: list[int] = field(default_factory=list)
    limit: int = ORACLE_LIMIT
    histogram: bool = False
    csv: str | None = None
    out: str = DEFAULT_OUT
    threads: int = DEFAULT_THREADS
    json: bool = False
    verbose: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    # ─── Validation ────────────────────────────────────────────────────────────

    def resolve(self) -> "RunConfig":
        """Fill theorem defaults, then validate every range before anything runs."""
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.threads < 1:
            raise ConfigError(f"--threads must be >= 1, got {self.threads}")
        if self.h < 2:
            raise ConfigError(f"--h must be >= 2, got {self.h}")
        if not self.tol > 0:
            raise ConfigError(f"--tol must be > 0, got {self.tol}")
        getattr(self, f"_validate_{self.command}")()
        return self

    def _need_x(self, minimum: int = 1):
        if self.x is None:
            raise ConfigError(f"{self.command} needs --x")
        if self.x < minimum:
            raise ConfigError(f"--x must be >= {minimum}, got {self.x}")
        if self.x > moments.MAX_X:
            raise CapacityError(f"--x {self.x} exceeds the budget {moments.MAX_X}")

    def _need_set(self, allowed=(NumberSet.H_FREE, NumberSet.H_FULL)):
        try:
            kind = NumberSet(self.set)
        except ValueError:
            raise ConfigError(f"--set must be one of {[s.value for s in allowed]}, got {self.set!r}") from None
        if kind not in allowed:
            raise ConfigError(f"--set {kind.value} is not allowed for {self.command}")

    def _validate_constants(self):
        if self.name not in const.CONSTANT_NAMES:
            raise ConfigError(f"--name must be one of {', '.join(const.CONSTANT_NAMES)}, got {self.name!r}")
        integral_k = self.name == "eta" or self.name in const.FamilyId.__members__
        if integral_k and self.k is not None and self.k != int(self.k):
            raise ConfigError(f"{self.name} needs an integer --k, got {self.k:g}")

    def _validate_verify(self):
        if self.theorem is not None:
            if self.theorem not in THEOREMS:
                raise ConfigError(f"--theorem must be one of {sorted(THEOREMS)}, got {self.theorem!r}")
            kind, default_k, orders = THEOREMS[self.theorem]
            if self.set is not None and NumberSet(self.set) is not kind:
                raise ConfigError(f"theorem {self.theorem} is about {kind.value} numbers, not {self.set}")
            self.set = kind.value
            self.k = default_k(self.h) if self.k is None else self.k
            self.order = orders[0] if self.order is None else self.order
            if self.order not in orders:
                raise ConfigError(f"theorem {self.theorem} covers order {orders}, got {self.order}")
            covered = {"1.1": self.k == 1, "1.2": 2 <= self.k <= self.h - 1}.get(self.theorem, self.k >= self.h)
            if not covered:
                raise ConfigError(f"theorem {self.theorem} does not cover k={self.k} at h={self.h}")
        self._need_set((NumberSet.H_FREE, NumberSet.H_FULL, NumberSet.ALL))
        if self.k is None or self.k < 0:
            raise ConfigError(f"verify needs --k >= 0, got {self.k}")
        self.order = 1 if self.order is None else self.order
        if self.order not in (1, 2):
            raise ConfigError(f"--order must be 1 or 2, got {self.order}")
        if not self.grid:
            raise ConfigError("verify needs --grid")
        if self.grid != sorted(set(self.grid)) or self.grid[0] < moments.MIN_GRID_X:
            raise ConfigError(f"--grid must be strictly ascending with points >= {moments.MIN_GRID_X}")
        if self.grid[-1] > moments.MAX_X:
            raise CapacityError(f"grid point {self.grid[-1]} exceeds the budget {moments.MAX_X}")
        try:
            moments.predict(NumberSet(self.set), self.h, self.k, self.order, self.grid[0], self.tol)
        except CapacityError:
            raise
        except OmegaSieveError as e:
            raise ConfigError(str(e)) from None

    def _validate_ekac(self):
        self._need_set()
        try:
            dist.Statistic(self.f)
        except ValueError:
            raise ConfigError(f"--f must be one of {[s.value for s in dist.Statistic]}, got {self.f!r}") from None
        self._need_x(dist.N_MIN)

    def _validate_density(self):
        self._need_set()
        self._need_x()
        if self.k is None:
            raise ConfigError("density needs --k")
        if NumberSet(self.set) is NumberSet.H_FREE and not 1 < self.k < self.h:
            raise ConfigError(f"h-free density needs 1 < k < h, got h={self.h} k={self.k}")
        if NumberSet(self.set) is NumberSet.H_FULL and not self.k > self.h:
            raise ConfigError(f"h-full density needs k > h, got h={self.h} k={self.k}")

    def _validate_lemmas(self):
        self._need_x()
        self.k = self.h + 1 if self.k is None else self.k
        if not self.k > self.h:
            raise ConfigError(f"lemmas need k > h, got h={self.h} k={self.k}")
        self.q = self.q or [2, 3]
        if len(set(self.q)) != len(self.q) or any(q < 2 for q in self.q):
            raise ConfigError(f"--q must list distinct primes, got {self.q}")

    def _validate_selftest(self):
        if self.limit < 1:
            raise ConfigError(f"--limit must be >= 1, got {self.limit}")


# ─── Commands ──────────────────────────────────────────────────────────────────

class Run:
    """One command execution; collects the constants it used for run.json."""

    def __init__(self, config: RunConfig, writer: ArtifactWriter, stdout=None):
        self.config = config
        self.writer = writer
        self.stdout = stdout or sys.stdout
        self.constants: dict = {}
        self.status = EXIT_OK

    def emit(self, payload: dict, text: str):
        self.stdout.write(json_bytes(payload).decode("utf-8") if self.config.json else text + "\n")

    def constants_cmd(self):
        c = self.config
        bracket = const.constant(c.name, h=c.h, k=c.k, r=c.r, tol=c.tol, cutoff=c.cutoff)
        self.constants[bracket.name] = bracket
        payload = {**bracket.to_dict(), "width": bracket.width}
        self.writer.write_json("constants.json", payload)
        self.emit(payload, f"{bracket.name} in [{bracket.lo:.17g}, {bracket.hi:.17g}] "
                           f"width={bracket.width:.3e} cutoff={bracket.cutoff} method={bracket.method.value}")

    def verify_cmd(self):
        c = self.config
        scan = moments.residual_scan(NumberSet(c.set), c.h, c.k, c.order, c.grid,
                                     threads=c.threads, tol=c.tol)
        self.constants.update(scan.constants)
        self.writer.write_csv(c.csv or "verify.csv", moments.CSV_COLUMNS, [r.to_dict() for r in scan.rows])
        summary = scan.summary()
        self.writer.write_json("verify.json", summary)
        payload = {**summary, "rows": [r.to_dict() for r in scan.rows]}
        lines = [",".join(moments.CSV_COLUMNS)] + [
            ",".join(str(v) for v in r.to_dict().values()) for r in scan.rows]
        lines.append(f"max|normalized|={scan.max_abs_normalized:.4g} slope={scan.slope} "
                     f"offset={scan.offset:.4g} inversions={scan.inversions} "
                     f"within_bound={scan.within_bound}")
        self.emit(payload, "\n".join(lines))

    def ekac_cmd(self):
        c = self.config
        ecdf = dist.ekac_sample(NumberSet(c.set), c.h, dist.Statistic(c.f), c.x, threads=c.threads)
        name = c.csv or "ekac.csv"
        if c.histogram:
            counts, edges = ecdf.histogram()
            rows = [{"bin_lo": float(edges[i]), "bin_hi": float(edges[i + 1]), "count": int(counts[i])}
                    for i in range(len(counts))]
            self.writer.write_csv(name, ("bin_lo", "bin_hi", "count"), rows)
        else:
            self.writer.write_csv(name, ("r",), [{"r": float(v)} for v in ecdf.samples])
        summary = {
            "set": c.set, "h": c.h, "f": c.f, "x": c.x, "samples": len(ecdf),
            "ks_distance": dist.ks_distance(ecdf) if len(ecdf) else None,
            "mean": ecdf.mean if len(ecdf) else None,
            "variance": ecdf.variance if len(ecdf) else None,
        }
        self.writer.write_json("ekac.json", summary)
        self.emit(summary, " ".join(f"{k}={v}" for k, v in summary.items()))

    def density_cmd(self):
        c = self.config
        report = dist.density_counts(NumberSet(c.set), c.h, c.k, c.x, threads=c.threads)
        payload = report.to_dict()
        self.writer.write_json("density.json", payload)
        self.emit(payload, " ".join(f"{k}={v}" for k, v in payload.items()))

    def lemmas_cmd(self):
        c = self.config
        rows = run_lemmas(c.x, c.h, c.k, c.q, threads=c.threads)
        self.writer.write_csv(c.csv or "lemmas.csv", LEMMA_COLUMNS, rows)
        self.emit({"rows": rows}, "\n".join(" ".join(f"{k}={row[k]}" for k in LEMMA_COLUMNS) for row in rows))

    def selftest_cmd(self):
        c = self.config
        results = run_selftest(c.limit, threads=c.threads)
        payload = {"passed": all(r.passed for r in results), "checks": [r.to_dict() for r in results]}
        self.writer.write_json("selftest.json", payload)
        self.emit(payload, "\n".join(f"{'PASS' if r.passed else 'FAIL'} {r.name} {r.detail}" for r in results))
        if not payload["passed"]:
            self.status = EXIT_CHECKS_FAILED


def run(config: RunConfig, stdout=None) -> int:
    """
    Execute one validated command. Exit status 0 ok, 1 checks failed, 2 invalid,
    3 resources, 4 any other failure. Every started run leaves a run.json.
    """
    try:
        config.resolve()
    except ConfigError as e:
        log_failure("CONFIG_INVALID", str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    except CapacityError as e:
        log_failure("CONFIG_OVER_BUDGET", str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_RESOURCES

    if config.verbose:
        enable_console(logging.INFO)
    writer = ArtifactWriter(Path(config.out))
    job = Run(config, writer, stdout)
    started = time.monotonic()
    log_event("RUN_STARTED", f"command={config.command}")

    status, error = EXIT_OK, None
    try:
        getattr(job, f"{config.command}_cmd")()
        status = job.status
    except (CapacityError, InsufficientPrimesError, MemoryError, OSError) as e:
        status, error = EXIT_RESOURCES, e
    except (OmegaSieveError, ValueError) as e:
        status, error = EXIT_INVALID, e
    except Exception as e:
        status, error = EXIT_INTERNAL, e

    if error is not None:
        writer.discard()
        log_failure("RUN_FAILED", f"command={config.command} error={error!r}")
        sys.stderr.write(f"error: {error}\n")
    writer.write_manifest(
        config.to_dict(),
        status="ok" if status == EXIT_OK else "failed",
        wall_seconds=time.monotonic() - started,
        constants=job.constants,
        error=None if error is None else f"{type(error).__name__}: {error}",
    )
    log_event("RUN_FINISHED", f"command={config.command} status={status}")
    return status


# ─── Argument parsing ──────────────────────────────────────────────────────────

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=DEFAULT_THREADS)
    common.add_argument("--out", default=DEFAULT_OUT, help="directory for artifacts and run.json")
    common.add_argument("--json", action="store_true", help="print results as JSON")
    common.add_argument("--verbose", action="store_true", help="mirror the log to stderr")

    parser = argparse.ArgumentParser(prog="omegasieve", description="omega_k over h-free and h-full integers")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", parents=[common], help="certified constant brackets")
    p.add_argument("--name", required=True, choices=const.CONSTANT_NAMES)
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--k", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--tol", type=float, default=const.DEFAULT_TOL)
    p.add_argument("--cutoff", type=parse_count)

    p = sub.add_parser("verify", parents=[common], help="moment residual scan over a grid of x")
    p.add_argument("--theorem", choices=sorted(THEOREMS))
    p.add_argument("--set", choices=[s.value for s in NumberSet])
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--k", type=int)
    p.add_argument("--order", type=int, choices=(1, 2))
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--tol", type=float, default=const.DEFAULT_TOL)
    p.add_argument("--csv")

    p = sub.add_parser("ekac", parents=[common], help="Erdos-Kac sample and KS distance")
    p.add_argument("--set", required=True, choices=["hfree", "hfull"])
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--f", default="omega1", choices=[s.value for s in dist.Statistic])
    p.add_argument("--x", type=parse_count, required=True)
    p.add_argument("--histogram", action="store_true")
    p.add_argument("--csv")

    p = sub.add_parser("density", parents=[common], help="omega_k = 0 / 1 counts and floors")
    p.add_argument("--set", required=True, choices=["hfree", "hfull"])
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--x", type=parse_count, required=True)

    p = sub.add_parser("lemmas", parents=[common], help="coprime counting lemmas")
    p.add_argument("--x", type=parse_count, required=True)
    p.add_argument("--h", type=int, default=2)
    p.add_argument("--k", type=int)
    p.add_argument("--q", type=parse_grid, default=[])
    p.add_argument("--csv")

    p = sub.add_parser("selftest", parents=[common], help="sieve, oracle and constant checks")
    p.add_argument("--limit", type=parse_count, default=ORACLE_LIMIT)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if k in {f.name for f in fields(RunConfig)}}
    return RunConfig(**values)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INVALID if e.code else EXIT_OK
    try:
        config = config_from_args(args)
    except ConfigError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INVALID
    return run(config)
