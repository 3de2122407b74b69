import io
import json

import pytest

from omegasieve import cli
from omegasieve import constants as const
from omegasieve import distribution as dist
from omegasieve import selftest
from omegasieve.artifacts import verify_manifest
from omegasieve.bracket import ConstantBracket
from omegasieve.cli import (
    EXIT_CHECKS_FAILED, EXIT_INTERNAL, EXIT_INVALID, EXIT_OK, EXIT_RESOURCES,
    RunConfig, main, parse_count, parse_grid, run,
)
from omegasieve.errors import CapacityError, ConfigError


def _manifest(out):
    return json.loads((out / "run.json").read_text())


# ─── Parsing ───────────────────────────────────────────────────────────────────

def test_parse_count():
    assert parse_count("1e7") == 10**7
    assert parse_count("10000000") == 10**7
    with pytest.raises(ConfigError):
        parse_count("1.5")
    with pytest.raises(ConfigError):
        parse_count("ten")


def test_parse_grid():
    assert parse_grid("1e3,1e4, 1e5") == [1000, 10000, 100000]


def test_config_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"command": "constants", "colour": "blue"})
    assert RunConfig.from_dict({"command": "selftest", "limit": 10}).limit == 10


def test_theorem_fills_defaults():
    config = RunConfig(command="verify", theorem="1.3", h=3, grid=[1000]).resolve()
    assert (config.set, config.k, config.order) == ("hfull", 3, 1)


def test_theorem_coverage_checked():
    with pytest.raises(ConfigError):
        RunConfig(command="verify", theorem="1.2", h=2, grid=[1000]).resolve()
    with pytest.raises(ConfigError):
        RunConfig(command="verify", theorem="1.1", order=3, grid=[1000]).resolve()


# ─── Commands ──────────────────────────────────────────────────────────────────

def test_constants_command(tmp_path):
    out = tmp_path / "run"
    assert main(["constants", "--name", "zeta", "--k", "2", "--out", str(out)]) == EXIT_OK
    payload = json.loads((out / "constants.json").read_text())
    assert payload["lo"] <= 1.6449340668 <= payload["hi"]
    manifest = _manifest(out)
    assert manifest["status"] == "ok"
    assert "constants.json" in manifest["artifacts"]
    assert verify_manifest(out) == []


def test_json_output(tmp_path):
    stdout = io.StringIO()
    config = RunConfig(command="constants", name="B1", json=True, out=str(tmp_path))
    assert run(config, stdout=stdout) == EXIT_OK
    assert json.loads(stdout.getvalue())["name"] == "B1"


def test_verify_command(tmp_path):
    out = tmp_path / "v"
    code = main(["verify", "--theorem", "1.1", "--grid", "1000,10000", "--threads", "2", "--out", str(out)])
    assert code == EXIT_OK
    lines = (out / "verify.csv").read_text().splitlines()
    assert lines[0] == ",".join(cli.moments.CSV_COLUMNS)
    assert len(lines) == 3


def test_ekac_command(tmp_path):
    out = tmp_path / "e"
    code = main(["ekac", "--set", "hfull", "--h", "2", "--f", "omegah", "--x", "50", "--out", str(out)])
    assert code == EXIT_OK
    assert len((out / "ekac.csv").read_text().splitlines()) == 10
    assert json.loads((out / "ekac.json").read_text())["samples"] == 9


def test_ekac_histogram(tmp_path):
    out = tmp_path / "hist"
    assert main(["ekac", "--set", "hfree", "--x", "1e4", "--histogram", "--out", str(out)]) == EXIT_OK
    lines = (out / "ekac.csv").read_text().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert len(lines) == dist.HISTOGRAM_BINS + 1


def test_density_command(tmp_path):
    out = tmp_path / "d"
    assert main(["density", "--set", "hfree", "--h", "3", "--k", "2", "--x", "10", "--out", str(out)]) == EXIT_OK
    report = json.loads((out / "density.json").read_text())
    assert (report["count_zero"], report["count_one"]) == (7, 2)


def test_lemmas_command(tmp_path):
    out = tmp_path / "l"
    assert main(["lemmas", "--x", "1000", "--q", "2,3", "--out", str(out)]) == EXIT_OK
    lines = (out / "lemmas.csv").read_text().splitlines()
    assert len(lines) == 1 + 1 + 2 + 2


# ─── Failures ──────────────────────────────────────────────────────────────────

def test_invalid_range_writes_nothing(tmp_path):
    out = tmp_path / "bad"
    assert main(["density", "--set", "hfree", "--h", "2", "--k", "2", "--x", "100", "--out", str(out)]) == EXIT_INVALID
    assert not out.exists()


def test_unknown_argument():
    assert main(["constants", "--name", "nope"]) == EXIT_INVALID
    assert main([]) == EXIT_INVALID


def test_over_budget(tmp_path):
    out = tmp_path / "big"
    assert main(["verify", "--set", "hfree", "--k", "1", "--grid", "1000,2e9", "--out", str(out)]) == EXIT_RESOURCES
    assert not out.exists()


def test_uncovered_combination_rejected(tmp_path):
    out = tmp_path / "u"
    assert main(["verify", "--set", "all", "--k", "1", "--order", "2", "--grid", "1000", "--out", str(out)]) == EXIT_INVALID


def test_failure_during_run_keeps_only_manifest(tmp_path, monkeypatch):
    def too_big(*args, **kwargs):
        raise CapacityError("out of memory budget")

    monkeypatch.setattr(dist, "density_counts", too_big)
    out = tmp_path / "f"
    assert main(["density", "--set", "hfull", "--h", "2", "--k", "3", "--x", "50", "--out", str(out)]) == EXIT_RESOURCES
    assert sorted(p.name for p in out.iterdir()) == ["run.json"]
    manifest = _manifest(out)
    assert manifest["status"] == "failed"
    assert manifest["error"].startswith("CapacityError")


@pytest.mark.slow
def test_selftest_command(tmp_path):
    out = tmp_path / "s"
    assert main(["selftest", "--limit", "1e4", "--out", str(out)]) == EXIT_OK
    assert json.loads((out / "selftest.json").read_text())["passed"] is True


def test_verify_output_independent_of_threads(tmp_path):
    outputs = []
    for threads in ("1", "8"):
        out = tmp_path / f"t{threads}"
        args = ["verify", "--set", "hfree", "--h", "2", "--k", "1", "--order", "2",
                "--grid", "1000,5000,20000", "--threads", threads, "--out", str(out)]
        assert main(args) == EXIT_OK
        outputs.append((out / "verify.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_verify_summary_reports_offset(tmp_path):
    out = tmp_path / "vs"
    assert main(["verify", "--theorem", "1.1", "--grid", "1000,10000", "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "verify.json").read_text())
    assert set(summary) == {"max_abs_normalized", "slope", "offset", "inversions", "within_bound", "bound"}
    assert summary["within_bound"] is (summary["max_abs_normalized"] <= summary["bound"])
    assert "verify.json" in _manifest(out)["artifacts"]


def test_unreachable_tolerance_is_over_budget(tmp_path):
    with pytest.raises(CapacityError):
        RunConfig(command="verify", theorem="1.1", grid=[1000], tol=1e-30).resolve()
    out = tmp_path / "tol"
    assert main(["verify", "--theorem", "1.1", "--grid", "1000", "--tol", "1e-30", "--out", str(out)]) == EXIT_RESOURCES
    assert not out.exists()


def test_fractional_k_rejected(tmp_path):
    out = tmp_path / "k"
    assert main(["constants", "--name", "eta", "--h", "2", "--k", "2.5", "--out", str(out)]) == EXIT_INVALID
    assert main(["constants", "--name", "F1", "--h", "3", "--k", "2.5", "--out", str(out)]) == EXIT_INVALID
    assert not out.exists()


@pytest.mark.parametrize("error, code", [
    (OSError("disk full"), EXIT_RESOURCES),
    (RuntimeError("worker died"), EXIT_INTERNAL),
])
def test_unexpected_error_keeps_only_manifest(tmp_path, monkeypatch, error, code):
    def broken(*args, **kwargs):
        raise error

    monkeypatch.setattr(dist, "ks_distance", broken)
    out = tmp_path / "x"
    assert main(["ekac", "--set", "hfree", "--x", "1000", "--out", str(out)]) == code
    assert sorted(p.name for p in out.iterdir()) == ["run.json"]
    manifest = _manifest(out)
    assert manifest["status"] == "failed"
    assert manifest["error"].startswith(type(error).__name__)


def test_failed_refinement_exits_with_checks_failed(tmp_path, monkeypatch):
    real = const.constant

    def shifted(name, cutoff=None, **params):
        b = real(name, cutoff=cutoff, **params)
        return ConstantBracket(b.lo + cutoff, b.hi + cutoff, cutoff=b.cutoff, name=b.name)

    monkeypatch.setattr(const, "constant", shifted)
    monkeypatch.setattr(selftest, "REFINEMENT_CUTOFFS", (10**4, 10**5))
    monkeypatch.setattr(selftest, "REFINEMENT_TARGETS", (("B1", {}),))
    out = tmp_path / "st"
    assert main(["selftest", "--limit", "1000", "--out", str(out)]) == EXIT_CHECKS_FAILED
    report = json.loads((out / "selftest.json").read_text())
    assert report["passed"] is False
    assert [c["name"] for c in report["checks"] if not c["passed"]] == ["refinement-B1"]
    assert _manifest(out)["status"] == "failed"
