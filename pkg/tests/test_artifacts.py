import json

from omegasieve import __version__
from omegasieve.artifacts import ArtifactWriter, csv_bytes, format_value, integrity_hash, verify_manifest
from omegasieve.bracket import ConstantBracket


def test_format_value():
    assert format_value(3) == "3"
    assert format_value(True) == "true"
    assert format_value(float("nan")) == "nan"
    assert format_value(float("-inf")) == "-inf"
    assert format_value(1 / 3) == "0.333333333333333"
    assert format_value(None) == ""


def test_csv_is_deterministic():
    rows = [{"x": 1000, "r": 0.5}, {"x": 2000, "r": -1.25}]
    assert csv_bytes(("x", "r"), rows) == b"x,r\n1000,0.5\n2000,-1.25\n"


def test_integrity_hash():
    assert integrity_hash(b"") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_manifest_records_artifacts(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_csv("verify.csv", ("x",), [{"x": 1}])
    writer.write_json("nested/summary.json", {"ok": True})
    bracket = ConstantBracket(1.0, 1.5, cutoff=10**4, name="C1(h=2)")
    writer.write_manifest({"command": "verify"}, "ok", 0.25, constants={"C1(h=2)": bracket})

    manifest = json.loads((tmp_path / "run.json").read_text())
    assert manifest["version"] == __version__
    assert manifest["status"] == "ok"
    assert set(manifest["artifacts"]) == {"verify.csv", "nested/summary.json"}
    assert manifest["constants"]["C1(h=2)"]["width"] == 0.5
    assert verify_manifest(tmp_path) == []


def test_tampering_detected(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_json("density.json", {"count_zero": 7})
    writer.write_manifest({}, "ok", 0.0)
    (tmp_path / "density.json").write_text('{"count_zero": 8}\n')
    assert verify_manifest(tmp_path) == ["density.json"]


def test_discard_leaves_only_manifest(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_csv("ekac.csv", ("r",), [{"r": 0.1}])
    writer.discard()
    writer.write_manifest({}, "failed", 0.0, error="CapacityError: too big")
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run.json"]
    manifest = json.loads((tmp_path / "run.json").read_text())
    assert manifest["artifacts"] == {}
    assert manifest["error"].startswith("CapacityError")
