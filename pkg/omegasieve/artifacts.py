"""
omegasieve/artifacts.py
Deterministic CSV/JSON output and the run manifest.
Every artifact is recorded in run.json with its size and SHA-256; if the run
fails, the artifacts it wrote are removed and run.json records the failure.
"""

import csv
import io
import json
import math
from pathlib import Path

from cryptography.hazmat.primitives import hashes

from omegasieve import __version__
from omegasieve.run_log import log_event, log_warning

MANIFEST_NAME = "run.json"
SIGNIFICANT_DIGITS = 15


# ─── Manifest Format ───────────────────────────────────────────────────────────
# {
#   "version": "1.0.0",
#   "status": "ok" | "failed",
#   "error": null | "DomainError: ...",
#   "config": {...RunConfig...},
#   "wall_seconds": 1.23,
#   "constants": {"C1(h=2)": {"lo": ..., "hi": ..., "width": ...}, ...},
#   "artifacts": {"verify.csv": {"size_bytes": 512, "sha256": "ab12..."}}
# }


def integrity_hash(data: bytes) -> str:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def format_value(value) -> str:
    """Locale-free text for one CSV cell; floats at 15 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if value is None:
        return ""
    return str(getattr(value, "value", value))


def csv_bytes(columns, rows) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row[c]) for c in columns])
    return buf.getvalue().encode("utf-8")


def json_bytes(payload) -> bytes:
    return (json.dumps(payload, indent=2, allow_nan=True) + "\n").encode("utf-8")


class ArtifactWriter:
    """Writes run outputs under one directory and keeps their digests for run.json."""

    def __init__(self, out_dir: Path):
        self._out_dir = Path(out_dir)
        self._entries: dict[str, dict] = {}

    @property
    def out_dir(self) -> Path:
        return self._out_dir

    @property
    def entries(self) -> dict[str, dict]:
        return dict(self._entries)

    def _write(self, name: str, data: bytes) -> Path:
        path = self._out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
        self._entries[name] = {"size_bytes": len(data), "sha256": integrity_hash(data)}
        log_event("ARTIFACT_WRITTEN", f"path={path} bytes={len(data)}")
        return path

    def write_csv(self, name: str, columns, rows) -> Path:
        return self._write(name, csv_bytes(columns, rows))

    def write_json(self, name: str, payload) -> Path:
        return self._write(name, json_bytes(payload))

    def discard(self):
        """Remove every artifact written so far (a failed run leaves only run.json)."""
        for name in list(self._entries):
            path = self._out_dir / name
            try:
                path.unlink()
            except FileNotFoundError:
                pass
            except OSError as e:
                log_warning("ARTIFACT_REMOVE_FAILED", f"path={path} error={e}")
            del self._entries[name]

    def write_manifest(self, config: dict, status: str, wall_seconds: float,
                       constants: dict | None = None, error: str | None = None) -> Path:
        manifest = {
            "version": __version__,
            "status": status,
            "error": error,
            "config": config,
            "wall_seconds": round(wall_seconds, 3),
            "constants": {
                name: {"lo": b.lo, "hi": b.hi, "width": b.width, "cutoff": b.cutoff}
                for name, b in sorted((constants or {}).items())
            },
            "artifacts": self.entries,
        }
        self._out_dir.mkdir(parents=True, exist_ok=True)
        path = self._out_dir / MANIFEST_NAME
        path.write_bytes(json_bytes(manifest))
        return path


def verify_manifest(out_dir: Path) -> list[str]:
    """Names of artifacts whose bytes no longer match run.json (missing ones included)."""
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / MANIFEST_NAME).read_text(encoding="utf-8"))
    bad = []
    for name, meta in manifest.get("artifacts", {}).items():
        path = out_dir / name
        if not path.exists() or integrity_hash(path.read_bytes()) != meta["sha256"]:
            log_warning("INTEGRITY_CHECK_FAILED", f"path={path}")
            bad.append(name)
    return bad
