"""Run outputs: CSV series, fits.json, plot-data files and manifest.json.

Floats are written with 17 significant digits so a rerun can be compared byte
for byte. Every emitted file is hashed into the manifest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__

PARTIAL_MARKER = "PARTIAL"


class ReportError(OSError):
    pass


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _clean(obj):
    """inf/nan are not JSON; write them as strings."""
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


@dataclass
class RunManifest:
    command: str
    config: dict
    code_version: str = __version__
    grid: dict | None = None
    integrator: dict | None = None
    datum: dict | None = None
    smallness: dict | None = None
    outputs: dict = field(default_factory=dict)  # relative path -> sha256
    timings: dict = field(default_factory=dict)  # seconds per stage
    environment: dict = field(default_factory=lambda: {
        "python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__})

    def as_dict(self) -> dict:
        return _clean({k: v for k, v in self.__dict__.items()})


class ReportWriter:
    """Writes into one output directory and keeps the digest list.

    If a write fails, a PARTIAL marker naming the completed files is left.
    """

    def __init__(self, out_dir, manifest: RunManifest):
        self.out_dir = Path(out_dir)
        self.manifest = manifest
        self.written: list[str] = []
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ReportError(f"cannot create output directory {self.out_dir}: {exc}") from exc
        marker = self.out_dir / PARTIAL_MARKER
        if marker.exists():
            marker.unlink()

    def _record(self, path: Path):
        rel = path.relative_to(self.out_dir).as_posix()
        self.written.append(rel)
        self.manifest.outputs[rel] = sha256_file(path)

    def _fail(self, exc: Exception, name: str):
        try:
            (self.out_dir / PARTIAL_MARKER).write_text(
                json.dumps({"failed": name, "error": str(exc), "completed": self.written}) + "\n")
        except OSError:
            pass
        raise ReportError(f"failed writing {name}: {exc}") from exc

    def csv(self, name: str, header, rows) -> Path:
        path = self.out_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(header)
                for row in rows:
                    w.writerow([fmt(v) for v in row])
        except OSError as exc:
            self._fail(exc, name)
        self._record(path)
        return path

    def plot_data(self, name: str, header, rows, title: str = "") -> Path:
        """Whitespace-separated columns with a '#' header, ready for gnuplot or numpy.loadtxt."""
        path = self.out_dir / name
        try:
            with open(path, "w", encoding="utf-8") as fh:
                if title:
                    fh.write(f"# {title}\n")
                fh.write("# " + " ".join(header) + "\n")
                for row in rows:
                    fh.write(" ".join(fmt(v) for v in row) + "\n")
        except OSError as exc:
            self._fail(exc, name)
        self._record(path)
        return path

    def json(self, name: str, obj) -> Path:
        path = self.out_dir / name
        try:
            path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True, default=_json_default) + "\n",
                            encoding="utf-8")
        except OSError as exc:
            self._fail(exc, name)
        self._record(path)
        return path

    def blob(self, name: str, data: bytes) -> Path:
        path = self.out_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as exc:
            self._fail(exc, name)
        self._record(path)
        return path

    def finish(self) -> Path:
        """manifest.json last, so its digests cover every other file."""
        path = self.out_dir / "manifest.json"
        try:
            path.write_text(json.dumps(self.manifest.as_dict(), indent=2, sort_keys=True,
                                       default=_json_default) + "\n", encoding="utf-8")
        except OSError as exc:
            self._fail(exc, "manifest.json")
        return path


def verify_digests(out_dir) -> dict:
    """Map of file -> True/False comparing manifest digests with the files on disk."""
    out_dir = Path(out_dir)
    man = json.loads((out_dir / "manifest.json").read_text())
    result = {}
    for rel, digest in man["outputs"].items():
        p = out_dir / rel
        result[rel] = p.is_file() and sha256_file(p) == digest
    return result


# ---------------------------------------------------------------- standard tables


def norm_rows(norms: dict):
    """(t, m, p, value) rows from a {(m, p): NormSeries} dict."""
    for (m, p), s in norms.items():
        for t, v in zip(s.times, s.values):
            yield t, m, p, v


def energy_rows(ledger):
    drift = ledger.drift
    for t, k, d, e in zip(ledger.times, ledger.kinetic, ledger.dissipated, drift):
        yield t, k, d, e
