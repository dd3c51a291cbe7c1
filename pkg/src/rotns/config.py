"""Flat `section.key = value` configuration files.

Grammar: one assignment per line, `#` starts a comment, blank lines ignored.
Every problem in a file is collected before anything is reported. A
manifest.json written by a previous run is accepted in place of a config file.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import GridSpec
from .initial_data import DATA_KINDS, InitialDataSpec
from .series import format_exponent, parse_exponent
from .solver import SCHEMES, IntegratorConfig
from .wholespace.data import FAMILIES, WholeSpaceDatum
from .wholespace.quadrature import QuadratureSpec


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


def _int(text):
    v = int(text, 10)
    return v


def _float(text):
    v = float(text)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _exponent(text):
    p = parse_exponent(text)
    if math.isnan(p):
        raise ValueError("nan")
    return p


def _norm_list(text):
    """'0:2, 0:inf, 1:4' -> ((0.0, 2.0), (0.0, inf), (1.0, 4.0))."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        m, p = item.split(":")
        out.append((_float(m), _exponent(p)))
    return tuple(out)


def _time_grid(text):
    """'lo:hi:count, ...' -> log-spaced segments."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        lo, hi, count = item.split(":")
        out.append((_float(lo), _float(hi), _int(count)))
    return tuple(out)


def _windows(text):
    """'early=0.003:0.03, late=1:10' -> {'early': (0.003, 0.03), ...}; empty means automatic."""
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, span = item.split("=")
        lo, hi = span.split(":")
        out[name.strip()] = (_float(lo), _float(hi))
    return out


def _str(text):
    return text.strip()


# key -> (parser, default text, description)
SCHEMA = {
    "grid.n": (_int, "32", "points per axis, a power of two >= 8"),
    "grid.box_length": (_float, "6.283185307179586", "periodic box side L"),
    "physics.omega": (_float, "1.0", "rotation speed"),
    "time.dt": (_float, "0.001", "step size"),
    "time.t_end": (_float, "0.1", "final time, a multiple of dt"),
    "time.snapshot_stride": (_int, "10", "steps between stored snapshots and norm samples"),
    "integrator.scheme": (_str, "etd2rk", f"one of {', '.join(SCHEMES)}"),
    "integrator.cfl": (_float, "0.5", "advective CFL number"),
    "data.kind": (_str, "gaussian-divfree", f"one of {', '.join(DATA_KINDS)}"),
    "data.seed": (_int, "0", "random seed (rough-sobolev and random coefficients)"),
    "data.amplitude": (_float, "0.1", "amplitude (RMS for rough-sobolev)"),
    "data.length_scale": (_float, "0.5", "bump width, below box_length/8"),
    "data.s": (_float, "0.7", "Sobolev index for rough-sobolev data, in (1/2, 9/10)"),
    "norms.list": (_norm_list, "0:2", "derivative order and exponent pairs m:p"),
    "fit.windows": (_windows, "", "name=lo:hi pairs; empty picks early/late from the time grid"),
    "fit.tolerance_l2": (_float, "0.05", "slope tolerance for p = 2 fits"),
    "fit.tolerance": (_float, "0.1", "slope tolerance for other fits"),
    "quadrature.n_radial": (_int, "128", "radial Gauss nodes (floor)"),
    "quadrature.n_polar": (_int, "64", "polar Gauss nodes (floor)"),
    "quadrature.n_azimuth": (_int, "64", "azimuthal nodes (floor)"),
    "quadrature.tail": (_float, "1e-14", "relative size of the neglected Gaussian tail"),
    "wholespace.family": (_str, "projected-gaussian", f"one of {', '.join(FAMILIES)}"),
    "wholespace.sigma": (_float, "0.1", "Gaussian width of the whole-space datum"),
    "wholespace.amplitude": (_float, "1.0", "amplitude of the whole-space datum"),
    "wholespace.times": (_time_grid, "10:1000:20", "lo:hi:count log-spaced segments"),
    "dispersive.block": (_int, "0", "dyadic block index k"),
    "dispersive.cap_width": (_float, "0.3", "angular width of the polar cap"),
    "dispersive.p": (_exponent, "inf", "Lebesgue exponent, >= 2"),
    "dispersive.sign": (_int, "1", "+1 or -1"),
    "dispersive.taus": (_time_grid, "10:1000:20", "lo:hi:count log-spaced segments"),
    "scaling.lambda": (_float, "2.0", "dilation factor for the scaling check"),
    "gap.factor": (_float, "0.5", "amplitude factor for the gap scaling pair"),
    "output.dir": (_str, "out", "output directory"),
}


def _format(value) -> str:
    if isinstance(value, float):
        return format_exponent(value) if math.isinf(value) else repr(value)
    if isinstance(value, dict):
        return ", ".join(f"{k}={_format(a)}:{_format(b)}" for k, (a, b) in value.items())
    if isinstance(value, tuple):
        return ", ".join(":".join(_format(x) for x in item) for item in value)
    return str(value)


@dataclass
class ExperimentConfig:
    values: dict
    source: str = "<defaults>"
    explicit: set = field(default_factory=set)

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **pairs) -> "ExperimentConfig":
        vals = dict(self.values)
        for k, v in pairs.items():
            vals[k.replace("__", ".")] = v
        cfg = ExperimentConfig(vals, self.source, set(self.explicit))
        errs = validate(cfg)
        if errs:
            raise ConfigError(errs)
        return cfg

    # typed views for the owning modules
    def grid(self) -> GridSpec:
        return GridSpec(self["grid.n"], self["grid.box_length"])

    def integrator(self, norms=True) -> IntegratorConfig:
        return IntegratorConfig(self["integrator.scheme"], self["time.dt"], self["time.t_end"],
                                self["time.snapshot_stride"], self["norms.list"] if norms else (),
                                self["integrator.cfl"])

    def data_spec(self) -> InitialDataSpec:
        s = self["data.s"] if self["data.kind"] == "rough-sobolev" else None
        return InitialDataSpec(self["data.kind"], self["data.seed"], self["data.amplitude"],
                               self["data.length_scale"], s)

    def datum(self) -> WholeSpaceDatum:
        return WholeSpaceDatum(self["wholespace.family"], self["wholespace.sigma"],
                               self["wholespace.amplitude"])

    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(self["quadrature.n_radial"], self["quadrature.n_polar"],
                              self["quadrature.n_azimuth"], self["quadrature.tail"])

    def times(self, key: str = "wholespace.times") -> np.ndarray:
        return np.concatenate([np.geomspace(lo, hi, n) for lo, hi, n in self[key]])

    def tolerances(self) -> dict:
        return {2.0: self["fit.tolerance_l2"], "other": self["fit.tolerance"]}

    @property
    def output_dir(self) -> Path:
        return Path(self["output.dir"])

    def echo(self) -> dict:
        """Every key with its canonical text; parse_config accepts this back."""
        return {k: _format(self.values[k]) for k in SCHEMA}

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.echo().items())


def default_config() -> ExperimentConfig:
    return ExperimentConfig({k: parser(text) for k, (parser, text, _) in SCHEMA.items()})


def validate(cfg: ExperimentConfig) -> list[str]:
    """Preconditions of the owning modules, all collected."""
    errs = []
    v = cfg.values
    grid = None
    try:
        grid = cfg.grid()
    except ValueError as exc:
        errs.append(str(exc))
    errs += cfg.integrator().validate()
    if not v["integrator.cfl"] > 0:
        errs.append("integrator.cfl must be positive")
    errs += cfg.data_spec().validate(grid)
    if v["data.kind"] != "rough-sobolev" and not 0.5 < v["data.s"] < 0.9:
        errs.append(f"data.s must lie in (1/2, 9/10), got {v['data.s']}")
    try:
        cfg.datum()
    except ValueError as exc:
        errs.append(f"wholespace: {exc}")
    if not v["wholespace.amplitude"] > 0:
        errs.append("wholespace.amplitude must be positive")
    errs += cfg.quadrature().validate()
    for key in ("wholespace.times", "dispersive.taus"):
        for lo, hi, n in v[key]:
            if not (0 < lo < hi) or n < 2:
                errs.append(f"{key} segment {lo}:{hi}:{n} needs 0 < lo < hi and count >= 2")
    for name, (lo, hi) in v["fit.windows"].items():
        if not 0 < lo < hi:
            errs.append(f"fit.windows {name} needs 0 < lo < hi")
    for key in ("fit.tolerance_l2", "fit.tolerance"):
        if not v[key] > 0:
            errs.append(f"{key} must be positive")
    if v["dispersive.p"] < 2:
        errs.append(f"dispersive.p must be >= 2, got {v['dispersive.p']}")
    if v["dispersive.sign"] not in (1, -1):
        errs.append("dispersive.sign must be +1 or -1")
    if not v["dispersive.cap_width"] > 0:
        errs.append("dispersive.cap_width must be positive")
    if not v["scaling.lambda"] > 0:
        errs.append("scaling.lambda must be positive")
    if not 0 < v["gap.factor"] < 1:
        errs.append("gap.factor must lie in (0, 1)")
    if not v["output.dir"]:
        errs.append("output.dir must not be empty")
    return errs


def _parse_pairs(pairs, source: str) -> ExperimentConfig:
    """pairs: iterable of (line_no, key, text)."""
    errs = []
    seen: dict = {}
    cfg = default_config()
    cfg.source = source
    for line_no, key, text in pairs:
        if key in seen:
            errs.append(f"line {line_no}: duplicate key {key!r} (first set on line {seen[key]})")
            continue
        seen[key] = line_no
        if key not in SCHEMA:
            errs.append(f"line {line_no}: unknown key {key!r}")
            continue
        parser = SCHEMA[key][0]
        try:
            cfg.values[key] = parser(text)
            cfg.explicit.add(key)
        except (ValueError, TypeError) as exc:
            errs.append(f"line {line_no}: {key} = {text!r} is not valid ({SCHEMA[key][2]}): {exc}")
    errs += validate(cfg)  # constraint checks run on whatever parsed, so all problems surface
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_text(text: str, source: str = "<string>") -> ExperimentConfig:
    pairs, errs = [], []
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errs.append(f"line {i}: expected 'section.key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if "." not in key:
            errs.append(f"line {i}: key {key!r} must have the form section.key")
            continue
        pairs.append((i, key, value))
    try:
        cfg = _parse_pairs(pairs, source)
    except ConfigError as exc:
        raise ConfigError(errs + exc.errors) from None
    if errs:
        raise ConfigError(errs)
    return cfg


def parse_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"config file not found: {path}"])
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
            echo = doc["config"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError([f"{path}: not a run manifest ({exc})"]) from None
        pairs = [(i + 1, k, str(v)) for i, (k, v) in enumerate(echo.items())]
        return _parse_pairs(pairs, str(path))
    return parse_text(text, str(path))
