import json

import numpy as np
import pytest

from rotns.config import SCHEMA, ConfigError, default_config, parse_config, parse_text


def test_defaults_round_trip():
    cfg = default_config()
    again = parse_text(cfg.to_text())
    assert again.values == cfg.values


def test_minimal_file_gives_defaults(tmp_path):
    p = tmp_path / "min.cfg"
    p.write_text("# nothing set\n\n")
    assert parse_config(p).values == default_config().values


def test_power_of_two_error():
    with pytest.raises(ConfigError) as exc:
        parse_text("grid.n = 12\n")
    assert any("power of two" in e for e in exc.value.errors)


def test_duplicate_key_cites_both_lines():
    with pytest.raises(ConfigError) as exc:
        parse_text("grid.n = 16\n# c\ngrid.n = 32\n")
    assert any("line 3" in e and "line 1" in e for e in exc.value.errors)


def test_every_error_collected():
    text = ("grid.n = 12\ntime.dt = -0.1\nbogus.key = 1\nnorms.list = 0:x\n"
            "dispersive.p = 1\ngap.factor = 2\nwholespace.family = cube\nmissing equals\n")
    with pytest.raises(ConfigError) as exc:
        parse_text(text)
    errs = " | ".join(exc.value.errors)
    for needle in ("power of two", "time.dt", "unknown key", "norms.list", "dispersive.p",
                   "gap.factor", "wholespace", "line 8"):
        assert needle in errs


@pytest.mark.parametrize("line", [
    "time.dt = -1", "time.t_end = 0.15\ntime.dt = 0.1", "integrator.scheme = rk4",
    "data.amplitude = 0", "data.length_scale = 5", "data.s = 0.95", "wholespace.sigma = 0",
    "quadrature.n_radial = 2", "quadrature.tail = 2", "wholespace.times = 5:1:10",
    "fit.windows = late=3:1", "fit.tolerance = -1", "dispersive.sign = 0", "dispersive.cap_width = 0",
    "scaling.lambda = 0", "integrator.cfl = 0", "time.snapshot_stride = 0", "norms.list = -1:2",
    "norms.list = 0:0.5", "physics.omega = nan",
])
def test_precondition_violations_caught(line):
    with pytest.raises(ConfigError):
        parse_text(line + "\n")


def test_manifest_accepted(tmp_path):
    cfg = parse_text("grid.n = 64\nnorms.list = 0:2, 1:inf\nfit.windows = early=0.01:0.1\n")
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps({"config": cfg.echo()}))
    again = parse_config(p)
    assert again.values == cfg.values
    assert again["norms.list"] == ((0.0, 2.0), (1.0, np.inf))


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/x.cfg")


def test_typed_views():
    cfg = parse_text("wholespace.times = 1:10:5, 20:40:3\ndata.kind = rough-sobolev\n")
    assert len(cfg.times()) == 8
    assert cfg.data_spec().sobolev_index == 0.7
    assert cfg.tolerances() == {2.0: 0.05, "other": 0.1}
    assert set(cfg.echo()) == set(SCHEMA)
