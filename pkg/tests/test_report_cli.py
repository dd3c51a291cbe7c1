import csv
import json

import numpy as np
import pytest

from rotns.cli import run_command
from rotns.report import PARTIAL_MARKER, ReportError, ReportWriter, RunManifest, fmt, verify_digests

SMALL = ("grid.n = 16\nphysics.omega = 2.0\ntime.dt = 0.01\ntime.t_end = 0.1\n"
         "time.snapshot_stride = 5\ndata.amplitude = 0.3\ndata.length_scale = 0.7\n")


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17):
        assert float(fmt(x)) == x
    assert fmt(np.inf) == "inf" and fmt(3) == "3"


def test_writer_digests_and_csv_dialect(tmp_path):
    w = ReportWriter(tmp_path / "o", RunManifest("test", {}))
    w.csv("a.csv", ["t", "v"], [(0.5, 1 / 3), (1.0, np.inf)])
    w.json("fits.json", {"x": np.float64(np.nan)})
    w.finish()
    raw = (tmp_path / "o" / "a.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"t,v\n")
    assert all(verify_digests(tmp_path / "o").values())
    assert json.loads((tmp_path / "o" / "fits.json").read_text())["x"] == "nan"


def test_writer_partial_marker(tmp_path):
    w = ReportWriter(tmp_path / "o", RunManifest("test", {}))
    w.csv("ok.csv", ["a"], [(1,)])
    (tmp_path / "o" / "dir.csv").mkdir()
    with pytest.raises(ReportError):
        w.csv("dir.csv", ["a"], [(1,)])
    marker = json.loads((tmp_path / "o" / PARTIAL_MARKER).read_text())
    assert marker["completed"] == ["ok.csv"]


def test_simulate_outputs(small_cfg, tmp_path, capsys):
    out = tmp_path / "run"
    assert run_command(["simulate", "--config", str(small_cfg), "--output", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert {"norms.csv", "energy.csv", "fits.json", "manifest.json", "snapshots", "plot_energy.dat"} <= names
    rows = list(csv.reader(open(out / "energy.csv")))
    assert rows[0] == ["t", "kinetic", "dissipated", "drift"] and len(rows) == 12
    man = json.loads((out / "manifest.json").read_text())
    assert man["smallness"]["value"] > 0 and "snapshots/000010.cnsf" in man["outputs"]
    assert all(verify_digests(out).values())
    json.loads(capsys.readouterr().out)


def test_empty_norm_schedule_gives_header_only(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(SMALL + "norms.list =\n")
    out = tmp_path / "run"
    assert run_command(["simulate", "--config", str(cfg), "--output", str(out)]) == 0
    assert (out / "norms.csv").read_text() == "t,m,p,value\n"


def test_rerun_from_manifest_is_byte_identical(small_cfg, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_command(["simulate", "--config", str(small_cfg), "--output", str(a), "--seed", "4"]) == 0
    assert run_command(["simulate", "--config", str(a / "manifest.json"), "--output", str(b), "--threads", "3"]) == 0
    for name in ("norms.csv", "energy.csv", "fits.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_exit_codes(tmp_path, capsys):
    assert run_command(["simulate"]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert json.loads(err[-1])["error"] == "validation"
    bad = tmp_path / "bad.cfg"
    bad.write_text("grid.n = 12\n")
    assert run_command(["simulate", "--config", str(bad)]) == 1
    assert run_command(["nonsense"]) == 1
    blow = tmp_path / "blow.cfg"
    blow.write_text(SMALL.replace("data.amplitude = 0.3", "data.amplitude = 1000"))
    assert run_command(["simulate", "--config", str(blow), "--output", str(tmp_path / "b")]) == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "numerical"


def test_info_and_invariants(capsys):
    assert run_command(["info"]) == 0
    out = capsys.readouterr().out
    assert "rotns" in out and "grid.n = 32" in out
    assert run_command(["check-invariants"]) == 0
    assert "12/12 invariants passed" in capsys.readouterr().out


def test_fit_and_gen_data(small_cfg, tmp_path):
    out = tmp_path / "sim"
    assert run_command(["simulate", "--config", str(small_cfg), "--output", str(out)]) == 0
    assert run_command(["fit", "--config", str(small_cfg), "--output", str(tmp_path / "f"),
                        "--input", str(out / "norms.csv")]) == 0
    assert json.loads((tmp_path / "f" / "fits.json").read_text())["fits"][0]["note"]  # window too short
    assert run_command(["fit", "--config", str(small_cfg), "--output", str(tmp_path / "g")]) == 1
    assert run_command(["gen-data", "--config", str(small_cfg), "--output", str(tmp_path / "d")]) == 0
    assert (tmp_path / "d" / "initial.cnsf").is_file()


def test_whole_space_commands(tmp_path):
    cfg = tmp_path / "w.cfg"
    cfg.write_text("physics.omega = 0\nwholespace.family = gaussian-divfree\nwholespace.times = 10:100:12\n")
    out = tmp_path / "lin"
    assert run_command(["moment-decay", "--config", str(cfg), "--output", str(out)]) == 0
    rows = list(csv.reader(open(out / "moment-decay.csv")))
    assert rows[0] == ["t", "m", "p", "omega", "norm", "envelope", "ratio"] and len(rows) == 13
    fits = json.loads((out / "fits.json").read_text())
    assert fits["passed"]
    assert run_command(["vanishing-limit", "--config", str(cfg), "--output", str(tmp_path / "v")]) == 0
    assert json.loads((tmp_path / "v" / "fits.json").read_text())["verdict"] == "vanishing"
    dcfg = tmp_path / "d.cfg"
    dcfg.write_text("dispersive.p = 2\ndispersive.taus = 10:100:5\n")
    assert run_command(["dispersive", "--config", str(dcfg), "--output", str(tmp_path / "d")]) == 0
    rows = list(csv.reader(open(tmp_path / "d" / "dispersive.csv")))
    assert rows[0] == ["tau", "k", "p", "norm", "bound"]


def test_scaling_and_gap_commands(small_cfg, tmp_path):
    assert run_command(["scaling-check", "--config", str(small_cfg), "--output", str(tmp_path / "s")]) == 0
    assert json.loads((tmp_path / "s" / "fits.json").read_text())["passed"]
    assert run_command(["gap", "--config", str(small_cfg), "--output", str(tmp_path / "g")]) == 0
    rows = list(csv.reader(open(tmp_path / "g" / "gap.csv")))
    assert rows[0] == ["t", "gap"]
