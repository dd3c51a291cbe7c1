"""Command-line entry point: `rotns <subcommand> --config FILE [--output DIR]`.

Exit codes: 0 success, 1 validation error, 2 numerical failure, 3 a failed
check in check-invariants. Errors are also written to stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
import time
from pathlib import Path

import numpy as np
import scipy.fft as sfft

from . import __version__
from .config import ConfigError, ExperimentConfig, default_config, parse_config
from .decay import (DegenerateWindowError, Envelope, FitCheck, dispersive_experiment, envelope_eval,
                    expected_slope, fit_rate, gap_scaling, linear_decay_experiment,
                    moment_decay_experiment, nonlinear_vs_linear_gap, ratio_track, regime_windows,
                    vanishing_limit_check, whole_space_norms)
from .initial_data import generate_initial_data, moments
from .report import ReportError, ReportWriter, RunManifest, _clean, _json_default, energy_rows, norm_rows
from .series import NormSeries, parse_exponent
from .snapshot import encode_snapshot
from .solver import SimulationError, scaling_check, simulate, smallness_check
from .wholespace.quadrature import QuadratureError

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_ASSERTION = 0, 1, 2, 3

COMPUTE_COMMANDS = ("simulate", "linear-decay", "moment-decay", "dispersive", "vanishing-limit",
                    "scaling-check", "gap", "fit", "gen-data")
COMMANDS = COMPUTE_COMMANDS + ("check-invariants", "info")


class AssertionFailure(Exception):
    pass


def _emit_error(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)


@contextlib.contextmanager
def _thread_limit(threads: int | None):
    """FFT workers follow the hint; BLAS stays single-threaded so reductions keep one order."""
    from threadpoolctl import threadpool_limits
    workers = max(1, int(threads or 1))
    with threadpool_limits(limits=1, user_api="blas"), sfft.set_workers(workers):
        yield


def _manifest(cmd: str, cfg: ExperimentConfig) -> RunManifest:
    return RunManifest(command=cmd, config=cfg.echo())


def _torus_fields(man: RunManifest, cfg: ExperimentConfig, u0=None):
    grid = cfg.grid()
    man.grid = {"n": grid.n, "box_length": grid.box_length}
    it = cfg.integrator()
    man.integrator = {"scheme": it.scheme, "dt": it.dt, "t_end": it.t_end,
                      "snapshot_stride": it.snapshot_stride, "cfl": it.cfl}
    spec = cfg.data_spec()
    man.datum = {"kind": spec.kind, "seed": spec.seed, "amplitude": spec.amplitude,
                 "length_scale": spec.length_scale, "s": spec.sobolev_index}
    if u0 is not None and cfg["physics.omega"] != 0:
        rep = smallness_check(u0, cfg["data.s"], cfg["physics.omega"])
        man.smallness = {"value": rep.value, "s": rep.s, "omega": rep.omega, "note": rep.threshold_note}


def _wholespace_fields(man: RunManifest, cfg: ExperimentConfig):
    d = cfg.datum()
    man.datum = {"family": d.family, "sigma": d.sigma, "amplitude": d.amplitude}


# ---------------------------------------------------------------- drivers


def cmd_simulate(cfg, out):
    man = _manifest("simulate", cfg)
    t0 = time.perf_counter()
    u0 = generate_initial_data(cfg.data_spec(), cfg.grid())
    _torus_fields(man, cfg, u0)
    man.timings["initial_data"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    rec = simulate(u0, cfg["physics.omega"], cfg.integrator(), raise_on_failure=False)
    man.timings["simulate"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    w.csv("norms.csv", ["t", "m", "p", "value"], norm_rows(rec.norms))
    w.csv("energy.csv", ["t", "kinetic", "dissipated", "drift"], energy_rows(rec.energy))
    for t, snap in zip(rec.snapshot_times, rec.snapshots):
        idx = int(round(t / cfg["time.dt"]))
        w.blob(f"snapshots/{idx:06d}.cnsf", encode_snapshot(snap, t, cfg["physics.omega"]))
    w.plot_data("plot_energy.dat", ["t", "kinetic", "dissipated", "drift"], energy_rows(rec.energy),
                "energy ledger")
    drift = float(np.max(np.abs(rec.energy.drift)))
    w.json("fits.json", {"experiment": "simulate", "max_energy_drift": drift,
                         "completed": rec.failure is None})
    w.finish()
    if rec.failure is not None:
        raise rec.failure
    return {"max_energy_drift": drift, "steps": len(rec.energy.times) - 1}


def _decay_outputs(w, exp, name, cfg):
    omega = exp.omega
    rows = []
    for (m, p), s in exp.series.items():
        env = envelope_eval(Envelope(m, max(p, 2.0), exp.j, omega), s.times)
        ratio = ratio_track(s, m, p, exp.j, omega).values
        rows += [(t, m, p, omega, v, e, r) for t, v, e, r in zip(s.times, s.values, env, ratio)]
    header = ["t", "m", "p", "omega", "norm", "envelope", "ratio"]
    w.csv(f"{name}.csv", header, rows)
    w.plot_data(f"plot_{name}.dat", header, rows, f"{name}: norm, envelope and running ratio")
    checks = [c.as_dict() for c in exp.checks]
    w.json("fits.json", {"experiment": name, "fits": checks, "passed": exp.passed()})
    return checks


def cmd_linear_decay(cfg, out, moment=False):
    name = "moment-decay" if moment else "linear-decay"
    man = _manifest(name, cfg)
    _wholespace_fields(man, cfg)
    fn = moment_decay_experiment if moment else linear_decay_experiment
    t0 = time.perf_counter()
    exp = fn(cfg.datum(), cfg["physics.omega"], cfg["norms.list"], cfg.times(),
             cfg["fit.windows"] or None, cfg.tolerances(), cfg.quadrature())
    man.timings["experiment"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    checks = _decay_outputs(w, exp, name, cfg)
    w.finish()
    return {"fits": checks}


def cmd_dispersive(cfg, out):
    man = _manifest("dispersive", cfg)
    man.datum = {"profile": "polar cap", "block": cfg["dispersive.block"],
                 "cap_width": cfg["dispersive.cap_width"]}
    p = cfg["dispersive.p"]
    t0 = time.perf_counter()
    exp = dispersive_experiment(cfg["dispersive.block"], cfg.times("dispersive.taus"), p,
                                cfg["dispersive.cap_width"], cfg["dispersive.sign"],
                                cfg["fit.windows"].get("tau"),
                                cfg.tolerances().get(p, cfg["fit.tolerance"]))
    man.timings["experiment"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    rows = [(t, cfg["dispersive.block"], p, v, b)
            for t, v, b in zip(exp.series.times, exp.series.values, exp.bound)]
    header = ["tau", "k", "p", "norm", "bound"]
    w.csv("dispersive.csv", header, rows)
    w.plot_data("plot_dispersive.dat", header, rows, "dispersive decay on one dyadic block")
    res = {"experiment": "dispersive", "p": p, "block_scaling_ratio": exp.scaling_ratio,
           "l2_deviation": exp.l2_deviation}
    if exp.check is not None:
        res["fit"] = exp.check.as_dict()
        res["passed"] = exp.check.passed
    else:
        res["passed"] = bool(exp.l2_deviation <= 1e-10)
    w.json("fits.json", res)
    w.finish()
    return res


def cmd_vanishing_limit(cfg, out):
    man = _manifest("vanishing-limit", cfg)
    _wholespace_fields(man, cfg)
    m, p = cfg["norms.list"][0]
    omega = cfg["physics.omega"]
    t0 = time.perf_counter()
    series = whole_space_norms(cfg.datum(), omega, [(m, p)], cfg.times(), cfg.quadrature())[(m, p)]
    rep = vanishing_limit_check(series, m, p, omega)
    man.timings["experiment"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    rows = list(zip(rep.times, rep.compensated))
    w.csv("vanishing-limit.csv", ["t", "compensated"], rows)
    w.plot_data("plot_vanishing-limit.dat", ["t", "compensated"], rows, "compensated norm")
    res = {"experiment": "vanishing-limit", "m": m, "p": p, "verdict": rep.verdict,
           "monotone": rep.monotone, "relative_drop": rep.relative_drop, "window": rep.window}
    w.json("fits.json", res)
    w.finish()
    return res


def cmd_scaling_check(cfg, out):
    man = _manifest("scaling-check", cfg)
    u0 = generate_initial_data(cfg.data_spec(), cfg.grid())
    _torus_fields(man, cfg, u0)
    t0 = time.perf_counter()
    rep = scaling_check(u0, cfg["physics.omega"], cfg.integrator(norms=False), cfg["scaling.lambda"])
    man.timings["experiment"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    w.csv("scaling.csv", ["lambda", "t_end", "scaled_t_end", "relative_difference"],
          [(rep.lam, rep.final_time, rep.scaled_final_time, rep.relative_difference)])
    res = {"experiment": "scaling-check", "relative_difference": rep.relative_difference,
           "tolerance": 1e-10, "passed": rep.relative_difference <= 1e-10}
    w.json("fits.json", res)
    w.finish()
    return res


def cmd_gap(cfg, out):
    man = _manifest("gap", cfg)
    u0 = generate_initial_data(cfg.data_spec(), cfg.grid())
    _torus_fields(man, cfg, u0)
    t0 = time.perf_counter()
    it = cfg.integrator(norms=False)
    rec = simulate(u0, cfg["physics.omega"], it)
    gap = nonlinear_vs_linear_gap(rec)
    sc = gap_scaling(u0, cfg["physics.omega"], it, cfg["gap.factor"])
    man.timings["experiment"] = time.perf_counter() - t0
    w = ReportWriter(out, man)
    rows = list(zip(gap.times, gap.gap))
    w.csv("gap.csv", ["t", "gap"], rows)
    w.plot_data("plot_gap.dat", ["t", "gap"], rows, "relative nonlinear-linear gap")
    expected = 1 / cfg["gap.factor"]
    res = {"experiment": "gap", "final_gap": float(gap.gap[-1]), "amplitude_ratio": sc.ratio,
           "expected_ratio": expected, "passed": abs(sc.ratio / expected - 1) <= 0.2}
    w.json("fits.json", res)
    w.finish()
    return res


def cmd_fit(cfg, out, input_path=None):
    """Fit (t, m, p, value) or (t, ..., norm) series in an existing CSV."""
    if input_path is None:
        raise ConfigError(["fit needs --input CSV"])
    import csv as _csv
    path = Path(input_path)
    if not path.is_file():
        raise ConfigError([f"input file not found: {path}"])
    with open(path, newline="") as fh:
        rows = list(_csv.DictReader(fh))
    if not rows:
        raise ConfigError([f"{path} holds no rows"])
    tcol = "t" if "t" in rows[0] else "tau"
    vcol = next((c for c in ("value", "norm") if c in rows[0]), None)
    if vcol is None:
        raise ConfigError([f"{path} needs a 'value' or 'norm' column"])
    omega = cfg["physics.omega"]
    groups: dict = {}
    for r in rows:
        key = (float(r.get("m", 0) or 0), parse_exponent(r.get("p", "2") or "2"))
        groups.setdefault(key, []).append((float(r[tcol]), float(r[vcol])))
    man = _manifest("fit", cfg)
    checks = []
    for (m, p), pts in groups.items():
        pts.sort()
        t = np.array([a for a, _ in pts])
        v = np.array([b for _, b in pts])
        s = NormSeries(m, p, omega, t[t > 0], v[t > 0])
        wins = cfg["fit.windows"] or regime_windows(s.times, omega)
        for regime, win in wins.items():
            tol = cfg.tolerances().get(p, cfg["fit.tolerance"])
            try:
                fit, note = fit_rate(s, win), ""
            except DegenerateWindowError as exc:
                fit, note = None, str(exc)
            checks.append(FitCheck(f"fit:{regime}", m, p, fit,
                                   expected_slope(m, p, 0, regime if regime in ("early", "late") else "early"),
                                   tol, note).as_dict())
    w = ReportWriter(out, man)
    w.json("fits.json", {"experiment": "fit", "input": str(path), "fits": checks})
    w.finish()
    return {"fits": checks}


def cmd_gen_data(cfg, out):
    man = _manifest("gen-data", cfg)
    u0 = generate_initial_data(cfg.data_spec(), cfg.grid())
    _torus_fields(man, cfg, u0)
    mo = moments(u0)
    w = ReportWriter(out, man)
    w.blob("initial.cnsf", encode_snapshot(u0, 0.0, cfg["physics.omega"]))
    res = {"l1_norm": mo.l1_norm, "mean_integral": mo.mean_integral,
           "first_absolute_moment": mo.first_absolute_moment, "first_moments": mo.first_moments}
    w.json("moments.json", res)
    w.finish()
    return res


def cmd_check_invariants(cfg, out):
    from .invariants import run_invariants
    results = run_invariants()
    passed = sum(1 for r in results if r.passed)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    print(f"{passed}/{len(results)} invariants passed")
    if out is not None:
        man = RunManifest("check-invariants", (cfg or default_config()).echo())
        w = ReportWriter(out, man)
        w.json("invariants.json", [r.__dict__ for r in results])
        w.finish()
    if passed != len(results):
        raise AssertionFailure(f"{len(results) - passed} invariant checks failed")
    return {"passed": passed, "total": len(results)}


def cmd_info(cfg, out):
    import scipy
    print(f"rotns {__version__}")
    print(f"numpy {np.__version__}, scipy {scipy.__version__}, fft backend scipy.fft (pocketfft)")
    print("build: pure Python, no compiled extensions")
    print("default config:")
    print(default_config().to_text(), end="")
    return {}


# ---------------------------------------------------------------- argument handling


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rotns", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="flat key-value config file or a run manifest.json")
    ap.add_argument("--output", help="output directory (overrides output.dir)")
    ap.add_argument("--threads", type=int, default=None, help="FFT worker hint; results do not depend on it")
    ap.add_argument("--seed", type=int, default=None, help="overrides data.seed")
    ap.add_argument("--input", help="CSV to fit (fit subcommand)")
    return ap


def run_command(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        if exc.code not in (0, None):
            _emit_error("usage", "invalid command line")
            return EXIT_VALIDATION
        return EXIT_OK
    try:
        cfg = None
        if args.command in COMPUTE_COMMANDS:
            if not args.config:
                raise ConfigError([f"{args.command} needs --config"])
            cfg = parse_config(args.config)
        elif args.config:
            cfg = parse_config(args.config)
        if cfg is not None and args.seed is not None:
            cfg = cfg.with_overrides(data__seed=args.seed)
        out = Path(args.output) if args.output else (cfg.output_dir if cfg is not None else None)
        if args.threads is not None and args.threads < 1:
            raise ConfigError(["--threads must be >= 1"])
        with _thread_limit(args.threads):
            handler = {
                "simulate": lambda: cmd_simulate(cfg, out),
                "linear-decay": lambda: cmd_linear_decay(cfg, out),
                "moment-decay": lambda: cmd_linear_decay(cfg, out, moment=True),
                "dispersive": lambda: cmd_dispersive(cfg, out),
                "vanishing-limit": lambda: cmd_vanishing_limit(cfg, out),
                "scaling-check": lambda: cmd_scaling_check(cfg, out),
                "gap": lambda: cmd_gap(cfg, out),
                "fit": lambda: cmd_fit(cfg, out, args.input),
                "gen-data": lambda: cmd_gen_data(cfg, out),
                "check-invariants": lambda: cmd_check_invariants(cfg, Path(args.output) if args.output else None),
                "info": lambda: cmd_info(cfg, out),
            }[args.command]
            result = handler()
        if args.command not in ("info", "check-invariants"):
            print(json.dumps(_clean({"command": args.command, "output": str(out), "result": result}),
                             default=_json_default))
        return EXIT_OK
    except ConfigError as exc:
        _emit_error("validation", str(exc), errors=exc.errors)
        return EXIT_VALIDATION
    except (ValueError, TypeError) as exc:
        _emit_error("validation", str(exc))
        return EXIT_VALIDATION
    except (SimulationError, QuadratureError, FloatingPointError) as exc:
        _emit_error("numerical", str(exc))
        return EXIT_NUMERICAL
    except AssertionFailure as exc:
        _emit_error("assertion", str(exc))
        return EXIT_ASSERTION
    except ReportError as exc:
        _emit_error("io", str(exc))
        return EXIT_NUMERICAL


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
