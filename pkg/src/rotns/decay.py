"""Decay envelopes, compensated ratios, log-log fits and the experiment drivers.

Algebraic rates are only ever fitted on whole-space evaluations; on the torus
the lowest mode eventually forces exponential decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import GridMismatchError
from .semigroup import apply_semigroup
from .series import NormSeries
from .solver import IntegratorConfig, RunRecord, simulate
from .wholespace.data import WholeSpaceDatum
from .wholespace.dispersive import CapProfile, bound_normalized, dispersive_field, dual_exponent, fourier_l2
from .wholespace.meridional import meridional_field
from .wholespace.quadrature import QuadratureSpec, fourier_l2_squared

GUARD_BAND = (0.3, 3.0)  # |omega| t excluded from both regime windows


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def decay_exponent(m: float, p: float, j: int = 0) -> float:
    """Power of t in the envelope: j/2 + m/2 + (3/2)(1 - 1/p)."""
    return j / 2 + m / 2 + 1.5 * (1 - _inv(p))


def rotation_exponent(p: float) -> float:
    """Power of (1 + |omega| t) removed by rotation: 1 - 2/p."""
    return 1 - 2 * _inv(p)


def expected_slope(m: float, p: float, j: int = 0, regime: str = "early") -> float:
    slope = -decay_exponent(m, p, j)
    if regime == "late":
        slope -= rotation_exponent(p)
    return slope


@dataclass(frozen=True)
class Envelope:
    m: float
    p: float
    j: int = 0
    omega: float = 0.0

    def __post_init__(self):
        if not 2 <= self.p <= math.inf:
            raise ValueError(f"envelope needs p in [2, inf], got {self.p}")
        if self.j not in (0, 1):
            raise ValueError("moment index j must be 0 or 1")


def envelope_eval(env: Envelope, t) -> np.ndarray | float:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("envelope is defined for t > 0 only")
    val = t_arr ** (-decay_exponent(env.m, env.p, env.j)) * (1 + abs(env.omega) * t_arr) ** (-rotation_exponent(env.p))
    return float(val) if np.ndim(val) == 0 else val


@dataclass
class RatioTrack:
    m: float
    p: float
    j: int
    omega: float
    times: np.ndarray
    compensated: np.ndarray  # the quantity inside the supremum
    values: np.ndarray  # running supremum
    omega_weighted: bool  # False when omega = 0 and the |omega| power was dropped


def ratio_track(series: NormSeries, m: float, p: float, j: int, omega: float) -> RatioTrack:
    """Running sup of |omega|^{1+j/2} t^{a} (1+|omega| t)^{b} ||u(t)||.

    With omega = 0 the |omega| weight would zero the track; it is replaced by 1.
    """
    t = np.asarray(series.times, float)
    if np.any(t <= 0):
        raise ValueError("ratio_track needs strictly positive times")
    weighted = omega != 0
    pref = abs(omega) ** (1 + j / 2) if weighted else 1.0
    comp = pref * t ** decay_exponent(m, p, j) * (1 + abs(omega) * t) ** rotation_exponent(p) * series.values
    return RatioTrack(m, p, j, omega, t, comp, np.maximum.accumulate(comp), weighted)


# ---------------------------------------------------------------- fitting


class DegenerateWindowError(ValueError):
    pass


@dataclass(frozen=True)
class DecayFit:
    t_a: float
    t_b: float
    slope: float
    intercept: float
    residual_rms: float
    regime: str
    n_samples: int
    compensation: float = 0.0


def regime_of(t_a: float, t_b: float, omega: float) -> str:
    lo, hi = GUARD_BAND
    if omega == 0 or abs(omega) * t_b <= lo:
        return "early"
    if abs(omega) * t_a >= hi:
        return "late"
    return "crossover"


def fit_rate(series: NormSeries, window: tuple[float, float] | None = None,
             compensation: float = 0.0, min_samples: int = 10, min_decades: float = 1.0) -> DecayFit:
    """Least-squares slope of log(value (1+|omega| t)^compensation) against log t."""
    s = series if window is None else series.window(*window)
    t, y = s.times, s.values
    if len(t) < min_samples:
        raise DegenerateWindowError(f"window holds {len(t)} samples, needs >= {min_samples}")
    if np.any(t <= 0):
        raise DegenerateWindowError("window contains nonpositive times")
    if np.log10(t.max() / t.min()) < min_decades * (1 - 1e-9):
        raise DegenerateWindowError(f"window spans {np.log10(t.max() / t.min()):.3g} decades, "
                                    f"needs >= {min_decades}")
    if np.any(~(y > 0)):
        raise ValueError("fit_rate needs strictly positive values")
    if compensation:
        y = y * (1 + abs(series.omega) * t) ** compensation
    x, ly = np.log(t), np.log(y)
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return DecayFit(float(t.min()), float(t.max()), float(coef[0]), float(coef[1]),
                    float(np.sqrt(np.mean(resid**2))), regime_of(t.min(), t.max(), series.omega),
                    len(t), compensation)


def regime_windows(times, omega: float) -> dict:
    """Early and late windows from a time grid, excluding the guard band."""
    t = np.asarray(times, float)
    if omega == 0:
        return {"early": (float(t.min()), float(t.max()))}
    lo, hi = GUARD_BAND
    out = {}
    early = t[abs(omega) * t <= lo]
    late = t[abs(omega) * t >= hi]
    if len(early):
        out["early"] = (float(early.min()), float(early.max()))
    if len(late):
        out["late"] = (float(late.min()), float(late.max()))
    return out


@dataclass
class FitCheck:
    name: str
    m: float
    p: float
    fit: DecayFit | None
    expected: float
    tolerance: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.fit is not None and abs(self.fit.slope - self.expected) <= self.tolerance

    def as_dict(self) -> dict:
        d = {"name": self.name, "m": self.m, "p": "inf" if math.isinf(self.p) else self.p,
             "expected": self.expected, "tolerance": self.tolerance, "passed": self.passed,
             "note": self.note}
        if self.fit is not None:
            d.update(slope=self.fit.slope, intercept=self.fit.intercept,
                     residual_rms=self.fit.residual_rms, window=[self.fit.t_a, self.fit.t_b],
                     regime=self.fit.regime, samples=self.fit.n_samples)
        return d


def default_tolerance(p: float) -> float:
    return 0.05 if p == 2 else 0.1


# ---------------------------------------------------------------- whole-space series


def whole_space_norms(datum: WholeSpaceDatum, omega: float, norms, times,
                      quad: QuadratureSpec | None = None) -> dict:
    """NormSeries per (m, p) of |D|^m T(t) u0 on R^3.

    p = 2 uses Parseval on the spherical rule (exact in the whole space);
    other p sample the meridional plane, one field per (t, m) shared across p.
    """
    times = np.asarray(times, float)
    out = {}
    by_m: dict = {}
    for m, p in norms:
        by_m.setdefault(float(m), []).append(float(p))
    for m, ps in by_m.items():
        vals = {p: [] for p in ps}
        spatial = [p for p in ps if p != 2]
        for t in times:
            if 2.0 in vals:
                vals[2.0].append(math.sqrt(fourier_l2_squared(datum, t, omega, m, quad)))
            if spatial:
                fld = meridional_field(datum, t, omega, m)
                for p in spatial:
                    vals[p].append(fld.lp_norm(p))
        for p in ps:
            out[(m, p)] = NormSeries(m, p, omega, times, np.array(vals[p]),
                                     label=f"{datum.family} m={m} p={p}")
    return out


@dataclass
class DecayExperiment:
    name: str
    datum: WholeSpaceDatum
    omega: float
    j: int
    series: dict
    checks: list = field(default_factory=list)

    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _fit_checks(name, series, omega, j, windows=None, tolerances=None) -> list:
    checks = []
    for (m, p), s in series.items():
        wins = windows or regime_windows(s.times, omega)
        for regime, win in wins.items():
            if regime == "crossover":
                continue
            tols = tolerances or {}
            tol = tols.get(p, tols.get("other", default_tolerance(p)))
            exp = expected_slope(m, p, j, regime)
            try:
                fit = fit_rate(s, win)
                note = ""
            except DegenerateWindowError as exc:
                fit, note = None, str(exc)
            checks.append(FitCheck(f"{name}:{regime}", m, p, fit, exp, tol, note))
    return checks


def linear_decay_experiment(datum: WholeSpaceDatum, omega: float, norms, times,
                            windows: dict | None = None, tolerances: dict | None = None,
                            quad: QuadratureSpec | None = None) -> DecayExperiment:
    """Fitted rates of the linear flow for q = 1 data against the j = 0 envelope."""
    series = whole_space_norms(datum, omega, norms, times, quad)
    exp = DecayExperiment("linear-decay", datum, omega, 0, series)
    exp.checks = _fit_checks("linear-decay", series, omega, 0, windows, tolerances)
    return exp


def moment_decay_experiment(datum: WholeSpaceDatum, omega: float, norms, times,
                            windows: dict | None = None, tolerances: dict | None = None,
                            quad: QuadratureSpec | None = None) -> DecayExperiment:
    """As linear_decay_experiment with the one-moment gain (j = 1).

    The datum must have vanishing mean with |x| u0 integrable; the Leray
    projection of a Gaussian does not qualify.
    """
    if datum.family == "projected-gaussian":
        raise ValueError("moment decay needs a datum with vanishing mean and |x|u0 in L1")
    series = whole_space_norms(datum, omega, norms, times, quad)
    exp = DecayExperiment("moment-decay", datum, omega, 1, series)
    exp.checks = _fit_checks("moment-decay", series, omega, 1, windows, tolerances)
    return exp


def paired_ratio(numer: NormSeries, denom: NormSeries) -> NormSeries:
    if not np.array_equal(numer.times, denom.times):
        raise ValueError("paired series need identical time grids")
    return NormSeries(numer.m, numer.p, numer.omega, numer.times, numer.values / denom.values,
                      label=f"{numer.label} / {denom.label}")


# ---------------------------------------------------------------- vanishing limit


@dataclass
class VanishingReport:
    times: np.ndarray
    compensated: np.ndarray
    window: tuple
    monotone: bool
    relative_drop: float
    vanishing: bool

    @property
    def verdict(self) -> str:
        return "vanishing" if self.vanishing else "not vanishing"


def compensated_series(series: NormSeries, m: float, p: float, omega: float) -> np.ndarray:
    t = series.times
    return t ** decay_exponent(m, p) * (1 + abs(omega) * t) ** rotation_exponent(p) * series.values


def vanishing_limit_check(series: NormSeries, m: float, p: float, omega: float,
                          min_drop: float = 1e-3) -> VanishingReport:
    """Is the compensated norm strictly decreasing over the last decade?

    min_drop guards against calling rounding-level wiggles a trend.
    """
    comp = compensated_series(series, m, p, omega)
    t = series.times
    sel = t >= t.max() / 10 * (1 - 1e-12)
    tail = comp[sel]
    monotone = bool(len(tail) >= 2 and np.all(np.diff(tail) < 0))
    drop = float((tail[0] - tail[-1]) / tail[0]) if len(tail) else 0.0
    return VanishingReport(t, comp, (float(t[sel].min()), float(t.max())), monotone, drop,
                           monotone and drop >= min_drop)


def envelope_series(m: float, p: float, omega: float, times, j: int = 0, scale: float = 1.0) -> NormSeries:
    """A synthetic series proportional to the envelope; the negative control."""
    t = np.asarray(times, float)
    return NormSeries(m, p, omega, t, scale * envelope_eval(Envelope(m, p, j, omega), t),
                      label="envelope")


# ---------------------------------------------------------------- dispersive


@dataclass
class DispersiveExperiment:
    profile: CapProfile
    p: float
    sign: int
    series: NormSeries
    bound: np.ndarray  # 2^{3k(1-2/p)} (1+tau)^{-1+2/p} ||P_k f||_{p'}, constant omitted
    check: FitCheck | None
    scaling_ratio: float  # bound-normalized ratio at block k+1 over block k
    l2_deviation: float  # max relative change of the L2 norm over tau (p = 2 only)


def dispersive_experiment(block: int, taus, p: float, cap_width: float = 0.3, sign: int = 1,
                          window: tuple | None = None, tolerance: float = 0.1,
                          scaling_tau: float | None = None) -> DispersiveExperiment:
    if not p >= 2:
        raise ValueError(f"dispersive estimate needs p >= 2 (p = 2 is the conservation control), got {p}")
    taus = np.asarray(taus, float)
    prof = CapProfile(block, cap_width)
    if p == 2:
        vals = np.array([fourier_l2(prof, t, sign) for t in taus])
    else:
        vals = np.array([dispersive_field(prof, t, sign).lp_norm(p) for t in taus])
    series = NormSeries(0.0, p, 0.0, taus, vals, label=f"dispersive k={block} p={p}")
    inv = _inv(p)
    dual = dispersive_field(prof, 0.0, sign).lp_norm(dual_exponent(p))
    bound = 2.0 ** (3 * block * (1 - 2 * inv)) * (1 + taus) ** (-1 + 2 * inv) * dual
    check = None
    l2_dev = float("nan")
    if p == 2:
        ref = fourier_l2(prof, 0.0, sign)
        l2_dev = float(np.max(np.abs(vals / ref - 1)))
    else:
        try:
            fit = fit_rate(series, window)
            note = ""
        except DegenerateWindowError as exc:
            fit, note = None, str(exc)
        check = FitCheck("dispersive", 0.0, p, fit, -1 + 2 * inv, tolerance, note)
    ratio = float("nan")
    if p != 2:
        tau_s = float(scaling_tau if scaling_tau is not None else taus[0])
        ratio = bound_normalized(prof.dilated(), tau_s, p, sign) / bound_normalized(prof, tau_s, p, sign)
    return DispersiveExperiment(prof, p, sign, series, bound, check, ratio, l2_dev)


# ---------------------------------------------------------------- nonlinear gap


@dataclass
class GapSeries:
    times: np.ndarray
    gap: np.ndarray


def nonlinear_vs_linear_gap(record: RunRecord, linear: RunRecord | None = None) -> GapSeries:
    """||u_nl(t) - u_lin(t)|| / ||u_lin(t)|| at each stored snapshot.

    Without a linear run the reference is T(t) applied exactly to the first snapshot.
    """
    if not record.snapshots:
        raise ValueError("run record holds no snapshots")
    times = np.asarray(record.snapshot_times)
    if linear is not None:
        record.grid.check_same(linear.grid)
        if not np.allclose(times, linear.snapshot_times, rtol=0, atol=1e-12):
            raise GridMismatchError("paired runs have different snapshot times")
        refs = linear.snapshots
    else:
        u0 = record.snapshots[0]
        refs = [apply_semigroup(u0, t, record.omega) for t in times]
    gaps = []
    for u, v in zip(record.snapshots, refs):
        den = v.l2_norm()
        num = (u - v).l2_norm()
        gaps.append(num / den if den > 0 else (0.0 if num == 0 else math.inf))
    return GapSeries(times, np.array(gaps))


@dataclass
class GapScaling:
    amplitudes: tuple
    final_gaps: tuple
    ratio: float


def gap_scaling(u0, omega: float, config: IntegratorConfig, factor: float = 0.5) -> GapScaling:
    """Final-time gap for u0 and factor*u0; the ratio should be close to 1/factor."""
    cfg = IntegratorConfig(config.scheme, config.dt, config.t_end, config.snapshot_stride, (),
                           config.cfl, False, True)
    finals = []
    for a in (1.0, factor):
        rec = simulate(u0.scaled(a), omega, cfg)
        finals.append(float(nonlinear_vs_linear_gap(rec).gap[-1]))
    ratio = finals[0] / finals[1] if finals[1] > 0 else math.inf
    return GapScaling((1.0, factor), tuple(finals), ratio)
