"""Exponential integrators for the mild (Duhamel) form and solver diagnostics.

The state obeys u' = A u - N(u) with A the exact rotating Stokes generator and
N(u) = P div(u (x) u); the linear flow is always applied exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import SpectralVectorField, from_half, leray_project, to_half
from .grid import GridSpec
from .nonlinear import nonlinear_half, nonlinear_term
from .norms import sobolev_norm
from .semigroup import CoriolisMultiplier, coriolis_operator
from .series import NormSeries

SCHEMES = ("exp-euler", "etd2rk")


class SimulationError(RuntimeError):
    """Numerical failure during a run; carries the last good state."""

    def __init__(self, message: str, last_time: float = float("nan"),
                 last_state: SpectralVectorField | None = None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class CFLError(SimulationError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "etd2rk"
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_stride: int = 100
    norm_schedule: tuple = ((0.0, 2.0),)
    cfl: float = 0.5
    linear_only: bool = False
    keep_snapshots: bool = True

    def validate(self) -> list[str]:
        errors = []
        if self.scheme not in SCHEMES:
            errors.append(f"integrator.scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            errors.append(f"time.dt must be positive, got {self.dt}")
        elif not self.t_end >= self.dt:
            errors.append(f"time.t_end must be >= time.dt, got {self.t_end}")
        elif abs(round(self.t_end / self.dt) * self.dt - self.t_end) > 1e-9 * self.t_end:
            errors.append("time.t_end must be an integer multiple of time.dt")
        if not (isinstance(self.snapshot_stride, (int, np.integer)) and self.snapshot_stride >= 1):
            errors.append(f"time.snapshot_stride must be a positive integer, got {self.snapshot_stride}")
        for m, p in self.norm_schedule:
            if m < 0 or not p >= 1:
                errors.append(f"norm (m={m}, p={p}) needs m >= 0 and p in [1, inf]")
        return errors

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


# ---------------------------------------------------------------- admissibility

@dataclass(frozen=True)
class AdmissibleExponents:
    s: float
    q: float
    theta: float


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violations: list


def admissibility_check(s: float, q: float, theta: float) -> AdmissibilityReport:
    """Evaluate the eight strict/non-strict inequalities on (s, 1/q, 1/theta)."""
    if not all(math.isfinite(x) for x in (s, q, theta)):
        raise ValueError("exponents must be finite")
    iq, it = 1.0 / q, 1.0 / theta
    clauses = [
        ("1/2 < s", 0.5 < s),
        ("s < 9/10", s < 0.9),
        ("1/3 + s/9 <= 1/q", 1 / 3 + s / 9 <= iq),
        ("1/q < 7/12 - s/6", iq < 7 / 12 - s / 6),
        ("(3/2)(1/2 - 1/q) <= 1/theta", 1.5 * (0.5 - iq) <= it),
        ("1/theta <= (5/2)(1/2 - 1/q)", it <= 2.5 * (0.5 - iq)),
        ("1/(2q) + s/2 - 1/2 < 1/theta", iq / 2 + s / 2 - 0.5 < it),
        ("1/theta < 5/8 - 3/(2q) + s/4", it < 5 / 8 - 1.5 * iq + s / 4),
    ]
    violations = [name for name, ok in clauses if not ok]
    return AdmissibilityReport(not violations, violations)


def admissible_inverse_q(s: float) -> tuple[float, float]:
    """Interval [lo, hi) of admissible 1/q for a given s."""
    return 1 / 3 + s / 9, 7 / 12 - s / 6


@dataclass(frozen=True)
class SmallnessReport:
    value: float
    s: float
    omega: float
    threshold_note: str = "threshold constant not quantified; value logged only"


def smallness_check(u0: SpectralVectorField, s: float, omega: float) -> SmallnessReport:
    """|omega|^{-(s - 1/2)/2} ||u0||_{H^s dot}."""
    if omega == 0:
        raise ValueError("smallness number needs omega != 0")
    if not 0.5 < s < 0.9:
        raise ValueError(f"s must lie in (1/2, 9/10), got {s}")
    value = abs(omega) ** (-(s - 0.5) / 2) * sobolev_norm(u0, s, 2)
    return SmallnessReport(float(value), s, omega)


# ---------------------------------------------------------------- stepping

def _pin_mean(data: np.ndarray) -> np.ndarray:
    data[:, 0, 0, 0] = 0.0
    return data


def _step_half(grid: GridSpec, u: np.ndarray, dt: float, scheme: str,
               mult: CoriolisMultiplier, linear_only: bool, cfl: float, t: float) -> np.ndarray:
    lin = mult.apply(u)
    if linear_only:
        return _pin_mean(lin)
    nl, speed = nonlinear_half(grid, u)
    if speed > 0 and dt > cfl * grid.spacing / speed:
        raise CFLError(f"CFL violated at t={t:.6g}: dt={dt:.3g} > {cfl}*dx/max|u| = "
                       f"{cfl * grid.spacing / speed:.3g}", t)
    moved_nl = mult.apply(nl)
    pred = _pin_mean(lin - dt * moved_nl)
    if scheme == "exp-euler":
        return pred
    # trapezoid on the Duhamel integral: transported old N and fresh N at the predictor
    nl_pred, _ = nonlinear_half(grid, pred)
    return _pin_mean(pred - 0.5 * dt * (nl_pred - moved_nl))


def step(u: SpectralVectorField, dt: float, omega: float, scheme: str = "etd2rk",
         linear_only: bool = False, cfl: float = 0.5, t: float = 0.0) -> SpectralVectorField:
    """Advance one step of size dt; the linear flow is applied exactly."""
    if not u.divergence_free:
        raise ValueError("step needs a divergence-free state")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    grid = u.grid
    mult = CoriolisMultiplier(grid, dt, omega, half=True)
    try:
        out = _step_half(grid, to_half(u.data), dt, scheme, mult, linear_only, cfl, t)
    except CFLError as exc:
        exc.last_state = u
        raise
    return SpectralVectorField(grid, from_half(out, grid.n), True)


# ---------------------------------------------------------------- runs

@dataclass
class EnergyLedger:
    times: np.ndarray
    kinetic: np.ndarray     # ||u(t)||^2
    dissipated: np.ndarray  # 2 int_0^t ||grad u||^2 by the trapezoid rule

    @property
    def drift(self) -> np.ndarray:
        e0 = self.kinetic[0]
        if e0 == 0:
            return np.zeros_like(self.kinetic)
        return (self.kinetic + self.dissipated - e0) / e0


def energy_audit(ledger: EnergyLedger) -> float:
    if len(ledger.times) == 0:
        raise ValueError("empty energy ledger")
    return float(np.max(np.abs(ledger.drift)))


@dataclass
class RunRecord:
    grid: GridSpec
    omega: float
    config: IntegratorConfig
    snapshot_times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    norms: dict = field(default_factory=dict)
    energy: EnergyLedger | None = None
    final: SpectralVectorField | None = None
    failure: SimulationError | None = None

    def snapshot_spacing(self) -> float:
        return self.config.dt * self.config.snapshot_stride


def _energy_terms(grid: GridSpec, half: np.ndarray) -> tuple[float, float]:
    amp = np.sum(half.real**2 + half.imag**2, axis=0) * grid.half_weights
    vol = grid.volume
    return float(vol * np.sum(amp)), float(vol * np.sum(grid.half_k_squared * amp))


def simulate(u0: SpectralVectorField, omega: float, config: IntegratorConfig,
             raise_on_failure: bool = True) -> RunRecord:
    """Integrate from u0 to config.t_end with a fixed step."""
    errors = config.validate()
    if errors:
        raise ValueError("; ".join(errors))
    if not u0.divergence_free:
        raise ValueError("initial data must be flagged divergence-free")
    grid = u0.grid
    u = _pin_mean(to_half(u0.data))
    mult = CoriolisMultiplier(grid, config.dt, omega, half=True)
    n_steps = config.n_steps
    rec = RunRecord(grid, omega, config)
    norm_t = {key: [] for key in config.norm_schedule}
    norm_v = {key: [] for key in config.norm_schedule}
    times = np.arange(n_steps + 1) * config.dt
    kinetic = np.empty(n_steps + 1)
    dissipated = np.zeros(n_steps + 1)
    kinetic[0], grad_prev = _energy_terms(grid, u)

    def sample(i, half):
        t = times[i]
        state = SpectralVectorField(grid, from_half(half, grid.n), True)
        rec.snapshot_times.append(float(t))
        if config.keep_snapshots:
            rec.snapshots.append(state)
        for key in config.norm_schedule:
            m, p = key
            norm_t[key].append(float(t))
            norm_v[key].append(sobolev_norm(state, m, p))

    sample(0, u)
    last = 0
    try:
        for i in range(1, n_steps + 1):
            try:
                nxt = _step_half(grid, u, config.dt, config.scheme, mult, config.linear_only,
                                 config.cfl, times[i - 1])
            except CFLError as exc:
                exc.last_state = SpectralVectorField(grid, from_half(u, grid.n), True)
                raise
            if not np.all(np.isfinite(nxt)):
                raise SimulationError(f"non-finite state at t={times[i]:.6g}", times[i - 1],
                                      SpectralVectorField(grid, from_half(u, grid.n), True))
            u = nxt
            kinetic[i], grad = _energy_terms(grid, u)
            dissipated[i] = dissipated[i - 1] + config.dt * (grad_prev + grad)
            grad_prev = grad
            last = i
            if i % config.snapshot_stride == 0 or i == n_steps:
                sample(i, u)
    except SimulationError as exc:
        rec.failure = exc
        if raise_on_failure:
            raise
    rec.energy = EnergyLedger(times[:last + 1], kinetic[:last + 1], dissipated[:last + 1])
    rec.final = SpectralVectorField(grid, from_half(u, grid.n), True)
    rec.norms = {key: NormSeries(key[0], key[1], omega, norm_t[key], norm_v[key])
                 for key in config.norm_schedule}
    return rec


# ---------------------------------------------------------------- residual

@dataclass(frozen=True)
class ResidualReport:
    time: float
    spacing: float
    residual_l2: float
    laplacian_l2: float

    @property
    def relative(self) -> float:
        return self.residual_l2 / self.laplacian_l2 if self.laplacian_l2 > 0 else float("inf")


def residual_from_states(before: SpectralVectorField, center: SpectralVectorField,
                         after: SpectralVectorField, spacing: float, omega: float,
                         include_nonlinear: bool = True, time: float = float("nan")) -> ResidualReport:
    """Central-difference du/dt + P(u.grad)u - Laplacian u + omega PJP u at the center state."""
    grid = center.grid
    dudt = (after.data - before.data) / (2 * spacing)
    lap = -grid.k_squared * center.data
    res = dudt - lap + omega * coriolis_operator(center).data
    if include_nonlinear:
        res = res + nonlinear_term(center.replace(center.data, True)).data
    vol = grid.volume
    return ResidualReport(time, spacing, float(np.sqrt(vol * np.sum(np.abs(res) ** 2))),
                          float(np.sqrt(vol * np.sum(np.abs(lap) ** 2))))


def pde_residual(record: RunRecord, t: float, stride_multiple: int = 1,
                 include_nonlinear: bool = True) -> ResidualReport:
    """Residual at the stored snapshot nearest t using neighbours stride_multiple apart."""
    if not record.snapshots:
        raise ValueError("run record holds no snapshots")
    times = np.asarray(record.snapshot_times)
    i = int(np.argmin(np.abs(times - t)))
    m = int(stride_multiple)
    if i - m < 0 or i + m >= len(times):
        raise ValueError(f"t={t} is too close to the record boundary for spacing {m}")
    h_lo = times[i] - times[i - m]
    h_hi = times[i + m] - times[i]
    if not math.isclose(h_lo, h_hi, rel_tol=1e-9):
        raise ValueError("snapshots around t are not equally spaced")
    return residual_from_states(record.snapshots[i - m], record.snapshots[i], record.snapshots[i + m],
                                h_lo, record.omega, include_nonlinear, float(times[i]))


# ---------------------------------------------------------------- scaling

def rescale_initial_data(u0: SpectralVectorField, lam: float) -> SpectralVectorField:
    """u0 -> lam u0(lam x) on the box L/lam (same coefficient layout)."""
    grid = GridSpec(u0.grid.n, u0.grid.box_length / lam)
    return SpectralVectorField(grid, lam * np.asarray(u0.data), u0.divergence_free)


@dataclass(frozen=True)
class ScalingReport:
    lam: float
    relative_difference: float
    final_time: float
    scaled_final_time: float


def scaling_check(u0: SpectralVectorField, omega: float, config: IntegratorConfig,
                  lam: float = 2.0) -> ScalingReport:
    """Run (u0, omega, dt) and its rescaled twin, map states back and compare."""
    base = simulate(u0, omega, config)
    scaled_cfg = IntegratorConfig(config.scheme, config.dt / lam**2, config.t_end / lam**2,
                                  config.snapshot_stride, (), config.cfl, config.linear_only, False)
    twin = simulate(rescale_initial_data(u0, lam), lam**2 * omega, scaled_cfg)
    a = base.final.data
    b = twin.final.data / lam
    denom = np.sqrt(np.sum(np.abs(a) ** 2))
    diff = np.sqrt(np.sum(np.abs(a - b) ** 2))
    rel = float(diff / denom) if denom > 0 else float(diff)
    return ScalingReport(lam, rel, config.t_end, scaled_cfg.t_end)


def project_state(u: SpectralVectorField) -> SpectralVectorField:
    return leray_project(u, zero_mean=True)
