"""Direct quadrature of the rotating heat flow on R^3 at arbitrary points.

A tensor rule in spherical wavevector coordinates: Gauss-Legendre in |xi| on
[0, K] and in the polar angle, trapezoid (spectrally accurate for periodic
integrands) in the azimuth. Slower than the meridional evaluator but makes no
symmetry assumption, and it is what the kernel is computed with.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import roots_legendre

from .data import WholeSpaceDatum


class QuadratureError(RuntimeError):
    """A quadrature failed its convergence check."""


def gauss_legendre(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule sizes (radial, polar, azimuthal) and the tail level that fixes K.

    With adaptive=True the sizes are raised as needed for the oscillation at the
    requested points; the given sizes act as floors.
    """

    n_radial: int = 128
    n_polar: int = 64
    n_azimuth: int = 64
    tail: float = 1e-14
    k_max: float | None = None
    adaptive: bool = True
    tolerance: float = 1e-8  # relative to the largest sampled magnitude
    check: bool = True

    def validate(self) -> list[str]:
        errs = []
        for name in ("n_radial", "n_polar", "n_azimuth"):
            if getattr(self, name) < 4:
                errs.append(f"quadrature.{name} must be >= 4")
        if not 0 < self.tail < 1:
            errs.append("quadrature.tail must lie in (0, 1)")
        if self.k_max is not None and not self.k_max > 0:
            errs.append("quadrature.k_max must be positive")
        if not self.tolerance > 0:
            errs.append("quadrature.tolerance must be positive")
        return errs

    def cutoff(self, width2: float) -> float:
        """K with exp(-width2 K^2 / 2) * (polynomial margin) below tail."""
        if self.k_max is not None:
            return self.k_max
        return math.sqrt(2 * (math.log(1 / self.tail) + 4) / width2)

    def sized(self, k_max: float, phase: float, reach: float, reach_perp: float) -> "QuadratureSpec":
        """Sizes for angular phase |omega| t and spatial reach |x|, |x_perp|."""
        if not self.adaptive:
            return self
        span = k_max * reach
        n_polar = max(self.n_polar, int((phase + 1.05 * span) * math.pi / 4) + 30)
        n_radial = max(self.n_radial, int(span * math.sqrt(2) / 4) + 30)
        n_azimuth = max(self.n_azimuth, int(1.1 * k_max * reach_perp) + 30)
        return replace(self, n_radial=n_radial, n_polar=n_polar, n_azimuth=n_azimuth)

    def halved(self) -> "QuadratureSpec":
        return replace(self, n_radial=self.n_radial // 2, n_polar=self.n_polar // 2,
                       n_azimuth=self.n_azimuth // 2, adaptive=False)

    def doubled(self) -> "QuadratureSpec":
        return replace(self, n_radial=2 * self.n_radial, n_polar=2 * self.n_polar,
                       n_azimuth=2 * self.n_azimuth, adaptive=False)


@dataclass
class SphericalNodes:
    xi: np.ndarray  # (M, 3)
    weights: np.ndarray  # (M,), includes k^2 sin(theta) and 1/(2 pi)^3
    k: np.ndarray
    k_max: float


def spherical_nodes(spec: QuadratureSpec, k_max: float) -> SphericalNodes:
    kk, wk = gauss_legendre(spec.n_radial, 0.0, k_max)
    th, wt = gauss_legendre(spec.n_polar, 0.0, math.pi)
    ph = 2 * math.pi * np.arange(spec.n_azimuth) / spec.n_azimuth
    wp = 2 * math.pi / spec.n_azimuth
    K, T, P = np.meshgrid(kk, th, ph, indexing="ij")
    W = (wk[:, None, None] * wt[None, :, None] * wp) * K**2 * np.sin(T) / (2 * math.pi) ** 3
    st = np.sin(T)
    xi = np.stack([K * st * np.cos(P), K * st * np.sin(P), K * np.cos(T)], axis=-1)
    return SphericalNodes(xi.reshape(-1, 3), W.reshape(-1), K.reshape(-1), k_max)


def rotating_heat_symbol(xi: np.ndarray, t: float, omega: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """heat, cos and sin factors and the unit vector for M(xi) = heat (cos I + sin R)."""
    k = np.linalg.norm(xi, axis=-1)
    safe = np.where(k == 0, 1.0, k)
    unit = xi / safe[..., None]
    angle = omega * t * np.where(k == 0, 0.0, xi[..., 2] / safe)
    heat = np.exp(-t * k * k)
    return heat * np.cos(angle), heat * np.sin(angle), unit


def apply_symbol(vec: np.ndarray, cos: np.ndarray, sin: np.ndarray, unit: np.ndarray) -> np.ndarray:
    return cos[..., None] * vec + sin[..., None] * np.cross(vec, unit)


# ------------------------------------------------------------------ kernel


@dataclass
class KernelValue:
    x: np.ndarray
    t: float
    omega: float
    matrix: np.ndarray  # (3, 3) real
    quad_error: float
    spec: QuadratureSpec


def _kernel_sum(x, t, omega, spec, k_max):
    nodes = spherical_nodes(spec, k_max)
    cos, sin, unit = rotating_heat_symbol(nodes.xi, t, omega)
    phase = np.exp(1j * nodes.xi @ np.asarray(x, float)) * nodes.weights
    out = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        col = apply_symbol(np.broadcast_to(e, nodes.xi.shape), cos, sin, unit)
        out[:, j] = (phase @ col).real
    return out


def kernel_eval(x, t: float, omega: float, quad: QuadratureSpec | None = None) -> KernelValue:
    """Integral kernel of exp(t(Lap - omega PJP)) at x: inverse transform of
    e^{-t|xi|^2}(cos(omega t xi3/|xi|) I + sin(...) R(xi)).
    """
    if not t > 0:
        raise ValueError("kernel_eval needs t > 0")
    quad = quad or QuadratureSpec()
    x = np.asarray(x, float)
    k_max = quad.cutoff(2 * t)
    reach = float(np.linalg.norm(x))
    spec = quad.sized(k_max, abs(omega) * t, reach, float(np.hypot(x[0], x[1])))
    if quad.adaptive:
        spec = spec.doubled()  # so that the halved rule is itself resolved
    mat = _kernel_sum(x, t, omega, spec, k_max)
    err = float("nan")
    if quad.check:
        coarse = _kernel_sum(x, t, omega, spec.halved(), k_max)
        err = float(np.max(np.abs(mat - coarse)))
        scale = float(np.max(np.abs(mat)))
        floor = quad.tolerance * max(scale, (4 * math.pi * t) ** -1.5)
        if not err <= floor:
            raise QuadratureError(f"kernel quadrature not converged at x={x.tolist()}, t={t}: "
                                  f"halving difference {err:.3g}")
    return KernelValue(x, t, omega, mat, err, spec)


# ------------------------------------------------------------------ datum


@dataclass
class WholeSpaceSamples:
    points: np.ndarray  # (N, 3)
    values: np.ndarray  # (N, 3)
    t: float
    omega: float
    quad_error: np.ndarray  # (N,)
    spec: QuadratureSpec


def _datum_sum(datum, points, t, omega, m, spec, k_max, chunk=2048):
    nodes = spherical_nodes(spec, k_max)
    cos, sin, unit = rotating_heat_symbol(nodes.xi, t, omega)
    coeff = apply_symbol(datum.fourier(nodes.xi), cos, sin, unit)
    w = nodes.weights * (nodes.k**m if m else 1.0)
    coeff = coeff * w[:, None]
    out = np.empty((len(points), 3))
    for lo in range(0, len(points), chunk):
        ph = np.exp(1j * points[lo:lo + chunk] @ nodes.xi.T)
        out[lo:lo + chunk] = (ph @ coeff).real
    return out


def whole_space_linear_eval(datum: WholeSpaceDatum, t: float, omega: float, points,
                            quad: QuadratureSpec | None = None, m: float = 0.0) -> WholeSpaceSamples:
    """(|D|^m T(t) u0)(x) at the given points by direct Fourier quadrature on R^3."""
    if not isinstance(datum, WholeSpaceDatum):
        raise TypeError("whole_space_linear_eval needs a closed-form WholeSpaceDatum")
    if t < 0:
        raise ValueError("t must be nonnegative")
    quad = quad or QuadratureSpec()
    pts = np.atleast_2d(np.asarray(points, float))
    k_max = quad.cutoff(datum.sigma**2 + 2 * t)
    reach = float(np.max(np.linalg.norm(pts, axis=1)))
    reach_perp = float(np.max(np.hypot(pts[:, 0], pts[:, 1])))
    spec = quad.sized(k_max, abs(omega) * t, reach, reach_perp)
    if quad.adaptive:
        spec = spec.doubled()
    vals = _datum_sum(datum, pts, t, omega, m, spec, k_max)
    err = np.full(len(pts), np.nan)
    if quad.check:
        coarse = _datum_sum(datum, pts, t, omega, m, spec.halved(), k_max)
        err = np.max(np.abs(vals - coarse), axis=1)
        scale = float(np.max(np.abs(vals)))
        if not np.all(err <= quad.tolerance * max(scale, 1e-300)):
            raise QuadratureError(f"whole-space quadrature not converged at t={t}: "
                                  f"halving difference {np.max(err):.3g} vs scale {scale:.3g}")
    return WholeSpaceSamples(pts, vals, t, omega, err, spec)


def fourier_l2_squared(datum: WholeSpaceDatum, t: float, omega: float, m: float = 0.0,
                       quad: QuadratureSpec | None = None) -> float:
    """||(-Lap)^{m/2} T(t) u0||_{L2}^2 by Parseval, integrating |symbol u0_hat|^2."""
    quad = quad or QuadratureSpec()
    k_max = quad.cutoff(datum.sigma**2 + 2 * t)
    spec = quad.sized(k_max, abs(omega) * t, 0.0, 0.0)
    nodes = spherical_nodes(spec, k_max)
    cos, sin, unit = rotating_heat_symbol(nodes.xi, t, omega)
    coeff = apply_symbol(datum.fourier(nodes.xi), cos, sin, unit)
    amp = np.sum(np.abs(coeff) ** 2, axis=1) * (nodes.k ** (2 * m) if m else 1.0)
    return float(np.dot(nodes.weights, amp))


def write_samples_csv(path, rows) -> None:
    """rows: iterable of (x, t, omega, component, value, quad_error)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x1", "x2", "x3", "t", "omega", "component", "value", "quad_error"])
        for x, t, omega, comp, val, err in rows:
            w.writerow([f"{x[0]:.17g}", f"{x[1]:.17g}", f"{x[2]:.17g}", f"{t:.17g}",
                        f"{omega:.17g}", comp, f"{val:.17g}", f"{err:.17g}"])


def sample_rows(samples: WholeSpaceSamples):
    for p, v, e in zip(samples.points, samples.values, samples.quad_error):
        for c in range(3):
            yield p, samples.t, samples.omega, str(c + 1), float(v[c]), float(e)


def kernel_rows(kv: KernelValue):
    for i in range(3):
        for j in range(3):
            yield kv.x, kv.t, kv.omega, f"{i + 1}{j + 1}", float(kv.matrix[i, j]), kv.quad_error
