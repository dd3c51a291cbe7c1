"""Rotating heat flow of axisymmetric data on R^3, sampled on a meridional plane.

For data whose Fourier transform has the form a(k, theta) in the cylindrical
frame of xi, the azimuthal integral is done in closed form with Bessel
functions, leaving a 2D Gauss-Legendre rule in (k, theta):

    u_r   = sum W i J1(k s r) b_rho(k, theta) e^{i k c z}
    u_phi = sum W i J1(k s r) b_phi(k, theta) e^{i k c z}
    u_z   = sum W    J0(k s r) b_z (k, theta) e^{i k c z}

with W = w_k w_theta k^2 s / (2 pi)^2 and b the evolved coefficients. Nodes
theta and pi - theta are paired so only real cos/sin tables over z >= 0 are
needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import j0, j1

from .data import WholeSpaceDatum
from .quadrature import QuadratureError, gauss_legendre


def evolve_cylindrical(coeffs, k, c, s, t: float, omega: float, m: float = 0.0):
    """Apply |xi|^m e^{-t|xi|^2}(cos I + sin R) in the (rho, phi, z) frame.

    In that frame R acts as (a_rho, a_phi, a_z) -> (c a_phi, -c a_rho + s a_z, -s a_phi).
    """
    ar, ap, az = coeffs
    angle = omega * t * c
    co, si = np.cos(angle), np.sin(angle)
    h = np.exp(-t * k * k)
    if m:
        h = h * k**m
    return (h * (co * ar + si * c * ap),
            h * (co * ap + si * (-c * ar + s * az)),
            h * (co * az - si * s * ap))


@dataclass(frozen=True)
class MeridionalRule:
    k_max: float
    n_radial: int
    n_polar: int
    radius: float
    spacing: float

    def refined(self, factor: float = 1.5) -> "MeridionalRule":
        n_polar = int(math.ceil(self.n_polar * factor / 2) * 2)
        return MeridionalRule(self.k_max, int(math.ceil(self.n_radial * factor)), n_polar,
                              self.radius, self.spacing)


def default_rule(datum: WholeSpaceDatum, t: float, omega: float, tail: float = 1e-14,
                 radius_factor: float = 1.5, spacing_factor: float = 0.5,
                 node_factor: float = 1.0) -> MeridionalRule:
    """Node counts sized to the oscillation of the integrand over the sampled region.

    Lengths scale with sqrt(sigma^2 + 2t), the width of the evolved Gaussian;
    the region grows like |omega| t to follow the dispersing waves.
    """
    width = math.sqrt(datum.sigma**2 + 2 * t)
    k_max = math.sqrt(2 * (math.log(1 / tail) + 4)) / width
    radius = width * (radius_factor * abs(omega) * t + 8)
    spacing = spacing_factor * width
    span = k_max * radius
    n_polar = int(node_factor * ((abs(omega) * t + 1.05 * span) * math.pi / 4 + 30))
    n_polar += n_polar % 2
    n_radial = int(node_factor * (span * math.sqrt(2) / 4 + 30))
    return MeridionalRule(k_max, n_radial, n_polar, radius, spacing)


class _Nodes:
    """Paired (k, theta) nodes with evolved even/odd coefficient combinations."""

    def __init__(self, datum, t, omega, m, rule: MeridionalRule):
        kk, wk = gauss_legendre(rule.n_radial, 0.0, rule.k_max)
        th, wt = gauss_legendre(rule.n_polar, 0.0, math.pi)
        half = rule.n_polar // 2
        th, wt = th[:half], wt[:half]  # theta < pi/2; partners at pi - theta
        k = np.repeat(kk, half)
        theta = np.tile(th, rule.n_radial)
        c, s = np.cos(theta), np.sin(theta)
        w = np.repeat(wk, half) * np.tile(wt, rule.n_radial) * k * k * s / (2 * np.pi) ** 2
        up = evolve_cylindrical(datum.cylindrical(k, c, s), k, c, s, t, omega, m)
        down = evolve_cylindrical(datum.cylindrical(k, -c, s), k, -c, s, t, omega, m)
        self.k, self.c, self.s, self.w = k, c, s, w
        # cos-part and sin-part weights of the real field for each component
        # u_r, u_phi (kernel i J1):  -Im(even) cos - Re(odd) sin
        # u_z        (kernel J0):     Re(even) cos - Im(odd) sin
        ev = [u + d for u, d in zip(up, down)]
        od = [u - d for u, d in zip(up, down)]
        self.cos_w = np.stack([-ev[0].imag, -ev[1].imag, ev[2].real]) * w
        self.sin_w = np.stack([-od[0].real, -od[1].real, -od[2].imag]) * w


@dataclass
class MeridionalField:
    datum: WholeSpaceDatum
    t: float
    omega: float
    m: float
    rule: MeridionalRule
    r: np.ndarray
    z: np.ndarray
    values: np.ndarray  # (3, nr, nz): u_r, u_phi, u_z
    nodes: _Nodes = field(repr=False, default=None)
    quad_error: float = float("nan")
    radial_weights: np.ndarray | None = None  # weights for int f r dr when r is a Gauss rule

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))

    def point(self, r: float, z: float) -> np.ndarray:
        return _point_values(self.nodes, np.atleast_1d(r), np.atleast_1d(z))[:, 0]

    def lp_norm(self, p: float) -> float:
        """Trapezoid in z; in r either the Gauss weights or a trapezoid with
        Euler-Maclaurin axis correction (good to roughly 1e-3)."""
        if math.isinf(p):
            return self.sup_norm()
        h = self.rule.spacing
        f = self.magnitude() ** p
        col = np.sum(f, axis=1) * h  # integrate over z (uniform, decaying)
        if self.radial_weights is not None:
            return float((2 * np.pi * np.dot(self.radial_weights, col)) ** (1 / p))
        r = self.r
        integral = np.sum(col * r) * h - 0.5 * h * col[-1] * r[-1]
        # g(r) = r col(r) is odd and smooth: add h^2/12 g'(0) - h^4/720 g'''(0)
        second = 2 * (col[1] - col[0]) / h**2
        integral += h**2 / 12 * col[0] - h**4 / 720 * 3 * second
        return float((2 * np.pi * integral) ** (1 / p))

    def sup_norm(self, refine: bool = True) -> float:
        mag = self.magnitude()
        i, j = np.unravel_index(np.argmax(mag), mag.shape)
        best = float(mag[i, j])
        if not refine:
            return best

        def neg(x):
            return -float(np.linalg.norm(self.point(abs(x[0]), x[1])))

        res = minimize(neg, x0=[self.r[i], self.z[j]], method="Nelder-Mead",
                       options={"xatol": 1e-3 * self.rule.spacing, "fatol": 1e-14 * best,
                                "initial_simplex": [[self.r[i], self.z[j]],
                                                    [self.r[i] + 0.3 * self.rule.spacing, self.z[j]],
                                                    [self.r[i], self.z[j] + 0.3 * self.rule.spacing]]})
        return max(best, -float(res.fun))

    def argmax(self) -> tuple[float, float]:
        mag = self.magnitude()
        i, j = np.unravel_index(np.argmax(mag), mag.shape)
        return float(self.r[i]), float(self.z[j])


def _point_values(nodes: _Nodes, r: np.ndarray, z: np.ndarray) -> np.ndarray:
    arg = np.outer(r, nodes.k * nodes.s)
    ph = np.outer(z, nodes.k * nodes.c)
    cz, sz = np.cos(ph), np.sin(ph)
    jb = [j1(arg), j1(arg), j0(arg)]
    return np.stack([np.sum(jb[q] * (nodes.cos_w[q] * cz + nodes.sin_w[q] * sz), axis=1)
                     for q in range(3)])


def meridional_field(datum: WholeSpaceDatum, t: float, omega: float, m: float = 0.0,
                     rule: MeridionalRule | None = None, chunk: int = 8192,
                     check: bool = True, tol: float = 1e-7,
                     radial: str = "uniform") -> MeridionalField:
    """Sample T(t) u0 (with |xi|^m applied) on r in [0, R], z in [-R, R].

    radial="gauss" puts r on a Gauss-Legendre rule (about 6 nodes per
    spacing) so that spatial Lp integrals are accurate to near rounding.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if radial not in ("uniform", "gauss"):
        raise ValueError(f"radial must be 'uniform' or 'gauss', got {radial!r}")
    if rule is None:
        rule = default_rule(datum, t, omega)
    nodes = _Nodes(datum, t, omega, m, rule)
    h = rule.spacing
    weights = None
    if radial == "gauss":
        r, wr = gauss_legendre(int(3 * rule.radius / h) + 20, 0.0, rule.radius)
        weights = wr * r
    else:
        r = np.arange(0.0, rule.radius + 0.5 * h, h)
    zp = np.arange(0.0, rule.radius + 0.5 * h, h)
    nr, nz = len(r), len(zp)
    even = np.zeros((3, nr, nz))
    odd = np.zeros((3, nr, nz))
    for lo in range(0, len(nodes.k), chunk):
        sl = slice(lo, lo + chunk)
        kc = nodes.k[sl] * nodes.c[sl]
        ph = np.outer(kc, zp)
        cz, sz = np.cos(ph), np.sin(ph)
        arg = np.outer(r, nodes.k[sl] * nodes.s[sl])
        b1 = j1(arg)
        rhs1 = np.concatenate([nodes.cos_w[0, sl, None] * cz, nodes.cos_w[1, sl, None] * cz,
                               nodes.sin_w[0, sl, None] * sz, nodes.sin_w[1, sl, None] * sz], axis=1)
        out1 = b1 @ rhs1
        even[0] += out1[:, :nz]
        even[1] += out1[:, nz:2 * nz]
        odd[0] += out1[:, 2 * nz:3 * nz]
        odd[1] += out1[:, 3 * nz:]
        b0 = j0(arg)
        rhs0 = np.concatenate([nodes.cos_w[2, sl, None] * cz, nodes.sin_w[2, sl, None] * sz], axis=1)
        out0 = b0 @ rhs0
        even[2] += out0[:, :nz]
        odd[2] += out0[:, nz:]
    upper = even + odd
    lower = (even - odd)[:, :, :0:-1]  # z < 0, mirrored, excluding z = 0
    z = np.concatenate([-zp[:0:-1], zp])
    values = np.concatenate([lower, upper], axis=2)
    fld = MeridionalField(datum, t, omega, m, rule, r, z, values, nodes, radial_weights=weights)
    if check:
        fld.quad_error = convergence_error(fld)
        scale = float(np.max(fld.magnitude()))
        if not fld.quad_error <= tol * max(scale, 1e-300):
            raise QuadratureError(f"meridional quadrature not converged at t={t}: "
                                  f"error {fld.quad_error:.3g} vs scale {scale:.3g}")
    return fld


def convergence_error(fld: MeridionalField, n_check: int = 12, factor: float = 1.5) -> float:
    """Max difference against a refined rule at the peak and a spread of grid points."""
    rng = np.random.Generator(np.random.Philox(key=12345))
    ri = rng.integers(0, len(fld.r), n_check)
    zi = rng.integers(0, len(fld.z), n_check)
    r0, z0 = fld.argmax()
    r = np.concatenate([[r0], fld.r[ri]])
    z = np.concatenate([[z0], fld.z[zi]])
    coarse = np.stack([_point_values(fld.nodes, r[i:i + 1], z[i:i + 1])[:, 0] for i in range(len(r))])
    fine_nodes = _Nodes(fld.datum, fld.t, fld.omega, fld.m, fld.rule.refined(factor))
    fine = np.stack([_point_values(fine_nodes, r[i:i + 1], z[i:i + 1])[:, 0] for i in range(len(r))])
    return float(np.max(np.abs(coarse - fine)))
