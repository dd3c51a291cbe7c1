"""Wave operators exp(+-i tau xi3/|xi|) on a single dyadic block, evaluated on R^3.

The profile is scalar and axisymmetric: f_hat(xi) = psi(2^-k |xi|) a(xi3/|xi|),
with psi the dyadic bump and a a smooth weight concentrating near the poles
of the sphere, where the phase xi3/|xi| is stationary. A purely radial
profile decays faster than the upper bound in L4 (slope near -0.7 over
tau in [10, 1000]); the polar cap concentrates on the stationary points and
brings out the sharp rate.

The field is computed as
    u(r, z) = (2 pi)^-2 int int rho J0(r rho) f_hat e^{+-i tau c} e^{i xi3 z} d rho d xi3
with Gauss-Legendre in rho and an FFT in xi3 (periodic in z with a period
large enough that the wave packet does not wrap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.optimize import minimize
from scipy.special import j0

from ..norms import OUTER_EDGE, lp_profile
from .quadrature import gauss_legendre


@dataclass(frozen=True)
class CapProfile:
    """Block index and polar-cap width of the test profile."""

    block: int = 0
    cap_width: float = 0.3

    @property
    def scale(self) -> float:
        return 2.0**self.block

    def symbol(self, rho_perp, xi3):
        k = np.sqrt(rho_perp**2 + xi3**2)
        safe = np.where(k == 0, 1.0, k)
        c = np.where(k == 0, 0.0, xi3 / safe)
        return lp_profile(k / self.scale) * np.exp(-(((1 - c * c) / self.cap_width) ** 2))

    def dilated(self, steps: int = 1) -> "CapProfile":
        return CapProfile(self.block + steps, self.cap_width)


@dataclass
class DispersiveField:
    profile: CapProfile
    tau: float
    sign: int
    r: np.ndarray
    z: np.ndarray
    values: np.ndarray  # (nr, nz) real
    spacing: float
    dz: float
    _rho: np.ndarray = field(repr=False, default=None)
    _xi3: np.ndarray = field(repr=False, default=None)
    _coeff: np.ndarray = field(repr=False, default=None)

    def point(self, r: float, z: float) -> float:
        b = j0(r * self._rho) @ self._coeff
        return float((b @ np.exp(1j * self._xi3 * z)).real)

    def lp_norm(self, p: float) -> float:
        a = np.abs(self.values)
        if math.isinf(p):
            return self.sup_norm()
        # trapezoid in r on r f(r) with the leading axis correction, trapezoid in z
        col = np.sum(a**p, axis=1) * self.dz
        h = self.spacing
        integral = np.sum(col * self.r) * h + h * h / 12 * col[0]
        return float((2 * np.pi * integral) ** (1 / p))

    def sup_norm(self, refine: bool = True) -> float:
        a = np.abs(self.values)
        i, j = np.unravel_index(np.argmax(a), a.shape)
        best = float(a[i, j])
        if not refine:
            return best
        h = self.spacing
        res = minimize(lambda x: -abs(self.point(abs(x[0]), x[1])), x0=[self.r[i], self.z[j]],
                       method="Nelder-Mead",
                       options={"xatol": 1e-4 * h, "fatol": 1e-13 * best,
                                "initial_simplex": [[self.r[i], self.z[j]], [self.r[i] + 0.3 * h, self.z[j]],
                                                    [self.r[i], self.z[j] + 0.3 * h]]})
        return max(best, -float(res.fun))


def _layout(profile: CapProfile, tau: float, spacing: float):
    s = profile.scale
    radius = (4 * abs(tau) / 3 + 25) / s  # group speed of the phase is at most 4/3 on the block
    period = 2 * radius + 40 / s
    d3 = 2 * np.pi / period
    top = OUTER_EDGE * s
    n3 = int(math.ceil(top / d3))
    xi3 = d3 * np.arange(-n3, n3 + 1)
    n_rho = int((radius * s + 2 * abs(tau) / 3 + 10) * OUTER_EDGE / 2 * 0.55 + 40)
    rho, w = gauss_legendre(n_rho, 0.0, top)
    h = spacing / s
    nfft = int(2 ** math.ceil(math.log2(period / h)))
    return radius, period, d3, xi3, rho, w, h, nfft


def dispersive_field(profile: CapProfile, tau: float, sign: int = 1,
                     spacing: float = 0.4, chunk: int = 256) -> DispersiveField:
    """Sample G_sign(tau) P_k f on the meridional half plane."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    radius, period, d3, xi3, rho, w, h, nfft = _layout(profile, tau, spacing)
    RHO, XI3 = np.meshgrid(rho, xi3, indexing="ij")
    k = np.sqrt(RHO**2 + XI3**2)
    c = np.where(k == 0, 0.0, XI3 / np.where(k == 0, 1.0, k))
    coeff = profile.symbol(RHO, XI3) * np.exp(1j * sign * tau * c) * (w * rho)[:, None]
    coeff *= d3 / (2 * np.pi) ** 2
    dz = period / nfft
    r = np.arange(0.0, radius, h)
    nz = int(radius / dz)
    idx = np.arange(-(len(xi3) // 2), len(xi3) // 2 + 1) % nfft
    out = np.empty((len(r), 2 * nz + 1))
    for lo in range(0, len(r), chunk):
        rr = r[lo:lo + chunk]
        H = j0(np.outer(rr, rho)) @ coeff
        G = np.zeros((len(rr), nfft), complex)
        G[:, idx] = H
        u = sfft.ifft(G, axis=1) * nfft
        out[lo:lo + chunk] = np.concatenate([u[:, -nz:], u[:, :nz + 1]], axis=1).real
    z = dz * np.arange(-nz, nz + 1)
    return DispersiveField(profile, tau, sign, r, z, out, h, dz, rho, xi3, coeff)


def fourier_l2(profile: CapProfile, tau: float, sign: int = 1,
               n_rho: int = 200, n_xi3: int = 400) -> float:
    """L2 norm by Plancherel on a fixed (rho, xi3) Gauss rule, phase included.

    The rule does not depend on tau, so any change with tau is the phase alone.
    """
    top = OUTER_EDGE * profile.scale
    rho, wr = gauss_legendre(n_rho, 0.0, top)
    xi3, w3 = gauss_legendre(n_xi3, -top, top)
    RHO, XI3 = np.meshgrid(rho, xi3, indexing="ij")
    k = np.sqrt(RHO**2 + XI3**2)
    c = np.where(k == 0, 0.0, XI3 / np.where(k == 0, 1.0, k))
    amp = profile.symbol(RHO, XI3) * np.exp(1j * sign * tau * c)
    weights = (wr * rho)[:, None] * w3[None, :] * 2 * np.pi / (2 * np.pi) ** 3
    return float(math.sqrt(np.sum(np.abs(amp) ** 2 * weights)))


def dispersive_norm(profile: CapProfile, tau: float, p: float, sign: int = 1) -> float:
    if p == 2:
        return fourier_l2(profile, tau, sign)
    return dispersive_field(profile, tau, sign).lp_norm(p)


def dual_exponent(p: float) -> float:
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def bound_normalized(profile: CapProfile, tau: float, p: float, sign: int = 1) -> float:
    """||G(tau) P_k f||_p / (2^{3k(1-2/p)} ||P_k f||_{p'}); free of k by scaling."""
    inv = 0.0 if math.isinf(p) else 1 / p
    num = dispersive_norm(profile, tau, p, sign)
    den = dispersive_field(profile, 0.0, sign).lp_norm(dual_exponent(p))
    return num / (2.0 ** (3 * profile.block * (1 - 2 * inv)) * den)
