"""Closed-form whole-space data families.

Each datum is axisymmetric about the rotation axis and has an explicit Fourier
transform, so its rotating heat flow can be evaluated on R^3 by quadrature
without periodization. Fourier convention: f_hat(xi) = int f(x) e^{-i x.xi} dx.

Components in the meridional representation are given in the local
cylindrical frame (e_rho, e_phi, e_z) of xi, written as functions of
k = |xi|, c = cos(polar angle), s = sin(polar angle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

FAMILIES = ("projected-gaussian", "gaussian-divfree", "moment-zero-divfree")


def _gauss(r2, s2):
    return np.exp(-0.5 * r2 / s2) / (2 * np.pi * s2) ** 1.5


@dataclass(frozen=True)
class WholeSpaceDatum:
    """u0 built from the isotropic Gaussian G_sigma.

    projected-gaussian:   amplitude * P(G e3), the Leray projection of an L1 field
    gaussian-divfree:     amplitude * curl(G e3); |x| u0 is integrable
    moment-zero-divfree:  amplitude * curl(x3 G e3); mean and first moments vanish
    """

    family: str = "projected-gaussian"
    sigma: float = 0.1
    amplitude: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown datum family {self.family!r}; expected one of {FAMILIES}")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    # -- Fourier side -------------------------------------------------------

    def gaussian_hat(self, k):
        return np.exp(-0.5 * self.sigma**2 * np.asarray(k) ** 2)

    def cylindrical(self, k, c, s):
        """(a_rho, a_phi, a_z) of u0_hat at (k, c, s); complex arrays."""
        g = self.amplitude * self.gaussian_hat(k)
        zero = np.zeros_like(g, dtype=complex)
        if self.family == "projected-gaussian":
            return (-c * s * g + 0j, zero, s * s * g + 0j)
        if self.family == "gaussian-divfree":
            return (zero, -1j * k * s * g, zero)
        return (zero, -(self.sigma**2) * k * k * c * s * g + 0j, zero)

    def fourier(self, xi: np.ndarray) -> np.ndarray:
        """u0_hat at Cartesian wavevectors xi of shape (..., 3); returns (..., 3)."""
        xi = np.asarray(xi, float)
        k2 = np.sum(xi**2, axis=-1)
        g = self.amplitude * self.gaussian_hat(np.sqrt(k2))
        x1, x2, x3 = xi[..., 0], xi[..., 1], xi[..., 2]
        if self.family == "projected-gaussian":
            safe = np.where(k2 == 0, 1.0, k2)
            out = np.stack([-x1 * x3 / safe, -x2 * x3 / safe, 1 - x3 * x3 / safe], axis=-1)
            out[k2 == 0] = 0.0  # the symbol has no limit at the origin; a null set
            return g[..., None] * out
        if self.family == "gaussian-divfree":
            return 1j * g[..., None] * np.stack([x2, -x1, np.zeros_like(x1)], axis=-1)
        return self.sigma**2 * (x3 * g)[..., None] * np.stack([x2, -x1, np.zeros_like(x1)], axis=-1)

    # -- physical side (rotation-free heat flow, closed form) ---------------

    def heat_physical(self, x: np.ndarray, t: float) -> np.ndarray:
        """Closed form of e^{t Laplacian} u0 at points x of shape (..., 3)."""
        x = np.asarray(x, float)
        s2 = self.sigma**2 + 2 * t
        r2 = np.sum(x**2, axis=-1)
        g = _gauss(r2, s2)
        x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
        if self.family == "gaussian-divfree":
            return self.amplitude * (g / s2)[..., None] * np.stack([-x2, x1, np.zeros_like(x1)], -1)
        if self.family == "moment-zero-divfree":
            # heat flow keeps the prefactor sigma^2 while the Gaussian spreads
            fac = self.amplitude * self.sigma**2 / s2
            return fac * (x3 * g / s2)[..., None] * np.stack([-x2, x1, np.zeros_like(x1)], -1)
        return self.amplitude * projected_gaussian_e3(x, s2)

    # -- reference integrals ------------------------------------------------

    def l1_norm(self) -> float:
        """||u0||_{L1} where known in closed form."""
        a = abs(self.amplitude)
        if self.family == "gaussian-divfree":
            return a * math.sqrt(math.pi / 2) / self.sigma
        if self.family == "moment-zero-divfree":
            # |x3| |x_perp| G / sigma^2 integrates to sigma^0 * sqrt(2/pi) * sqrt(pi/2)
            return a * 1.0
        return float("nan")  # P(G e3) decays like |x|^-3 and is not integrable

    def generator_l1_norm(self) -> float:
        """||G e3||_{L1}: the L1 size of the field the projection acts on."""
        return abs(self.amplitude)

    def fourier_l2_squared(self, t: float, m: float = 0.0) -> float:
        """||(-Lap)^{m/2} e^{t Lap} u0||_{L2}^2 in closed form (rotation preserves it)."""
        a2 = self.amplitude**2
        b = self.sigma**2 + 2 * t  # |u_hat|^2 carries exp(-b k^2)
        # angular factors: int over the sphere of |angular part|^2 d(solid angle)
        if self.family == "projected-gaussian":
            ang, kpow = 4 * np.pi * 2 / 3, 0  # s^2 (c^2 + s^2) = s^2
        elif self.family == "gaussian-divfree":
            ang, kpow = 4 * np.pi * 2 / 3, 2  # k^2 s^2
        else:
            ang, kpow = 4 * np.pi * 2 / 15, 4  # sigma^4 k^4 c^2 s^2
            a2 = a2 * self.sigma**4
        q = 2 + kpow + 2 * m
        radial = 0.5 * math.gamma((q + 1) / 2) * b ** (-(q + 1) / 2)
        return a2 * ang * radial / (2 * np.pi) ** 3


def projected_gaussian_e3(x: np.ndarray, s2: float) -> np.ndarray:
    """P(G_s e3) = G e3 - Hess(Phi) e3 with Phi = -erf(r/(s sqrt2)) / (4 pi r)."""
    x = np.asarray(x, float)
    r = np.sqrt(np.sum(x**2, axis=-1))
    a = 1.0 / math.sqrt(2 * s2)
    z = a * r
    c0 = 2.0 / math.sqrt(math.pi)
    pref = a**3 * c0 / (4 * np.pi)
    small = z < 1e-2
    zs = np.where(small, 1.0, z)
    # radial derivative over r, and second radial derivative of Phi
    zz = z * z
    d1_series = pref * (2 / 3 - 0.4 * zz + zz**2 / 7 - zz**3 / 27)
    d2_series = pref * (2 / 3 - 1.2 * zz + 5 / 7 * zz**2 - 7 / 27 * zz**3)
    rs = np.where(small, 1.0, r)
    ez = np.exp(-zs**2)
    e_val = erf(zs)
    a_val = e_val - c0 * zs * ez
    d1_direct = a_val / (4 * np.pi * rs**3)
    d2_direct = (2 * c0 * zs**3 * ez - 2 * a_val) / (4 * np.pi * rs**3)
    d1 = np.where(small, d1_series, d1_direct)
    d2 = np.where(small, d2_series, d2_direct)
    safe_r = np.where(r == 0, 1.0, r)
    xh3 = np.where(r == 0, 0.0, x[..., 2] / safe_r)
    xh = np.where(r[..., None] == 0, 0.0, x / safe_r[..., None])
    # Hess(Phi) e3 = d2 xh xh3 + d1 (e3 - xh xh3)
    e3 = np.zeros_like(x)
    e3[..., 2] = 1.0
    hess_e3 = (d2 * xh3)[..., None] * xh + d1[..., None] * (e3 - xh3[..., None] * xh)
    g = _gauss(r**2, s2)
    return g[..., None] * e3 - hess_e3
