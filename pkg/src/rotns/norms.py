"""Lebesgue, Sobolev and Besov norms on the periodic grid, plus dyadic blocks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .fields import PhysicalVectorField, SpectralVectorField, transform_inverse
from .grid import GridSpec

INNER_EDGE = 0.75
OUTER_EDGE = 8.0 / 3.0
_CUT_START = 1.5  # cutoff S(rho) is 1 below this and 0 above OUTER_EDGE


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.asarray(t, dtype=float)
    inside = (t > 0) & (t < 1)
    tc = np.where(inside, t, 0.5)
    a = np.exp(-1.0 / tc)
    b = np.exp(-1.0 / (1.0 - tc))
    return np.where(t <= 0, 0.0, np.where(t >= 1, 1.0, a / (a + b)))


def cutoff(rho):
    """Smooth S with S = 1 on [0, 3/2] and S = 0 on [8/3, inf)."""
    return 1.0 - smooth_step((np.asarray(rho, float) - _CUT_START) / (OUTER_EDGE - _CUT_START))


def lp_profile(rho):
    """Radial bump psi(rho) = S(rho) - S(2 rho), supported in [3/4, 8/3]."""
    rho = np.asarray(rho, float)
    return cutoff(rho) - cutoff(2.0 * rho)


@dataclass(frozen=True)
class LPPartition:
    """Dyadic partition psi(2^-k |xi|) restricted to a grid."""

    grid: GridSpec

    @property
    def covering_range(self) -> tuple[int, int]:
        """Smallest block range whose profiles sum to one on every nonzero grid mode."""
        rho_min = self.grid.fundamental
        rho_max = float(self.grid.k_magnitude.max())
        return (math.floor(math.log2(rho_min * INNER_EDGE)),
                math.ceil(math.log2(rho_max / _CUT_START)))

    @property
    def resolvable_range(self) -> tuple[int, int]:
        """Blocks whose full annulus lies inside the inscribed ball of the grid."""
        rho_min = self.grid.fundamental
        rho_ball = self.grid.fundamental * (self.grid.n // 2)
        return (math.ceil(math.log2(rho_min / INNER_EDGE)) - 1,
                math.floor(math.log2(rho_ball / OUTER_EDGE)))

    def blocks(self) -> range:
        lo, hi = self.covering_range
        return range(lo, hi + 1)

    def is_truncated(self, k: int) -> bool:
        lo, hi = self.resolvable_range
        return not (lo <= k <= hi)

    def symbol(self, k: int) -> np.ndarray:
        return lp_profile(self.grid.k_magnitude / 2.0**k)

    def partition_sum(self) -> np.ndarray:
        total = np.zeros_like(self.grid.k_magnitude)
        for k in self.blocks():
            total += self.symbol(k)
        return total


def lp_norm(u: PhysicalVectorField, p: float) -> float:
    """Riemann-sum L^p norm of |u|; p = inf uses 2x spectral oversampling."""
    if not (p >= 1):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    if math.isinf(p):
        fine = u.data
        for axis in (1, 2, 3):
            fine = scipy.signal.resample(fine, 2 * u.grid.n, axis=axis)
        return float(np.sqrt(np.max(np.sum(fine**2, axis=0))))
    mag = u.magnitude()
    dv = u.grid.cell_volume
    if p == 1:
        return float(np.sum(mag) * dv)
    if p == 2:
        return float(np.sqrt(np.sum(mag**2) * dv))
    return float((np.sum(mag**p) * dv) ** (1.0 / p))


def _abs_k_power(grid: GridSpec, s: float) -> np.ndarray:
    if s == 0:
        return np.ones_like(grid.k_magnitude)
    out = grid.k_magnitude**s
    out[0, 0, 0] = 0.0
    return out


def sobolev_norm(u: SpectralVectorField, s: float, p: float) -> float:
    """|| (-Laplacian)^{s/2} u ||_{L^p}."""
    if s < 0:
        raise ValueError("only nonnegative smoothness is supported")
    weight = _abs_k_power(u.grid, s)
    if p == 2:
        energy = np.sum(weight**2 * np.sum(np.abs(u.data) ** 2, axis=0))
        return float(np.sqrt(u.grid.volume * energy))
    return lp_norm(transform_inverse(u.replace(u.data * weight)), p)


def lp_block(u: SpectralVectorField, k: int) -> SpectralVectorField:
    symbol = LPPartition(u.grid).symbol(k)
    if not np.any(symbol):
        warnings.warn(f"dyadic block {k} has no support on this grid", RuntimeWarning, stacklevel=2)
        return u.replace(np.zeros_like(u.data))
    return u.replace(u.data * symbol)


@dataclass(frozen=True)
class BlockNorm:
    k: int
    value: float
    truncated: bool


def block_norms(u: SpectralVectorField, p: float) -> list[BlockNorm]:
    part = LPPartition(u.grid)
    out = []
    for k in part.blocks():
        blk = u.replace(u.data * part.symbol(k))
        out.append(BlockNorm(k, sobolev_norm(blk, 0.0, p), part.is_truncated(k)))
    return out


def besov_norm(u: SpectralVectorField, s: float, p: float, r: float) -> float:
    """l^r aggregate of 2^{sk} ||P_k u||_{L^p} over the covering block range."""
    if not (p >= 1 and r >= 1):
        raise ValueError("p and r must lie in [1, inf]")
    weighted = np.array([2.0 ** (s * b.k) * b.value for b in block_norms(u, p)])
    if math.isinf(r):
        return float(weighted.max(initial=0.0))
    return float(np.sum(weighted**r) ** (1.0 / r))


@dataclass(frozen=True)
class BernsteinReport:
    k: int
    q: float
    p: float
    ratio: float | None
    block_lp: float
    block_lq: float


def bernstein_check(u: SpectralVectorField, k: int, q: float, p: float) -> BernsteinReport:
    """||P_k u||_p / (2^{3k(1/q - 1/p)} ||P_k u||_q)."""
    if p < q:
        raise ValueError("bernstein_check needs p >= q")
    blk = u.replace(u.data * LPPartition(u.grid).symbol(k))
    if not np.any(blk.data):
        return BernsteinReport(k, q, p, None, 0.0, 0.0)
    phys = transform_inverse(blk)
    big = lp_norm(phys, p)
    small = lp_norm(phys, q)
    inv = lambda x: 0.0 if math.isinf(x) else 1.0 / x  # noqa: E731
    ratio = big / (2.0 ** (3 * k * (inv(q) - inv(p))) * small)
    return BernsteinReport(k, q, p, float(ratio), big, small)
