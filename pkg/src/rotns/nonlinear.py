"""Dealiased pseudo-spectral evaluation of P div(u (x) u)."""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .fields import SpectralVectorField, from_half, to_half
from .grid import GridSpec

_PAIRS = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]


def nonlinear_half(grid: GridSpec, half: np.ndarray) -> tuple[np.ndarray, float]:
    """Core of the nonlinear term on a half spectrum (real transforms).

    Returns the projected, dealiased half spectrum and max |u| on the grid.
    """
    n = grid.n
    n3 = n**3
    shape = (n, n, n)
    vel = sfft.irfftn(half, s=shape, axes=(1, 2, 3)) * n3
    speed = float(np.sqrt(np.max(vel[0] ** 2 + vel[1] ** 2 + vel[2] ** 2)))
    prod = np.empty((6,) + shape)
    for idx, (i, j) in enumerate(_PAIRS):
        np.multiply(vel[i], vel[j], out=prod[idx])
    prod_hat = sfft.rfftn(prod, axes=(1, 2, 3))
    prod_hat /= n3

    def pair(i, j):
        return prod_hat[_PAIRS.index((min(i, j), max(i, j)))]

    kv = grid.half_wavevectors
    div = np.empty_like(half)
    for i in range(3):
        div[i] = kv[0] * pair(i, 0) + kv[1] * pair(i, 1) + kv[2] * pair(i, 2)
    div *= 1j
    k_dot = kv[0] * div[0] + kv[1] * div[1] + kv[2] * div[2]
    ksq = grid.half_k_squared.copy()
    ksq[0, 0, 0] = 1.0
    div -= kv * (k_dot / ksq)
    div *= grid.half_dealias_mask
    div[:, 0, 0, 0] = 0.0
    return div, speed


def nonlinear_term(u: SpectralVectorField) -> SpectralVectorField:
    """Leray-projected divergence of u (x) u, dealiased by the 2/3 rule."""
    if not u.divergence_free:
        raise ValueError("nonlinear_term needs a field flagged divergence-free")
    half, _ = nonlinear_half(u.grid, to_half(u.data))
    return SpectralVectorField(u.grid, from_half(half, u.grid.n), divergence_free=True)


def convolution_nonlinear_term(u: SpectralVectorField) -> SpectralVectorField:
    """Brute-force O(n^6) oracle: exact Fourier convolution of the products.

    Each stored coefficient is read as the trigonometric monomial with its
    FFT-order integer frequency; products are formed without wrap-around and
    only the representable output frequencies are kept.
    """
    grid = u.grid
    n = grid.n
    half = n // 2
    freqs = grid.frequencies
    order = np.argsort(freqs)  # sorted frequency order -half..half-1
    coeffs = u.data[:, order][:, :, order][:, :, :, order]
    off = 3 * half
    ext = np.zeros((3, 6 * half, 6 * half, 6 * half), complex)
    ext[:, off - half:off + half, off - half:off + half, off - half:off + half] = coeffs
    prods = np.zeros((3, 3, n, n, n), complex)
    for a in range(n):
        pa = a - half
        sa = slice(off - half - pa, off + half - pa)
        for b in range(n):
            pb = b - half
            sb = slice(off - half - pb, off + half - pb)
            for c in range(n):
                pc = c - half
                sc = slice(off - half - pc, off + half - pc)
                shifted = ext[:, sa, sb, sc]
                left = coeffs[:, a, b, c]
                if not np.any(left):
                    continue
                prods += left[:, None, None, None, None] * shifted[None]
    kv_sorted = grid.wavenumbers_1d[order]
    kx, ky, kz = np.meshgrid(kv_sorted, kv_sorted, kv_sorted, indexing="ij")
    kvec = (kx, ky, kz)
    div = np.zeros((3, n, n, n), complex)
    for i in range(3):
        for j in range(3):
            div[i] += 1j * kvec[j] * prods[i, j]
    ksq = kx**2 + ky**2 + kz**2
    ksq_safe = np.where(ksq == 0, 1.0, ksq)
    kdot = kx * div[0] + ky * div[1] + kz * div[2]
    proj = div - np.stack([kx, ky, kz]) * (kdot / ksq_safe)
    proj[:, ksq == 0] = 0.0
    inverse = np.argsort(order)
    proj = proj[:, inverse][:, :, inverse][:, :, :, inverse]
    proj = proj * grid.dealias_mask
    return SpectralVectorField(grid, proj, divergence_free=True)
