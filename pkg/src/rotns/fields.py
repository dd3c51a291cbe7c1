"""Vector fields on the periodic grid and the transforms between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .grid import GridSpec


def _frozen(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True, eq=False)
class PhysicalVectorField:
    """Three real component arrays, shape (3, n, n, n)."""

    grid: GridSpec
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        n = self.grid.n
        if arr.shape != (3, n, n, n):
            raise ValueError(f"expected shape {(3, n, n, n)}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("physical field contains non-finite values")
        object.__setattr__(self, "data", _frozen(arr))

    def magnitude(self) -> np.ndarray:
        d = self.data
        return np.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2)


@dataclass(frozen=True, eq=False)
class SpectralVectorField:
    """Fourier coefficients of a real vector field, shape (3, n, n, n).

    Coefficients are normalized so that the zero mode equals the spatial mean.
    """

    grid: GridSpec
    data: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=complex)
        n = self.grid.n
        if arr.shape != (3, n, n, n):
            raise ValueError(f"expected shape {(3, n, n, n)}, got {arr.shape}")
        object.__setattr__(self, "data", _frozen(arr))

    def replace(self, data: np.ndarray, divergence_free: bool | None = None) -> "SpectralVectorField":
        flag = self.divergence_free if divergence_free is None else divergence_free
        return SpectralVectorField(self.grid, data, flag)

    def scaled(self, factor: float) -> "SpectralVectorField":
        return self.replace(self.data * factor)

    def __add__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self.grid.check_same(other.grid)
        return SpectralVectorField(self.grid, self.data + other.data,
                                   self.divergence_free and other.divergence_free)

    def __sub__(self, other: "SpectralVectorField") -> "SpectralVectorField":
        self.grid.check_same(other.grid)
        return SpectralVectorField(self.grid, self.data - other.data,
                                   self.divergence_free and other.divergence_free)

    def l2_norm(self) -> float:
        """Whole-box L2 norm by Plancherel."""
        return float(np.sqrt(self.grid.volume * np.sum(np.abs(self.data) ** 2)))


def zeros(grid: GridSpec) -> SpectralVectorField:
    return SpectralVectorField(grid, np.zeros((3,) + (grid.n,) * 3, complex), True)


def transform_forward(field: PhysicalVectorField, grid: GridSpec | None = None) -> SpectralVectorField:
    if grid is not None:
        grid.check_same(field.grid)
    n3 = field.grid.n**3
    coeffs = sfft.fftn(field.data, axes=(1, 2, 3)) / n3
    return SpectralVectorField(field.grid, coeffs, divergence_free=False)


def transform_inverse(field: SpectralVectorField, grid: GridSpec | None = None) -> PhysicalVectorField:
    if grid is not None:
        grid.check_same(field.grid)
    n3 = field.grid.n**3
    values = sfft.ifftn(field.data, axes=(1, 2, 3)).real * n3
    return PhysicalVectorField(field.grid, values)


def inverse_scalar(coeffs: np.ndarray) -> np.ndarray:
    """Inverse transform of one (n, n, n) coefficient array to real values."""
    return sfft.ifftn(coeffs).real * coeffs.size


def forward_scalar(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values) / values.size


def leray_project(field: SpectralVectorField, zero_mean: bool = False) -> SpectralVectorField:
    """Apply P(k) = I - k k^T / |k|^2 mode by mode."""
    grid = field.grid
    kv = grid.wavevectors
    u = field.data
    k_dot_u = kv[0] * u[0] + kv[1] * u[1] + kv[2] * u[2]
    out = u - kv * (k_dot_u / grid.k_squared_safe)
    if zero_mean:
        out[:, 0, 0, 0] = 0.0
    return SpectralVectorField(grid, out, divergence_free=True)


def divergence_residual(field: SpectralVectorField) -> float:
    """max over k != 0 of |k . u(k)| / (|k| |u(k)|), zero where u(k) = 0."""
    grid = field.grid
    kv = grid.wavevectors
    u = field.data
    k_dot_u = np.abs(kv[0] * u[0] + kv[1] * u[1] + kv[2] * u[2])
    scale = grid.k_magnitude * np.sqrt(np.sum(np.abs(u) ** 2, axis=0))
    mask = scale > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(k_dot_u[mask] / scale[mask]))


def hermitian_defect(field: SpectralVectorField) -> float:
    """max |u(-k) - conj(u(k))| relative to the largest coefficient."""
    u = field.data
    flipped = np.roll(u[:, ::-1, ::-1, ::-1], 1, axis=(1, 2, 3))
    peak = np.max(np.abs(u))
    if peak == 0:
        return 0.0
    return float(np.max(np.abs(flipped - np.conj(u))) / peak)


def apply_multiplier(field: SpectralVectorField, symbol: np.ndarray) -> SpectralVectorField:
    """Multiply each component by a scalar symbol on the grid."""
    return field.replace(field.data * symbol)


def to_half(data: np.ndarray) -> np.ndarray:
    """Keep the non-negative last-axis frequencies of a Hermitian spectrum."""
    n = data.shape[-1]
    return np.ascontiguousarray(data[..., : n // 2 + 1])


def from_half(half: np.ndarray, n: int) -> np.ndarray:
    """Rebuild the full Hermitian spectrum from its half."""
    full = np.empty(half.shape[:-1] + (n,), complex)
    h = n // 2 + 1
    full[..., :h] = half
    neg = (-np.arange(n)) % n
    tail = half[..., neg, :, :][..., :, neg, :] if half.ndim == 4 else None
    if tail is None:
        raise ValueError("expected a (3, n, n, n//2+1) array")
    j = np.arange(h, n)
    full[..., h:] = np.conj(tail[..., n - j])
    return full
