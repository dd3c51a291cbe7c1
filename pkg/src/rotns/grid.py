"""Periodic cube discretization and wavenumber bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


class GridMismatchError(ValueError):
    """Raised when two fields live on different grids."""


@dataclass(frozen=True)
class GridSpec:
    """Periodic cube [0, L)^3 sampled with n points per axis.

    Wavenumbers follow the standard FFT ordering, k = 2*pi/L * freq.
    """

    n: int
    box_length: float

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise ValueError(f"grid.n must be an integer, got {self.n!r}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid.n must be a power of two >= 8, got {self.n}")
        if not np.isfinite(self.box_length) or self.box_length <= 0:
            raise ValueError(f"grid.box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "box_length", float(self.box_length))

    @property
    def spacing(self) -> float:
        return self.box_length / self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def fundamental(self) -> float:
        """Smallest nonzero wavenumber magnitude."""
        return 2.0 * np.pi / self.box_length

    @cached_property
    def frequencies(self) -> np.ndarray:
        """Integer frequencies per axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).round().astype(np.int64)

    @cached_property
    def wavenumbers_1d(self) -> np.ndarray:
        return self.fundamental * self.frequencies.astype(float)

    @cached_property
    def wavevectors(self) -> np.ndarray:
        """Array of shape (3, n, n, n) holding k at every mode."""
        k = self.wavenumbers_1d
        return np.stack(np.meshgrid(k, k, k, indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        kv = self.wavevectors
        return kv[0] ** 2 + kv[1] ** 2 + kv[2] ** 2

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def k_squared_safe(self) -> np.ndarray:
        """|k|^2 with the zero mode replaced by 1 (for divisions)."""
        out = self.k_squared.copy()
        out[0, 0, 0] = 1.0
        return out

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping modes with every |freq| <= n/3."""
        keep = np.abs(self.frequencies) <= self.n / 3.0
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True on modes carrying the unpaired Nyquist frequency on any axis."""
        nyq = np.abs(self.frequencies) == self.n // 2
        return nyq[:, None, None] | nyq[None, :, None] | nyq[None, None, :]

    @cached_property
    def coordinates(self) -> np.ndarray:
        """Array of shape (3, n, n, n) of grid point positions in [0, L)."""
        x = self.spacing * np.arange(self.n)
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    @cached_property
    def centered_coordinates(self) -> np.ndarray:
        """Positions relative to the box center, in [-L/2, L/2)."""
        x = self.spacing * np.arange(self.n) - 0.5 * self.box_length
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))

    # Half-spectrum layout used by real transforms: last axis keeps freq 0..n/2.

    @cached_property
    def half_wavevectors(self) -> np.ndarray:
        return np.ascontiguousarray(self.wavevectors[..., : self.n // 2 + 1])

    @cached_property
    def half_k_squared(self) -> np.ndarray:
        return np.ascontiguousarray(self.k_squared[..., : self.n // 2 + 1])

    @cached_property
    def half_dealias_mask(self) -> np.ndarray:
        return np.ascontiguousarray(self.dealias_mask[..., : self.n // 2 + 1])

    @cached_property
    def half_weights(self) -> np.ndarray:
        """Multiplicity of each half-spectrum mode in full-spectrum sums."""
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    def check_same(self, other: "GridSpec") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


def make_grid(n: int, box_length: float) -> GridSpec:
    return GridSpec(n, box_length)
