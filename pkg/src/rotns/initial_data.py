"""Divergence-free initial data on the torus with controlled moments."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .fields import (PhysicalVectorField, SpectralVectorField, forward_scalar,
                     leray_project, transform_inverse)
from .grid import GridSpec

DATA_KINDS = ("gaussian-divfree", "moment-zero-divfree", "rough-sobolev")


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = "gaussian-divfree"
    seed: int = 0
    amplitude: float = 0.1
    length_scale: float = 0.5
    sobolev_index: float | None = None

    def validate(self, grid: GridSpec | None = None) -> list[str]:
        errors = []
        if self.kind not in DATA_KINDS:
            errors.append(f"data.kind must be one of {DATA_KINDS}, got {self.kind!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            errors.append(f"data.seed must be a nonnegative integer, got {self.seed!r}")
        if not self.amplitude > 0:
            errors.append(f"data.amplitude must be positive, got {self.amplitude}")
        if not self.length_scale > 0:
            errors.append(f"data.length_scale must be positive, got {self.length_scale}")
        elif grid is not None and not self.length_scale < grid.box_length / 8:
            errors.append(f"data.length_scale must be below box_length/8 = "
                          f"{grid.box_length / 8:.6g}, got {self.length_scale}")
        if self.kind == "rough-sobolev":
            s = self.sobolev_index
            if s is None or not (0.5 < s < 0.9):
                errors.append(f"data.s must lie in (1/2, 9/10) for rough-sobolev data, got {s}")
        return errors


def counter_normals(seed: int, count: int) -> np.ndarray:
    """Standard normals from a Philox stream keyed by seed; entry i depends only on (seed, i)."""
    gen = np.random.Generator(np.random.Philox(key=int(seed)))
    return gen.standard_normal(count)


def _periodic_potential(grid: GridSpec, length_scale: float, constant: np.ndarray,
                        linear: np.ndarray) -> np.ndarray:
    """Sum over neighbouring images of g(y) (constant + linear y / l), g Gaussian."""
    y0 = grid.centered_coordinates
    pot = np.zeros((3,) + y0.shape[1:])
    L = grid.box_length
    for shift in itertools.product((-1, 0, 1), repeat=3):
        y = y0 + L * np.asarray(shift, float)[:, None, None, None]
        g = np.exp(-(y[0] ** 2 + y[1] ** 2 + y[2] ** 2) / (2 * length_scale**2))
        lin = np.einsum("ij,j...->i...", linear, y) / length_scale
        pot += g * (constant[:, None, None, None] + lin)
    return pot


def _curl_spectral(grid: GridSpec, potential: np.ndarray) -> np.ndarray:
    a = np.stack([forward_scalar(potential[i]) for i in range(3)])
    k = grid.wavevectors
    return 1j * np.stack([
        k[1] * a[2] - k[2] * a[1],
        k[2] * a[0] - k[0] * a[2],
        k[0] * a[1] - k[1] * a[0],
    ])


def _finish(grid: GridSpec, coeffs: np.ndarray) -> SpectralVectorField:
    coeffs = coeffs * ~grid.nyquist_mask
    return leray_project(SpectralVectorField(grid, coeffs), zero_mean=True)


def generate_initial_data(spec: InitialDataSpec, grid: GridSpec) -> SpectralVectorField:
    errors = spec.validate(grid)
    if errors:
        raise ValueError("; ".join(errors))
    ell = spec.length_scale
    if spec.kind in ("gaussian-divfree", "moment-zero-divfree"):
        draws = counter_normals(spec.seed, 12)
        constant = draws[:3]
        linear = draws[3:].reshape(3, 3)
        if spec.kind == "moment-zero-divfree":
            # odd potential -> even field -> every first moment vanishes
            constant = np.zeros(3)
        pot = spec.amplitude * ell * _periodic_potential(grid, ell, constant, linear)
        return _finish(grid, _curl_spectral(grid, pot))

    s = spec.sobolev_index
    n = grid.n
    noise = counter_normals(spec.seed, 3 * n**3).reshape(3, n, n, n)
    coeffs = np.stack([forward_scalar(noise[i]) for i in range(3)])
    mod = np.abs(coeffs)
    coeffs = np.where(mod > 0, coeffs / np.where(mod > 0, mod, 1.0), 0.0)
    envelope = (1.0 + grid.k_squared * ell**2) ** (-(s + 1.5) / 2)
    field = _finish(grid, coeffs * envelope)
    rms = np.sqrt(np.sum(np.abs(field.data) ** 2))
    return field.scaled(spec.amplitude / rms)


@dataclass(frozen=True)
class Moments:
    l1_norm: float
    mean_integral: np.ndarray
    first_absolute_moment: float
    first_moments: np.ndarray  # [i, j] = integral of x_i u_j


def moments(u0: SpectralVectorField | PhysicalVectorField) -> Moments:
    """Grid quadrature of L1 norm, mean and first moments about the box center.

    On the plane x_i = -L/2 the periodic coordinate is ambiguous; the signed
    moments use its symmetric value 0 there, the absolute moment uses L/2.
    """
    phys = transform_inverse(u0) if isinstance(u0, SpectralVectorField) else u0
    grid = phys.grid
    dv = grid.cell_volume
    u = phys.data
    mag = phys.magnitude()
    y = grid.centered_coordinates
    dist = np.sqrt(y[0] ** 2 + y[1] ** 2 + y[2] ** 2)
    signed = y.copy()
    signed[np.isclose(signed, -0.5 * grid.box_length)] = 0.0
    first = np.array([[np.sum(signed[i] * u[j]) * dv for j in range(3)] for i in range(3)])
    return Moments(
        l1_norm=float(np.sum(mag) * dv),
        mean_integral=np.array([np.sum(u[j]) * dv for j in range(3)]),
        first_absolute_moment=float(np.sum(dist * mag) * dv),
        first_moments=first,
    )
