"""Exact linear propagator of the rotating Stokes system on the torus.

Per mode the flow acts on divergence-free vectors as
    exp(-t|k|^2) * (cos(omega t k3/|k|) I + sin(omega t k3/|k|) R(k)),
with R(k) v = v x k / |k|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .ddexpm import expm_double_double
from .fields import SpectralVectorField
from .grid import GridSpec

# Generator of the Coriolis term: J v = e3 x v.
CORIOLIS_GENERATOR = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


@dataclass(frozen=True)
class RotationMatrices:
    projection: np.ndarray
    rotation: np.ndarray
    phase: float


def rotation_matrices(k) -> RotationMatrices:
    k = np.asarray(k, dtype=float)
    kk = float(k @ k)
    if kk == 0:
        raise ValueError("rotation matrices are undefined at k = 0")
    norm = np.sqrt(kk)
    proj = np.eye(3) - np.outer(k, k) / kk
    k1, k2, k3 = k
    rot = np.array([[0.0, k3, -k2], [-k3, 0.0, k1], [k2, -k1, 0.0]]) / norm
    return RotationMatrices(proj, rot, k3 / norm)


def closed_form_multiplier(k, t: float, omega: float) -> np.ndarray:
    """The 3x3 multiplier exp(-t|k|^2)(cos I + sin R) for a single wavevector."""
    mats = rotation_matrices(k)
    kk = float(np.dot(k, k))
    angle = omega * t * mats.phase
    return np.exp(-t * kk) * (np.cos(angle) * np.eye(3) + np.sin(angle) * mats.rotation)


def oracle_generator(k, t: float, omega: float) -> np.ndarray:
    """The literal exponent -t(|k|^2 I + omega P J P)."""
    k = np.asarray(k, dtype=float)
    kk = float(k @ k)
    proj = np.eye(3) - np.outer(k, k) / kk if kk > 0 else np.eye(3)
    return -t * (kk * np.eye(3) + omega * proj @ CORIOLIS_GENERATOR @ proj)


def matrix_exponential_oracle(k, t: float, omega: float) -> np.ndarray:
    """exp(-t(|k|^2 I + omega P J P)) by double-double scaling and squaring."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return expm_double_double(oracle_generator(k, t, omega)).astype(complex)


def matrix_exponential_oracle_batch(ks, ts, omegas) -> np.ndarray:
    gens = np.array([oracle_generator(k, t, om) for k, t, om in zip(ks, ts, omegas)])
    if np.any(np.asarray(ts) < 0):
        raise ValueError("t must be nonnegative")
    return expm_double_double(gens)


def matrix_exponential_pade(k, t: float, omega: float) -> np.ndarray:
    """Same exponent through scipy's double-precision Pade routine.

    Loses roughly |omega t| * eps to repeated squaring; kept as a cross-check.
    """
    return scipy.linalg.expm(oracle_generator(k, t, omega)).astype(complex)


class CoriolisMultiplier:
    """Mode-wise data for the flow at time t on a grid."""

    def __init__(self, grid: GridSpec, t: float, omega: float, half: bool = False):
        if t < 0:
            raise ValueError(f"semigroup time must be nonnegative, got {t}")
        self.grid = grid
        self.t = float(t)
        self.omega = float(omega)
        kv = grid.half_wavevectors if half else grid.wavevectors
        ksq = grid.half_k_squared if half else grid.k_squared
        kmag = np.sqrt(ksq)
        safe = np.where(kmag == 0, 1.0, kmag)
        phase = np.where(kmag == 0, 0.0, kv[2] / safe)
        angle = self.omega * self.t * phase
        self.heat = np.exp(-self.t * ksq)
        self.cos = self.heat * np.cos(angle)
        self.sin = self.heat * np.sin(angle)
        self._unit_k = kv / safe

    def apply(self, data: np.ndarray) -> np.ndarray:
        # R(k) v = v x k_hat
        kh = self._unit_k
        cross = np.stack([
            data[1] * kh[2] - data[2] * kh[1],
            data[2] * kh[0] - data[0] * kh[2],
            data[0] * kh[1] - data[1] * kh[0],
        ])
        return self.cos * data + self.sin * cross


def apply_semigroup(u: SpectralVectorField, t: float, omega: float,
                    multiplier: CoriolisMultiplier | None = None) -> SpectralVectorField:
    if t < 0:
        raise ValueError(f"semigroup time must be nonnegative, got {t}")
    if multiplier is None:
        multiplier = CoriolisMultiplier(u.grid, t, omega)
    return u.replace(multiplier.apply(u.data))


def heat_flow(u: SpectralVectorField, t: float) -> SpectralVectorField:
    return u.replace(u.data * np.exp(-t * u.grid.k_squared))


def wave_operator(f: SpectralVectorField, tau: float, sign: int = 1) -> SpectralVectorField:
    """Unimodular multiplier exp(sign * i tau k3/|k|); the zero mode is left alone."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    grid = f.grid
    kmag = grid.k_magnitude
    phase = np.where(kmag == 0, 0.0, grid.wavevectors[2] / np.where(kmag == 0, 1.0, kmag))
    return f.replace(f.data * np.exp(sign * 1j * tau * phase))


def riesz_rotation(f: SpectralVectorField) -> SpectralVectorField:
    """Skew matrix of Riesz transforms, symbol -i R(k).

    With Riesz transforms carrying symbol -i k_j/|k| this is the operator whose
    combination with the wave operators reproduces cos I + sin R.
    """
    grid = f.grid
    kmag = grid.k_magnitude
    kh = grid.wavevectors / np.where(kmag == 0, 1.0, kmag)
    d = f.data
    cross = np.stack([
        d[1] * kh[2] - d[2] * kh[1],
        d[2] * kh[0] - d[0] * kh[2],
        d[0] * kh[1] - d[1] * kh[0],
    ])
    return f.replace(-1j * cross)


def factorized_semigroup(u: SpectralVectorField, t: float, omega: float) -> SpectralVectorField:
    """1/2 [heat G+(omega t)(I + Rz) + heat G-(omega t)(I - Rz)] applied to u."""
    rz = riesz_rotation(u)
    plus = wave_operator(u + rz, omega * t, +1)
    minus = wave_operator(u - rz, omega * t, -1)
    out = heat_flow((plus + minus).scaled(0.5), t)
    return out.replace(out.data, u.divergence_free)


def coriolis_operator(u: SpectralVectorField) -> SpectralVectorField:
    """P J P u evaluated literally mode by mode."""
    grid = u.grid
    kv = grid.wavevectors
    ksq = grid.k_squared_safe

    def project(v):
        kd = kv[0] * v[0] + kv[1] * v[1] + kv[2] * v[2]
        return v - kv * (kd / ksq)

    pv = project(u.data)
    jpv = np.stack([-pv[1], pv[0], np.zeros_like(pv[2])])
    return u.replace(project(jpv))
