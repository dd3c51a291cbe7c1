"""Fast invariant suite behind `rotns check-invariants`.

Each check runs in at most a few seconds. The minutes-long decay-rate
experiments live in the test suite instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ConfigError, parse_text
from .decay import fit_rate, ratio_track
from .fields import (PhysicalVectorField, SpectralVectorField, divergence_residual, leray_project,
                     transform_forward, transform_inverse)
from .grid import GridSpec
from .initial_data import InitialDataSpec, generate_initial_data
from .nonlinear import convolution_nonlinear_term, nonlinear_term
from .norms import LPPartition, besov_norm, lp_norm, sobolev_norm
from .semigroup import (apply_semigroup, closed_form_multiplier, factorized_semigroup,
                        matrix_exponential_oracle_batch, wave_operator)
from .series import NormSeries
from .solver import IntegratorConfig, simulate

TWO_PI = 2 * np.pi


@dataclass
class InvariantResult:
    name: str
    passed: bool
    detail: str


def random_divfree(grid: GridSpec, rng: np.random.Generator, dealias: bool = True) -> SpectralVectorField:
    """Random real, mean-free, divergence-free field."""
    phys = PhysicalVectorField(grid, rng.standard_normal((3,) + (grid.n,) * 3))
    u = leray_project(transform_forward(phys), zero_mean=True)
    data = np.array(u.data)
    data[:, grid.nyquist_mask] = 0.0
    if dealias:
        data *= grid.dealias_mask
    return SpectralVectorField(grid, data, True)


def random_wavevectors(rng: np.random.Generator, count: int, scale: float = 10.0) -> np.ndarray:
    k = rng.uniform(-scale, scale, (count, 3))
    k[np.all(k == 0, axis=1)] = 1.0
    return k


def semigroup_oracle_error(seed: int = 0, count: int = 1000) -> float:
    """Max |closed form - matrix exponential| on divergence-free vectors."""
    rng = np.random.default_rng(seed)
    ks = random_wavevectors(rng, count)
    ts = rng.uniform(0, 10, count)
    oms = rng.uniform(-100, 100, count)
    oracle = matrix_exponential_oracle_batch(ks, ts, oms)
    worst = 0.0
    for k, t, om, ref in zip(ks, ts, oms, oracle):
        v = rng.standard_normal(3)
        v -= k * (v @ k) / (k @ k)
        v /= np.linalg.norm(v)
        worst = max(worst, float(np.max(np.abs(closed_form_multiplier(k, t, om) @ v - ref @ v))))
    return worst


def _rel(a: SpectralVectorField, b: SpectralVectorField) -> float:
    return float(np.max(np.abs(a.data - b.data)) / max(np.max(np.abs(b.data)), 1e-300))


def check_transform_roundtrip() -> InvariantResult:
    rng = np.random.default_rng(1)
    worst = 0.0
    for n in (8, 16, 32):
        g = GridSpec(n, TWO_PI)
        phys = PhysicalVectorField(g, rng.standard_normal((3, n, n, n)))
        back = transform_inverse(transform_forward(phys))
        worst = max(worst, float(np.max(np.abs(back.data - phys.data)) / np.max(np.abs(phys.data))))
    return InvariantResult("transform round trip", worst <= 1e-12, f"max relative error {worst:.2e}")


def check_leray() -> InvariantResult:
    rng = np.random.default_rng(2)
    g = GridSpec(8, TWO_PI)
    idem = div = 0.0
    for _ in range(100):
        phys = PhysicalVectorField(g, rng.standard_normal((3, 8, 8, 8)))
        p1 = leray_project(transform_forward(phys))
        idem = max(idem, _rel(leray_project(p1), p1))
        div = max(div, divergence_residual(p1))
    ok = idem <= 1e-12 and div <= 1e-12
    return InvariantResult("Leray idempotence and divergence", ok, f"idempotence {idem:.2e}, divergence {div:.2e}")


def check_nonlinear_oracle(count: int = 3) -> InvariantResult:
    rng = np.random.default_rng(3)
    g = GridSpec(8, TWO_PI)
    worst = 0.0
    for _ in range(count):
        u = random_divfree(g, rng)
        a, b = nonlinear_term(u), convolution_nonlinear_term(u)
        worst = max(worst, float(np.max(np.abs(a.data - b.data))))
    return InvariantResult("nonlinear term vs direct convolution", worst <= 1e-10, f"max abs error {worst:.2e}")


def check_energy_orthogonality() -> InvariantResult:
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (8, 16):
        g = GridSpec(n, TWO_PI)
        u = random_divfree(g, rng)
        nl = nonlinear_term(u)
        inner = g.volume * float(np.sum(np.conj(nl.data) * u.data).real)
        scale = u.l2_norm() ** 3
        worst = max(worst, abs(inner) / scale)
    return InvariantResult("energy orthogonality of the nonlinearity", worst <= 1e-10, f"relative {worst:.2e}")


def check_data_reproducible() -> InvariantResult:
    g = GridSpec(16, TWO_PI)
    spec = InitialDataSpec("rough-sobolev", 7, 0.1, 0.5, 0.7)
    a = generate_initial_data(spec, g)
    b = generate_initial_data(spec, g)
    same = np.array_equal(a.data, b.data)
    return InvariantResult("initial data bit-reproducible", same, "identical" if same else "differs")


def check_semigroup_oracle() -> InvariantResult:
    err = semigroup_oracle_error()
    return InvariantResult("semigroup vs matrix exponential", err <= 1e-12, f"max abs error {err:.2e}")


def check_semigroup_algebra() -> InvariantResult:
    rng = np.random.default_rng(5)
    g = GridSpec(16, TWO_PI)
    u = random_divfree(g, rng)
    t, s, om = 0.3, 0.2, 7.0
    law = _rel(apply_semigroup(apply_semigroup(u, s, om), t, om), apply_semigroup(u, t + s, om))
    w = wave_operator(u, 1.3)
    comm_wave = _rel(apply_semigroup(w, t, om), wave_operator(apply_semigroup(u, t, om), 1.3))
    fact = _rel(factorized_semigroup(u, t, om), apply_semigroup(u, t, om))
    before, after = u.l2_norm(), apply_semigroup(u, t, om).l2_norm()
    ok = max(law, comm_wave, fact) <= 1e-12 and after < before
    return InvariantResult("semigroup law, commutation, factorized form, contraction", ok,
                           f"law {law:.1e}, commute {comm_wave:.1e}, factorized {fact:.1e}, "
                           f"L2 {after:.4g} < {before:.4g}")


def check_partition() -> InvariantResult:
    worst = 0.0
    for n in (16, 32, 64):
        g = GridSpec(n, TWO_PI)
        total = LPPartition(g).partition_sum()
        nz = g.k_magnitude > 0
        worst = max(worst, float(np.max(np.abs(total[nz] - 1))))
    return InvariantResult("Littlewood-Paley partition of unity", worst <= 1e-12, f"max deviation {worst:.2e}")


def check_norm_consistency() -> InvariantResult:
    rng = np.random.default_rng(6)
    g = GridSpec(16, TWO_PI)
    u = random_divfree(g, rng)
    phys = lp_norm(transform_inverse(u), 2)
    spec = sobolev_norm(u, 0.0, 2)
    planch = abs(phys - spec) / spec
    b1, b2 = besov_norm(u, 0.5, 2, 1), besov_norm(u, 0.5, 2, 2)
    ok = planch <= 1e-12 and b2 <= b1
    return InvariantResult("Plancherel and Besov monotonicity", ok, f"Plancherel {planch:.1e}, B(r=1) {b1:.4g} >= B(r=2) {b2:.4g}")


def check_fit_and_ratio() -> InvariantResult:
    t = np.geomspace(1, 1000, 30)
    s = NormSeries(0, 2, 0.0, t, 3.0 * t ** -0.75)
    err = abs(fit_rate(s).slope + 0.75)
    track = ratio_track(NormSeries(0, 2, 1.0, t, np.abs(np.sin(t)) + 0.1), 0, 2, 0, 1.0)
    mono = bool(np.all(np.diff(track.values) >= 0))
    ok = err <= 1e-10 and mono
    return InvariantResult("fit_rate exactness and ratio monotonicity", ok, f"slope error {err:.1e}, monotone {mono}")


def check_solver_divergence() -> InvariantResult:
    g = GridSpec(16, TWO_PI)
    u0 = generate_initial_data(InitialDataSpec("gaussian-divfree", 0, 0.5, 0.7), g)
    rec = simulate(u0, 2.0, IntegratorConfig("etd2rk", 1e-2, 0.2, 5, ()))
    div = max(divergence_residual(s) for s in rec.snapshots)
    mean = max(float(np.max(np.abs(s.data[:, 0, 0, 0]))) for s in rec.snapshots)
    energy = np.diff(rec.energy.kinetic)
    ok = div <= 1e-12 and mean == 0.0 and bool(np.all(energy <= 0))
    return InvariantResult("solver keeps divergence, zero mean, energy decrease", ok,
                           f"divergence {div:.1e}, mean {mean:.1e}")


def check_config_validation() -> InvariantResult:
    bad = "time.dt = -1\ngrid.n = 12\ndispersive.p = 1.5\nfoo.bar = 1\n"
    try:
        parse_text(bad)
        return InvariantResult("config validation collects every error", False, "accepted bad file")
    except ConfigError as exc:
        ok = len(exc.errors) >= 4
        return InvariantResult("config validation collects every error", ok, f"{len(exc.errors)} errors reported")


CHECKS = (check_transform_roundtrip, check_leray, check_nonlinear_oracle, check_energy_orthogonality,
          check_data_reproducible, check_semigroup_oracle, check_semigroup_algebra, check_partition,
          check_norm_consistency, check_fit_and_ratio, check_solver_divergence, check_config_validation)


def run_invariants() -> list[InvariantResult]:
    out = []
    for check in CHECKS:
        try:
            out.append(check())
        except Exception as exc:  # a crash counts as a failed check, not a crashed suite
            out.append(InvariantResult(check.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return out
