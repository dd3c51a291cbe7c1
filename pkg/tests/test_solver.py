import numpy as np
import pytest

from rotns.fields import divergence_residual
from rotns.grid import GridSpec
from rotns.initial_data import InitialDataSpec, generate_initial_data
from rotns.invariants import random_divfree
from rotns.semigroup import apply_semigroup
from rotns.solver import (IntegratorConfig, SimulationError, admissibility_check, admissible_inverse_q,
                          energy_audit, pde_residual, scaling_check, simulate, smallness_check)

TWO_PI = 2 * np.pi


@pytest.fixture
def u0():
    return generate_initial_data(InitialDataSpec("gaussian-divfree", 0, 0.5, 0.7), GridSpec(16, TWO_PI))


def test_config_validation_lists_every_problem():
    errs = IntegratorConfig("rk4", -1.0, 1.0, 0, ((0, 0.5),)).validate()
    assert len(errs) == 4


def test_t_end_must_be_multiple_of_dt():
    assert IntegratorConfig(dt=0.3, t_end=1.0).validate()


@pytest.mark.parametrize("scheme", ["exp-euler", "etd2rk"])
def test_linear_only_matches_exact_semigroup(u0, scheme):
    cfg = IntegratorConfig(scheme, 0.01, 0.3, 10, (), linear_only=True)
    rec = simulate(u0, 4.0, cfg)
    exact = apply_semigroup(u0, 0.3, 4.0)
    assert np.max(np.abs(rec.final.data - exact.data)) <= 1e-12 * np.max(np.abs(u0.data))


def test_run_keeps_invariants(u0):
    rec = simulate(u0, 2.0, IntegratorConfig("etd2rk", 0.01, 0.3, 5, ((0, 2), (1, 2))))
    assert max(divergence_residual(s) for s in rec.snapshots) <= 1e-12
    assert all(np.all(s.data[:, 0, 0, 0] == 0) for s in rec.snapshots)
    assert np.all(np.diff(rec.energy.kinetic) <= 0)
    assert len(rec.norms[(0, 2)].times) == len(rec.snapshot_times) == 7


def test_energy_drift_second_order(u0):
    drifts = []
    for dt in (0.02, 0.01):
        drifts.append(energy_audit(simulate(u0, 1.0, IntegratorConfig("etd2rk", dt, 0.4, 100, ())).energy))
    assert 1.7 <= np.log2(drifts[0] / drifts[1]) <= 2.3


def test_exp_euler_first_order(u0):
    u = u0.scaled(4.0)
    ref = simulate(u, 1.0, IntegratorConfig("etd2rk", 0.0025, 0.2, 1000, ())).final
    errs = [(simulate(u, 1.0, IntegratorConfig("exp-euler", dt, 0.2, 1000, ())).final - ref).l2_norm()
            for dt in (0.02, 0.01)]
    assert 0.8 <= np.log2(errs[0] / errs[1]) <= 1.3


def test_rejects_non_divfree(u0):
    with pytest.raises(ValueError):
        simulate(u0.replace(u0.data, divergence_free=False), 1.0, IntegratorConfig(dt=0.01, t_end=0.02))


def test_blowup_reports_failure(u0):
    with pytest.raises(SimulationError):
        simulate(u0.scaled(1e3), 1.0, IntegratorConfig("etd2rk", 0.05, 0.5, 1, ()))
    rec = simulate(u0.scaled(1e3), 1.0, IntegratorConfig("etd2rk", 0.05, 0.5, 1, ()), raise_on_failure=False)
    assert rec.failure is not None and len(rec.energy.times) >= 1


@pytest.mark.parametrize("lam", [2.0, 3.0, 0.5])
def test_scaling_check(u0, lam):
    rep = scaling_check(u0, 3.0, IntegratorConfig("etd2rk", 0.01, 0.1, 100, (), keep_snapshots=False), lam)
    assert rep.relative_difference <= 1e-10


def test_residual_small_and_control_large(u0):
    rec = simulate(u0, 1.0, IntegratorConfig("etd2rk", 1e-3, 0.1, 5, ()))
    assert pde_residual(rec, 0.05, 1).relative <= 1e-3
    with pytest.raises(ValueError):
        pde_residual(rec, 0.0, 1)


def test_smallness_and_admissibility(u0):
    rep = smallness_check(u0, 0.7, 4.0)
    assert rep.value > 0
    with pytest.raises(ValueError):
        smallness_check(u0, 0.7, 0.0)
    lo, hi = admissible_inverse_q(0.7)
    iq = 0.5 * (lo + hi)
    q = 1 / iq
    lo_t, hi_t = 1.5 * (0.5 - iq), 2.5 * (0.5 - iq)
    ok = [admissibility_check(0.7, q, 1 / it) for it in np.linspace(lo_t, hi_t, 50)]
    assert any(r.admissible for r in ok)
    bad = admissibility_check(0.95, 3.0, 4.0)
    assert not bad.admissible and "s < 9/10" in bad.violations
