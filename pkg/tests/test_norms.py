import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rotns.fields import transform_inverse
from rotns.grid import GridSpec
from rotns.invariants import random_divfree
from rotns.norms import (INNER_EDGE, OUTER_EDGE, LPPartition, besov_norm, bernstein_check,
                         block_norms, cutoff, lp_block, lp_norm, lp_profile, sobolev_norm)


@pytest.mark.parametrize("n", [16, 32, 64])
def test_partition_of_unity(n):
    g = GridSpec(n, 2 * np.pi)
    total = LPPartition(g).partition_sum()
    assert np.max(np.abs(total[g.k_magnitude > 0] - 1)) <= 1e-12


@settings(max_examples=200)
@given(rho=st.floats(1e-3, 1e3))
def test_profile_telescopes(rho):
    ks = range(math.floor(math.log2(rho)) - 3, math.ceil(math.log2(rho)) + 3)
    assert abs(sum(float(lp_profile(rho / 2.0**k)) for k in ks) - 1) <= 1e-12


def test_profile_support_and_two_block_overlap():
    rho = np.linspace(0, 4, 40001)
    psi = lp_profile(rho)
    assert np.all(psi[rho < INNER_EDGE] == 0) and np.all(psi[rho > OUTER_EDGE] == 0)
    # at any radius at most two profiles are nonzero
    for r in np.geomspace(0.1, 100, 500):
        nonzero = sum(lp_profile(r / 2.0**k) > 0 for k in range(-6, 10))
        assert nonzero <= 2
    assert float(cutoff(1.5)) == 1.0 and float(cutoff(8 / 3)) == 0.0


def test_sobolev_matches_plancherel_sum(grid16, rng):
    u = random_divfree(grid16, rng)
    s = 0.7
    k = grid16.k_magnitude
    direct = np.sqrt(grid16.volume * np.sum(k ** (2 * s) * np.sum(np.abs(u.data) ** 2, axis=0)))
    assert abs(sobolev_norm(u, s, 2) / direct - 1) <= 1e-12
    assert abs(sobolev_norm(u, 0, 2) / lp_norm(transform_inverse(u), 2) - 1) <= 1e-12


def test_besov_monotone_in_r(grid16, rng):
    u = random_divfree(grid16, rng)
    vals = [besov_norm(u, 0.3, 2, r) for r in (1, 2, 4, np.inf)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_besov_l2_blocks_square_sum_bounded(grid16, rng):
    u = random_divfree(grid16, rng)
    blocks = block_norms(u, 2)
    assert sum(b.value**2 for b in blocks) <= 2 * u.l2_norm() ** 2 * (1 + 1e-12)


def test_bernstein_ratio_bounded(rng):
    g = GridSpec(32, 2 * np.pi)
    u = random_divfree(g, rng)
    rep = bernstein_check(u, 2, 2, np.inf)
    assert rep.ratio is not None and 0 < rep.ratio < 10


def test_empty_block_warns(grid16, rng):
    u = random_divfree(grid16, rng)
    with pytest.warns(RuntimeWarning):
        lp_block(u, 20)


def test_lp_norm_rejects_small_p(grid16, rng):
    with pytest.raises(ValueError):
        lp_norm(transform_inverse(random_divfree(grid16, rng)), 0.5)


def test_sup_norm_oversampled_not_below_grid_max(grid16, rng):
    phys = transform_inverse(random_divfree(grid16, rng))
    assert lp_norm(phys, np.inf) >= phys.magnitude().max() * (1 - 1e-12)
