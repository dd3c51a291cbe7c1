import numpy as np
import pytest

from rotns.grid import GridSpec
from rotns.invariants import random_divfree
from rotns.nonlinear import convolution_nonlinear_term, nonlinear_term


def test_matches_direct_convolution(rng):
    g = GridSpec(8, 2 * np.pi)
    for _ in range(3):
        u = random_divfree(g, rng)
        assert np.max(np.abs(nonlinear_term(u).data - convolution_nonlinear_term(u).data)) <= 1e-10


@pytest.mark.parametrize("n,box", [(8, 1.0), (16, 2 * np.pi), (32, 5.0)])
def test_energy_orthogonality(n, box, rng):
    g = GridSpec(n, box)
    u = random_divfree(g, rng)
    nl = nonlinear_term(u)
    inner = g.volume * float(np.sum(np.conj(nl.data) * u.data).real)
    assert abs(inner) <= 1e-10 * u.l2_norm() ** 3


def test_output_is_dealiased_and_divergence_free(grid16, rng):
    from rotns.fields import divergence_residual
    nl = nonlinear_term(random_divfree(grid16, rng))
    assert np.all(nl.data[:, ~grid16.dealias_mask] == 0)
    assert divergence_residual(nl) <= 1e-12


def test_requires_divergence_free_flag(grid16, rng):
    u = random_divfree(grid16, rng)
    with pytest.raises(ValueError):
        nonlinear_term(u.replace(u.data, divergence_free=False))
