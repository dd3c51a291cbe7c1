import math

import numpy as np
import pytest

from rotns.wholespace.data import WholeSpaceDatum
from rotns.wholespace.dispersive import CapProfile, bound_normalized, dispersive_field, fourier_l2
from rotns.wholespace.meridional import meridional_field, default_rule
from rotns.wholespace.quadrature import (QuadratureError, QuadratureSpec, fourier_l2_squared,
                                         whole_space_linear_eval, write_samples_csv, sample_rows)
from rotns.decay import dispersive_experiment

FAMILIES = ("projected-gaussian", "gaussian-divfree", "moment-zero-divfree")


@pytest.mark.parametrize("family", FAMILIES)
def test_quadrature_matches_heat_closed_form(family):
    d = WholeSpaceDatum(family, 0.3, 1.5)
    pts = np.array([[0.1, 0.2, 0.3], [0.5, -0.4, 0.0], [0.0, 0.0, 0.7], [1.0, 0.2, -0.6]])
    got = whole_space_linear_eval(d, 0.2, 0.0, pts)
    ref = d.heat_physical(pts, 0.2)
    assert np.max(np.abs(got.values - ref)) <= 1e-10 * np.max(np.abs(ref))


@pytest.mark.parametrize("family", FAMILIES)
def test_parseval_closed_form(family):
    d = WholeSpaceDatum(family, 0.2)
    for t, om, m in [(0.0, 0.0, 0), (0.5, 10.0, 1), (3.0, -2.0, 0.5)]:
        assert fourier_l2_squared(d, t, om, m) == pytest.approx(d.fourier_l2_squared(t, m), rel=1e-12)


def test_meridional_matches_tensor_rule_with_rotation():
    d = WholeSpaceDatum("gaussian-divfree", 0.2)
    t, om = 0.3, 5.0
    fld = meridional_field(d, t, om)
    r, z = 0.4, -0.3
    cyl = fld.point(r, z)  # (u_r, u_phi, u_z) at azimuth 0 -> (x, y, z) components
    ref = whole_space_linear_eval(d, t, om, [[r, 0.0, z]]).values[0]
    assert np.max(np.abs(cyl - ref)) <= 1e-9 * np.max(np.abs(fld.magnitude()))


def test_meridional_l2_matches_parseval():
    d = WholeSpaceDatum("gaussian-divfree", 0.1)
    fld = meridional_field(d, 1.0, 0.0, radial="gauss")
    assert fld.lp_norm(2) ** 2 == pytest.approx(d.fourier_l2_squared(1.0), rel=1e-6)


def test_meridional_sup_refinement_not_below_grid():
    fld = meridional_field(WholeSpaceDatum("projected-gaussian", 0.1), 0.5, 2.0)
    assert fld.sup_norm() >= fld.sup_norm(refine=False)


def test_unconverged_quadrature_raises():
    d = WholeSpaceDatum("gaussian-divfree", 0.1)
    with pytest.raises(QuadratureError):
        whole_space_linear_eval(d, 0.1, 50.0, [[3.0, 0.0, 0.0]],
                                QuadratureSpec(8, 8, 8, adaptive=False, tolerance=1e-12))


def test_rejects_non_closed_form_datum():
    with pytest.raises(TypeError):
        whole_space_linear_eval(np.zeros(3), 0.1, 1.0, [[0, 0, 0]])


def test_l1_norm_closed_forms():
    assert WholeSpaceDatum("gaussian-divfree", 0.5, 2.0).l1_norm() == pytest.approx(2 * math.sqrt(math.pi / 2) / 0.5)
    assert math.isnan(WholeSpaceDatum("projected-gaussian").l1_norm())


def test_samples_csv(tmp_path):
    d = WholeSpaceDatum("gaussian-divfree", 0.3)
    s = whole_space_linear_eval(d, 0.1, 1.0, [[0.1, 0.0, 0.0]])
    write_samples_csv(tmp_path / "s.csv", sample_rows(s))
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x1,x2,x3,t,omega,component,value,quad_error" and len(lines) == 4


def test_dispersive_l2_conserved_and_p_below_two_rejected():
    prof = CapProfile(0)
    ref = fourier_l2(prof, 0.0)
    for tau in (1.0, 50.0, 700.0):
        assert fourier_l2(prof, tau, -1) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(ValueError):
        dispersive_experiment(0, [10.0, 20.0], 1.5)


def test_dispersive_field_l2_matches_plancherel():
    prof = CapProfile(0)
    fld = dispersive_field(prof, 30.0)
    assert fld.lp_norm(2) == pytest.approx(fourier_l2(prof, 30.0), rel=1e-6)


def test_dispersive_block_scaling():
    prof = CapProfile(0)
    a = bound_normalized(prof, 20.0, np.inf)
    b = bound_normalized(prof.dilated(), 20.0, np.inf)
    assert b / a == pytest.approx(1.0, abs=1e-12)
