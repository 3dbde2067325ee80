import math

import pytest

from thzcov.antenna import sidelobe_gain
from thzcov.params import (ParameterError, SystemParams, db_to_linear, dbm_to_watts,
                           linear_to_db, mainlobe_width, watts_to_dbm)


def test_db_conversions_round_trip():
    assert dbm_to_watts(5.0) == pytest.approx(3.16228e-3, rel=1e-5)
    assert dbm_to_watts(-77.0) == pytest.approx(1.99526e-11, rel=1e-5)
    assert watts_to_dbm(dbm_to_watts(12.3)) == pytest.approx(12.3)
    assert linear_to_db(db_to_linear(-7.5)) == pytest.approx(-7.5)


def test_reference_derived_constants(ref_params):
    dc = ref_params.derived
    # hand evaluation of each defining expression
    assert dc.delta_h == pytest.approx(1.7)
    assert dc.alpha == pytest.approx(2 * 0.1 * 0.25 * 0.4 / 1.7, rel=1e-12)
    assert dc.alpha == pytest.approx(0.011764706, rel=1e-7)
    assert dc.xi == pytest.approx((3e8 / (4 * math.pi * 300e9)) ** 2, rel=1e-12)
    assert dc.xi == pytest.approx(6.33257e-9, rel=1e-5)
    assert dc.omega_A == pytest.approx(0.06625)
    assert dc.omega_1 == pytest.approx(0.4969456, rel=1e-6)
    assert dc.G_max == pytest.approx(4 * math.pi ** 2 * 256 * 1.0, rel=1e-12)
    assert dc.G_max == pytest.approx(10106.47, rel=1e-6)
    assert dc.G_S == pytest.approx(dc.G_S_ap * dc.G_S_ue)
    assert 0 < dc.G_S < 1


def test_heights_must_be_ordered():
    with pytest.raises(ParameterError, match="h_U < h_B < h_A"):
        SystemParams(h_U=5.0)


@pytest.mark.parametrize("field,value", [("d_AP", 0.0), ("R_A", -1.0), ("P_t", 0.0),
                                         ("N_A", 0), ("N_RF", 2.5), ("lambda_W", -0.1),
                                         ("omega_T", 0.0), ("topology", "triangle")])
def test_invalid_values_rejected(field, value):
    with pytest.raises(ParameterError, match=field):
        SystemParams(**{field: value})


def test_zero_densities_allowed():
    p = SystemParams(lambda_W=0.0, lambda_B=0.0)
    assert p.derived.alpha == 0.0


def test_sidelobe_gain_with_twice_gaussian_width_is_negative():
    # phi = 2 * omega_A puts more than 4*pi of power in the mainlobe at these sizes
    assert sidelobe_gain(16, 2 * 1.06 / 16, 2 * 1.06 / 16) < 0
    assert sidelobe_gain(2, 2 * 1.06 / 2, 2 * 1.06 / 2) < 0
    with pytest.raises(ParameterError, match="phi_scale"):
        SystemParams(phi_scale=2.0)


def test_mainlobe_width_half_power(ref_params):
    assert mainlobe_width(16) == pytest.approx(2 * 0.886 / 16)


def test_replace_revalidates(ref_params):
    with pytest.raises(ParameterError):
        ref_params.replace(h_B=10.0)
    assert ref_params.replace(N_A=32).derived.omega_A == pytest.approx(1.06 / 32)
