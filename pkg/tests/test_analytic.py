import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracture_sim.analytic import (
    brazilian_stress,
    cube_rounding_gap,
    cube_splitting_strength,
    eccentricity_strength,
    strength_ratios,
)
from fracture_sim.errors import InputError

pos = st.floats(1e-3, 1e3)


def test_brazilian_value():
    assert brazilian_stress(10e3, 0.1, 0.1) == pytest.approx(6.366198e5, rel=1e-6)
    assert brazilian_stress(0.0, 0.1, 0.1) == 0.0


def test_cube_values():
    assert cube_splitting_strength(10e3, 0.1) == pytest.approx(6.4e5)
    assert cube_splitting_strength(0.0, 0.1) == 0.0
    assert cube_splitting_strength(31.25e3, 0.1) == pytest.approx(2.0e6)
    assert cube_splitting_strength(10e3, 0.1, exact=True) == pytest.approx(brazilian_stress(10e3, 0.1, 0.1))


def test_rounding_gap():
    # 0.64 against 2/pi = 0.63662
    assert cube_rounding_gap() == pytest.approx(0.0053, abs=1e-4)
    ratio = cube_splitting_strength(1.0, 0.1) / brazilian_stress(1.0, 0.1, 0.1)
    assert ratio - 1 == pytest.approx(cube_rounding_gap(), rel=1e-12)


@pytest.mark.parametrize("args", [(1.0, 0.0, 0.1), (1.0, 0.1, -0.1)])
def test_brazilian_rejects_bad_dimensions(args):
    with pytest.raises(InputError):
        brazilian_stress(*args)


def test_cube_rejects_bad_rib():
    with pytest.raises(InputError):
        cube_splitting_strength(1.0, 0.0)


def test_strength_ratios():
    fw, cs = strength_ratios(80e3, 0.2 * 0.2, 0.04 * 0.2)
    assert cs == pytest.approx(1.0e7)
    assert fw == pytest.approx(2.0e6)
    assert strength_ratios(5.0, 2.0, 2.0) == (2.5, 2.5)
    assert strength_ratios(0.0, 1.0, 1.0) == (0.0, 0.0)
    with pytest.raises(InputError):
        strength_ratios(1.0, 0.0, 1.0)


@pytest.mark.parametrize("es, expected", [(0.0, 25.226), (100.0, 14.876), (50.0, 20.051)])
def test_eccentricity(es, expected):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert eccentricity_strength(es) == pytest.approx(expected, abs=1e-12)


def test_eccentricity_extrapolation_flagged():
    with pytest.warns(UserWarning, match="outside"):
        assert eccentricity_strength(-10.0) == pytest.approx(26.261)


@given(pos, pos, pos, st.floats(1e-2, 1e2))
def test_homogeneity(N, d, l, s):
    assert brazilian_stress(s * N, d, l) == pytest.approx(s * brazilian_stress(N, d, l), rel=1e-12)
    assert brazilian_stress(N, s * d, s * l) == pytest.approx(brazilian_stress(N, d, l) / s**2, rel=1e-12)
    assert cube_splitting_strength(N, s * d) == pytest.approx(cube_splitting_strength(N, d) / s**2, rel=1e-12)


@given(st.floats(0, 200), st.floats(1e-3, 100))
def test_eccentricity_decreasing(es, des):
    assert eccentricity_strength(es + des) < eccentricity_strength(es)


@given(pos, pos, st.floats(1e-3, 1.0))
def test_contact_stress_dominates(F, A, frac):
    fw, cs = strength_ratios(F, A, A * frac)
    assert cs >= fw * (1 - 1e-12)
    assert cs / fw == pytest.approx(1 / frac, rel=1e-9)
    assert math.isfinite(cs)
