import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import assert_rel
from kerrlab import (
    DegenerateMeanError,
    FrameSpec,
    ModeParams,
    asymptotic_kappa3,
    cumulants,
    cumulants_at,
    loglog_slope,
    number_state_kappa4,
    quadrature_moments,
    skew_ratio,
)
from kerrlab.moments import QuadratureMoments, mp
from kerrlab.oracle import kerr_state, number_state, oracle_cumulants, oracle_quadrature_moments

Y_ROT = FrameSpec("rotating", math.pi / 2)


def moments_of(m1, m2, m3, m4):
    return QuadratureMoments(0.0, mp.mpf(m1), mp.mpf(m2), mp.mpf(m3), mp.mpf(m4), mp.mpf(0))


@given(
    st.complex_numbers(max_magnitude=8.0, allow_nan=False, allow_infinity=False),
    st.floats(-4.0, 4.0),
)
def test_gaussian_null(alpha, theta):
    q = quadrature_moments(ModeParams(alpha, 0.0), FrameSpec("lab", theta))
    c = cumulants(q)
    scale = max(1.0, float(q.m2) ** 2)
    assert abs(c.kappa3) <= 1e-10 * scale
    assert abs(c.kappa4_paper) <= 1e-10 * scale
    assert abs(c.kappa4_std) <= 1e-10 * scale
    assert c.kappa2 == pytest.approx(1.0, abs=1e-12)


def test_number_state_two_moments():
    # <X^4> of |2> is 6n^2 + 6n + 3 = 39.
    c = cumulants(moments_of(0, 5, 0, 39))
    assert c.kappa4_paper == -36.0
    assert c.kappa4_std == -36.0
    assert c.kappa3 == 0.0


def test_kerr_skew_is_negative_and_matches_oracle():
    n = 25.0
    m = ModeParams.from_photon_number(n, 1.0 / n)
    analytic = cumulants_at(m, Y_ROT)
    exact = oracle_cumulants(kerr_state(m), Y_ROT.effective_angle(m))
    assert analytic.kappa3 < 0
    assert_rel(analytic.kappa3, exact.kappa3, 1e-9)
    big = cumulants_at(ModeParams.from_photon_number(1000.0, 1.0 / 1000), Y_ROT)
    assert big.kappa3 < 0


def test_kappa4_convention_identity():
    for n in (1.0, 9.0, 30.0):
        for chi_t in (0.01, 0.2):
            for theta in (0.0, 0.5, 2.0):
                q = quadrature_moments(ModeParams.from_photon_number(n, chi_t, 0.4), FrameSpec("lab", theta))
                c = cumulants(q)
                assert_rel(c.kappa4_paper - c.kappa4_std, 3 * float(q.m1) * c.kappa3, 1e-10)


@pytest.mark.parametrize("n", [0, 3, 12])
def test_kappa4_variants_coincide_at_zero_mean(n):
    c = oracle_cumulants(number_state(n), 0.8)
    assert c.kappa4_paper == c.kappa4_std


def test_asymptotic_kappa3_examples():
    assert asymptotic_kappa3(1e6, 1.0) == pytest.approx(-0.256, rel=1e-15)
    assert asymptotic_kappa3(123.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        asymptotic_kappa3(0.0, 1.0)


def test_asymptotic_kappa3_agrees_at_large_n():
    n = 1e6
    for x in np.linspace(0.1, 2.0, 20):
        exact = cumulants_at(ModeParams.from_photon_number(n, x / n), Y_ROT).kappa3
        assert abs(exact / asymptotic_kappa3(n, x) - 1) <= 0.10


@pytest.mark.parametrize("n,expected", [(0, 0.0), (1, -12.0), (7, -336.0), (100, -60600.0)])
def test_number_state_kappa4(n, expected):
    assert number_state_kappa4(n) == expected


def test_number_state_kappa4_matches_oracle():
    assert_rel(oracle_cumulants(number_state(7), 0.0).kappa4_std, number_state_kappa4(7), 1e-12)


@pytest.mark.parametrize("bad", [-1, 2.5, "3"])
def test_number_state_kappa4_rejects_bad_input(bad):
    with pytest.raises((ValueError, TypeError)):
        number_state_kappa4(bad)


def test_skew_ratio_vanishes_for_coherent_state():
    r3, r4 = skew_ratio(ModeParams(3.0, 0.0), FrameSpec("rotating", math.pi / 2))
    assert abs(r3) < 1e-12 and abs(r4) < 1e-12


def test_skew_ratio_grows_linearly_with_n_at_fixed_chi_t():
    ns = np.logspace(5, 7, 9)
    r3 = [skew_ratio(ModeParams.from_photon_number(n, 1e-9), Y_ROT)[0] for n in ns]
    assert loglog_slope(ns, r3) == pytest.approx(1.0, abs=0.05)


def test_skew_ratio_degenerate_mean():
    with pytest.raises(DegenerateMeanError):
        skew_ratio(ModeParams(0.0, 0.1), FrameSpec("lab", 0.0), reference="same")


def test_kappa4_follows_inverse_n_at_fixed_chi_n_t():
    def kappa4(n):
        return cumulants_at(ModeParams.from_photon_number(n, 25.0 / n), Y_ROT).kappa4_paper

    assert kappa4(1e6) / kappa4(1e7) == pytest.approx(10.0, rel=0.05)
    # One decade lower the approach to the limiting law is slower; this matches the +-10% acceptance band.
    assert kappa4(1e5) / kappa4(1e6) == pytest.approx(10.0, rel=0.10)


def test_loglog_slope_exact_power():
    x = np.logspace(-2, 0, 11)
    assert loglog_slope(x, -3 * x**4) == pytest.approx(4.0, abs=1e-12)
    with pytest.raises(ValueError):
        loglog_slope([1.0], [1.0])


def test_cumulants_match_oracle_on_grid():
    for n in (1.0, 4.0, 16.0):
        for chi_t in (1e-3, 1e-1):
            m = ModeParams.from_photon_number(n, chi_t)
            for theta in (0.0, 0.3):
                a = cumulants_at(m, FrameSpec("lab", theta))
                o = oracle_cumulants(kerr_state(m), theta)
                assert_rel(a.kappa3, o.kappa3, 1e-9, floor=1e-6)
                assert_rel(a.kappa4_std, o.kappa4_std, 1e-9, floor=1e-6)


def test_oracle_moments_feed_cumulants():
    q = oracle_quadrature_moments(number_state(2), 0.0)
    assert (q.m1, q.m3) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert q.m2 == pytest.approx(5.0, rel=1e-15)
    assert q.m4 == pytest.approx(39.0, rel=1e-15)
