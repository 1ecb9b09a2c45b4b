import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from berrytherm.berry import (
    G_factor,
    _thermal_arg,
    delta_from_G,
    delta_phase,
    gamma_I0,
    gamma_In,
    gamma_offset,
    gamma_thermal,
    principal_arg,
    thermal_phase,
    thermal_phase_sum,
    unit_phase,
    wrap,
)
from berrytherm.core import PhysicalParams, ThermalFieldState, boltzmann_exponent, thermal_fock_weights
from berrytherm.diagonalization import DressingFrame, inverse_solve
from berrytherm.errors import ConstraintViolation

# leftmost Fig. 2 parameter set (lambda = 1.2e3, Omega = omega = 1e6 rad/s)
G_PANEL1 = 0.5000003591379396
# second panel at T = 10 mK: 40-digit direct sum of w_n exp(i gamma_In) over 3919 Fock terms
GAMMA_T_PANEL2_10MK = 1.135563106939354e-08


@pytest.fixture(scope="module")
def panel1():
    return inverse_solve(PhysicalParams(1.2e3, 1e6, 1e6))


@pytest.fixture(scope="module")
def panel2():
    return inverse_solve(PhysicalParams(1.2e3, 1e7, 1e7))


def test_decoupled_limits():
    Gs = [G_factor(DressingFrame.from_log_ratio(1.0, 0.1, v)) for v in (1e-3, 1e-6, 1e-9)]
    assert Gs[-1] < 1e-8 and Gs[0] > Gs[1] > Gs[2]
    g0 = [gamma_I0(DressingFrame.from_log_ratio(1.0, 0.1, v)) for v in (1e-6, 1e-9)]
    # both numerator terms carry at least one power of v
    assert g0[1] == pytest.approx(g0[0] * 1e-3, rel=1e-3)


def test_invalid_frame_rejected():
    bad = DressingFrame.from_log_ratio(1.0, 0.1, 0.2)
    with pytest.raises(ConstraintViolation):
        G_factor(bad)
    with pytest.raises(ConstraintViolation):
        gamma_I0(bad)


def test_frozen_G(panel1):
    assert G_factor(panel1) == pytest.approx(G_PANEL1, rel=1e-14)


def test_gamma_In_linear(panel1):
    assert gamma_In(panel1, 0) == 2 * math.pi * gamma_I0(panel1)
    steps = np.diff([gamma_In(panel1, n) for n in range(6)])
    np.testing.assert_allclose(steps, 2 * math.pi * G_factor(panel1), rtol=1e-14)
    with pytest.raises(ValueError):
        gamma_In(panel1, -1)


def test_gamma_continuity_in_coupling():
    vals = [gamma_I0(inverse_solve(PhysicalParams(l, 1e6, 1e6))) for l in 1.2e3 * (1 + np.linspace(-0.01, 0.01, 11))]
    rel = np.diff(vals) / vals[0]
    # gamma_I0 ~ lambda^2: each 0.2 % step changes it by about 0.4 %
    assert np.all((rel > 0.002) & (rel < 0.006))


def test_thermal_vacuum_limit(panel1):
    s = ThermalFieldState.from_temperature(0.0, 1e6)
    assert gamma_thermal(panel1, s) == gamma_offset(panel1)


def test_thermal_integer_G():
    for G in (0.0, 1.0, 3.0):
        assert _thermal_arg(G, 0.9) == 0.0


def test_thermal_frozen_and_direct_sum(panel2):
    s = ThermalFieldState.from_temperature(1e-2, 1e7)
    closed = gamma_thermal(panel2, s)
    w = thermal_fock_weights(s.r_T, 1e-13)
    direct = cmath.phase(thermal_phase_sum(panel2, w.weights))
    assert abs(closed - direct) < 1e-15
    assert closed == pytest.approx(GAMMA_T_PANEL2_10MK, abs=1e-16)
    assert not thermal_phase(panel2, s).near_branch_cut


@settings(max_examples=150)
@given(r=st.floats(1e-3, 2.2), G=st.floats(-3, 3))
def test_property_weighted_sum_identity(r, G):
    w = thermal_fock_weights(r, 1e-12).weights
    n = np.arange(len(w))
    lhs = np.angle(np.sum(w * np.exp(2j * math.pi * n * G)))
    rhs = -principal_arg(math.cosh(r) ** 2 - cmath.exp(2j * math.pi * G) * math.sinh(r) ** 2)
    assert abs(wrap(lhs - rhs)) < 1e-9


@given(G=st.floats(-2, 2), x1=st.floats(1e-4, 30), x2=st.floats(1e-4, 30), q=st.floats(0, 0.999))
def test_property_period_one_in_G(G, x1, x2, q):
    shifted = G + 1
    base = shifted - 1  # exactly representable partner of the shifted value
    assert abs(wrap(delta_from_G(shifted, x1, x2) - delta_from_G(base, x1, x2))) < 1e-12
    assert abs(wrap(_thermal_arg(shifted, q) - _thermal_arg(base, q))) < 1e-12


def test_unit_phase_near_half():
    z = unit_phase(0.5 + 1e-12)
    assert z.imag == pytest.approx(-math.sin(2 * math.pi * 1e-12), rel=1e-12)


def test_delta_basic(panel1):
    assert delta_phase(panel1, 1e-3, 1e-3) == 0.0
    for T1, T2 in ((1e-5, 1e-3), (3e-4, 2e-2)):
        assert delta_phase(panel1, T1, T2) == -delta_phase(panel1, T2, T1)


def test_delta_cold_vacuum_limit(panel1):
    x2 = boltzmann_exponent(1e-3, 1e6)
    expected = -principal_arg(1 - math.exp(-x2) * unit_phase(G_factor(panel1), -1))
    assert delta_phase(panel1, 1e-9, 1e-3) == pytest.approx(expected, abs=1e-15)


def test_delta_matches_thermal_difference_grid(panel1):
    temps = np.logspace(-7, -1, 10)
    worst = 0.0
    for T1 in temps:
        for T2 in temps:
            g1 = gamma_thermal(panel1, ThermalFieldState.from_temperature(T1, 1e6))
            g2 = gamma_thermal(panel1, ThermalFieldState.from_temperature(T2, 1e6))
            worst = max(worst, abs(wrap(delta_phase(panel1, T1, T2) - (g1 - g2))))
    assert worst < 1e-12


def test_wrap_and_principal_arg():
    assert wrap(math.pi) == math.pi
    assert wrap(-math.pi) == math.pi
    assert wrap(3 * math.pi) == pytest.approx(math.pi)
    assert wrap(1e-20) == 1e-20
    assert principal_arg(complex(-1.0, -0.0)) == math.pi
