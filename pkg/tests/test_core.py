import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from berrytherm.core import (
    NATURAL,
    SI,
    PhysicalParams,
    ThermalFieldState,
    boltzmann_exponent,
    hz_to_rad_s,
    thermal_fock_weights,
    thermal_squeeze_param,
)
from berrytherm.errors import DomainError, SaturationWarning, TruncationError

# 40-digit mpmath evaluation with hbar = h / 2 pi and k_B from the 2019 SI
R_T_1K_1GHZ = 2.211527158964320
X_1MK_1MHZ = 0.04799243073366221


def test_constants_are_codata():
    assert SI.hbar == pytest.approx(6.62607015e-34 / (2 * math.pi), rel=1e-15)
    assert SI.k_B == 1.380649e-23
    assert NATURAL.hbar == NATURAL.k_B == 1.0


def test_params_validation():
    with pytest.raises(DomainError):
        PhysicalParams(1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        PhysicalParams(1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        PhysicalParams(-1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        PhysicalParams(1.0, 1.0, 1.0, cavity_length_L=1.0, atom_position_x=0.6)


def test_weak_coupling_flag():
    assert PhysicalParams(1.2e3, 1e6, 1e6).weak_coupling
    strong = PhysicalParams(2e4, 1e6, 1e6)
    assert not strong.weak_coupling
    with pytest.raises(DomainError):
        strong.require_weak_coupling()


def test_mode_factor():
    assert PhysicalParams(1.0, 1.0, 1.0).mode_factor == 1.0
    c = 299792458.0
    L = 1.0
    omega = math.pi * c / L  # fundamental: sin(pi (x + L/2) / L) peaks at the centre
    p = PhysicalParams(1.0, omega, omega, cavity_length_L=L, atom_position_x=0.0)
    assert p.mode_factor == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
    wall = PhysicalParams(1.0, omega, omega, cavity_length_L=L, atom_position_x=-L / 2)
    assert wall.mode_factor == 0.0
    assert wall.effective().coupling_lambda == 0.0


def test_squeeze_vacuum_and_reference():
    assert thermal_squeeze_param(0.0, 1e9) == 0.0
    assert thermal_squeeze_param(1.0, 2 * math.pi * 1e9) == pytest.approx(R_T_1K_1GHZ, rel=1e-14)


def test_squeeze_saturation_warning():
    with pytest.warns(SaturationWarning):
        r = thermal_squeeze_param(1e6, 1.0)
    assert math.isfinite(r)


def test_squeeze_rejects_bad_frequency():
    with pytest.raises(DomainError):
        thermal_squeeze_param(1.0, 0.0)


def test_boltzmann_exponent():
    T = SI.hbar * 1e9 / SI.k_B
    assert boltzmann_exponent(T, 1e9) == pytest.approx(1.0, rel=1e-15)
    assert boltzmann_exponent(2 * T, 1e9) == pytest.approx(0.5, rel=1e-15)
    assert boltzmann_exponent(1e-3, 2 * math.pi * 1e6) == pytest.approx(X_1MK_1MHZ, rel=1e-14)
    with pytest.raises(DomainError):
        boltzmann_exponent(0.0, 1.0)


def test_natural_units_switch():
    assert boltzmann_exponent(2.0, 1.0, natural_units=True) == 0.5


def test_hz_conversion():
    assert hz_to_rad_s(1.0) == 2 * math.pi


def test_thermal_state():
    s = ThermalFieldState.from_temperature(1.0, 1e9)
    assert s.mean_occupation == pytest.approx(math.sinh(s.r_T) ** 2, rel=1e-12)
    assert ThermalFieldState.from_temperature(0.0, 1e9).mean_occupation == 0.0


def test_fock_weights_vacuum():
    w = thermal_fock_weights(0.0, 1e-12)
    assert w.N_f == 1
    assert w.weights.tolist() == [1.0]


def test_fock_weights_geometric_oracle():
    # n_bar = 20 means sinh^2 r = 20
    r = math.asinh(math.sqrt(20.0))
    w = thermal_fock_weights(r, 1e-8)
    q = math.tanh(r) ** 2
    assert q ** w.N_f < 1e-8 <= q ** (w.N_f - 1)
    # sech^2 r = 1 - q, so the partial geometric sum is 1 - q^N
    closed = 1 - q ** w.N_f
    assert math.fsum(w.weights) == pytest.approx(closed, rel=1e-12)
    assert w.deficit == pytest.approx(q ** w.N_f, rel=1e-12)
    assert w.numeric_deficit == pytest.approx(w.deficit, abs=1e-14)


def test_fock_weights_cap():
    with pytest.raises(TruncationError):
        thermal_fock_weights(6.0, 1e-12, cap=100)
    with pytest.raises(DomainError):
        thermal_fock_weights(1.0, 1.5)


@given(
    T=st.floats(1e-6, 1e2),
    omega=st.floats(1e5, 1e11),
)
def test_tanh_identity(T, omega):
    r = thermal_squeeze_param(T, omega)
    assert abs(math.tanh(r) - math.exp(-boltzmann_exponent(T, omega) / 2)) < 1e-14


@given(r=st.floats(1e-3, 4.0), tol=st.floats(1e-12, 1e-2))
def test_weights_monotone_and_deficit(r, tol):
    w = thermal_fock_weights(r, tol)
    assert np.all(w.weights >= 0)
    assert np.all(np.diff(w.weights) <= 0)
    assert w.deficit < tol
    assert w.deficit == pytest.approx(math.tanh(r) ** (2 * w.N_f), rel=1e-9)


@given(T=st.floats(1e-4, 10.0), omega=st.floats(1e6, 1e10))
def test_pure(T, omega):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert thermal_squeeze_param(T, omega) == thermal_squeeze_param(T, omega)
