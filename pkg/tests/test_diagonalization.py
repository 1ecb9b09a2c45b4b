import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from berrytherm.core import PhysicalParams
from berrytherm.diagonalization import (
    _MP,
    DressingFrame,
    _forward,
    _omega_hat_as_printed,
    constraint_check,
    dressed_level_index,
    dressed_levels,
    forward_from_frame,
    forward_map,
    inverse_solve,
    perturbative_guess,
)
from berrytherm.errors import ConstraintViolation, ConvergenceError, DomainError
from berrytherm.fock import FockSpace, lowest_eigenvalues, build_hamiltonian
from berrytherm.validation import normal_mode_oracle

from .conftest import FIG2_PANELS

# forward closed forms at nu_d = 1, nu_f = e^4, v = 0.1, evaluated with 40-digit mpmath
FROZEN_TRIPLE = (1.2214027581601698, 54.593645805570514, 2.3439260343360116)


def test_decoupled_limit_of_forward_map():
    lams = [forward_map(1.1, 1.0, v).coupling_lambda for v in (1e-2, 1e-4, 1e-6, 1e-8)]
    assert all(b < a for a, b in zip(lams, lams[1:]))
    assert lams[-1] < 1e-4


def test_frozen_triple():
    r = forward_map(math.e**4, 1.0, 0.1)
    assert (r.field_omega, r.gap_Omega, r.coupling_lambda) == pytest.approx(FROZEN_TRIPLE, rel=1e-12)


def test_frozen_triple_high_precision():
    with mpmath.workdps(40):
        out = _forward(mpmath.mpf(1), mpmath.mpf(2), mpmath.mpf("0.1"), _MP)
        assert [float(x) for x in out[:3]] == pytest.approx(FROZEN_TRIPLE, rel=1e-15)


def test_frozen_triple_normal_modes():
    # an independent diagonalization of the generated Hamiltonian returns the frame
    modes = normal_mode_oracle(PhysicalParams(FROZEN_TRIPLE[2], FROZEN_TRIPLE[1], FROZEN_TRIPLE[0]))
    assert modes["nu_f"] == pytest.approx(math.e**4, rel=1e-12)
    assert modes["nu_d"] == pytest.approx(1.0, rel=1e-12)


def test_forward_map_spectrum_oracle():
    r = forward_map(1.02, 1.0, 0.003)
    frame = DressingFrame.from_modes(1.02, 1.0, 0.003)
    H = build_hamiltonian(r.as_params(), 0.0, FockSpace(40, 12))
    num = lowest_eigenvalues(H, 8)
    ana = [e for e, _, _ in dressed_levels(frame, 8)]
    assert np.max(np.abs(num - ana)) < 1e-9


def test_forward_map_invariants():
    r = forward_map(1.3, 1.0, 0.05)
    assert r.gap_Omega == pytest.approx(math.sqrt(r.Omega_hat**2 - 4 * r.Z**2), rel=1e-12)
    assert 2 * r.p == pytest.approx(math.atanh(-2 * r.Z / r.Omega_hat), rel=1e-12)


def test_forward_map_constraint_errors():
    with pytest.raises(ConstraintViolation):
        forward_map(math.exp(0.2), 1.0, 0.1)
    with pytest.raises(ConstraintViolation):
        forward_map(2.0, 1.0, 0.0)
    with pytest.raises(ConstraintViolation):
        forward_map(2.0, -1.0, 0.1)


def test_printed_omega_hat_fails_dimension_check():
    # scaling both frequencies by k must scale every frequency output by k
    base = _omega_hat_as_printed(1.3, 1.0, 0.05)
    scaled = _omega_hat_as_printed(2.6, 2.0, 0.05)
    assert scaled / base == pytest.approx(4.0, rel=1e-12)
    r1, r2 = forward_map(1.3, 1.0, 0.05), forward_map(2.6, 2.0, 0.05)
    assert r2.Omega_hat / r1.Omega_hat == pytest.approx(2.0, rel=1e-12)


def test_inverse_roundtrip(ref_params):
    frame, info = inverse_solve(ref_params, return_info=True)
    fm = forward_from_frame(frame)
    for a, b in ((fm.field_omega, ref_params.field_omega), (fm.gap_Omega, ref_params.gap_Omega),
                 (fm.coupling_lambda, ref_params.coupling_lambda)):
        assert abs(a / b - 1) < 1e-10
    assert info.residual < 1e-10
    assert info.iterations <= 50


@pytest.mark.parametrize("gap,omega", [(2e6, 2.1e6), (2.1e6, 2e6)])
def test_inverse_free_limit(gap, omega):
    # far off resonance the squeeze of the mode that carries the weight vanishes
    f = inverse_solve(PhysicalParams(1e-3, gap, omega))
    assert f.nu_f == pytest.approx(max(gap, omega), rel=1e-12)
    assert f.nu_d == pytest.approx(min(gap, omega), rel=1e-12)
    assert min(f.u, f.v) < 1e-15 * f.C
    assert constraint_check(f).passed


def test_inverse_field_above_gap_keeps_small_squeeze():
    f = inverse_solve(PhysicalParams(10.0, 2e6, 2.1e6))
    fm = forward_from_frame(f)
    assert fm.coupling_lambda == pytest.approx(10.0, rel=1e-10)


def test_inverse_detuning_below():
    f = inverse_solve(PhysicalParams(1e3, 2e6, 1.9e6))
    assert constraint_check(f).passed


def test_finite_difference_jacobian_agrees(ref_params):
    a = inverse_solve(ref_params)
    b = inverse_solve(ref_params, jacobian="fd")
    assert b.v == pytest.approx(a.v, rel=1e-12)
    assert b.nu_d == pytest.approx(a.nu_d, rel=1e-12)


def test_inverse_errors(ref_params):
    with pytest.raises(DomainError):
        inverse_solve(PhysicalParams(5e4, 1e6, 1e6))
    with pytest.raises(DomainError):
        inverse_solve(PhysicalParams(0.0, 1e6, 1e6))
    with pytest.raises(ConvergenceError):
        inverse_solve(ref_params, max_iter=0)


def test_perturbative_guess_near_solution(ref_params, ref_frame):
    nu_d, C, v = perturbative_guess(ref_params)
    assert nu_d == pytest.approx(ref_frame.nu_d, rel=1e-6)
    assert v == pytest.approx(ref_frame.v, rel=1e-2)


def test_constraint_check_cases(ref_frame):
    assert constraint_check(ref_frame).passed
    # nu_f / nu_d = exp(2 v) exactly
    edge = DressingFrame.from_log_ratio(1.0, 0.1, 0.1)
    report = constraint_check(edge)
    assert not report.passed
    assert not report["nu_f/nu_d > exp(2v)"].passed
    broken = DressingFrame(ref_frame.nu_f, ref_frame.nu_d, ref_frame.v, ref_frame.u * 1.1, ref_frame.s,
                           ref_frame.p, ref_frame.C)
    assert not constraint_check(broken)["u = C - v"].passed
    assert "FAIL" in str(report)


@pytest.mark.parametrize("omega,T_hot", FIG2_PANELS)
def test_fig2_frames_pass(omega, T_hot):
    assert constraint_check(inverse_solve(PhysicalParams(1.2e3, omega, omega))).passed


def test_level_labels(ref_frame):
    labels = [(m, n) for _, m, n in dressed_levels(ref_frame, 6)]
    assert labels == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert [dressed_level_index(ref_frame, m) for m in range(3)] == [0, 2, 5]
    # far from resonance many lower-mode levels sit below one upper quantum
    far = DressingFrame.from_modes(10.5, 1.0, 0.01)
    assert dressed_level_index(far, 1) == 11


def test_spacings_match_frame_at_weak_coupling():
    p = PhysicalParams(1e3, 1e6, 1e6)
    f = inverse_solve(p)
    ev = lowest_eigenvalues(build_hamiltonian(p, 0.0, FockSpace(30, 8)), 3)
    assert ev[1] - ev[0] == pytest.approx(f.nu_d, rel=1e-6)
    assert ev[2] - ev[0] == pytest.approx(f.nu_f, rel=1e-6)


def test_continuity_in_coupling():
    lams = 1.2e3 * (1 + np.linspace(-0.01, 0.01, 21))
    vs = [inverse_solve(PhysicalParams(l, 1e6, 1e6)).v for l in lams]
    assert np.all(np.diff(vs) > 0)


@settings(max_examples=200)
@given(
    log_nu_d=st.floats(5.0, 9.0),
    log_C=st.floats(-6.0, -2.5),
    frac=st.floats(0.03, 0.97),
)
def test_property_roundtrip_from_frame(log_nu_d, log_C, frac):
    nu_d = 10**log_nu_d
    C = 10**log_C
    v = frac * C
    nu_f = nu_d * math.exp(2 * C)
    params = forward_map(nu_f, nu_d, v).as_params()
    assume(params.weak_coupling)
    f = inverse_solve(params)
    assert f.nu_f == pytest.approx(nu_f, rel=1e-8)
    assert f.nu_d == pytest.approx(nu_d, rel=1e-8)
    assert f.v == pytest.approx(v, rel=1e-8)


@given(C=st.floats(1e-4, 3.0), frac=st.floats(1e-3, 0.999))
def test_property_branch_always_valid(C, frac):
    # |2Z / Omega_hat| < 1 holds on the whole valid region
    r = _forward(1.0, C, frac * C, _MP)
    assert abs(r[6]) < 1
