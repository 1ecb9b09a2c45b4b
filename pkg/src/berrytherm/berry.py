"""Closed-form geometric phases of the dressed atom-field system.

Phase conventions
-----------------
* ``gamma_In`` is the phase of the dressed state with ``n`` quanta in the upper
  normal mode ``nu_f``: ``2 pi (n G + gamma_I0)``.  It equals ``2 pi`` times the
  mean field occupation of that state, which is what the discrete holonomy in
  :mod:`berrytherm.fock` measures.
* The thermal phase uses the offset ``2 pi gamma_I0`` (same bracket as
  ``gamma_In``).  The offset cancels in every phase difference.
* ``Arg`` is the principal value in ``(-pi, pi]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ThermalFieldState, boltzmann_exponent
from .diagonalization import DressingFrame, constraint_check, forward_from_frame
from .errors import ConstraintViolation

#: Distance from the branch cut below which a phase is flagged.
BRANCH_CUT_WINDOW = 1e-6


def _require_valid(frame: DressingFrame) -> None:
    if not (frame.v > 0 and frame.u > 0 and frame.nu_d > 0 and frame.nu_f > 0):
        raise ConstraintViolation(f"invalid dressing frame:\n{constraint_check(frame)}")


def principal_arg(z) -> np.ndarray | float:
    """``Arg z`` in ``(-pi, pi]``; a negative zero imaginary part maps to ``+pi``."""
    a = np.angle(z)
    a = np.where(a == -math.pi, math.pi, a)
    return float(a) if np.ndim(a) == 0 else a


def wrap(x):
    """Map a phase onto ``(-pi, pi]``."""
    x = np.asarray(x, dtype=float)
    # leave in-range values untouched; the shifted form rounds small phases to ~1e-16 absolute
    inside = (x > -math.pi) & (x <= math.pi)
    out = np.where(inside, x, math.pi - np.mod(math.pi - x, 2 * math.pi))
    return float(out) if np.ndim(out) == 0 else out


def unit_phase(G: float, sign: int = 1) -> complex:
    """``exp(sign * 2 pi i G)`` evaluated relative to the nearest half integer.

    Near ``G = 1/2`` the interesting part of the phase is ``G - 1/2``, which
    can be far smaller than the rounding error of ``2 pi G``.
    """
    m = round(2.0 * G)
    rest = G - 0.5 * m
    base = -1.0 if m % 2 else 1.0
    return base * complex(math.cos(2 * math.pi * rest), sign * math.sin(2 * math.pi * rest))


def G_factor(frame: DressingFrame) -> float:
    """Per-quantum phase factor ``nu_d sinh 2v cosh 2u / (nu_f sinh 2u + nu_d sinh 2v)``."""
    _require_valid(frame)
    sh2u, sh2v = math.sinh(2 * frame.u), math.sinh(2 * frame.v)
    return frame.nu_d * sh2v * math.cosh(2 * frame.u) / (frame.nu_f * sh2u + frame.nu_d * sh2v)


def gamma_I0(frame: DressingFrame) -> float:
    """Ground-state coefficient, in cycles (multiply by ``2 pi`` for radians)."""
    _require_valid(frame)
    u, v = frame.u, frame.v
    num = frame.nu_f * math.sinh(v) ** 2 * math.sinh(2 * u) + frame.nu_d * math.sinh(2 * v) * math.sinh(u) ** 2
    return num / (frame.nu_f * math.sinh(2 * u) + frame.nu_d * math.sinh(2 * v))


def gamma_offset(frame: DressingFrame) -> float:
    return 2 * math.pi * gamma_I0(frame)


def gamma_In(frame: DressingFrame, n: int) -> float:
    """``2 pi (n G + gamma_I0)`` in radians, unwrapped."""
    if n < 0:
        raise ValueError("n must be non-negative")
    return 2 * math.pi * (n * G_factor(frame) + gamma_I0(frame))


@dataclass(frozen=True)
class PhaseResult:
    gamma_I0: float
    G: float
    gamma_T: float
    near_branch_cut: bool = False
    arg_branch: str = "principal (-pi, pi]"


def _thermal_arg(G: float, q: float) -> float:
    """``Arg(1 - q e^{2 pi i G})`` for ``0 <= q < 1``."""
    return principal_arg(1.0 - q * unit_phase(G, +1))


def thermal_phase(frame: DressingFrame, state: ThermalFieldState) -> PhaseResult:
    """Berry phase of the thermal state with diagnostics.

    ``gamma_T = 2 pi gamma_I0 - Arg(cosh^2 r - e^{2 pi i G} sinh^2 r)``.  The
    argument is evaluated after division by ``cosh^2 r``, which leaves ``Arg``
    unchanged.
    """
    G = G_factor(frame)
    g0 = gamma_I0(frame)
    arg = _thermal_arg(G, state.tanh2)
    return PhaseResult(
        gamma_I0=g0,
        G=G,
        gamma_T=2 * math.pi * g0 - arg,
        near_branch_cut=abs(arg) > math.pi - BRANCH_CUT_WINDOW,
    )


def gamma_thermal(frame: DressingFrame, state: ThermalFieldState) -> float:
    return thermal_phase(frame, state).gamma_T


def thermal_phase_sum(frame: DressingFrame, weights: np.ndarray) -> complex:
    """``sum_n w_n exp(i gamma_In)`` over explicit Fock weights."""
    G = G_factor(frame)
    n = np.arange(len(weights))
    # per-term phases reduced with the same half-integer trick as unit_phase
    m = np.round(2.0 * G)
    rest = G - 0.5 * m
    sign = np.where((n * int(m)) % 2 == 1, -1.0, 1.0)
    terms = sign * np.exp(2j * math.pi * n * rest)
    return complex(np.exp(1j * gamma_offset(frame)) * np.sum(weights * terms))


def _delta_term(G: float, x: float) -> float:
    # Arg(1 - e^{-x - 2 pi i G})
    return principal_arg(1.0 - math.exp(-x) * unit_phase(G, -1))


def delta_phase(
    frame: DressingFrame,
    T1: float,
    T2: float,
    *,
    omega: float | None = None,
    natural_units: bool = False,
) -> float:
    """Interferometric phase difference between sources at ``T1`` and ``T2``.

    ``Arg(1 - e^{-hbar w/k T1 - 2 pi i G}) - Arg(1 - e^{-hbar w/k T2 - 2 pi i G})``,
    wrapped to ``(-pi, pi]``.  ``omega`` defaults to the field frequency
    generated by ``frame``.
    """
    if omega is None:
        omega = forward_from_frame(frame).field_omega
    G = G_factor(frame)
    a1 = _delta_term(G, boltzmann_exponent(T1, omega, natural_units=natural_units))
    if T1 == T2:
        return 0.0
    a2 = _delta_term(G, boltzmann_exponent(T2, omega, natural_units=natural_units))
    return wrap(a1 - a2)


def delta_from_G(G: float, x1: float, x2: float) -> float:
    """Phase difference for explicit Boltzmann exponents ``x1``, ``x2``."""
    if x1 == x2:
        return 0.0
    return wrap(_delta_term(G, x1) - _delta_term(G, x2))
