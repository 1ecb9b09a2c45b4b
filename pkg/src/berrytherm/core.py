"""Physical constants, parameter containers and thermal-state arithmetic.

All frequencies are angular (rad/s).  Temperatures are in kelvin unless the
natural-units switch (``hbar = k_B = 1``) is used, in which case temperatures
are measured in the same units as frequencies.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as _codata

from .errors import DomainError, SaturationWarning, TruncationError

#: Largest field truncation produced by :func:`thermal_fock_weights`.
DEFAULT_FOCK_CAP = 20000

#: Thermal squeeze parameter above which a saturation warning is issued.
SATURATION_R_T = 20.0

#: Largest coupling-to-frequency ratio for which the analytic path is trusted.
WEAK_COUPLING_LIMIT = 1e-2


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    k_B: float


SI = PhysicalConstants(hbar=_codata.hbar, k_B=_codata.k)
NATURAL = PhysicalConstants(hbar=1.0, k_B=1.0)


def constants(natural_units: bool = False) -> PhysicalConstants:
    """Return the CODATA constants, or ``hbar = k_B = 1``."""
    return NATURAL if natural_units else SI


def hz_to_rad_s(value: float) -> float:
    """Convert a frequency in cycles per second to an angular frequency."""
    return 2.0 * math.pi * value


@dataclass(frozen=True)
class PhysicalParams:
    """The atom-field system.

    Parameters
    ----------
    coupling_lambda : float
        Coupling frequency in rad/s; zero is accepted for decoupled checks
        of the numerical paths only.  Without a cavity geometry this is the
        effective coupling seen by the atom.
    gap_Omega : float
        Atomic level spacing in rad/s.
    field_omega : float
        Frequency of the cavity mode in rad/s.
    cavity_length_L : float, optional
        Cavity length in metres.  When given, the coupling is multiplied by
        the normalised mode function evaluated at ``atom_position_x``.
    atom_position_x : float
        Atom position in metres, with the walls at ``x = +-L/2``.
    """

    coupling_lambda: float
    gap_Omega: float
    field_omega: float
    cavity_length_L: float | None = None
    atom_position_x: float = 0.0

    def __post_init__(self):
        for name in ("gap_Omega", "field_omega"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value!r}")
        # zero coupling is kept for the numerical oracles; the analytic frame rejects it
        lam = self.coupling_lambda
        if not (np.isfinite(lam) and lam >= 0):
            raise DomainError(f"coupling_lambda must be non-negative and finite, got {lam!r}")
        if self.cavity_length_L is not None:
            L = self.cavity_length_L
            if not L > 0:
                raise DomainError(f"cavity_length_L must be positive, got {L!r}")
            if abs(self.atom_position_x) > L / 2:
                raise DomainError("atom_position_x must lie within [-L/2, L/2]")

    @property
    def mode_factor(self) -> float:
        """Mode function amplitude ``sin(w (x + L/2) / c) / sqrt(w L / c)``.

        Equals one when no cavity geometry is given.
        """
        if self.cavity_length_L is None:
            return 1.0
        k = self.field_omega / _codata.c
        L = self.cavity_length_L
        return math.sin(k * (self.atom_position_x + L / 2)) / math.sqrt(k * L)

    @property
    def effective_coupling(self) -> float:
        return self.coupling_lambda * self.mode_factor

    @property
    def coupling_ratio(self) -> float:
        return abs(self.effective_coupling) / self.field_omega

    @property
    def weak_coupling(self) -> bool:
        return self.coupling_ratio < WEAK_COUPLING_LIMIT

    def require_weak_coupling(self) -> None:
        if not self.weak_coupling:
            raise DomainError(
                f"coupling/frequency ratio {self.coupling_ratio:.3g} is not below "
                f"{WEAK_COUPLING_LIMIT:g}; the analytic path does not apply"
            )

    def effective(self) -> PhysicalParams:
        """Geometry-free copy whose coupling is the effective coupling."""
        if self.cavity_length_L is None:
            return self
        return PhysicalParams(abs(self.effective_coupling), self.gap_Omega, self.field_omega)


def boltzmann_exponent(T: float, omega: float, *, natural_units: bool = False) -> float:
    """Return ``hbar * omega / (k_B * T)``."""
    if not T > 0:
        raise DomainError(f"temperature must be positive, got {T!r}")
    if not omega > 0:
        raise DomainError(f"frequency must be positive, got {omega!r}")
    c = constants(natural_units)
    return c.hbar * omega / (c.k_B * T)


def thermal_squeeze_param(T: float, omega: float, *, natural_units: bool = False) -> float:
    """Thermal squeezing parameter ``r_T`` with ``tanh r_T = exp(-hbar w / 2 k_B T)``.

    ``T = 0`` is the exact vacuum and returns ``0.0``.  Above ``r_T = 20`` a
    :class:`SaturationWarning` is emitted; the value is still finite.
    """
    if not omega > 0:
        raise DomainError(f"frequency must be positive, got {omega!r}")
    if T < 0 or not np.isfinite(T):
        raise DomainError(f"temperature must be finite and non-negative, got {T!r}")
    if T == 0:
        return 0.0
    half = 0.5 * boltzmann_exponent(T, omega, natural_units=natural_units)
    if half > 745.0:
        return 0.0
    q = math.exp(-half)
    # artanh(q) = 0.5 log1p(2q / (1 - q)), with 1 - q from expm1 for accuracy
    r = 0.5 * math.log1p(2.0 * q / -math.expm1(-half))
    if r > SATURATION_R_T:
        warnings.warn(
            f"thermal squeeze parameter r_T = {r:.3g} exceeds {SATURATION_R_T:g}",
            SaturationWarning,
            stacklevel=2,
        )
    return r


@dataclass(frozen=True)
class ThermalFieldState:
    """Thermal state of the cavity mode."""

    temperature_T: float
    field_omega: float
    r_T: float
    mean_occupation: float

    @classmethod
    def from_temperature(cls, T: float, omega: float, *, natural_units: bool = False):
        r = thermal_squeeze_param(T, omega, natural_units=natural_units)
        if T == 0 or r == 0.0:
            n_bar = 0.0
        else:
            n_bar = 1.0 / math.expm1(boltzmann_exponent(T, omega, natural_units=natural_units))
        return cls(T, omega, r, n_bar)

    @property
    def tanh2(self) -> float:
        """Geometric ratio ``tanh^2 r_T`` of the Fock weights."""
        return math.tanh(self.r_T) ** 2


@dataclass(frozen=True)
class ThermalWeights:
    """Truncated Fock-basis weights of a thermal state.

    ``deficit`` is the analytic missing probability ``tanh^(2 N_f) r_T``; the
    weights are deliberately not renormalised.
    """

    weights: np.ndarray = field(repr=False)
    N_f: int
    deficit: float

    @property
    def numeric_deficit(self) -> float:
        return 1.0 - float(math.fsum(self.weights))


def thermal_fock_weights(
    r_T: float, tail_tolerance: float, *, cap: int = DEFAULT_FOCK_CAP
) -> ThermalWeights:
    """Weights ``tanh^(2n) r_T / cosh^2 r_T`` for ``n < N_f``.

    ``N_f`` is the smallest truncation whose missing probability is below
    ``tail_tolerance``.
    """
    if not r_T >= 0:
        raise DomainError(f"r_T must be non-negative, got {r_T!r}")
    if not 0 < tail_tolerance < 1:
        raise DomainError(f"tail_tolerance must lie in (0, 1), got {tail_tolerance!r}")
    q2 = math.tanh(r_T) ** 2
    if q2 == 0.0:
        return ThermalWeights(np.ones(1), 1, 0.0)
    log_q2 = 2.0 * math.log(math.tanh(r_T))
    n_f = math.floor(math.log(tail_tolerance) / log_q2) + 1
    while math.exp(n_f * log_q2) >= tail_tolerance:
        n_f += 1
    if n_f > cap:
        raise TruncationError(f"thermal truncation N_f = {n_f} exceeds the cap {cap}")
    sech2 = 1.0 / math.cosh(r_T) ** 2
    n = np.arange(n_f)
    weights = sech2 * np.exp(n * log_q2)
    return ThermalWeights(weights, n_f, math.exp(n_f * log_q2))
