"""Interaction-picture von Neumann evolution of atom plus thermal field.

The field starts in a thermal state, the atom in its ground state, and

    H_I(t) = g (d^+ e^{i Omega t} + d e^{-i Omega t}) (f e^{-i omega t} + f^+ e^{i omega t})

is integrated without a rotating-wave approximation.  ``g`` is the coupling
times the cavity mode factor at the (static) atom position.

Storage
-------
The density matrix is kept banded in the field index (see
:mod:`berrytherm._kernels_py`).  With an initially diagonal field state the
off-diagonal field distance stays within the atomic ladder depth up to terms
of order ``(g sqrt(n) / omega)^2``, so a band of half width ``2 (N_d - 1)``
holds everything that matters while the memory stays linear in ``N_f``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853, RK45, solve_ivp

from . import kernels
from .core import PhysicalParams, thermal_fock_weights, thermal_squeeze_param
from .errors import DomainError, IntegrationError, TruncationError
from .fock import FockSpace, annihilation

#: Atomic levels kept by default; two-quantum atomic excitation is already O(P^2).
DEFAULT_N_D = 3
#: Extra field levels above the thermal support.
FIELD_PAD = 8
MIN_SAMPLES_PER_CYCLE = 32
TRACE_TOLERANCE = 1e-6
STEPS_PER_FAST_PERIOD = 20

_METHODS = {"DOP853": DOP853, "RK45": RK45}


@dataclass(frozen=True)
class EvolutionResult:
    """Sampled excitation probability and run diagnostics.

    Attributes
    ----------
    t : ndarray
        Sample times in seconds.
    P_exc : ndarray
        Atomic excitation probability at each sample (normalised by the trace).
    N_f, N_d, band : int
        Truncation of the field, the atom and the field band half width.
    tail_deficit : float
        Thermal probability left out of the initial state.
    steps, nfev : int
        Accepted integrator steps and right-hand-side evaluations.
    rtol, atol : float
        Local error tolerances handed to the stepper.
    trace_drift : float
        Largest ``|Tr rho(t) - Tr rho(0)|`` over the samples.
    hermiticity_defect : float
        Largest Frobenius-relative ``||rho - rho^+|| / ||rho||`` over the samples.
    field_omega : float
        Sets the cycle length ``2 pi / omega``.
    """

    t: np.ndarray
    P_exc: np.ndarray
    N_f: int
    N_d: int
    band: int
    tail_deficit: float
    steps: int
    nfev: int
    rtol: float
    atol: float
    trace_drift: float
    hermiticity_defect: float
    field_omega: float
    backend: str = kernels.BACKEND
    final_state: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def cycles(self) -> np.ndarray:
        return self.t * self.field_omega / (2 * math.pi)

    @property
    def max_P(self) -> float:
        return float(np.max(self.P_exc))

    def max_P_within(self, cycles: float) -> float:
        sel = self.cycles <= cycles * (1 + 1e-12)
        return float(np.max(self.P_exc[sel]))


# band helpers


def initial_band(weights: np.ndarray, N_f: int, N_d: int, K: int) -> np.ndarray:
    R = np.zeros((N_f, 2 * K + 1, N_d, N_d), dtype=np.complex128)
    R[: len(weights), K, 0, 0] = weights
    return R


def band_trace(R: np.ndarray) -> float:
    K = (R.shape[1] - 1) // 2
    return float(np.real(np.einsum("iaa->", R[:, K])))


def band_excitation_probability(R: np.ndarray) -> float:
    """Excited-state population sum over the trace."""
    pops = kernels.band_populations(R)
    return float(pops[:, 1:].sum() / pops.sum())


def band_hermiticity_defect(R: np.ndarray) -> float:
    N, W = R.shape[:2]
    K = (W - 1) // 2
    d2 = np.sum(np.abs(R[:, K] - np.conj(np.swapaxes(R[:, K], 1, 2))) ** 2)
    for k in range(1, min(K, N - 1) + 1):
        diff = R[: N - k, K + k] - np.conj(np.swapaxes(R[k:, K - k], 1, 2))
        d2 += 2 * np.sum(np.abs(diff) ** 2)
    norm = math.sqrt(np.sum(np.abs(R) ** 2))
    return math.sqrt(d2) / norm if norm else 0.0


def band_to_dense(R: np.ndarray) -> np.ndarray:
    """Expand banded storage into a dense ``(N_f N_d, N_f N_d)`` matrix."""
    N, W, Nd, _ = R.shape
    K = (W - 1) // 2
    rho = np.zeros((N, Nd, N, Nd), dtype=R.dtype)
    for kk in range(W):
        k = kk - K
        lo, hi = max(0, -k), min(N, N - k)
        rows = np.arange(lo, hi)
        rho[rows, :, rows + k, :] = R[lo:hi, kk]
    return rho.reshape(N * Nd, N * Nd)


def dense_to_band(rho: np.ndarray, N_f: int, N_d: int, K: int) -> np.ndarray:
    r4 = rho.reshape(N_f, N_d, N_f, N_d)
    R = np.zeros((N_f, 2 * K + 1, N_d, N_d), dtype=np.complex128)
    for kk in range(2 * K + 1):
        k = kk - K
        lo, hi = max(0, -k), min(N_f, N_f - k)
        rows = np.arange(lo, hi)
        R[lo:hi, kk] = r4[rows, :, rows + k, :]
    return R


def min_eigenvalue(R: np.ndarray) -> float:
    """Smallest eigenvalue of the banded state, per total-parity block."""
    rho = band_to_dense(R)
    N, _, Nd, _ = R.shape
    n_f, n_d = np.divmod(np.arange(N * Nd), Nd)
    par = (n_f + n_d) % 2
    lo = math.inf
    for p in (0, 1):
        idx = np.flatnonzero(par == p)
        block = rho[np.ix_(idx, idx)]
        lo = min(lo, float(np.linalg.eigvalsh(0.5 * (block + block.conj().T))[0]))
    return lo


# dense reference


def interaction_hamiltonian(params: PhysicalParams, t: float, space: FockSpace) -> np.ndarray:
    """Dense ``H_I(t)`` on ``space`` (field index major)."""
    g = params.effective_coupling
    f = annihilation(space.N_f)
    d = annihilation(space.N_d)
    cf = np.exp(-1j * params.field_omega * t)
    ca = np.exp(-1j * params.gap_Omega * t)
    Y = cf * f + np.conj(cf) * f.T
    X = ca * d + np.conj(ca) * d.T
    return g * np.kron(Y, X)


def dense_rhs(params: PhysicalParams, t: float, rho: np.ndarray, space: FockSpace) -> np.ndarray:
    H = interaction_hamiltonian(params, t, space)
    return -1j * (H @ rho - rho @ H)


def excitation_probability(rho: np.ndarray, N_d: int) -> float:
    """``1 - <0| Tr_field rho |0>`` for a dense state.

    Raises
    ------
    DomainError
        If the trace deviates from one by more than ``1e-6``.
    """
    rho = np.asarray(rho)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOLERANCE:
        raise DomainError(f"state is not normalised: Tr rho = {tr!r}")
    D = rho.shape[0]
    if D % N_d:
        raise DomainError("matrix size is not a multiple of the atomic dimension")
    N_f = D // N_d
    atom = np.einsum("iaib->ab", rho.reshape(N_f, N_d, N_f, N_d))
    return float(1.0 - atom[0, 0].real)


def excitation_population_sum(rho: np.ndarray, N_d: int) -> float:
    """``sum_{a >= 1}`` of the diagonal populations; independent of the partial trace."""
    pops = np.real(np.diag(rho)).reshape(-1, N_d)
    return float(pops[:, 1:].sum())


def thermal_initial_state(params: PhysicalParams, T: float, *, tail_tolerance: float, natural_units: bool = False):
    if T < 0:
        raise DomainError(f"temperature must be non-negative, got {T!r}")
    r = thermal_squeeze_param(T, params.field_omega, natural_units=natural_units)
    return thermal_fock_weights(r, tail_tolerance)


def evolve_dense(
    params: PhysicalParams,
    T: float,
    space: FockSpace,
    t_eval: np.ndarray,
    *,
    tol: float = 1e-10,
    tail_tolerance: float = 1e-6,
    natural_units: bool = False,
) -> np.ndarray:
    """Reference run with dense matrices; returns ``P_exc`` at ``t_eval``."""
    w = thermal_initial_state(params, T, tail_tolerance=tail_tolerance, natural_units=natural_units)
    if w.N_f > space.N_f:
        raise TruncationError(f"space holds {space.N_f} field levels, thermal state needs {w.N_f}")
    D = space.dim
    rho0 = np.zeros((D, D), dtype=np.complex128)
    idx = np.arange(w.N_f) * space.N_d
    rho0[idx, idx] = w.weights

    def fun(t, y):
        return dense_rhs(params, t, y.reshape(D, D), space).ravel()

    sol = solve_ivp(fun, (0.0, float(t_eval[-1])), rho0.ravel(), method="DOP853", t_eval=t_eval, rtol=tol, atol=tol * 1e-6)
    if not sol.success:
        raise IntegrationError(sol.message)
    out = []
    for y in sol.y.T:
        rho = y.reshape(D, D)
        out.append(excitation_population_sum(rho, space.N_d) / np.trace(rho).real)
    return np.array(out)


# main integrator


def evolve_von_neumann(
    params: PhysicalParams,
    T: float,
    space: FockSpace | None = None,
    cycles: float = 1,
    tol: float = 1e-8,
    *,
    samples_per_cycle: int = MIN_SAMPLES_PER_CYCLE,
    t_eval: np.ndarray | None = None,
    band: int | None = None,
    tail_tolerance: float = 1e-6,
    atol: float | None = None,
    method: str = "DOP853",
    max_step: float | None = None,
    natural_units: bool = False,
    keep_final: bool = False,
) -> EvolutionResult:
    """Integrate ``d rho / dt = -i [H_I(t), rho]`` from ``|0><0| (x) rho_T``.

    Parameters
    ----------
    params : PhysicalParams
        Coupling, atomic gap and field frequency in rad/s.
    T : float
        Field temperature.
    space : FockSpace, optional
        Truncation.  By default the field keeps the thermal support for
        ``tail_tolerance`` plus a small pad and the atom keeps
        ``DEFAULT_N_D`` levels.
    cycles : float
        Run length in units of ``2 pi / omega``; at least one.
    tol : float
        Relative local error tolerance of the embedded Runge-Kutta pair.
    t_eval : ndarray, optional
        Explicit sample times in seconds, overriding ``cycles`` and
        ``samples_per_cycle``.
    max_step : float, optional
        Step cap in seconds; defaults to ``STEPS_PER_FAST_PERIOD`` steps per
        period of ``Omega + omega``.

    Raises
    ------
    TruncationError
        If the thermal support needs more field levels than allowed.
    IntegrationError
        If the stepper fails.
    """
    omega, Omega = params.field_omega, params.gap_Omega
    g = params.effective_coupling
    period = 2 * math.pi / omega
    if t_eval is None:
        if cycles < 1:
            raise DomainError(f"cycles must be at least 1, got {cycles!r}")
        if samples_per_cycle < MIN_SAMPLES_PER_CYCLE:
            raise DomainError(f"need at least {MIN_SAMPLES_PER_CYCLE} samples per cycle")
        n_s = int(math.ceil(samples_per_cycle * cycles))
        t_eval = np.linspace(0.0, cycles * period, n_s + 1)
    else:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval.ndim != 1 or len(t_eval) == 0 or np.any(np.diff(t_eval) <= 0) or t_eval[0] < 0:
            raise DomainError("t_eval must be a non-empty increasing array of non-negative times")

    w = thermal_initial_state(params, T, tail_tolerance=tail_tolerance, natural_units=natural_units)
    if space is None:
        N_d = DEFAULT_N_D
        N_f = w.N_f + FIELD_PAD
    else:
        N_f, N_d = space.N_f, space.N_d
        if N_f < w.N_f:
            raise TruncationError(f"space holds {N_f} field levels, thermal state needs {w.N_f}")
    K = 2 * (N_d - 1) if band is None else int(band)
    K = max(1, min(K, N_f - 1))
    if atol is None:
        atol = tol * 1e-6

    shape = (N_f, 2 * K + 1, N_d, N_d)
    R0 = initial_band(w.weights, N_f, N_d, K)
    trace0 = band_trace(R0)
    buf = np.empty(shape, dtype=np.complex128)

    def fun(t, y):
        kernels.liouvillian_band(y.reshape(shape), g, complex(np.exp(-1j * Omega * t)), complex(np.exp(-1j * omega * t)), buf)
        return buf.ravel().copy()

    t_end = float(t_eval[-1])
    P = np.empty(len(t_eval))
    trace_drift = 0.0
    herm = 0.0
    steps = 0
    nfev = 0
    k = 0

    def record(R):
        nonlocal trace_drift, herm, k
        P[k] = band_excitation_probability(R)
        trace_drift = max(trace_drift, abs(band_trace(R) - trace0))
        herm = max(herm, band_hermiticity_defect(R))
        k += 1

    while k < len(t_eval) and t_eval[k] == 0.0:
        record(R0)
    y_last = R0.ravel()
    if k < len(t_eval):
        if max_step is None:
            # resolve the fastest counter-rotating phase even when the error estimate is tiny
            max_step = 2 * math.pi / (Omega + omega) / STEPS_PER_FAST_PERIOD
        solver = _METHODS[method](fun, 0.0, R0.ravel(), t_end, rtol=tol, atol=atol, max_step=max_step)
        while k < len(t_eval):
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationError(f"integration failed at t = {solver.t!r}: {msg}")
            steps += 1
            if k < len(t_eval) and t_eval[k] <= solver.t:
                dense = solver.dense_output()
                while k < len(t_eval) and t_eval[k] <= solver.t:
                    y = solver.y if t_eval[k] == solver.t else dense(t_eval[k])
                    record(np.asarray(y).reshape(shape))
            if solver.status == "finished":
                while k < len(t_eval):
                    record(solver.y.reshape(shape))
        nfev = solver.nfev
        y_last = solver.y
    if not np.all(np.isfinite(P)):
        raise IntegrationError("non-finite excitation probability")
    return EvolutionResult(
        t=t_eval,
        P_exc=P,
        N_f=N_f,
        N_d=N_d,
        band=K,
        tail_deficit=w.deficit,
        steps=steps,
        nfev=nfev,
        rtol=tol,
        atol=atol,
        trace_drift=trace_drift,
        hermiticity_defect=herm,
        field_omega=omega,
        final_state=np.array(y_last).reshape(shape) if keep_final else None,
    )


@dataclass(frozen=True)
class AdiabaticityReport:
    threshold: float
    cycles: float
    max_P: float
    passed: bool
    horizon_cycles: float | None
    result: EvolutionResult
    truncation_change: float | None = None

    @property
    def horizon_lower_bound(self) -> float:
        """Cycles for which the threshold provably holds on this run."""
        return self.horizon_cycles if self.horizon_cycles is not None else self.cycles

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        hz = f"{self.horizon_cycles:.6g}" if self.horizon_cycles is not None else f"> {self.cycles:g}"
        return (
            f"{status} max P_exc = {self.max_P:.3e} vs threshold {self.threshold:.1e} "
            f"over {self.cycles:g} cycles; horizon {hz} cycles"
        )


def first_crossing(cyc: np.ndarray, P: np.ndarray, threshold: float) -> float | None:
    above = np.flatnonzero(P > threshold)
    if not len(above):
        return None
    i = above[0]
    if i == 0:
        return float(cyc[0])
    # linear interpolation between the bracketing samples
    f = (threshold - P[i - 1]) / (P[i] - P[i - 1])
    return float(cyc[i - 1] + f * (cyc[i] - cyc[i - 1]))


def adiabaticity_check(
    params: PhysicalParams,
    T: float,
    cycles: float = 1,
    threshold: float = 1e-2,
    *,
    convergence: bool = False,
    **kwargs,
) -> AdiabaticityReport:
    """Run the evolution and compare the largest excitation with ``threshold``.

    With ``convergence=True`` the run is repeated with 25% more field levels
    and the relative change of the maximum is reported.
    """
    res = evolve_von_neumann(params, T, cycles=cycles, **kwargs)
    change = None
    if convergence:
        base = kwargs.pop("space", None)
        N_d = base.N_d if base is not None else DEFAULT_N_D
        N_f = base.N_f if base is not None else res.N_f
        bigger = FockSpace(int(math.ceil(1.25 * N_f)), N_d, max_dim=10**9)
        res2 = evolve_von_neumann(params, T, space=bigger, cycles=cycles, **kwargs)
        change = abs(res2.max_P - res.max_P) / max(res.max_P, np.finfo(float).tiny)
    mp = res.max_P
    return AdiabaticityReport(
        threshold=threshold,
        cycles=cycles,
        max_P=mp,
        passed=mp < threshold,
        horizon_cycles=first_crossing(res.cycles, res.P_exc, threshold),
        result=res,
        truncation_change=change,
    )
