"""Brute-force oracle on a truncated two-mode Fock space.

Basis ordering is field index major, atom index minor: the state
``|n_f, n_d>`` sits at position ``n_f * N_d + n_d``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .berry import wrap
from .core import PhysicalParams
from .diagonalization import DressingFrame
from .errors import ConvergenceError, DegeneracyError, DomainError, TruncationError, TruncationWarning

#: Product dimension above which dense operators are refused.
MAX_DIM = 6000


@dataclass(frozen=True)
class FockSpace:
    N_f: int = 80
    N_d: int = 8
    max_dim: int = MAX_DIM

    def __post_init__(self):
        if self.N_f < 2 or self.N_d < 2:
            raise DomainError("each mode needs at least two Fock levels")
        if self.dim > self.max_dim:
            raise TruncationError(
                f"dimension {self.dim} exceeds the memory cap {self.max_dim}"
            )

    @property
    def dim(self) -> int:
        return self.N_f * self.N_d

    def enlarged(self, d_f: int, d_d: int) -> FockSpace:
        return FockSpace(self.N_f + d_f, self.N_d + d_d, max(self.max_dim, (self.N_f + d_f) * (self.N_d + d_d)))

    def parity_indices(self, parity: int) -> np.ndarray:
        """Basis positions whose total quantum number has the given parity."""
        n_f, n_d = np.divmod(np.arange(self.dim), self.N_d)
        return np.flatnonzero((n_f + n_d) % 2 == parity % 2)


def annihilation(n: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)


def mode_operators(space: FockSpace):
    """Return ``(f, d)`` as dense matrices on the product space."""
    f = np.kron(annihilation(space.N_f), np.eye(space.N_d))
    d = np.kron(np.eye(space.N_f), annihilation(space.N_d))
    return f, d


def _hamiltonian_parts(params: PhysicalParams, space: FockSpace):
    """``H(phi) = free + e^{i phi} K + e^{-i phi} K^+``."""
    f, d = mode_operators(space)
    nf = np.repeat(np.arange(space.N_f), space.N_d)
    nd = np.tile(np.arange(space.N_d), space.N_f)
    free = np.diag(params.field_omega * nf + params.gap_Omega * nd).astype(complex)
    K = params.effective_coupling * ((d + d.T) @ f.T)
    return free, K.astype(complex)


def build_hamiltonian(params: PhysicalParams, phi: float, space: FockSpace) -> np.ndarray:
    """``w f^+f + W d^+d + lam (d + d^+)(f^+ e^{i phi} + f e^{-i phi})`` as a dense matrix."""
    free, K = _hamiltonian_parts(params, space)
    ph = np.exp(1j * phi)
    return free + ph * K + np.conj(ph) * K.conj().T


def free_hamiltonian(nu_f: float, nu_d: float, space: FockSpace) -> np.ndarray:
    nf = np.repeat(np.arange(space.N_f), space.N_d)
    nd = np.tile(np.arange(space.N_d), space.N_f)
    return np.diag(nu_f * nf + nu_d * nd).astype(complex)


def hermiticity_defect(H: np.ndarray) -> float:
    scale = np.linalg.norm(H)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(H - H.conj().T) / scale)


def lowest_eigenvalues(H: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` lowest eigenvalues of a Hermitian matrix, ascending."""
    if hermiticity_defect(H) > 1e-12:
        raise DomainError("matrix is not Hermitian")
    k = min(k, H.shape[0])
    return sla.eigh(H, eigvals_only=True, subset_by_index=[0, k - 1], driver="evr")


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    convergence: float
    space: FockSpace


def numeric_spectrum(
    params: PhysicalParams, k: int, space: FockSpace | None = None, *, phi: float = 0.0
) -> SpectrumResult:
    """Lowest ``k`` levels with a truncation estimate from an ``(N_f+10, N_d+2)`` rerun.

    The estimate never drops below the dense-solver rounding floor, which
    grows with the largest diagonal entry of the bigger matrix.
    """
    space = space or FockSpace()
    ev = lowest_eigenvalues(build_hamiltonian(params, phi, space), k)
    big = space.enlarged(10, 2)
    H_big = build_hamiltonian(params, phi, big)
    ev_big = lowest_eigenvalues(H_big, k)
    floor = 8 * np.finfo(float).eps * float(np.max(np.abs(np.diag(H_big))))
    return SpectrumResult(ev, max(float(np.max(np.abs(ev_big - ev))), floor), space)


# -- dressing unitary ---------------------------------------------------------


def _generators(frame: DressingFrame, space: FockSpace):
    f, d = mode_operators(space)
    fd, dd = f.conj().T, d.conj().T
    # S_f(u, theta=0) = exp[u/2 (f^+2 - f^2)]
    g_sf = 0.5 * frame.u * (fd @ fd - f @ f)
    # S_d(v, theta=pi) = exp[v/2 (d^2 - d^+2)]
    g_sd = 0.5 * frame.v * (d @ d - dd @ dd)
    # D_fd(s, phase 0) = exp[s (f^+ d - f d^+)]
    g_mix = frame.s * (fd @ d - f @ dd)
    # auxiliary squeeze of magnitude p: exp[p/2 (d^+2 - d^2)]
    g_aux = 0.5 * frame.p * (dd @ dd - d @ d)
    n_f = fd @ f
    return g_sf, g_sd, g_mix, g_aux, n_f


def build_dressing_unitary(frame: DressingFrame, space: FockSpace) -> np.ndarray:
    """``U = S_f(u) S_d(v) D_fd(s) S'_d(p) R_f(phi)`` from truncated generators.

    The auxiliary squeeze is ``exp[(p/2)(d^+2 - d^2)]``; with this
    normalisation the conjugation ``U^+ H_0 U`` reproduces the coupling
    ``e^p lambda_0`` and ``tanh 2p = -2Z/Omega_hat``.

    The generators are truncated before exponentiation and stay
    anti-Hermitian, so ``U`` is unitary to rounding and truncation shows up in
    ``U^+ H_0 U`` instead.  :class:`TruncationWarning` is still emitted when
    ``U^+ U`` deviates from the identity by more than ``1e-8``, which guards
    against precision loss in ``expm`` at very large squeeze.
    """
    g_sf, g_sd, g_mix, g_aux, n_f = _generators(frame, space)
    U = sla.expm(g_sf) @ sla.expm(g_sd) @ sla.expm(g_mix) @ sla.expm(g_aux)
    U = U @ np.diag(np.exp(-1j * frame.phi * np.diag(n_f).real))
    defect = unitarity_defect(U)
    if defect > 1e-8:
        warnings.warn(f"unitarity defect {defect:.2e} from truncation", TruncationWarning, stacklevel=2)
    return U


def unitarity_defect(U: np.ndarray) -> float:
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


# -- holonomy -----------------------------------------------------------------


@dataclass
class HolonomyResult:
    """Discrete Berry phase of one level with its Richardson pair."""

    level_index: int
    phase: float
    phase_M: float
    phase_2M: float
    M: int
    min_gap: float
    parity: int
    loop_offsets: list = field(default_factory=list, repr=False)


def wrap_phase(x):
    """Map onto ``(-pi, pi]``."""
    return wrap(x)


def _level_parity(vec: np.ndarray, space: FockSpace) -> int:
    even = np.sum(np.abs(vec[space.parity_indices(0)]) ** 2)
    return 0 if even > 0.5 else 1


def holonomy_scan(
    params: PhysicalParams,
    levels,
    M: int = 4096,
    space: FockSpace | None = None,
    *,
    phi0: float = 0.0,
    gap_floor: float = 1e-6,
    convergence_tol: float = 1e-5,
    regauge: np.random.Generator | None = None,
) -> dict[int, HolonomyResult]:
    """Discrete holonomies of several levels around the loop ``phi in [0, 2 pi)``.

    The Hamiltonian is diagonalised independently at ``2M`` equally spaced
    angles.  Each level is followed by maximal overlap with its previous
    eigenvector, and the phase ``Arg prod <psi_k|psi_{k+1}>`` is formed on both
    the ``M`` and ``2M`` grids.  A Richardson step removes the leading
    ``1/M^2`` error.  The sign follows ``i gamma = loop integral <psi|d psi>``.

    Total excitation parity is conserved by the Hamiltonian, so each level is
    tracked inside its parity block.

    ``regauge`` multiplies every eigenvector by a random phase; the result
    must not change.
    """
    if M < 256:
        raise DomainError("holonomy needs at least 256 grid points")
    space = space or FockSpace()
    levels = sorted(set(int(n) for n in levels))
    free, K = _hamiltonian_parts(params, space)
    scale = params.field_omega

    H_start = free + np.exp(1j * phi0) * K + np.exp(-1j * phi0) * K.conj().T
    _, vecs0 = sla.eigh(H_start, subset_by_index=[0, max(levels)], driver="evr")
    parity_of = {n: _level_parity(vecs0[:, n], space) for n in levels}

    results = {}
    n_grid = 2 * M
    angles = phi0 + 2 * math.pi * np.arange(n_grid) / n_grid
    for parity in sorted(set(parity_of.values())):
        idx = space.parity_indices(parity)
        fb, Kb = free[np.ix_(idx, idx)], K[np.ix_(idx, idx)]
        tracked = [n for n in levels if parity_of[n] == parity]
        # position of each tracked level inside its block at phi0
        # a block level never ranks above its rank in the full spectrum
        top0 = min(len(idx) - 1, max(levels) + 2)
        _, vec_b = sla.eigh(fb + np.exp(1j * phi0) * Kb + np.exp(-1j * phi0) * Kb.conj().T,
                            subset_by_index=[0, top0], driver="evr")
        start = {}
        for n in tracked:
            ov = np.abs(vec_b.conj().T @ vecs0[idx, n])
            start[n] = int(np.argmax(ov))
        top = min(len(idx) - 1, max(start.values()) + 2)

        first = {n: vec_b[:, start[n]].copy() for n in tracked}
        prev = dict(first)
        angle_sum_fine = {n: 0.0 for n in tracked}
        # coarse grid uses every other point; track its previous vector separately
        prev_coarse = dict(first)
        angle_sum_coarse = {n: 0.0 for n in tracked}
        min_gap = {n: math.inf for n in tracked}

        for k in range(1, n_grid + 1):
            if k < n_grid:
                ph = np.exp(1j * angles[k])
                ev, vec = sla.eigh(fb + ph * Kb + np.conj(ph) * Kb.conj().T,
                                   subset_by_index=[0, top], driver="evr")
                if regauge is not None:
                    vec = vec * np.exp(2j * math.pi * regauge.random(vec.shape[1]))
            for n in tracked:
                if k < n_grid:
                    ov = vec.conj().T @ prev[n]
                    j = int(np.argmax(np.abs(ov)))
                    gaps = np.abs(np.delete(ev, j) - ev[j])
                    min_gap[n] = min(min_gap[n], float(gaps.min()) if gaps.size else math.inf)
                    new = vec[:, j]
                else:
                    new = first[n]  # closes the loop: H(phi0 + 2 pi) = H(phi0)
                angle_sum_fine[n] += float(np.angle(np.vdot(prev[n], new)))
                prev[n] = new
                if k % 2 == 0:
                    angle_sum_coarse[n] += float(np.angle(np.vdot(prev_coarse[n], new)))
                    prev_coarse[n] = new

        for n in tracked:
            if min_gap[n] < gap_floor * scale:
                raise DegeneracyError(
                    f"level {n} comes within {min_gap[n]:.3g} rad/s of a neighbour"
                )
            fine = float(wrap_phase(angle_sum_fine[n]))
            coarse = float(wrap_phase(angle_sum_coarse[n]))
            diff = float(wrap_phase(fine - coarse))
            if abs(diff) > convergence_tol:
                raise ConvergenceError(
                    f"holonomy of level {n} changes by {diff:.3g} rad between M and 2M"
                )
            results[n] = HolonomyResult(
                level_index=n,
                phase=float(wrap_phase(fine + diff / 3.0)),
                phase_M=coarse,
                phase_2M=fine,
                M=M,
                min_gap=min_gap[n],
                parity=parity,
            )
    return results


def numeric_holonomy(
    params: PhysicalParams, level_index: int, M: int = 4096, space: FockSpace | None = None, **kwargs
) -> float:
    """Discrete Berry phase (rad, wrapped to ``(-pi, pi]``) of one energy level."""
    return holonomy_scan(params, [level_index], M, space, **kwargs)[level_index].phase
