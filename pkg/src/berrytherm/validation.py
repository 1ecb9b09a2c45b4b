"""Oracle suite behind ``berrytherm validate``.

The reference constants below were produced by :func:`normal_mode_oracle`,
which diagonalizes the quadratic Hamiltonian through its dynamical matrix
in extended precision.  That route shares no code with the closed-form
dressing frame, so a drift in either shows up as a mismatch.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import mpmath
import numpy as np

from .berry import G_factor, gamma_I0, gamma_In, wrap
from .core import PhysicalParams
from .diagonalization import constraint_check, dressed_level_index, dressed_levels, forward_from_frame, inverse_solve
from .evolution import DEFAULT_N_D, evolve_von_neumann
from .fock import FockSpace, holonomy_scan, numeric_spectrum

TWO_PI = 2 * math.pi
REFERENCE_PARAMS = PhysicalParams(TWO_PI * 1.2e3, TWO_PI * 1e6, TWO_PI * 1e6)

#: normal_mode_oracle(REFERENCE_PARAMS) at 40 digits, rounded to double.
FROZEN = {
    "nu_f": 6290720.611075323,
    "nu_d": 6275640.955480721,
    "G_minus_half": 3.591379396552156e-07,
    "gamma_I0": 3.6000194400979785e-07,
}


def normal_mode_oracle(params: PhysicalParams, dps: int = 40) -> dict[str, float]:
    """Normal modes and field content from the dynamical matrix.

    With ``H = a^+ A a + (a^+ B a^+ + h.c.) / 2`` on ``a = (f, d)``, each
    normal mode ``b`` with ``[b, H] = nu b`` is a left eigenvector ``(p, q)``
    of ``[[A, B], [-B*, -A*]]`` normalised to ``|p|^2 - |q|^2 = 1``.  One
    quantum in mode ``k`` adds ``|p_kf|^2 + |q_kf|^2`` field quanta and the
    ground state holds ``sum_k |q_kf|^2``.
    """
    with mpmath.workdps(dps):
        w = mpmath.mpf(params.field_omega)
        W = mpmath.mpf(params.gap_Omega)
        lam = mpmath.mpf(abs(params.effective_coupling))
        M = mpmath.matrix(
            [
                [w, lam, 0, lam],
                [lam, W, lam, 0],
                [0, -lam, -w, -lam],
                [-lam, 0, -lam, -W],
            ]
        )
        vals, vecs = mpmath.eig(M.T)
        modes = []
        for k in range(4):
            nu = mpmath.re(vals[k])
            if nu <= 0:
                continue
            col = [vecs[i, k] for i in range(4)]
            norm = abs(col[0]) ** 2 + abs(col[1]) ** 2 - abs(col[2]) ** 2 - abs(col[3]) ** 2
            col = [c / mpmath.sqrt(norm) for c in col]
            modes.append((nu, col))
        modes.sort(key=lambda m: m[0])
        (nu_d, low), (nu_f, up) = modes
        G = abs(up[0]) ** 2 + abs(up[2]) ** 2
        g0 = abs(up[2]) ** 2 + abs(low[2]) ** 2
        return {
            "nu_f": float(nu_f),
            "nu_d": float(nu_d),
            "G_minus_half": float(G - mpmath.mpf(1) / 2),
            "gamma_I0": float(g0),
            "E0": float((nu_f + nu_d - w - W) / 2),
        }


@dataclass(frozen=True)
class OracleCheck:
    name: str
    error: float
    tolerance: float
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return bool(self.error <= self.tolerance)

    def __str__(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: error {self.error:.3e} (tol {self.tolerance:.1e}, {self.seconds:.1f} s)"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def check_spectrum(params: PhysicalParams = REFERENCE_PARAMS, k: int = 10, space: FockSpace | None = None) -> OracleCheck:
    """Lowest ``k`` Fock-space levels against the dressed ladder, relative to ``omega``."""
    t0 = time.perf_counter()
    frame = inverse_solve(params)
    num = numeric_spectrum(params, k, space or FockSpace(80, 8)).eigenvalues
    ana = np.array([e for e, _, _ in dressed_levels(frame, k)])
    err = float(np.max(np.abs(num - ana)) / params.field_omega)
    return OracleCheck("spectrum", err, 1e-6, time.perf_counter() - t0)


def check_roundtrip(params: PhysicalParams = REFERENCE_PARAMS) -> list[OracleCheck]:
    t0 = time.perf_counter()
    frame = inverse_solve(params)
    fw = forward_from_frame(frame)
    err = max(
        _rel(fw.field_omega, params.field_omega),
        _rel(fw.gap_Omega, params.gap_Omega),
        _rel(fw.coupling_lambda, params.effective_coupling),
    )
    report = constraint_check(frame)
    dt = time.perf_counter() - t0
    return [
        OracleCheck("inverse/forward roundtrip", err, 1e-10, dt),
        OracleCheck("diagonalization constraints", 0.0 if report.passed else 1.0, 0.0, dt),
    ]


def check_frozen(frozen: dict[str, float] | None = None, params: PhysicalParams = REFERENCE_PARAMS) -> list[OracleCheck]:
    """Closed forms and a fresh oracle run against the frozen constants."""
    frozen = FROZEN if frozen is None else frozen
    t0 = time.perf_counter()
    frame = inverse_solve(params)
    closed = {
        "nu_f": frame.nu_f,
        "nu_d": frame.nu_d,
        "G_minus_half": G_factor(frame) - 0.5,
        "gamma_I0": gamma_I0(frame),
    }
    fresh = normal_mode_oracle(params)
    dt = time.perf_counter() - t0
    tol = {"nu_f": 1e-12, "nu_d": 1e-12, "G_minus_half": 1e-6, "gamma_I0": 1e-6}
    out = []
    for key, ref in frozen.items():
        out.append(OracleCheck(f"closed form {key}", _rel(closed[key], ref), tol[key], dt))
        out.append(OracleCheck(f"oracle {key}", _rel(fresh[key], ref), 1e-12, dt))
    return out


def check_holonomy(params: PhysicalParams = REFERENCE_PARAMS, M: int = 4096, space: FockSpace | None = None) -> list[OracleCheck]:
    """Discrete Wilson-loop phases of the dressed states ``(m, 0)``, ``m = 0, 1, 2``."""
    t0 = time.perf_counter()
    frame = inverse_solve(params)
    idx = [dressed_level_index(frame, m) for m in range(3)]
    res = holonomy_scan(params, idx, M, space or FockSpace(80, 8))
    dt = time.perf_counter() - t0
    out = []
    for m, i in enumerate(idx):
        out.append(OracleCheck(f"holonomy level (m={m})", abs(wrap(res[i].phase - gamma_In(frame, m))), 1e-5, dt))
    step = float(wrap(TWO_PI * G_factor(frame)))
    for m in range(2):
        diff = wrap(res[idx[m + 1]].phase - res[idx[m]].phase)
        out.append(OracleCheck(f"holonomy difference {m + 1}-{m}", abs(wrap(diff - step)), 1e-6, dt))
    return out


def check_evolution() -> list[OracleCheck]:
    """Truncation and tolerance convergence of the MHz one-cycle run."""
    t0 = time.perf_counter()
    p = PhysicalParams(1.2e3, 1e6, 1e6)
    base = evolve_von_neumann(p, 1e-3, cycles=1)
    wide = evolve_von_neumann(p, 1e-3, space=FockSpace(math.ceil(1.25 * base.N_f), DEFAULT_N_D, max_dim=10**9), cycles=1)
    tight = evolve_von_neumann(p, 1e-3, cycles=1, tol=base.rtol / 2)
    dt = time.perf_counter() - t0
    return [
        OracleCheck("evolution truncation (N_f +25%)", _rel(wide.max_P, base.max_P), 0.10, dt),
        OracleCheck("evolution tolerance (tol / 2)", _rel(tight.max_P, base.max_P), 0.05, dt),
        OracleCheck("evolution trace drift", base.trace_drift, 1e-9, dt),
    ]


def run_suite(level: str = "quick", *, frozen: dict[str, float] | None = None) -> list[OracleCheck]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown validation level {level!r}")
    checks = [check_spectrum(), *check_roundtrip(), *check_frozen(frozen)]
    if level == "full":
        checks += check_holonomy()
        checks += check_evolution()
    return checks


def perturbed(name: str, factor: float = 1.01) -> dict[str, float]:
    if name not in FROZEN:
        raise KeyError(f"no frozen constant named {name!r}; choose from {sorted(FROZEN)}")
    out = dict(FROZEN)
    out[name] = out[name] * factor
    return out
