"""Analytic diagonalization of the single-mode atom-field Hamiltonian.

The dressing unitary ``U = S_f(u) S_d(v) D_fd(s) S'_d(p) R_f(phi)`` maps the
free Hamiltonian ``nu_f f^+f + nu_d d^+d`` onto

    H_T = omega f^+f + Omega d^+d + lambda (d + d^+)(f^+ e^{i phi} + f e^{-i phi})

up to a constant.  :func:`forward_map` goes from the frame parameters
``(nu_f, nu_d, v)`` to ``(omega, Omega, lambda)``; :func:`inverse_solve` runs
the map backwards with a damped Newton iteration.

Internally the frame is parametrised by ``(nu_d, C, v)`` with
``C = log(nu_f / nu_d) / 2``.  Near resonance ``C``, ``u`` and ``v`` are all of
order ``lambda / omega``; carrying them directly, instead of re-deriving ``C``
from the ratio of two nearly equal frequencies, keeps their relative accuracy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from types import SimpleNamespace

import mpmath
import numpy as np
from scipy.constants import c as speed_of_light

from .core import PhysicalParams
from .errors import BranchError, ConstraintViolation, ConvergenceError, DomainError

_NP = SimpleNamespace(
    exp=np.exp, expm1=np.expm1, sinh=np.sinh, cosh=np.cosh,
    sqrt=np.sqrt, atanh=np.arctanh, arctan=np.arctan,
)
_MP = SimpleNamespace(
    exp=mpmath.exp, expm1=mpmath.expm1, sinh=mpmath.sinh, cosh=mpmath.cosh,
    sqrt=mpmath.sqrt, atanh=mpmath.atanh, arctan=mpmath.atan,
)

#: Decimal digits used by the extended-precision polish in :func:`inverse_solve`.
POLISH_DPS = 40
POLISH_MAX_ITER = 40


@dataclass(frozen=True)
class DressingFrame:
    """Parameters of the diagonalizing unitary.

    ``nu_f > nu_d`` are the dressed normal-mode frequencies (rad/s).  ``v`` and
    ``u = C - v`` squeeze the detector and field modes, ``s`` is the mixing
    angle, ``p`` the auxiliary detector squeeze and ``phi`` the field rotation.
    """

    nu_f: float
    nu_d: float
    v: float
    u: float
    s: float
    p: float
    C: float
    phi: float = 0.0

    @classmethod
    def from_log_ratio(
        cls, nu_d: float, C: float, v: float, phi: float = 0.0, *, u: float | None = None
    ) -> DressingFrame:
        """Build a frame from ``nu_d``, ``C = log(nu_f/nu_d)/2`` and ``v``.

        The dependent parameters ``s`` and ``p`` are filled in from the
        diagonalization constraints; they are ``nan`` where the constraints
        cannot be met.  Pass ``u`` when it is known more accurately than the
        difference ``C - v``.
        """
        if u is None:
            u = C - v
        nu_f = nu_d * math.exp(2.0 * C)
        with np.errstate(all="ignore"):
            ratio = nu_f * np.sinh(2 * u) / (nu_d * np.sinh(2 * v))
            s = float(np.arctan(np.sqrt(ratio))) if ratio >= 0 else math.nan
            try:
                p = float(_forward(nu_d, C, v, _NP, u=u)[3])
            except ZeroDivisionError:
                p = math.nan
        return cls(nu_f=nu_f, nu_d=nu_d, v=v, u=u, s=s, p=p, C=C, phi=phi)

    @classmethod
    def from_modes(cls, nu_f: float, nu_d: float, v: float, phi: float = 0.0) -> DressingFrame:
        if not (nu_f > 0 and nu_d > 0):
            raise DomainError("normal-mode frequencies must be positive")
        return cls.from_log_ratio(nu_d, 0.5 * math.log(nu_f / nu_d), v, phi)

    @property
    def zero_point_shift(self) -> float:
        """Constant ``E_0`` with ``H_T = U^+ H_0 U + E_0``, computed from the frame."""
        fm = forward_from_frame(self)
        return 0.5 * (self.nu_f + self.nu_d - fm.field_omega - fm.gap_Omega)


@dataclass(frozen=True)
class ForwardMapResult:
    field_omega: float
    gap_Omega: float
    coupling_lambda: float
    p: float
    Omega_hat: float
    Z: float

    def as_params(self) -> PhysicalParams:
        return PhysicalParams(self.coupling_lambda, self.gap_Omega, self.field_omega)


def _forward(nu_d, C, v, lib, u=None):
    """Closed forms for ``(omega, Omega, lambda, p, Omega_hat, Z)``.

    Algebraically identical rearrangements of the published expressions that
    avoid cancellation when ``C``, ``u`` and ``v`` are small:

    * ``sinh 2v [cosh 2u + sinh 2u / tanh 2v] = sinh 2C``
    * ``nu_f cosh 2u - nu_d cosh 2v = nu_d [expm1(2C) cosh 2u + 2 sinh C sinh(u - v)]``

    ``Omega_hat`` is used without the trailing factor
    ``[nu_f cosh 2(C-u) - nu_d cosh 2u]`` that appears in print.  That factor
    makes the expression quadratic in frequency, and only the reading without
    it reproduces the exact conjugation ``U^+ H_0 U``.

    ``u`` may be given directly; ``C - v`` cancels when the field squeeze is
    far smaller than ``C`` (field tuned well above the gap).
    """
    if u is None:
        u = C - v
    e2C = lib.exp(2 * C)
    nu_f = nu_d * e2C
    sh2u, sh2v = lib.sinh(2 * u), lib.sinh(2 * v)
    den = nu_d * sh2v + nu_f * sh2u
    omega = nu_f * nu_d * lib.sinh(2 * C) / den
    omega_hat = (nu_f**2 * lib.sinh(4 * u) + nu_d**2 * lib.sinh(4 * v)) / (2 * den)
    Z = (nu_f**2 * sh2u**2 - nu_d**2 * sh2v**2) / (2 * den)
    bracket = nu_d * (lib.expm1(2 * C) * lib.cosh(2 * u) + 2 * lib.sinh(C) * lib.sinh(u - v))
    lam0 = lib.sqrt(nu_f * nu_d * sh2u * sh2v) / den * bracket
    ratio = -2 * Z / omega_hat
    p = lib.atanh(ratio) / 2
    Omega = lib.sqrt((omega_hat - 2 * Z) * (omega_hat + 2 * Z))
    lam = lib.exp(p) * lam0
    return omega, Omega, lam, p, omega_hat, Z, ratio


def _omega_hat_as_printed(nu_f: float, nu_d: float, v: float) -> float:
    """``Omega_hat`` with the trailing bracket kept.

    Only used to show that this reading fails the spectrum oracle.
    """
    C = 0.5 * math.log(nu_f / nu_d)
    u = C - v
    den = nu_d * math.sinh(2 * v) + nu_f * math.sinh(2 * u)
    head = math.sinh(2 * v) * (
        nu_f**2 * math.sinh(4 * (C - v)) / (2 * math.sinh(2 * v)) + nu_d**2 * math.cosh(2 * v)
    ) / den
    return head * (nu_f * math.cosh(2 * (C - u)) - nu_d * math.cosh(2 * u))


def _check_region(C: float, v: float, u: float | None = None) -> None:
    if u is None:
        u = C - v
    if not v > 0:
        raise ConstraintViolation(f"v must be positive, got {v!r}")
    if not u > 0:
        raise ConstraintViolation(
            "nu_f/nu_d must exceed exp(2v) strictly "
            f"(log-ratio margin 2(C - v) = {2 * u:.3g})"
        )


def _forward_checked(nu_d: float, C: float, v: float, u: float | None = None) -> ForwardMapResult:
    if not nu_d > 0:
        raise ConstraintViolation("nu_d must be positive")
    _check_region(C, v, u)
    omega, Omega, lam, p, omega_hat, Z, ratio = _forward(nu_d, C, v, _NP, u=u)
    if not abs(ratio) < 1:
        raise BranchError(f"|2Z/Omega_hat| = {abs(ratio):.6g} is not below 1")
    return ForwardMapResult(
        float(omega), float(Omega), float(lam), float(p), float(omega_hat), float(Z)
    )


def forward_map(nu_f: float, nu_d: float, v: float) -> ForwardMapResult:
    """Physical parameters ``(omega, Omega, lambda)`` generated by a frame.

    Raises
    ------
    ConstraintViolation
        If ``nu_f / nu_d <= exp(2 v)`` or ``v <= 0``.
    BranchError
        If ``|2 Z / Omega_hat| >= 1``.
    """
    if not (nu_f > 0 and nu_d > 0):
        raise ConstraintViolation("normal-mode frequencies must be positive")
    return _forward_checked(nu_d, 0.5 * math.log(nu_f / nu_d), v)


def forward_from_frame(frame: DressingFrame) -> ForwardMapResult:
    return _forward_checked(frame.nu_d, frame.C, frame.v, frame.u)


# -- inverse -----------------------------------------------------------------


# the solver works in x = (nu_d, u, v) so that neither squeeze is a difference


def _residual(x, target, lib):
    out = _forward(x[0], x[1] + x[2], x[2], lib, u=x[1])
    return [out[i] / target[i] - 1 for i in range(3)]


def _jacobian(x, target, method: str):
    """Jacobian of the relative residual with respect to ``(nu_d, u, v)``."""
    J = np.empty((3, 3))
    if method == "analytic":
        # complex-step differentiation: exact derivative of the closed forms
        for j in range(3):
            h = 1e-30 * abs(x[j])
            xc = np.array(x, dtype=complex)
            xc[j] += 1j * h
            J[:, j] = np.imag(_residual(xc, target, _NP)) / h
    elif method == "fd":
        r0 = np.array(_residual(x, target, _NP))
        for j in range(3):
            h = 1e-7 * abs(x[j])
            xp = np.array(x, dtype=float)
            xp[j] += h
            J[:, j] = (np.array(_residual(xp, target, _NP)) - r0) / h
    else:
        raise ValueError(f"unknown jacobian method {method!r}")
    return J


def _rwa_seed(params: PhysicalParams) -> tuple[float, float, float]:
    w, W, lam = params.field_omega, params.gap_Omega, abs(params.effective_coupling)
    delta = 0.5 * (w - W)
    half_split = math.hypot(delta, lam)
    nu_d = 0.5 * (w + W) - half_split
    C = 0.5 * math.log1p(2 * half_split / nu_d)
    # field content of the upper mode and its complement, both without cancellation
    small = lam**2 / (2 * half_split * (half_split + abs(delta)))
    big = 1.0 - small
    field_fraction, detector_fraction = (big, small) if delta >= 0 else (small, big)
    return nu_d, C * detector_fraction, C * field_fraction


def perturbative_guess(params: PhysicalParams) -> tuple[float, float, float]:
    """Seed ``(nu_d, C, v)`` from the rotating-wave normal modes.

    The mode frequencies are ``(w + W)/2 +- sqrt(((w - W)/2)^2 + lam^2)`` and
    ``v / C`` starts at the field content of the upper mode, which is what
    the per-quantum phase factor reduces to at first order.
    """
    nu_d, u, v = _rwa_seed(params)
    return nu_d, u + v, v


def _in_region(x) -> bool:
    return x[0] > 0 and x[1] > 0 and x[2] > 0


def _polish(x, target):
    with mpmath.workdps(POLISH_DPS):
        xm = [mpmath.mpf(float(t)) for t in x]
        tg = [mpmath.mpf(float(t)) for t in target]
        for _ in range(POLISH_MAX_ITER):
            r = mpmath.matrix(_residual(xm, tg, _MP))
            J = mpmath.matrix(3, 3)
            for j in range(3):
                h = mpmath.mpf(10) ** (-POLISH_DPS + 5) * abs(xm[j])
                xc = [mpmath.mpc(t) for t in xm]
                xc[j] += mpmath.mpc(0, h)
                col = _residual(xc, tg, _MP)
                for i in range(3):
                    J[i, j] = mpmath.im(col[i]) / h
            step = mpmath.lu_solve(J, -r)
            alpha = mpmath.mpf(1)
            while not _in_region([xm[i] + alpha * step[i] for i in range(3)]) and alpha > 1e-12:
                alpha /= 2
            step = [alpha * t for t in step]
            xm = [xm[i] + step[i] for i in range(3)]
            if mpmath.norm(step, mpmath.inf) < mpmath.mpf(10) ** (-POLISH_DPS + 8) * max(
                abs(t) for t in xm[1:]
            ):
                break
        return [float(t) for t in xm]


@dataclass(frozen=True)
class SolveInfo:
    iterations: int
    residual: float
    jacobian: str


def inverse_solve(
    params: PhysicalParams,
    *,
    phi: float = 0.0,
    tol: float = 1e-13,
    max_iter: int = 50,
    jacobian: str = "analytic",
    polish: bool = True,
    return_info: bool = False,
):
    """Find the dressing frame that generates ``params``.

    Damped Newton iteration on the relative residual of :func:`forward_map`
    in the variables ``(nu_d, u, v)``, seeded by :func:`perturbative_guess`
    and safeguarded by backtracking that keeps the iterate inside the valid
    region ``u, v > 0``.  The converged point is refined by a few Newton
    steps in extended precision so that small combinations such as ``G - 1/2``
    remain resolvable at very weak coupling.

    Raises
    ------
    DomainError
        If ``params`` fails the weak-coupling check or has zero coupling.
    ConvergenceError
        If the residual does not fall below ``tol`` in ``max_iter`` steps or
        the round trip misses ``1e-10``.
    """
    params.require_weak_coupling()
    if params.effective_coupling == 0:
        raise DomainError("zero coupling has no dressing frame (v = 0 is outside the valid region)")
    # the sign of the coupling is a gauge choice (d -> -d)
    target = np.array([params.field_omega, params.gap_Omega, abs(params.effective_coupling)])
    x = np.array(_rwa_seed(params))
    if jacobian == "analytic":
        # complex-step needs complex-safe arithmetic; fall back on failure
        try:
            _jacobian(x, target, "analytic")
        except (FloatingPointError, ValueError):  # pragma: no cover - defensive
            jacobian = "fd"

    def norm(r):
        return float(np.max(np.abs(r)))

    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.array(_residual(x, target, _NP))
        it = 0
        while norm(r) > tol:
            if it >= max_iter:
                raise ConvergenceError(
                    f"inverse_solve did not converge in {max_iter} iterations "
                    f"(residual {norm(r):.3g})"
                )
            it += 1
            J = _jacobian(x, target, jacobian)
            step = np.linalg.solve(J, -r)
            alpha = 1.0
            for _ in range(40):
                x_new = x + alpha * step
                if _in_region(x_new):
                    r_new = np.array(_residual(x_new, target, _NP))
                    if np.all(np.isfinite(r_new)) and norm(r_new) < (1 - 1e-4 * alpha) * norm(r):
                        break
                alpha *= 0.5
            else:
                # stalled at the double-precision floor: tiny couplings are only
                # resolvable in extended precision, so hand over to the polish
                if not polish:
                    if norm(r) < 1e3 * tol:
                        break
                    raise ConvergenceError("line search failed in inverse_solve")
                break
            x, r = x_new, r_new

    if polish:
        x = np.array(_polish(x, target))
    nu_d, u, v = (float(t) for t in x)
    _check_region(u + v, v, u)
    frame = DressingFrame.from_log_ratio(nu_d, u + v, v, phi=phi, u=u)
    fm = forward_from_frame(frame)
    achieved = fm.field_omega, fm.gap_Omega, fm.coupling_lambda
    residual = max(abs(a / b - 1) for a, b in zip(achieved, target))
    if residual > 1e-10:
        raise ConvergenceError(f"round-trip residual {residual:.3g} exceeds 1e-10")
    if return_info:
        return frame, SolveInfo(iterations=it, residual=residual, jacobian=jacobian)
    return frame


def rotation_angle(params: PhysicalParams, t: float = 0.0) -> float:
    """Field rotation ``phi = k x - omega t`` for a static atom."""
    return params.field_omega / speed_of_light * params.atom_position_x - params.field_omega * t


# -- diagnostics -------------------------------------------------------------


@dataclass(frozen=True)
class ConstraintResult:
    name: str
    passed: bool
    margin: float


@dataclass(frozen=True)
class ConstraintReport:
    results: tuple[ConstraintResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> ConstraintResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def __str__(self) -> str:
        lines = [
            f"{'PASS' if r.passed else 'FAIL'}  {r.name:<22} margin {r.margin:+.3e}"
            for r in self.results
        ]
        return "\n".join(lines)


def constraint_check(frame: DressingFrame) -> ConstraintReport:
    """Report each diagonalization constraint with its margin.

    Never raises; a failing constraint shows up as ``passed=False``.
    """
    out = []
    eps = np.finfo(float).eps
    out.append(ConstraintResult("positive frequencies", frame.nu_f > 0 and frame.nu_d > 0,
                                min(frame.nu_f, frame.nu_d)))
    out.append(ConstraintResult("v > 0", frame.v > 0, frame.v))
    # strict: nu_f/nu_d > exp(2v)  <=>  C - v > 0
    out.append(ConstraintResult("nu_f/nu_d > exp(2v)", frame.C - frame.v > 0,
                                2 * (frame.C - frame.v)))
    scale = max(abs(frame.C), abs(frame.v), abs(frame.u), 1e-300)
    u_err = abs(frame.u - (frame.C - frame.v))
    out.append(ConstraintResult("u = C - v", u_err <= 8 * eps * scale, -u_err))
    log_ratio = 0.5 * math.log(frame.nu_f / frame.nu_d) if frame.nu_f > 0 and frame.nu_d > 0 else math.nan
    c_err = abs(log_ratio - frame.C)
    out.append(ConstraintResult("C = log(nu_f/nu_d)/2", c_err <= 1e-12 * max(abs(frame.C), 1e-300)
                                or c_err <= 4 * eps, -c_err))
    with np.errstate(all="ignore"):
        ratio = frame.nu_f * np.sinh(2 * frame.u) / (frame.nu_d * np.sinh(2 * frame.v))
        s_expected = float(np.arctan(np.sqrt(ratio))) if ratio >= 0 else math.nan
    s_err = abs(frame.s - s_expected)
    out.append(ConstraintResult("s = arctan sqrt(...)", bool(s_err <= 1e-12), -s_err))
    out.append(ConstraintResult("0 < s < pi/2", 0 < frame.s < math.pi / 2,
                                min(frame.s, math.pi / 2 - frame.s) if np.isfinite(frame.s) else math.nan))
    with np.errstate(all="ignore"):
        res = _forward(frame.nu_d, frame.C, frame.v, _NP, u=frame.u)
    ratio = float(res[6])
    out.append(ConstraintResult("|2Z/Omega_hat| < 1", bool(abs(ratio) < 1), 1 - abs(ratio)))
    return ConstraintReport(tuple(out))


# -- dressed spectrum ---------------------------------------------------------


def dressed_levels(frame: DressingFrame, count: int):
    """Lowest ``count`` dressed levels as ``(energy, m, n)`` with ``m`` quanta in ``nu_f``.

    Energies include the zero-point shift ``E_0``.
    """
    E0 = frame.zero_point_shift
    levels = []
    top = count + 1
    for m in range(top):
        for n in range(top):
            levels.append((m * frame.nu_f + n * frame.nu_d + E0, m, n))
    levels.sort()
    return levels[:count]


def dressed_level_index(frame: DressingFrame, m: int, n: int = 0) -> int:
    """Energy rank of the dressed state with ``m`` upper-mode and ``n`` lower-mode quanta."""
    energy = m * frame.nu_f + n * frame.nu_d
    rank = 0
    for mm in range(int(energy // frame.nu_f) + 1):
        for nn in range(int(energy // frame.nu_d) + 1):
            if (mm, nn) != (m, n) and mm * frame.nu_f + nn * frame.nu_d < energy:
                rank += 1
    return rank
