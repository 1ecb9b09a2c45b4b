"""Thermometer layer: sweeps of the two-detector phase difference.

The observable is ``delta(T_c) = delta_phase(frame, T_c, T_hot)``, the phase
of the detector facing the cold sample minus that of the detector facing
the hot reference.  The dressing frame depends only on the physical
parameters, so it is solved once per parameter set and cached.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .berry import delta_phase
from .core import PhysicalParams
from .diagonalization import DressingFrame, inverse_solve
from .errors import BranchError, DomainError, FlatCurveError, OutOfRangeError

T_GUARD = (1e-8, 1e2)
DEFAULT_POINTS = 400
DEFAULT_DECADES = 5.0
#: Default hot-to-cold ratio used to centre the grid.
HOT_COLD_RATIO = 1e3
FD_REL_STEP = 1e-5
INVERT_RTOL = 1e-8


@dataclass(frozen=True)
class ThermometerConfig:
    """Parameters of one thermometer setting.

    Parameters
    ----------
    params : PhysicalParams
    T_hot : float
        Reference (hot source) temperature in kelvin.
    grid : tuple of float, optional
        Explicit cold-temperature grid.  When omitted a log-spaced grid of
        ``n_points`` over ``decades`` decades centred on ``T_hot / ratio`` is
        used, clipped to the guard rails.
    solver_tol : float
        Residual tolerance of the inverse solve.
    """

    params: PhysicalParams
    T_hot: float
    grid: tuple[float, ...] | None = None
    n_points: int = DEFAULT_POINTS
    decades: float = DEFAULT_DECADES
    ratio: float = HOT_COLD_RATIO
    solver_tol: float = 1e-13
    natural_units: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.T_hot) and self.T_hot > 0):
            raise DomainError(f"T_hot must be positive, got {self.T_hot!r}")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.ndim != 1 or len(g) == 0:
                raise DomainError("the cold grid is empty")
            if np.any(np.diff(g) <= 0):
                raise DomainError("the cold grid must be strictly increasing")
            if not self.natural_units and (g[0] < T_GUARD[0] or g[-1] > T_GUARD[1]):
                raise DomainError(f"the cold grid must lie within {T_GUARD} K")
            object.__setattr__(self, "grid", tuple(float(x) for x in g))
        elif self.n_points < 2:
            raise DomainError("the default grid needs at least two points")

    def cold_grid(self) -> np.ndarray:
        if self.grid is not None:
            return np.array(self.grid)
        centre = math.log10(self.T_hot / self.ratio)
        g = np.logspace(centre - self.decades / 2, centre + self.decades / 2, self.n_points)
        if not self.natural_units:
            g = g[(g >= T_GUARD[0]) & (g <= T_GUARD[1])]
        if len(g) < 2:
            raise DomainError("the default grid falls outside the guard rails")
        return g


@dataclass(frozen=True)
class SweepCurve:
    T_c: np.ndarray
    delta: np.ndarray
    sensitivity: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.T_c)

    def rows(self):
        return zip(self.T_c.tolist(), self.delta.tolist(), self.sensitivity.tolist())


@functools.lru_cache(maxsize=64)
def cached_frame(params: PhysicalParams, tol: float = 1e-13) -> DressingFrame:
    return inverse_solve(params, tol=tol)


def frame_for(config: ThermometerConfig) -> DressingFrame:
    return cached_frame(config.params, config.solver_tol)


def delta_at(config: ThermometerConfig, T_c: float, *, T_hot: float | None = None, frame: DressingFrame | None = None) -> float:
    frame = frame_for(config) if frame is None else frame
    T_h = config.T_hot if T_hot is None else T_hot
    return delta_phase(frame, T_c, T_h, omega=config.params.field_omega, natural_units=config.natural_units)


def _central(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2 * h)


def _richardson(f, x: float, h: float) -> float:
    d1 = _central(f, x, h)
    d2 = _central(f, x, h / 2)
    return (4 * d2 - d1) / 3


def sensitivity(config: ThermometerConfig, T_c: float, *, frame: DressingFrame | None = None) -> float:
    """``d delta / d T_c`` in rad/K.

    Central difference with relative step ``1e-5`` and one Richardson step.

    Raises
    ------
    DomainError
        If ``T_c`` is not positive or the step underflows.
    """
    if not T_c > 0:
        raise DomainError(f"T_c must be positive, got {T_c!r}")
    h = FD_REL_STEP * T_c
    if h < np.finfo(float).tiny or T_c + h / 2 == T_c:
        raise DomainError(f"finite-difference step underflows at T_c = {T_c!r}")
    frame = frame_for(config) if frame is None else frame
    return _richardson(lambda t: delta_at(config, t, frame=frame), T_c, h)


def sweep_delta(config: ThermometerConfig) -> SweepCurve:
    """Evaluate delta and its sensitivity on the cold grid, in grid order."""
    frame = frame_for(config)
    grid = config.cold_grid()
    d = np.array([delta_at(config, t, frame=frame) for t in grid])
    s = np.array([sensitivity(config, t, frame=frame) for t in grid])
    return SweepCurve(grid, d, s)


def optimal_range(config: ThermometerConfig, curve: SweepCurve | None = None) -> tuple[float, float]:
    """Temperature of peak ``|d delta / d T_c|`` and the peak value.

    The grid maximum is refined by golden-section search in ``log T``.

    Raises
    ------
    FlatCurveError
        If the peak is less than ten times the median sensitivity.
    OutOfRangeError
        If the maximum sits on the grid boundary.
    """
    curve = sweep_delta(config) if curve is None else curve
    s = np.abs(curve.sensitivity)
    med = float(np.median(s))
    i = int(np.argmax(s))
    if not (s[i] > 0 and (med == 0 or s[i] / med >= 10)):
        raise FlatCurveError(f"sensitivity peak/median ratio {s[i] / med if med else 0:.3g} is below 10")
    if i == 0 or i == len(s) - 1:
        raise OutOfRangeError(f"sensitivity maximum lies on the grid boundary at T_c = {curve.T_c[i]!r} K")
    frame = frame_for(config)
    lg = np.log(curve.T_c)

    def neg(x):
        return -abs(sensitivity(config, math.exp(x), frame=frame))

    res = optimize.minimize_scalar(neg, bracket=(lg[i - 1], lg[i], lg[i + 1]), method="golden", tol=1e-10)
    T_star = math.exp(res.x)
    return T_star, abs(sensitivity(config, T_star, frame=frame))


def _monotone_runs(d: np.ndarray) -> list[tuple[int, int]]:
    """Maximal index ranges ``[a, b]`` on which ``d`` is strictly monotone."""
    runs = []
    a = 0
    sign = 0
    for k in range(1, len(d)):
        s = int(np.sign(d[k] - d[k - 1]))
        if s == 0 or (sign and s != sign):
            if k - 1 > a:
                runs.append((a, k - 1))
            a = k - 1 if s else k
            sign = s
        elif not sign:
            sign = s
    if len(d) - 1 > a:
        runs.append((a, len(d) - 1))
    return runs


def invert_temperature(config: ThermometerConfig, delta_measured: float, curve: SweepCurve | None = None) -> float:
    """Cold temperature whose phase difference equals ``delta_measured``.

    Bisection in ``log T`` on the monotone branch of the sweep that brackets
    the measurement, to relative tolerance ``1e-8``.

    Raises
    ------
    OutOfRangeError
        If no branch of the curve reaches ``delta_measured``.
    BranchError
        If more than one monotone branch does.
    """
    if not math.isfinite(delta_measured):
        raise DomainError("delta_measured must be finite")
    frame = frame_for(config)
    if curve is None:
        grid = config.cold_grid()
        d = np.array([delta_at(config, t, frame=frame) for t in grid])
    else:
        grid, d = curve.T_c, curve.delta
    hits = []
    for a, b in _monotone_runs(d):
        lo, hi = sorted((d[a], d[b]))
        if lo <= delta_measured <= hi:
            hits.append((a, b))
    if not hits:
        raise OutOfRangeError(
            f"delta = {delta_measured!r} rad lies outside the curve range [{float(d.min())!r}, {float(d.max())!r}]"
        )
    if len(hits) > 1:
        spans = ", ".join(f"[{grid[a]:.6g}, {grid[b]:.6g}] K" for a, b in hits)
        raise BranchError(f"delta = {delta_measured!r} rad is reached on several branches: {spans}")
    a, b = hits[0]
    if delta_measured == 0 and grid[a] <= config.T_hot <= grid[b]:
        return config.T_hot

    def f(x):
        return delta_at(config, math.exp(x), frame=frame) - delta_measured

    la, lb = math.log(grid[a]), math.log(grid[b])
    fa, fb = f(la), f(lb)
    if fa == 0:
        return float(grid[a])
    if fb == 0:
        return float(grid[b])
    x = optimize.bisect(f, la, lb, xtol=INVERT_RTOL / 10, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.exp(x)


def robustness(config: ThermometerConfig, hot_error_fractions, *, T_c: float | None = None) -> list[tuple[float, float]]:
    """Relative change of delta when the hot temperature is off by ``eps``.

    Returns ``(eps, (delta(T_hot (1 + eps)) - delta) / delta)`` in input
    order, at ``T_c`` (default: the optimal operating point).
    """
    if T_c is None:
        T_c = optimal_range(config)[0]
    frame = frame_for(config)
    d0 = delta_at(config, T_c, frame=frame)
    if d0 == 0:
        raise DomainError("delta vanishes at the operating point; relative change undefined")
    out = []
    for eps in hot_error_fractions:
        eps = float(eps)
        if not eps > -1:
            raise DomainError(f"hot error fraction must exceed -1, got {eps!r}")
        if eps == 0:
            out.append((eps, 0.0))
            continue
        de = delta_at(config, T_c, T_hot=config.T_hot * (1 + eps), frame=frame)
        out.append((eps, (de - d0) / d0))
    return out


def log_sensitivities(config: ThermometerConfig, T_c: float) -> tuple[float, float]:
    """``(d delta / d ln T_c, d delta / d ln T_hot)`` at ``T_c``."""
    frame = frame_for(config)

    def cold(x):
        return delta_at(config, math.exp(x), frame=frame)

    def hot(x):
        return delta_at(config, T_c, T_hot=math.exp(x), frame=frame)

    return (
        _richardson(cold, math.log(T_c), FD_REL_STEP),
        _richardson(hot, math.log(config.T_hot), FD_REL_STEP),
    )


def dynamical_phase_budget(speed_v: float, Omega: float, delta_L: float) -> float:
    """Dynamical phase ``Omega * delta_L / v`` from a path-length mismatch."""
    if not (speed_v > 0 and Omega > 0 and delta_L >= 0):
        raise DomainError("speed and gap must be positive and the length mismatch non-negative")
    return Omega * delta_L / speed_v
