"""Flat ``key = value`` run configuration.

Physical quantities carry their unit in the key suffix:

* ``_rad_s`` angular frequency, ``_hz`` cycles per second (multiplied by
  ``2 pi`` exactly once on load)
* ``_K`` kelvin, ``_m`` metres

Everything after ``#`` on a line is a comment.  Unknown, duplicated or
conflicting keys are rejected with the offending line number.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .core import PhysicalParams, hz_to_rad_s
from .errors import ConfigError, DomainError
from .fock import FockSpace
from .thermometer import ThermometerConfig

FREQUENCIES = ("coupling_lambda", "gap_Omega", "field_omega")
# key -> (attribute, parser)
_PLAIN = {
    "T_hot_K": ("T_hot", float),
    "T_min_K": ("T_min", float),
    "T_max_K": ("T_max", float),
    "T_c_K": ("T_c", float),
    "T_field_K": ("T_field", float),
    "cavity_length_L_m": ("cavity_length_L", float),
    "atom_position_x_m": ("atom_position_x", float),
    "n_points": ("n_points", int),
    "decades": ("decades", float),
    "hot_cold_ratio": ("ratio", float),
    "solver_tol": ("solver_tol", float),
    "epsilons": ("epsilons", None),
    "cycles": ("cycles", float),
    "evolution_tol": ("evolution_tol", float),
    "samples_per_cycle": ("samples_per_cycle", int),
    "tail_tolerance": ("tail_tolerance", float),
    "N_f": ("N_f", int),
    "N_d": ("N_d", int),
    "band": ("band", int),
    "threshold": ("threshold", float),
}


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command needs, in SI units with rad/s frequencies."""

    coupling_lambda: float
    gap_Omega: float
    field_omega: float | None = None
    cavity_length_L: float | None = None
    atom_position_x: float = 0.0
    T_hot: float | None = None
    T_min: float | None = None
    T_max: float | None = None
    n_points: int = 400
    decades: float = 5.0
    ratio: float = 1e3
    solver_tol: float = 1e-13
    T_c: float | None = None
    epsilons: tuple[float, ...] = (-0.5, -0.25, -0.1, 0.0, 0.1, 0.25, 0.5)
    T_field: float | None = None
    cycles: float = 1.0
    evolution_tol: float = 1e-8
    samples_per_cycle: int = 32
    tail_tolerance: float = 1e-6
    N_f: int | None = None
    N_d: int | None = None
    band: int | None = None
    threshold: float = 1e-2

    @property
    def omega(self) -> float:
        # resonant cavity unless a detuning is configured
        return self.gap_Omega if self.field_omega is None else self.field_omega

    def physical_params(self) -> PhysicalParams:
        return PhysicalParams(self.coupling_lambda, self.gap_Omega, self.omega, self.cavity_length_L, self.atom_position_x)

    def _need_T_hot(self) -> float:
        if self.T_hot is None:
            raise ConfigError("T_hot_K is required for this command")
        return self.T_hot

    def thermometer(self) -> ThermometerConfig:
        T_hot = self._need_T_hot()
        grid = None
        if (self.T_min is None) != (self.T_max is None):
            raise ConfigError("T_min_K and T_max_K must be given together")
        if self.T_min is not None:
            if self.n_points < 1:
                raise ConfigError("n_points must be positive")
            if not 0 < self.T_min < self.T_max:
                raise ConfigError("need 0 < T_min_K < T_max_K")
            grid = tuple(np.geomspace(self.T_min, self.T_max, self.n_points)) if self.n_points > 1 else (self.T_min,)
        elif self.n_points < 2:
            raise ConfigError("the cold grid needs at least two points")
        try:
            return ThermometerConfig(
                self.physical_params(),
                T_hot,
                grid=grid,
                n_points=self.n_points,
                decades=self.decades,
                ratio=self.ratio,
                solver_tol=self.solver_tol,
            )
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    def evolution_space(self) -> FockSpace | None:
        if self.N_f is None and self.N_d is None:
            return None
        if self.N_f is None or self.N_d is None:
            raise ConfigError("N_f and N_d must be given together")
        return FockSpace(self.N_f, self.N_d, max_dim=self.N_f * self.N_d)

    def evolution_temperature(self) -> float:
        return self.T_field if self.T_field is not None else self._need_T_hot()


def _parse_value(key: str, raw: str, parser, where: str):
    try:
        if parser is None:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        return parser(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value {raw!r} for {key}") from exc


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values: dict[str, object] = {}
    seen: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        if "=" not in body:
            raise ConfigError(f"{where}: expected 'key = value', got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if not raw:
            raise ConfigError(f"{where}: missing value for {key}")
        attr = None
        for name in FREQUENCIES:
            if key == f"{name}_rad_s":
                attr, value = name, _parse_value(key, raw, float, where)
            elif key == f"{name}_hz":
                attr, value = name, hz_to_rad_s(_parse_value(key, raw, float, where))
        if attr is None:
            if key not in _PLAIN:
                raise ConfigError(f"{where}: unknown key {key!r}")
            attr, parser = _PLAIN[key]
            value = _parse_value(key, raw, parser, where)
        if attr in seen:
            raise ConfigError(f"{where}: {key} repeats a setting from line {seen[attr]}")
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"{where}: {key} must be finite")
        seen[attr] = lineno
        values[attr] = value
    for name in ("coupling_lambda", "gap_Omega"):
        if name not in values:
            raise ConfigError(f"{source}: missing {name}_rad_s (or {name}_hz)")
    return RunConfig(**values)


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {p}: {exc.strerror}") from exc
    return parse_config(text, str(p))


def with_overrides(cfg: RunConfig, *, omega=None, gap=None, coupling=None, hz: bool = False) -> RunConfig:
    """Apply command-line frequency overrides (in Hz when ``hz`` is set)."""
    scale = hz_to_rad_s if hz else float
    changes = {}
    if omega is not None:
        changes["field_omega"] = scale(omega)
    if gap is not None:
        changes["gap_Omega"] = scale(gap)
    if coupling is not None:
        changes["coupling_lambda"] = scale(coupling)
    return replace(cfg, **changes) if changes else cfg


def format_config(cfg: RunConfig) -> str:
    """Canonical text form; ``parse_config(format_config(c)) == c``."""
    back = {attr: key for key, (attr, _) in _PLAIN.items()}
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if value is None:
            continue
        key = f"{f.name}_rad_s" if f.name in FREQUENCIES else back[f.name]
        if isinstance(value, tuple):
            text = ", ".join(repr(v) for v in value)
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
