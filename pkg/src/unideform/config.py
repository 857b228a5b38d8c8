"""Scenario configuration: TOML text with flat physical parameters and the
sections ``[numerics]``, ``[tolerances]`` and ``[output]``.

Example::

    kind = "twolevel-cubic"
    c = 1.0
    gamma = 2.0

    [numerics]
    t_end = 6.0
    dt = 5e-4
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass, field

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

__all__ = [
    "KINDS",
    "ScenarioConfig",
    "Violation",
    "ConfigError",
    "ConfigSyntaxError",
    "validate_config",
    "parse_override",
    "apply_overrides",
]

KINDS = {
    "twolevel-cubic": "two-level sweep hz = c t^3 with transverse field gamma; closed-form driver",
    "twolevel-axis": "two-level sweep deformed by a rotation about a tilted axis",
    "transport-1d": "harmonic trap translated along a smoothstep path",
    "dilatation-1d": "harmonic trap dilated along a smoothstep scale factor",
    "hydrogen-check": "hydrogen ground-state drivers and the radial continuity residual",
    "nlevel": "random smooth real-symmetric family, Newton-solved diagonal driver",
    "custom": "two-level sweep with polynomial field components hx(t), hz(t)",
}

PHYSICS_DEFAULTS = {
    "c": 1.0,
    "gamma": 2.0,
    "power": 3,
    "mass": 1.0,
    "omega": 1.0,
    "varphi": 0.3,
    "phi_start": 0.5,
    "level": 0,
    "n_levels": 3,
    "seed": 0,
    "displacement": 1.0,
    "xi_start": 1.0,
    "xi_end": 2.0,
    "xi": 1.0,
    "xi_rate": 0.5,
    "r_rate": 0.5,
    "hydrogen_form": "closed",
    "hx_coeffs": [2.0],
    "hz_coeffs": [0.0, 0.0, 0.0, 1.0],
}

NUMERICS_DEFAULTS = {
    "t_start": 0.0,
    "t_end": None,
    "dt": None,
    "x_min": None,
    "x_max": None,
    "n_points": 1024,
    "r_max": 20.0,
    "n_radial": 2000,
    "sample_every": None,
}

# kind-specific numerics defaults (t_end, dt, sample_every)
KIND_NUMERICS = {
    "twolevel-cubic": (6.0, 5e-4, 1),
    "custom": (6.0, 5e-4, 1),
    "twolevel-axis": (1.2, 1e-3, 1),
    "transport-1d": (4.0, 1e-3, 50),
    "dilatation-1d": (4.0, 1e-3, 50),
    "hydrogen-check": (0.0, 1e-4, 1),
    "nlevel": (10.0, 5e-3, 1),
}

# the dilated ground state exp(-x^2 / 2 xi^2) at xi = 2 still exceeds the
# 1e-8 edge bound at |x| = 12, so dilatation gets a wider box
KIND_GRID = {"dilatation-1d": (-16.0, 16.0)}
DEFAULT_GRID = (-12.0, 12.0)

OUTPUT_DEFAULTS = {"dir": "out", "prefix": None}

TWO_LEVEL_KINDS = ("twolevel-cubic", "twolevel-axis", "custom")


class ConfigError(Exception):
    """Validation failed; ``violations`` lists every problem found."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(f"{v.field}: {v.message}" for v in self.violations))


class ConfigSyntaxError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__([Violation("<syntax>", message if line is None else f"line {line}: {message}")])


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def to_dict(self):
        return {"field": self.field, "message": self.message}


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    physics: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def __getattr__(self, name):
        for part in ("physics", "numerics"):
            d = object.__getattribute__(self, part)
            if name in d:
                return d[name]
        raise AttributeError(name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            **self.physics,
            "numerics": dict(self.numerics),
            "tolerances": dict(self.tolerances),
            "output": dict(self.output),
        }


def _parse(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            m = re.search(r"line (\d+)", str(exc))
            line = int(m.group(1)) if m else text.count("\n") + 1
        raise ConfigSyntaxError(str(exc), line) from None


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def validate_config(source) -> ScenarioConfig:
    """Parse and validate ``source`` (TOML text or an already parsed dict).

    Returns a fully defaulted :class:`ScenarioConfig`; raises
    :class:`ConfigError` listing every violation, or
    :class:`ConfigSyntaxError` with the line number for unparsable text.
    """
    raw = _parse(source) if isinstance(source, str) else dict(source)
    bad: list = []
    kind = raw.get("kind")
    if kind is None:
        bad.append(Violation("kind", f"missing; expected one of {sorted(KINDS)}"))
    elif kind not in KINDS:
        bad.append(Violation("kind", f"unknown scenario kind {kind!r}; expected one of {sorted(KINDS)}"))

    physics = dict(PHYSICS_DEFAULTS)
    numerics = dict(NUMERICS_DEFAULTS)
    output = dict(OUTPUT_DEFAULTS)
    tolerances: dict = {}
    for key, value in raw.items():
        if key == "kind":
            continue
        if key == "numerics":
            target, defaults, section = numerics, NUMERICS_DEFAULTS, "numerics"
        elif key == "output":
            target, defaults, section = output, OUTPUT_DEFAULTS, "output"
        elif key == "tolerances":
            if not isinstance(value, dict):
                bad.append(Violation("tolerances", "must be a table"))
                continue
            for name, tol in value.items():
                if not _is_number(tol) or tol < 0:
                    bad.append(Violation(f"tolerances.{name}", "must be a nonnegative number"))
                else:
                    tolerances[name] = float(tol)
            continue
        elif key in PHYSICS_DEFAULTS:
            physics[key] = value
            continue
        else:
            bad.append(Violation(key, "unknown key"))
            continue
        if not isinstance(value, dict):
            bad.append(Violation(section, "must be a table"))
            continue
        for sub, subval in value.items():
            if sub not in defaults:
                bad.append(Violation(f"{section}.{sub}", "unknown key"))
            else:
                target[sub] = subval

    if kind in KIND_NUMERICS:
        t_end, dt, every = KIND_NUMERICS[kind]
        if numerics["t_end"] is None:
            numerics["t_end"] = t_end
        if numerics["dt"] is None:
            numerics["dt"] = dt
        if numerics["sample_every"] is None:
            numerics["sample_every"] = every
    x_lo, x_hi = KIND_GRID.get(kind, DEFAULT_GRID)
    if numerics["x_min"] is None:
        numerics["x_min"] = x_lo
    if numerics["x_max"] is None:
        numerics["x_max"] = x_hi
    if output["prefix"] is None and kind in KINDS:
        output["prefix"] = kind

    def need(cond, name, msg):
        if not cond:
            bad.append(Violation(name, msg))
        return cond

    numbers = ("c", "gamma", "mass", "omega", "varphi", "phi_start", "displacement", "xi_start", "xi_end", "xi", "xi_rate", "r_rate")
    ok = {name: need(_is_number(physics[name]), name, "must be a finite number") for name in numbers}
    for name in ("level", "n_levels", "seed", "power"):
        ok[name] = need(_is_int(physics[name]), name, "must be an integer")
    if kind in KINDS:
        for name in ("t_start", "t_end", "dt", "x_min", "x_max", "r_max"):
            ok[name] = need(_is_number(numerics[name]), f"numerics.{name}", "must be a finite number")
        for name in ("n_points", "n_radial", "sample_every"):
            ok[name] = need(_is_int(numerics[name]), f"numerics.{name}", "must be an integer")
    for name in ("hx_coeffs", "hz_coeffs"):
        v = physics[name]
        need(isinstance(v, list) and v and all(_is_number(c) for c in v), name, "must be a non-empty list of finite numbers")
    need(physics["hydrogen_form"] in ("closed", "scaling"), "hydrogen_form", "must be 'closed' or 'scaling'")
    need(isinstance(output["dir"], str), "output.dir", "must be a string")

    # range checks run for every field whose type is valid, so one pass
    # reports all problems
    def check(names, cond, field, msg):
        if all(ok.get(n, False) for n in names):
            need(cond(), field, msg)

    check(["dt"], lambda: numerics["dt"] > 0, "numerics.dt", "must be positive")
    check(["n_points"], lambda: numerics["n_points"] >= 8, "numerics.n_points", "must be >= 8")
    check(["n_radial"], lambda: numerics["n_radial"] >= 8, "numerics.n_radial", "must be >= 8")
    check(["sample_every"], lambda: numerics["sample_every"] >= 1, "numerics.sample_every", "must be >= 1")
    check(["x_min", "x_max"], lambda: numerics["x_max"] > numerics["x_min"], "numerics.x_max", "must exceed x_min")
    check(["r_max"], lambda: numerics["r_max"] > 0, "numerics.r_max", "must be positive")
    check(["mass"], lambda: physics["mass"] > 0, "mass", "must be positive")
    check(["omega"], lambda: physics["omega"] > 0, "omega", "must be positive")
    check(["power"], lambda: physics["power"] >= 1, "power", "must be >= 1")
    check(["xi"], lambda: physics["xi"] > 0, "xi", "must be positive")
    check(["xi_start", "xi_end"], lambda: physics["xi_start"] > 0 and physics["xi_end"] > 0, "xi_start", "dilatation factors must be positive")
    check(["n_levels"], lambda: physics["n_levels"] >= 2, "n_levels", "must be >= 2")
    n_max = 2 if kind in TWO_LEVEL_KINDS else physics["n_levels"]
    check(["level", "n_levels"], lambda: 0 <= physics["level"] < n_max, "level", "out of range")
    if kind in TWO_LEVEL_KINDS:
        check(["gamma"], lambda: physics["gamma"] > 0, "gamma", "must be positive for two-level kinds")
    if kind in KINDS and kind != "hydrogen-check":
        check(["t_start", "t_end"], lambda: numerics["t_end"] > numerics["t_start"], "numerics.t_end", "must exceed t_start")
        check(
            ["t_start", "t_end", "dt"],
            lambda: numerics["dt"] <= (numerics["t_end"] - numerics["t_start"]) / 2,
            "numerics.dt",
            "must allow at least two steps",
        )
    if bad:
        raise ConfigError(bad)
    return ScenarioConfig(kind, physics, numerics, tolerances, output)


def parse_override(item: str):
    """``"key=value"`` -> (path tuple, value); values are read as TOML
    scalars or arrays, falling back to bare strings."""
    if "=" not in item:
        raise ConfigError([Violation(item, "override must look like key=value")])
    key, text = item.split("=", 1)
    key = key.strip()
    try:
        value = tomllib.loads(f"v = {text.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = text.strip()
    return tuple(key.split(".")), value


def apply_overrides(raw: dict, overrides) -> dict:
    out = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    for item in overrides or ():
        path, value = parse_override(item)
        node = out
        for part in path[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError([Violation(".".join(path), "cannot override inside a scalar")])
        node[path[-1]] = value
    return out


def load_raw(text: str) -> dict:
    return _parse(text)
