"""Run configuration: a versioned JSON schema describing one scattering
experiment, with validation that reports the offending field path.

The window size ``window.A`` is measured in periods of the structure: the
lattice sum is truncated at the radius ``A * d``.  All other lengths
(shifts, offsets, the period itself) are absolute.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ddm import IncidentWave, Layer, LayerStack
from .geometry import Profile
from .specfun import WindowSpec

__all__ = ["ConfigError", "RunConfig", "load_config", "config_from_dict"]

SCHEMA_VERSION = 1

_PROFILE_TYPES = ("flat", "cosine", "multi_harmonic", "fourier")


class ConfigError(ValueError):
    """Invalid run configuration; the message names the field path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


def _require(data, key, path, kind=None):
    if key not in data:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    value = data[key]
    if kind is not None and not isinstance(value, kind):
        raise ConfigError(
            f"{path}.{key}" if path else key,
            f"expected {getattr(kind, '__name__', kind)}, got {type(value).__name__}",
        )
    return value


def _number(data, key, path, default=None, minimum=None, strict=False):
    if key not in data:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required field")
        return default
    v = data[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {type(v).__name__}")
    v = float(v)
    if minimum is not None and (v <= minimum if strict else v < minimum):
        cmp = ">" if strict else ">="
        raise ConfigError(f"{path}.{key}", f"must be {cmp} {minimum}, got {v}")
    return v


def _parse_profile(spec, d, path):
    if not isinstance(spec, dict):
        raise ConfigError(path, f"expected an object, got {type(spec).__name__}")
    ptype = _require(spec, "type", path, str)
    if ptype not in _PROFILE_TYPES:
        raise ConfigError(f"{path}.type", f"unknown profile type {ptype!r}; one of {_PROFILE_TYPES}")
    if ptype == "flat":
        return Profile.flat(d, level=_number(spec, "level", path, default=0.0))
    offset = _number(spec, "offset", path, default=0.0)
    if ptype == "cosine":
        return Profile.cosine(d, _number(spec, "height", path), offset=offset)
    if ptype == "multi_harmonic":
        return Profile.multi_harmonic(d, _number(spec, "height", path), offset=offset)
    cos = spec.get("cos", ())
    sin = spec.get("sin", ())
    if not cos and not sin:
        raise ConfigError(path, "fourier profile needs 'cos' and/or 'sin' coefficient lists")
    return Profile(d, cos_coeffs=tuple(cos), sin_coeffs=tuple(sin), vertical_offset=offset)


@dataclass(frozen=True)
class RunConfig:
    """Validated experiment description.

    window_a is in periods; ``radius`` converts it to the absolute
    truncation radius used by the Green-function lattice sums.
    """

    d: float
    alpha: float
    layers: tuple[Layer, ...]
    profiles: tuple[Profile, ...]
    M: int
    eta: float = 1.0
    window_a: float = 40.0
    window: WindowSpec = WindowSpec()
    wood_tol: float = 0.05
    j_shifts: int = 3
    prefer: str = "auto"
    shifts: tuple = ()  # per-layer overrides; empty = all automatic
    rayleigh_route: str = "line"
    amplitude: complex = 1.0
    reference: str | None = None
    sweep_axis: str | None = None
    sweep_values: tuple = ()
    name: str = "run"

    @property
    def radius(self):
        """Absolute window radius of the lattice sums."""
        return self.window_a * self.d

    def stack(self) -> LayerStack:
        return LayerStack(
            d=self.d, layers=self.layers, profiles=self.profiles,
            M=self.M, eta=self.eta,
        )

    def incident(self) -> IncidentWave:
        return IncidentWave(k=self.layers[0].k, alpha=self.alpha, amplitude=self.amplitude)

    def shift_list(self):
        if not self.shifts:
            return None
        return [None if s is None else float(s) for s in self.shifts]

    def resolved(self) -> dict:
        """Echo of every resolved default, for result metadata."""
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "d": self.d,
            "alpha": self.alpha,
            "layers": [{"k": l.k, "gamma": l.gamma} for l in self.layers],
            "interfaces": [
                {
                    "cos": list(p.cos_coeffs),
                    "sin": list(p.sin_coeffs),
                    "offset": p.vertical_offset,
                }
                for p in self.profiles
            ],
            "M": self.M,
            "eta": self.eta,
            "window": {"A": self.window_a, "c1": self.window.c1},
            "wood": {
                "tol": self.wood_tol,
                "j_shifts": self.j_shifts,
                "prefer": self.prefer,
                "shifts": list(self.shifts) if self.shifts else None,
            },
            "rayleigh_route": self.rayleigh_route,
            "amplitude": [np.real(self.amplitude), np.imag(self.amplitude)],
        }


def config_from_dict(data, name="run") -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "top-level config must be an object")
    version = data.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError("version", f"unsupported schema version {version}; this build reads {SCHEMA_VERSION}")
    dim = data.get("dimension", 2)
    if dim != 2:
        raise ConfigError("dimension", f"only 2 is supported, got {dim}")

    d = _number(data, "d", "", minimum=0.0, strict=True)

    inc = data.get("incidence", {})
    if not isinstance(inc, dict):
        raise ConfigError("incidence", "expected an object")
    if "alpha" in inc and "angle" in inc:
        raise ConfigError("incidence", "give either 'alpha' or 'angle', not both")
    layers_raw = _require(data, "layers", "", list)
    if len(layers_raw) < 2:
        raise ConfigError("layers", f"need at least 2 layers, got {len(layers_raw)}")
    layers = []
    for i, spec in enumerate(layers_raw):
        if not isinstance(spec, dict):
            raise ConfigError(f"layers[{i}]", "expected an object")
        k = _number(spec, "k", f"layers[{i}]", minimum=0.0, strict=True)
        gamma = _number(spec, "gamma", f"layers[{i}]", default=1.0, minimum=0.0, strict=True)
        try:
            layers.append(Layer(k=k, gamma=gamma))
        except ValueError as exc:
            raise ConfigError(f"layers[{i}]", str(exc)) from exc

    if "angle" in inc:
        theta = _number(inc, "angle", "incidence")
        alpha = layers[0].k * float(np.sin(theta))
    else:
        alpha = _number(inc, "alpha", "incidence", default=0.0)
    if not abs(alpha) < layers[0].k:
        raise ConfigError("incidence", f"|alpha| = {abs(alpha)} must be < top-layer k = {layers[0].k}")

    interfaces_raw = _require(data, "interfaces", "", list)
    if len(layers) != len(interfaces_raw) + 1:
        raise ConfigError(
            "interfaces",
            f"{len(layers)} layers need {len(layers) - 1} interfaces, got {len(interfaces_raw)}",
        )
    profiles = tuple(
        _parse_profile(spec, d, f"interfaces[{i}]") for i, spec in enumerate(interfaces_raw)
    )

    m_val = _number(data, "M", "", minimum=8.0)
    M = int(m_val)
    if M != m_val or M % 2 != 0:
        raise ConfigError("M", f"must be an even integer >= 8, got {data['M']}")

    eta = _number(data, "eta", "", default=1.0, minimum=0.0, strict=True)

    window = data.get("window", {})
    if not isinstance(window, dict):
        raise ConfigError("window", "expected an object")
    window_a = _number(window, "A", "window", default=40.0, minimum=0.0, strict=True)
    c1 = _number(window, "c1", "window", default=0.5)
    try:
        wspec = WindowSpec(c1=c1)
    except ValueError as exc:
        raise ConfigError("window.c1", str(exc)) from exc

    wood = data.get("wood", {})
    if not isinstance(wood, dict):
        raise ConfigError("wood", "expected an object")
    wood_tol = _number(wood, "tol", "wood", default=0.05, minimum=0.0, strict=True)
    j_shifts = int(_number(wood, "j_shifts", "wood", default=3.0, minimum=1.0))
    prefer = wood.get("prefer", "auto")
    if prefer not in ("auto", "plain", "shifted"):
        raise ConfigError("wood.prefer", f"must be auto/plain/shifted, got {prefer!r}")
    shifts_raw = wood.get("shifts")
    shifts = ()
    if shifts_raw is not None:
        if not isinstance(shifts_raw, list) or len(shifts_raw) != len(layers):
            raise ConfigError(
                "wood.shifts",
                f"need one entry per layer ({len(layers)}), got "
                f"{len(shifts_raw) if isinstance(shifts_raw, list) else type(shifts_raw).__name__}",
            )
        shifts = tuple(None if s is None else float(s) for s in shifts_raw)

    route = data.get("rayleigh_route", "line")
    if route not in ("line", "density"):
        raise ConfigError("rayleigh_route", f"must be 'line' or 'density', got {route!r}")

    outputs = data.get("outputs", {})
    if not isinstance(outputs, dict):
        raise ConfigError("outputs", "expected an object")
    reference = outputs.get("reference")

    sweep = data.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ConfigError("sweep", "expected an object")
    sweep_axis = sweep.get("axis")
    sweep_values = tuple(sweep.get("values", ()))
    if sweep_axis is not None and sweep_axis not in ("A", "M", "j_shifts", "h"):
        raise ConfigError("sweep.axis", f"must be one of A/M/j_shifts/h, got {sweep_axis!r}")

    cfg = RunConfig(
        d=d, alpha=alpha, layers=tuple(layers), profiles=profiles, M=M,
        eta=eta, window_a=window_a, window=wspec, wood_tol=wood_tol,
        j_shifts=j_shifts, prefer=prefer, shifts=shifts,
        rayleigh_route=route, amplitude=complex(_number(data, "amplitude", "", default=1.0)),
        reference=reference, sweep_axis=sweep_axis, sweep_values=sweep_values,
        name=str(data.get("name", name)),
    )
    try:
        cfg.stack()  # runs the geometric orderings checks
    except ValueError as exc:
        raise ConfigError("interfaces", str(exc)) from exc
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
    name = data.get("name")
    if name is None:
        import os

        name = os.path.splitext(os.path.basename(str(path)))[0]
    return config_from_dict(data, name=name)
