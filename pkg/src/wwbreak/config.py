"""Run configuration and initial-state presets.

The configuration format is plain text, one ``key = value`` per line, with
``#`` starting a comment.  Unknown keys are rejected and every error names
the offending line.
"""
from dataclasses import dataclass, fields, replace
import math
import re

import numpy as np

from . import spectral
from .breakdown import check_exponents, default_p, default_s
from .dynamics import SurfaceState
from .errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    """All run parameters; ``p`` and ``s`` default from ``d`` when unset."""

    d: int = 1
    n: int = 256
    L: float = 2 * math.pi
    g: float = 1.0
    dt: float = 1e-3
    T: float = 1.0
    M: int = 64
    Z_b: float = None
    delta_hint: float = 1.0
    p: float = None
    s: float = None
    scenario: str = "rest"
    out: str = "out"
    tol_E: float = 1e-8
    solver_tol: float = 1e-13
    dealias: bool = True
    filter: bool = False
    sample_stride: int = 1
    snapshot_stride: int = 0
    tail_tol: float = 1e-6

    def __post_init__(self):
        if self.p is None:
            object.__setattr__(self, "p", float(default_p(self.d)))
        if self.s is None:
            object.__setattr__(self, "s", float(default_s(self.d)))
        validate(self)

    @property
    def steps(self):
        return int(round(self.T / self.dt))


def _check(cond, message, line=None):
    if not cond:
        raise ConfigError(message, line)


def validate(cfg, line=None):
    _check(cfg.d in (1, 2), f"d must be 1 or 2, got {cfg.d}", line)
    _check(cfg.n >= 8 and cfg.n & (cfg.n - 1) == 0, f"n must be a power of two >= 8, got {cfg.n}", line)
    for name in ("L", "g", "dt", "T", "delta_hint", "tol_E", "solver_tol", "tail_tol"):
        val = getattr(cfg, name)
        _check(math.isfinite(val) and val > 0, f"{name} must be positive, got {val}", line)
    _check(cfg.Z_b is None or (math.isfinite(cfg.Z_b) and cfg.Z_b > 0),
           f"Z_b must be positive, got {cfg.Z_b}", line)
    _check(cfg.M >= 4, f"M must be at least 4, got {cfg.M}", line)
    _check(cfg.sample_stride >= 1, f"sample_stride must be >= 1, got {cfg.sample_stride}", line)
    _check(cfg.snapshot_stride >= 0, f"snapshot_stride must be >= 0, got {cfg.snapshot_stride}", line)
    try:
        check_exponents(cfg.d, cfg.p, cfg.s)
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None
    try:
        parse_scenario(cfg.scenario)
    except ValueError as exc:
        raise ConfigError(str(exc), line) from None


def _parse_float(text):
    """Float literal, optionally a multiple of ``pi`` such as ``2pi`` or ``2*pi``."""
    t = text.strip().lower()
    if t.endswith("pi"):
        coef = t[:-2].rstrip("*").strip()
        return (float(coef) if coef else 1.0) * math.pi
    return float(t)


def _parse_bool(text):
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parser(f):
    if f.name in ("Z_b", "p", "s"):
        return lambda t: None if t.strip().lower() in ("", "auto", "none") else _parse_float(t)
    if f.type in (int, "int"):
        return int
    if f.type in (bool, "bool"):
        return _parse_bool
    if f.type in (str, "str"):
        return str.strip
    return _parse_float


_FIELDS = {f.name: f for f in fields(RunConfig)}
_ALIASES = {"T_final": "T"}


def parse_config(text):
    """Parse ``key = value`` lines into a validated :class:`RunConfig`."""
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected key=value, got {body!r}", lineno)
        key, val = (part.strip() for part in body.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        try:
            values[key] = _parser(_FIELDS[key])(val)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", lineno) from None
        lines[key] = lineno
    try:
        return RunConfig(**values)
    except ConfigError as exc:
        # attach the line of the first key named in the message
        for key, lineno in lines.items():
            if re.search(rf"\b{re.escape(key)}\b", str(exc)):
                raise ConfigError(str(exc), lineno) from None
        raise


def serialize(cfg):
    """Text form that :func:`parse_config` reads back to an equal config."""
    out = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            text = "auto"
        elif isinstance(val, bool):
            text = "true" if val else "false"
        elif isinstance(val, float):
            text = repr(val)
        else:
            text = str(val)
        out.append(f"{f.name} = {text}")
    return "\n".join(out) + "\n"


def load_config(path, **overrides):
    with open(path) as fh:
        cfg = parse_config(fh.read())
    return replace(cfg, **overrides) if overrides else cfg


# ------------------------------------------------------------------ presets

PRESETS = {
    "rest": (),
    "linear_wave": (("k", 2.0), ("amp", 1e-6)),
    "steep_cosine": (("k", 1.0), ("amp", 0.35), ("lift", 3.0)),
    "gaussian_hump": (("width", 0.5), ("amp", 0.3)),
}

_CALL = re.compile(r"^\s*([A-Za-z_]\w*)\s*(?:\((.*)\))?\s*$")


def parse_scenario(text):
    """``name`` or ``name(arg, ...)`` to ``(name, {param: value})``."""
    m = _CALL.match(text)
    if not m or m.group(1) not in PRESETS:
        raise ValueError(f"unknown preset {text!r}; choose from {', '.join(PRESETS)}")
    name, argtext = m.group(1), m.group(2)
    params = dict(PRESETS[name])
    args = [a for a in (argtext or "").split(",") if a.strip()]
    if len(args) > len(params):
        raise ValueError(f"{name} takes at most {len(params)} arguments")
    keys = list(params)
    for i, arg in enumerate(args):
        if "=" in arg:
            key, val = (p.strip() for p in arg.split("=", 1))
            if key not in params:
                raise ValueError(f"{name} has no parameter {key!r}")
        else:
            key, val = keys[i], arg
        params[key] = _parse_float(val)
    return name, params


def gaussian_images(grid, width, amp, images=3):
    """Gaussian centred in the cell, periodized over ``+-images`` neighbour cells."""
    out = np.zeros(grid.shape)
    centre = grid.L / 2
    shifts = range(-images, images + 1)
    for offset in np.ndindex(*(len(shifts),) * grid.d):
        r2 = sum((grid.x[j] - centre + grid.L * shifts[offset[j]]) ** 2 for j in range(grid.d))
        out += np.exp(-r2 / (2 * width**2))
    return amp * out


def preset(name, grid, g=1.0):
    """Initial :class:`SurfaceState` for a scenario string such as ``linear_wave(2, 1e-6)``."""
    try:
        kind, params = parse_scenario(name)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    x = grid.x[0]
    zero = np.zeros(grid.shape)
    if kind == "rest":
        eta, psi = zero, zero
    elif kind == "linear_wave":
        eta, psi = params["amp"] * np.cos(params["k"] * x), zero
    elif kind == "steep_cosine":
        # crest rising with ``lift`` times the linear standing-wave velocity
        k, amp = params["k"], params["amp"]
        eta = amp * np.cos(k * x)
        psi = params["lift"] * amp * math.sqrt(g / k) * np.cos(k * x)
    else:
        eta, psi = gaussian_images(grid, params["width"], params["amp"]), zero
    return SurfaceState(grid, 0.0, eta, psi, g)


def make_grid(cfg):
    return spectral.Grid(cfg.d, cfg.n, cfg.L)
