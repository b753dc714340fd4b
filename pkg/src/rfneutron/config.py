"""TOML run configuration (``schema_version = 1``).

Angles are strings with an explicit unit, ``"30 deg"`` or ``"0.5 rad"``; they
are stored in radians.  Unknown keys are rejected.  Errors raise
:class:`ConfigError`, which carries a line/column location when one can be
determined.

Sections and defaults::

    schema_version = 1

    [beamline]
    initial_spin = "up"            # "up" | "down"
    frequency_hz = 58000.0         # flipper 1; flipper 2 runs at half of it
    phi_omega = "0 deg"
    phi_half = "0 deg"
    flipper1_on = true
    flipper2_on = true
    chi = "0 deg"
    accelerator_rotation = "0 deg"
    compensate = false             # true: accelerator cancels zero_field_phase
    zero_field_phase = "0 deg"
    visibility = 1.0
    analyzer_keep = "up"
    turner_on = true
    wavelength_m = 1.91e-10
    coil_length_m = 0.02
    # optional field overrides, default: on resonance / pi flip
    # flipper1_b0_t, flipper1_b1_t, flipper2_b0_t, flipper2_b1_t

    [scan]        parameter = "chi", start = "0 deg", stop = "720 deg", step = "10 deg"
    [slopes]      start = "0 deg", stop = "360 deg", step = "45 deg", chi_points = 16
    [timeresolved] points = 64
    [jc]          n_mean = 100.0, pulse_area = "180 deg", phase_shift = "30 deg",
                  phase_grid_points = 7, n_min, n_max (optional window override)
    [noise]       enabled = false, seed = 0, counts_per_point = 10000.0
    [constants]   mu_magnitude, hbar, neutron_mass, planck (optional overrides)
    [output]      path, figure (optional; CLI flags take precedence)
"""

from __future__ import annotations

import copy
import math
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1

ANGLE = object()

DEFAULTS = {
    "beamline": {
        "initial_spin": "up",
        "frequency_hz": 58000.0,
        "phi_omega": ANGLE,
        "phi_half": ANGLE,
        "flipper1_on": True,
        "flipper2_on": True,
        "chi": ANGLE,
        "accelerator_rotation": ANGLE,
        "compensate": False,
        "zero_field_phase": ANGLE,
        "visibility": 1.0,
        "analyzer_keep": "up",
        "turner_on": True,
        "wavelength_m": 1.91e-10,
        "coil_length_m": 0.02,
        "flipper1_b0_t": None,
        "flipper1_b1_t": None,
        "flipper2_b0_t": None,
        "flipper2_b1_t": None,
    },
    "scan": {"parameter": "chi", "start": ANGLE, "stop": 4 * math.pi, "step": math.radians(10)},
    "slopes": {
        "start": ANGLE,
        "stop": 2 * math.pi,
        "step": math.radians(45),
        "chi_points": 16,
    },
    "timeresolved": {"points": 64},
    "jc": {
        "n_mean": 100.0,
        "pulse_area": math.pi,
        "phase_shift": math.radians(30),
        "phase_grid_points": 7,
        "n_min": None,
        "n_max": None,
    },
    "noise": {"enabled": False, "seed": 0, "counts_per_point": 10000.0},
    "constants": {"mu_magnitude": None, "hbar": None, "neutron_mass": None, "planck": None},
    "output": {"path": None, "figure": None},
}

ANGLE_KEYS = {
    ("beamline", "phi_omega"),
    ("beamline", "phi_half"),
    ("beamline", "chi"),
    ("beamline", "accelerator_rotation"),
    ("beamline", "zero_field_phase"),
    ("scan", "start"),
    ("scan", "stop"),
    ("scan", "step"),
    ("slopes", "start"),
    ("slopes", "stop"),
    ("slopes", "step"),
    ("jc", "pulse_area"),
    ("jc", "phase_shift"),
}
SPIN_KEYS = {("beamline", "initial_spin"), ("beamline", "analyzer_keep")}
BOOL_KEYS = {
    ("beamline", "flipper1_on"),
    ("beamline", "flipper2_on"),
    ("beamline", "compensate"),
    ("beamline", "turner_on"),
    ("noise", "enabled"),
}
INT_KEYS = {
    ("slopes", "chi_points"),
    ("timeresolved", "points"),
    ("jc", "phase_grid_points"),
    ("jc", "n_min"),
    ("jc", "n_max"),
    ("noise", "seed"),
}
STR_KEYS = {("output", "path"), ("output", "figure")}

_ANGLE_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(deg|rad)\s*$")


class ConfigError(Exception):
    def __init__(self, message, line=None, column=None):
        self.line, self.column = line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


def parse_angle(value) -> float:
    if not isinstance(value, str):
        raise ValueError(f"angle {value!r} needs an explicit 'deg' or 'rad' suffix")
    m = _ANGLE_RE.match(value)
    if not m:
        raise ValueError(f"cannot parse angle {value!r}; use e.g. '30 deg' or '0.5 rad'")
    x = float(m.group(1))
    return math.radians(x) if m.group(2) == "deg" else x


def format_angle(x: float) -> str:
    return f"{x!r} rad"


def _locate(text, section, key):
    """Best-effort ``(line, column)`` of ``key`` inside ``[section]``."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        m = re.match(r"^\[\s*([^\]]+?)\s*\]", stripped)
        if m:
            current = m.group(1)
            if section is not None and key is None and current == section:
                return lineno, raw.index("[") + 1
            continue
        if current == section and key is not None:
            km = re.match(rf"^(\s*){re.escape(key)}\s*=", raw)
            if km:
                return lineno, len(km.group(1)) + 1
        if section is None and current is None and key is not None:
            km = re.match(rf"^(\s*){re.escape(key)}\s*=", raw)
            if km:
                return lineno, len(km.group(1)) + 1
    return None, None


def _error(text, message, section=None, key=None):
    line, col = _locate(text, section, key)
    return ConfigError(message, line, col)


def _coerce(text, section, key, value):
    where = f"{section}.{key}"
    if value is None:
        return None
    if (section, key) in ANGLE_KEYS:
        try:
            return parse_angle(value)
        except ValueError as exc:
            raise _error(text, f"{where}: {exc}", section, key) from None
    if (section, key) in SPIN_KEYS:
        if value not in ("up", "down"):
            raise _error(text, f"{where}: expected 'up' or 'down', got {value!r}", section, key)
        return value
    if (section, key) in BOOL_KEYS:
        if not isinstance(value, bool):
            raise _error(text, f"{where}: expected true or false", section, key)
        return value
    if (section, key) in INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise _error(text, f"{where}: expected an integer", section, key)
        return value
    if (section, key) in STR_KEYS or key == "parameter":
        if not isinstance(value, str):
            raise _error(text, f"{where}: expected a string", section, key)
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _error(text, f"{where}: expected a number", section, key)
    value = float(value)
    if not math.isfinite(value):
        raise _error(text, f"{where}: must be finite", section, key)
    return value


def defaults() -> dict:
    cfg = {"schema_version": SCHEMA_VERSION}
    for section, keys in DEFAULTS.items():
        cfg[section] = {k: (0.0 if v is ANGLE else v) for k, v in keys.items()}
    return copy.deepcopy(cfg)


def loads(text: str) -> dict:
    """Parse and validate configuration text; returns the fully resolved dict."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        msg = re.sub(r"\s*\(at line \d+, column \d+\)", "", str(exc))
        raise ConfigError(f"TOML syntax error: {msg}", line, col) from None
    cfg = defaults()
    version = raw.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise _error(text, f"unsupported schema_version {version!r}", None, "schema_version")
    for section, body in raw.items():
        if section not in DEFAULTS:
            if isinstance(body, dict):
                raise _error(text, f"unknown section [{section}]", section, None)
            raise _error(text, f"unknown key {section!r}", None, section)
        if not isinstance(body, dict):
            raise _error(text, f"{section!r} must be a table", None, section)
        for key, value in body.items():
            if key not in DEFAULTS[section]:
                raise _error(text, f"unknown key {section}.{key}", section, key)
            cfg[section][key] = _coerce(text, section, key, value)
    _check_ranges(text, cfg)
    return cfg


def _check_ranges(text, cfg):
    b = cfg["beamline"]
    if not 0.0 <= b["visibility"] <= 1.0:
        raise _error(text, "beamline.visibility must lie in [0, 1]", "beamline", "visibility")
    for key in ("frequency_hz", "wavelength_m", "coil_length_m"):
        if not b[key] > 0:
            raise _error(text, f"beamline.{key} must be positive", "beamline", key)
    if cfg["scan"]["parameter"] not in ("chi", "phi_omega", "phi_half"):
        raise _error(text, "scan.parameter must be chi, phi_omega or phi_half", "scan", "parameter")
    for section in ("scan", "slopes"):
        if not cfg[section]["step"] > 0:
            raise _error(text, f"{section}.step must be positive", section, "step")
    for key in ("chi_points",):
        if cfg["slopes"][key] < 4:
            raise _error(text, "slopes.chi_points must be at least 4", "slopes", key)
    if cfg["timeresolved"]["points"] < 2:
        raise _error(text, "timeresolved.points must be at least 2", "timeresolved", "points")
    if cfg["jc"]["n_mean"] < 0:
        raise _error(text, "jc.n_mean must be non-negative", "jc", "n_mean")
    if cfg["noise"]["counts_per_point"] <= 0:
        raise _error(text, "noise.counts_per_point must be positive", "noise", "counts_per_point")
    for key, value in cfg["constants"].items():
        if value is not None and not value > 0:
            raise _error(text, f"constants.{key} must be positive", "constants", key)


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return loads(text)


def grid(start, stop, step, include_stop=False):
    n = int(math.floor((stop - start) / step + 1e-9))
    values = [start + i * step for i in range(n + 1)]
    if not include_stop and values and abs(values[-1] - stop) <= 1e-9 * max(1.0, abs(stop)):
        values.pop()
    return values


def flatten(cfg: dict):
    """``(dotted key, text value)`` pairs in a stable order, for output headers."""
    out = [("schema_version", str(cfg["schema_version"]))]
    for section in DEFAULTS:
        if section == "output":
            continue
        for key in DEFAULTS[section]:
            v = cfg[section][key]
            if (section, key) in ANGLE_KEYS:
                text = format_angle(v)
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            out.append((f"{section}.{key}", text))
    return out
