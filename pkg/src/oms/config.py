"""Job configuration files (TOML) with unit-aware values.

A config has a ``[system]`` table describing the parameters and a ``[job]``
table describing what to compute::

    [system]
    preset = "fig2c"                # optional starting point
    frequency_values = "cycles"     # "12.6 GHz" means 2 pi x 12.6e9 rad/s
    kappa_1 = "83 MHz"
    delta_1 = "1.1 x omega_m1"      # multiples of the first mechanical frequency
    phi_p1 = "-2pi/3"               # phases in rad, pi-expressions allowed

    [job]
    kind = "spectrum"
    x_min = -0.2                    # probe offsets in units of omega_m1
    x_max = 0.2
    x_count = 2001

Every dimensional value needs a unit: GHz, MHz, kHz, Hz, rad/s, or
"x omega_m1".  Hz-based units also need ``frequency_values`` to say whether
the number is an ordinary (cycles) or angular frequency.
"""

from __future__ import annotations

import enum
import math
import re
import sys
from dataclasses import dataclass, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

import tomli_w

from .model import (
    PHASE_NAMES,
    RATE_NAMES,
    TARGET_NAMES,
    BranchPolicy,
    Convention,
    SystemParams,
    UnitMode,
    get_value,
    is_rate,
    make_params,
    normalize_units,
    set_value,
)
from .presets import X_COUNT, X_RANGE, get_preset
from .sweep import X_AXIS, SweepAxis, canonical_name

__all__ = ["ConfigError", "JobKind", "JobSpec", "dump_config", "parse_config", "parse_phase", "parse_rate"]


class ConfigError(ValueError):
    pass


class JobKind(str, enum.Enum):
    STEADY_STATE = "steady_state"
    SPECTRUM = "spectrum"
    SWEEP1D = "sweep1d"
    SWEEP2D = "sweep2d"
    VERIFY = "verify"


@dataclass(frozen=True)
class JobSpec:
    kind: JobKind
    params: SystemParams
    preset: str | None = None
    x_span: tuple[float, float] = X_RANGE
    x_count: int = X_COUNT
    axes: tuple[SweepAxis, ...] = ()
    output: str = "out"
    format: str = "csv"
    n_points: int = 5
    seed: int = 0
    tolerance: float = 5e-3

    def x_grid(self):
        import numpy as np

        return np.linspace(self.x_span[0], self.x_span[1], self.x_count) * self.params.omega_m1


SYSTEM_KEYS = (
    {"preset", "frequency_values", "convention", "branch", "unit_mode", "o_m3", "phi_rel"}
    | set(RATE_NAMES) | set(PHASE_NAMES) | set(TARGET_NAMES)
)
JOB_KEYS = {"kind", "x_min", "x_max", "x_count", "output", "format", "n_points", "seed", "tolerance", "axis1", "axis2"}
AXIS_KEYS = {"parameter", "start", "stop", "count"}
REQUIRED_WITHOUT_PRESET = (
    "kappa_1", "kappa_2", "kappa_3", "omega_m1", "omega_m2", "gamma_1", "gamma_2",
    "o_m1", "o_m2", "omega_d1", "omega_d2", "omega_p1", "omega_p2",
)

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RATE_RE = re.compile(rf"^\s*({_NUMBER})\s*\*?\s*(GHz|MHz|kHz|Hz|rad/s|(?:x\s*)?omega_m1)\s*$")
_PI_RE = re.compile(rf"^\s*([-+]?(?:\d+\.?\d*|\.\d+)?(?:[eE][-+]?\d+)?)\s*\*?\s*pi\s*(?:/\s*({_NUMBER}))?\s*$")
_HZ = {"GHz": 1e9, "MHz": 1e6, "kHz": 1e3, "Hz": 1.0}


def parse_rate(value, key: str, frequency_values: str | None, omega_m1: float | None) -> float:
    """Angular frequency in rad/s from a unit-suffixed string."""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise ConfigError(f"{key}: expected a string such as '73 MHz'")
    if not isinstance(value, str):
        raise ConfigError(f"{key} = {value!r} needs a unit suffix (GHz, MHz, kHz, Hz, rad/s or 'x omega_m1')")
    m = _RATE_RE.match(value)
    if not m:
        raise ConfigError(f"{key} = {value!r}: cannot parse; use e.g. '73 MHz', '1.2e9 rad/s' or '1.1 x omega_m1'")
    number, unit = float(m.group(1)), m.group(2)
    if unit in _HZ:
        if frequency_values not in ("cycles", "angular"):
            raise ConfigError(f"{key}: Hz-based units need [system] frequency_values = 'cycles' or 'angular'")
        factor = 2.0 * math.pi if frequency_values == "cycles" else 1.0
        return number * _HZ[unit] * factor
    if unit == "rad/s":
        return number
    if omega_m1 is None:
        raise ConfigError(f"{key}: 'x omega_m1' used but omega_m1 is not known")
    return number * omega_m1


def _omega_multiple(value) -> float | None:
    """The bare multiplier of an 'x omega_m1' rate, else None."""
    if not isinstance(value, str):
        return None
    m = _RATE_RE.match(value)
    if m and m.group(2).endswith("omega_m1"):
        return float(m.group(1))
    return None


def parse_phase(value, key: str) -> float:
    """Phase in rad: a number or a pi-expression such as '-2pi/3'."""
    if isinstance(value, bool):
        raise ConfigError(f"{key}: expected a phase")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{key}: expected a phase")
    try:
        return float(value)
    except ValueError:
        pass
    m = _PI_RE.match(value)
    if not m:
        raise ConfigError(f"{key} = {value!r}: expected a number or an expression like '2pi/3'")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    div = float(m.group(2)) if m.group(2) else 1.0
    if div == 0:
        raise ConfigError(f"{key}: division by zero")
    return coef * math.pi / div


def _check_keys(table: dict, allowed: set, where: str) -> None:
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _enum(cls, value, key):
    try:
        return cls(str(value).lower())
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{key} = {value!r}: choose one of {choices}") from None


def _blank() -> SystemParams:
    zero2 = (0.0, 0.0)
    return make_params(
        kappa=(0.0, 0.0, 0.0), omega_m=zero2, gamma=zero2, o_m1=0.0, o_m2=0.0, o_m31=0.0, o_m32=0.0,
        omega_d=zero2, omega_p=zero2,
    )


def _parse_system(table: dict) -> tuple[SystemParams, str | None, UnitMode]:
    _check_keys(table, SYSTEM_KEYS, "[system]")
    preset = table.get("preset")
    if preset is not None:
        try:
            p = get_preset(str(preset)).params
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    else:
        p = _blank()
    fv = table.get("frequency_values")
    if fv is not None and fv not in ("cycles", "angular"):
        raise ConfigError("frequency_values must be 'cycles' or 'angular'")
    unit_mode = _enum(UnitMode, table.get("unit_mode", "rad_per_sec"), "unit_mode")
    if "convention" in table:
        p = replace(p, convention=_enum(Convention, table["convention"], "convention"))
    if "branch" in table:
        p = replace(p, branch=_enum(BranchPolicy, table["branch"], "branch"))

    if "omega_m1" in table:
        p = set_value(p, "omega_m1", parse_rate(table["omega_m1"], "omega_m1", fv, None))
    omega_m1 = p.omega_m1 if p.omega_m1 > 0 else None

    targets = [k for k in TARGET_NAMES if k in table]
    if targets and p.target_detunings is None:
        if len(targets) != 3:
            raise ConfigError("effective detunings delta_1..3 must be given together")
        p = replace(p, target_detunings=(0.0, 0.0, 0.0))
    for key in RATE_NAMES + TARGET_NAMES + ("o_m3",):
        if key in table and key != "omega_m1":
            p = set_value(p, key, parse_rate(table[key], key, fv, omega_m1))
    for key in PHASE_NAMES + ("phi_rel",):
        if key in table:
            p = set_value(p, key, parse_phase(table[key], key))

    if preset is None:
        missing = [k for k in REQUIRED_WITHOUT_PRESET if k not in table]
        if "o_m3" not in table:
            missing += [k for k in ("o_m31", "o_m32") if k not in table]
        if not targets:
            missing += [k for k in ("delta_a1", "delta_a2", "delta_a3") if k not in table]
        if missing:
            raise ConfigError(f"[system] without a preset is missing: {', '.join(missing)}")
    return p, (str(preset) if preset is not None else None), unit_mode


def _axis_value(value, parameter: str, fv, omega_m1: float) -> float:
    if parameter == X_AXIS:
        if isinstance(value, str):
            return parse_rate(value, "x", fv, omega_m1) / omega_m1
        return float(value)
    if is_rate(parameter):
        return parse_rate(value, parameter, fv, omega_m1)
    return parse_phase(value, parameter)


def _parse_axis(table, name, p, fv, scale) -> SweepAxis:
    if not isinstance(table, dict):
        raise ConfigError(f"[job.{name}] must be a table")
    _check_keys(table, AXIS_KEYS, f"[job.{name}]")
    missing = sorted(AXIS_KEYS - set(table))
    if missing:
        raise ConfigError(f"[job.{name}] is missing: {', '.join(missing)}")
    parameter = canonical_name(str(table["parameter"]))
    if parameter != X_AXIS:
        try:
            get_value(p, parameter)
        except KeyError as exc:
            raise ConfigError(f"[job.{name}] {exc.args[0]}") from None
    # omega_m1 in rad/s, before any normalization
    w = p.omega_m1 * p.rate_unit
    start = _axis_value(table["start"], parameter, fv, w)
    stop = _axis_value(table["stop"], parameter, fv, w)
    if parameter == X_AXIS:
        start, stop = start * p.omega_m1, stop * p.omega_m1
    elif is_rate(parameter):
        start, stop = start / scale, stop / scale
        if scale != 1.0:
            # normalized multiples are taken as written, avoiding a rad/s round trip
            start = _omega_multiple(table["start"]) if _omega_multiple(table["start"]) is not None else start
            stop = _omega_multiple(table["stop"]) if _omega_multiple(table["stop"]) is not None else stop
    try:
        return SweepAxis(parameter, start, stop, int(table["count"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _default_axes(preset: str | None, p: SystemParams, kind: JobKind) -> tuple[SweepAxis, ...]:
    if preset is None or kind not in (JobKind.SWEEP1D, JobKind.SWEEP2D):
        return ()
    sc = get_preset(preset)
    if sc.sweep_parameter is None:
        return ()
    lo, hi = sc.sweep_range
    if is_rate(sc.sweep_parameter):
        lo, hi = lo / p.rate_unit, hi / p.rate_unit
    axis = SweepAxis(sc.sweep_parameter, lo, hi, 201)
    if kind is JobKind.SWEEP2D:
        w = p.omega_m1
        return (SweepAxis(X_AXIS, X_RANGE[0] * w, X_RANGE[1] * w, X_COUNT), axis)
    return (axis,)


def parse_config(text: str, *, kind: str | None = None, preset: str | None = None) -> JobSpec:
    """Parse config text into a resolved JobSpec.

    ``kind`` and ``preset`` (from the command line) override the file.
    """
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"syntax error: {exc}") from None
    _check_keys(data, {"system", "job"}, "the top level")
    system = dict(data.get("system", {}))
    job = dict(data.get("job", {}))
    _check_keys(job, JOB_KEYS, "[job]")
    if preset is not None:
        system["preset"] = preset
    if not system:
        raise ConfigError("no [system] table and no preset given")

    p, preset_name, unit_mode = _parse_system(system)
    fv = system.get("frequency_values")
    # without an explicit kind, the number of axis tables decides
    n_axes = sum(n in job for n in ("axis1", "axis2"))
    kind_value = kind if kind is not None else job.get("kind", ("spectrum", "sweep1d", "sweep2d")[n_axes])
    job_kind = _enum(JobKind, str(kind_value).replace("-", "_"), "kind")

    scale = 1.0
    if unit_mode is UnitMode.OMEGA_M1_UNITS:
        scale = p.omega_m1
        p = normalize_units(p, unit_mode)
        for key in RATE_NAMES + TARGET_NAMES + ("o_m3",):
            mult = _omega_multiple(system.get(key))
            if mult is not None and key != "omega_m1":
                p = set_value(p, key, mult)

    axes = tuple(_parse_axis(job[n], n, p, fv, scale) for n in ("axis1", "axis2") if n in job)
    if not axes:
        axes = _default_axes(preset_name, p, job_kind)
    need = {JobKind.SWEEP1D: 1, JobKind.SWEEP2D: 2}.get(job_kind, 0)
    if len(axes) != need:
        raise ConfigError(f"kind {job_kind.value} needs {need} axis table(s), got {len(axes)}")

    x_min = float(job.get("x_min", X_RANGE[0]))
    x_max = float(job.get("x_max", X_RANGE[1]))
    x_count = int(job.get("x_count", X_COUNT))
    if not x_min < x_max or x_count < 2:
        raise ConfigError("x grid needs x_min < x_max and x_count >= 2")
    fmt = str(job.get("format", "csv")).lower()
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    n_points = int(job.get("n_points", 5))
    if n_points < 1:
        raise ConfigError("n_points must be >= 1")
    output = str(job.get("output", preset_name or job_kind.value))
    return JobSpec(
        kind=job_kind,
        params=p,
        preset=preset_name,
        x_span=(x_min, x_max),
        x_count=x_count,
        axes=axes,
        output=output,
        format=fmt,
        n_points=n_points,
        seed=int(job.get("seed", 0)),
        tolerance=float(job.get("tolerance", 5e-3)),
    )


def _rate_text(v: float, p: SystemParams) -> str:
    if p.unit_mode is UnitMode.OMEGA_M1_UNITS:
        return f"{v!r} x omega_m1"
    return f"{v!r} rad/s"


def _axis_text(v: float, parameter: str, p: SystemParams) -> object:
    if parameter == X_AXIS:
        return v / p.omega_m1
    if is_rate(parameter):
        return _rate_text(v, p)
    return v


def dump_config(job: JobSpec) -> str:
    """TOML text that parses back to an equivalent JobSpec.

    Rates are written with full precision, in rad/s for a rad/s job and as
    multiples of omega_m1 for a normalized one, so both round trip exactly.
    """
    p = job.params
    system: dict = {}
    if job.preset is not None:
        system["preset"] = job.preset
    system["convention"] = p.convention.value
    system["branch"] = p.branch.value
    system["unit_mode"] = p.unit_mode.value
    system["omega_m1"] = f"{p.omega_m1 * p.rate_unit!r} rad/s"
    for name in RATE_NAMES:
        if name != "omega_m1":
            system[name] = _rate_text(get_value(p, name), p)
    for name in PHASE_NAMES:
        system[name] = get_value(p, name)
    if p.target_detunings is not None:
        for name, v in zip(TARGET_NAMES, p.target_detunings):
            system[name] = _rate_text(v, p)
    out: dict = {
        "kind": job.kind.value,
        "x_min": job.x_span[0],
        "x_max": job.x_span[1],
        "x_count": job.x_count,
        "output": job.output,
        "format": job.format,
        "n_points": job.n_points,
        "seed": job.seed,
        "tolerance": job.tolerance,
    }
    for name, axis in zip(("axis1", "axis2"), job.axes):
        out[name] = {
            "parameter": axis.parameter,
            "start": _axis_text(axis.start, axis.parameter, p),
            "stop": _axis_text(axis.stop, axis.parameter, p),
            "count": axis.count,
        }
    return tomli_w.dumps({"system": system, "job": out})
