"""Parameter records, unit handling and validation.

All rates (detunings, decay rates, couplings, field strengths) are angular
frequencies.  ``SystemParams.rate_unit`` says how many rad/s one internal
unit is: 1.0 for plain rad/s, the mechanical frequency of mode 1 when the
record has been normalized with :func:`normalize_units`.  The dynamical
equations are invariant under a common rescaling of every rate, so all
downstream results (amplitudes, transmissions) are identical in both modes.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields, replace

HBAR = 1.054571817e-34  # J s

TWO_PI = 2.0 * math.pi


class Convention(str, enum.Enum):
    """How the sideband denominators are evaluated.

    LITERAL uses the bare detunings and bare mechanical frequencies in the
    frame of the drive.  ROTATED uses effective detunings measured from the
    first mechanical frequency, which places the resonances around x = 0.
    """

    LITERAL = "literal"
    ROTATED = "rotated"


class UnitMode(str, enum.Enum):
    RAD_PER_SEC = "rad_per_sec"
    OMEGA_M1_UNITS = "omega_m1_units"


class BranchPolicy(str, enum.Enum):
    ALL_ROOTS = "all_roots"
    SMALLEST_INTENSITY = "smallest_intensity"
    FIXED_POINT_ATTRACTOR = "fixed_point_attractor"


@dataclass(frozen=True)
class OpticalModeParams:
    kappa: float
    delta_a: float


@dataclass(frozen=True)
class MechModeParams:
    omega_m: float
    gamma: float


@dataclass(frozen=True)
class CouplingParams:
    o_m1: float
    o_m2: float
    o_m31: float
    o_m32: float


@dataclass(frozen=True)
class DriveParams:
    omega_d1: float
    omega_d2: float
    phi_d1: float = 0.0
    phi_d2: float = 0.0


@dataclass(frozen=True)
class ProbeParams:
    omega_p1: float
    omega_p2: float
    phi_p1: float = 0.0
    phi_p2: float = 0.0
    delta_p: float = 0.0


@dataclass(frozen=True)
class GeometryParams:
    omega_a: float
    length: float
    m_eff: float
    omega_m: float
    hbar: float = HBAR


@dataclass(frozen=True)
class SystemParams:
    """Complete parameter set of the three-cavity, two-resonator system.

    ``target_detunings`` optionally pins the effective detunings
    (Delta_1, Delta_2, Delta_3).  When present it takes precedence over the
    bare ``delta_a`` values, which are then recomputed by
    :func:`oms.steady_state.resolve_detunings` before any solve.
    """

    optical: tuple[OpticalModeParams, OpticalModeParams, OpticalModeParams]
    mech: tuple[MechModeParams, MechModeParams]
    coupling: CouplingParams
    drive: DriveParams
    probe: ProbeParams
    convention: Convention = Convention.ROTATED
    unit_mode: UnitMode = UnitMode.RAD_PER_SEC
    branch: BranchPolicy = BranchPolicy.SMALLEST_INTENSITY
    target_detunings: tuple[float, float, float] | None = None
    rate_unit: float = 1.0

    @property
    def omega_m1(self) -> float:
        return self.mech[0].omega_m

    @property
    def kappas(self) -> tuple[float, float, float]:
        return tuple(m.kappa for m in self.optical)

    @property
    def bare_detunings(self) -> tuple[float, float, float]:
        return tuple(m.delta_a for m in self.optical)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


# advisory thresholds
RESOLVED_SIDEBAND_RATIO = 10.0
WEAK_PROBE_RATIO = 0.25


def validate_params(p: SystemParams) -> ValidationReport:
    """Check hard invariants (errors) and regime advisories (warnings)."""
    report = ValidationReport()
    err = report.errors.append

    for name, value in flat_items(p):
        if not math.isfinite(value):
            err(f"{name} is not finite ({value!r})")

    for i, mode in enumerate(p.optical, start=1):
        if not mode.kappa > 0:
            err(f"kappa_{i} must be > 0, got {mode.kappa!r}")
    for j, mode in enumerate(p.mech, start=1):
        if not mode.omega_m > 0:
            err(f"omega_m{j} must be > 0, got {mode.omega_m!r}")
        if not mode.gamma > 0:
            err(f"gamma_{j} must be > 0, got {mode.gamma!r}")
    for name in ("o_m1", "o_m2", "o_m31", "o_m32"):
        if getattr(p.coupling, name) < 0:
            err(f"{name} must be >= 0")
    for name in ("omega_d1", "omega_d2"):
        if getattr(p.drive, name) < 0:
            err(f"{name} must be >= 0")
    for name in ("omega_p1", "omega_p2"):
        if getattr(p.probe, name) < 0:
            err(f"{name} must be >= 0")
    if not p.rate_unit > 0:
        err("rate_unit must be > 0")
    if p.unit_mode is UnitMode.OMEGA_M1_UNITS and not math.isclose(p.omega_m1, 1.0, rel_tol=1e-12):
        err("omega_m1 must equal 1 in omega_m1 units")
    if report.errors:
        return report

    kappa_max = max(p.kappas)
    for j, mode in enumerate(p.mech, start=1):
        if mode.omega_m < RESOLVED_SIDEBAND_RATIO * kappa_max:
            report.warnings.append(
                f"resolved-sideband regime not satisfied: omega_m{j} < "
                f"{RESOLVED_SIDEBAND_RATIO:g} * max(kappa)"
            )
    for j in (1, 2):
        probe = getattr(p.probe, f"omega_p{j}")
        drive = getattr(p.drive, f"omega_d{j}")
        if probe > WEAK_PROBE_RATIO * drive:
            report.warnings.append(
                f"weak-probe condition not satisfied: omega_p{j} > "
                f"{WEAK_PROBE_RATIO:g} * omega_d{j}"
            )
    return report


def coupling_from_geometry(g: GeometryParams) -> float:
    """Single-photon optomechanical coupling (omega_a/L) sqrt(hbar/(m_eff omega_m)), rad/s."""
    if not g.length > 0:
        raise ValueError(f"cavity length must be positive, got {g.length!r}")
    if not g.m_eff > 0:
        raise ValueError(f"effective mass must be positive, got {g.m_eff!r}")
    if not g.omega_m > 0:
        raise ValueError(f"mechanical frequency must be positive, got {g.omega_m!r}")
    return g.omega_a / g.length * math.sqrt(g.hbar / (g.m_eff * g.omega_m))


# ---------------------------------------------------------------------------
# flat parameter names, shared by config parsing and sweeps

RATE_NAMES = (
    "kappa_1", "kappa_2", "kappa_3",
    "delta_a1", "delta_a2", "delta_a3",
    "omega_m1", "omega_m2", "gamma_1", "gamma_2",
    "o_m1", "o_m2", "o_m31", "o_m32",
    "omega_d1", "omega_d2", "omega_p1", "omega_p2", "delta_p",
)
PHASE_NAMES = ("phi_d1", "phi_d2", "phi_p1", "phi_p2")
TARGET_NAMES = ("delta_1", "delta_2", "delta_3")
# derived names accepted by set_value only
DERIVED_NAMES = ("o_m3", "phi_rel", "phi_rel_p1", "phi_rel_p2")


def flat_items(p: SystemParams) -> list[tuple[str, float]]:
    items = [(name, get_value(p, name)) for name in RATE_NAMES + PHASE_NAMES]
    if p.target_detunings is not None:
        items += list(zip(TARGET_NAMES, p.target_detunings))
    return items


KNOWN_NAMES = frozenset(RATE_NAMES + PHASE_NAMES + TARGET_NAMES + DERIVED_NAMES)


def _check_name(name: str) -> None:
    if name not in KNOWN_NAMES:
        raise KeyError(f"unknown parameter {name!r}")


def get_value(p: SystemParams, name: str) -> float:
    _check_name(name)
    if name.startswith("kappa_"):
        return p.optical[int(name[-1]) - 1].kappa
    if name.startswith("delta_a"):
        return p.optical[int(name[-1]) - 1].delta_a
    if name in TARGET_NAMES:
        if p.target_detunings is None:
            raise KeyError(f"{name}: no effective detuning targets set")
        return p.target_detunings[int(name[-1]) - 1]
    if name.startswith("omega_m"):
        return p.mech[int(name[-1]) - 1].omega_m
    if name.startswith("gamma_"):
        return p.mech[int(name[-1]) - 1].gamma
    if name == "o_m3":
        return p.coupling.o_m31
    if name == "phi_rel":
        return relative_phase(p)
    for group in (p.coupling, p.drive, p.probe):
        if name in {f.name for f in fields(group)}:
            return getattr(group, name)
    raise KeyError(f"unknown parameter {name!r}")


def set_value(p: SystemParams, name: str, value: float) -> SystemParams:
    """Return a copy of ``p`` with one flat or derived parameter replaced.

    Derived names: ``o_m3`` sets both ``o_m31`` and ``o_m32``; ``phi_rel``
    zeroes the drive phases and puts half the relative phase on each probe;
    ``phi_rel_p1`` / ``phi_rel_p2`` realize the relative phase by moving a
    single probe phase.
    """
    _check_name(name)
    value = float(value)
    if name.startswith("kappa_") or name.startswith("delta_a"):
        i = int(name[-1]) - 1
        attr = "kappa" if name.startswith("kappa_") else "delta_a"
        optical = list(p.optical)
        optical[i] = replace(optical[i], **{attr: value})
        return replace(p, optical=tuple(optical))
    if name in TARGET_NAMES:
        if p.target_detunings is None:
            raise KeyError(f"{name}: set all three effective detunings together")
        targets = list(p.target_detunings)
        targets[int(name[-1]) - 1] = value
        return replace(p, target_detunings=tuple(targets))
    if name.startswith("omega_m") or name.startswith("gamma_"):
        j = int(name[-1]) - 1
        attr = "omega_m" if name.startswith("omega_m") else "gamma"
        mech = list(p.mech)
        mech[j] = replace(mech[j], **{attr: value})
        return replace(p, mech=tuple(mech))
    if name == "o_m3":
        return replace(p, coupling=replace(p.coupling, o_m31=value, o_m32=value))
    if name == "phi_rel":
        return replace(
            p,
            drive=replace(p.drive, phi_d1=0.0, phi_d2=0.0),
            probe=replace(p.probe, phi_p1=value / 2, phi_p2=value / 2),
        )
    if name in ("phi_rel_p1", "phi_rel_p2"):
        drive_sum = p.drive.phi_d1 + p.drive.phi_d2
        if name == "phi_rel_p1":
            probe = replace(p.probe, phi_p1=value + drive_sum - p.probe.phi_p2)
        else:
            probe = replace(p.probe, phi_p2=value + drive_sum - p.probe.phi_p1)
        return replace(p, probe=probe)
    for group_name in ("coupling", "drive", "probe"):
        group = getattr(p, group_name)
        if name in {f.name for f in fields(group)}:
            return replace(p, **{group_name: replace(group, **{name: value})})
    raise KeyError(f"unknown parameter {name!r}")


def is_rate(name: str) -> bool:
    return name in RATE_NAMES or name in TARGET_NAMES or name == "o_m3"


def relative_phase(p: SystemParams) -> float:
    """Collective phase (phi_p1 + phi_p2) - (phi_d1 + phi_d2)."""
    return (p.probe.phi_p1 + p.probe.phi_p2) - (p.drive.phi_d1 + p.drive.phi_d2)


def scale_rates(p: SystemParams, factor: float) -> SystemParams:
    """Multiply every rate by ``factor``; phases are untouched."""
    out = p
    for name in RATE_NAMES:
        out = set_value(out, name, get_value(p, name) * factor)
    if p.target_detunings is not None:
        out = replace(out, target_detunings=tuple(t * factor for t in p.target_detunings))
    return out


def normalize_units(p: SystemParams, target: UnitMode) -> SystemParams:
    """Rescale all rates to units of omega_m1 or back to rad/s.

    Already-converted input is returned unchanged.
    """
    target = UnitMode(target)
    if p.unit_mode is target:
        return p
    if target is UnitMode.OMEGA_M1_UNITS:
        w = p.omega_m1
        out = scale_rates(p, 1.0 / w)
        # pin exactly; the division can be off by an ulp
        out = set_value(out, "omega_m1", 1.0)
        return replace(out, unit_mode=target, rate_unit=p.rate_unit * w)
    out = scale_rates(p, p.rate_unit)
    return replace(out, unit_mode=target, rate_unit=1.0)


def swap_ports(p: SystemParams) -> SystemParams:
    """Exchange every port-1 quantity with its port-2 counterpart.

    Optical modes 1 and 2, mechanical modes, O_m1/O_m2, O_m31/O_m32, drives
    and probes are swapped; cavity 3 sits in the middle and is unchanged.
    """
    o1, o2, o3 = p.optical
    m1, m2 = p.mech
    c, d, pr = p.coupling, p.drive, p.probe
    targets = p.target_detunings
    if targets is not None:
        targets = (targets[1], targets[0], targets[2])
    return replace(
        p,
        optical=(o2, o1, o3),
        mech=(m2, m1),
        coupling=CouplingParams(c.o_m2, c.o_m1, c.o_m32, c.o_m31),
        drive=DriveParams(d.omega_d2, d.omega_d1, d.phi_d2, d.phi_d1),
        probe=ProbeParams(pr.omega_p2, pr.omega_p1, pr.phi_p2, pr.phi_p1, pr.delta_p),
        target_detunings=targets,
    )


def make_params(
    *,
    kappa: tuple[float, float, float],
    omega_m: tuple[float, float],
    gamma: tuple[float, float],
    o_m1: float,
    o_m2: float,
    o_m31: float,
    o_m32: float,
    omega_d: tuple[float, float],
    omega_p: tuple[float, float],
    delta_a: tuple[float, float, float] = (0.0, 0.0, 0.0),
    targets: tuple[float, float, float] | None = None,
    phi_d: tuple[float, float] = (0.0, 0.0),
    phi_p: tuple[float, float] = (0.0, 0.0),
    delta_p: float = 0.0,
    convention: Convention = Convention.ROTATED,
    branch: BranchPolicy = BranchPolicy.SMALLEST_INTENSITY,
) -> SystemParams:
    """Keyword constructor that avoids spelling out the nested records."""
    return SystemParams(
        optical=tuple(OpticalModeParams(k, d) for k, d in zip(kappa, delta_a)),
        mech=tuple(MechModeParams(w, g) for w, g in zip(omega_m, gamma)),
        coupling=CouplingParams(o_m1, o_m2, o_m31, o_m32),
        drive=DriveParams(omega_d[0], omega_d[1], phi_d[0], phi_d[1]),
        probe=ProbeParams(omega_p[0], omega_p[1], phi_p[0], phi_p[1], delta_p),
        convention=Convention(convention),
        branch=BranchPolicy(branch),
        target_detunings=None if targets is None else tuple(float(t) for t in targets),
    )
