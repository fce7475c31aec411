"""Self-consistent steady state of the driven cavities and resonators.

The resonator displacements depend only on the intensity I3 = |a3s|^2 of
the middle cavity, so eliminating them leaves one cubic for I3::

    I3 * (kappa_3^2 + (Delta_a3 - beta * I3)^2) = |D_d|^2
    beta = 2 * sum_j O_m3j^2 * omega_mj / (gamma_j^2 + omega_mj^2)

Everything else follows in closed form from the chosen root.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .model import BranchPolicy, OpticalModeParams, SystemParams

__all__ = [
    "SteadyStateError",
    "SteadyStateSolution",
    "bare_from_effective",
    "backaction_coefficient",
    "drive_superposition",
    "fixed_point_intensity",
    "resolve_detunings",
    "solve_intensity_cubic",
    "steady_state",
    "steady_state_residual",
]

ROOT_DEFECT_TOL = 1e-9
NEWTON_MAX_ITER = 60
FIXED_POINT_MAX_ITER = 200_000


class SteadyStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class SteadyStateSolution:
    a1s: complex
    a2s: complex
    a3s: complex
    b1s: complex
    b2s: complex
    delta_1: float
    delta_2: float
    delta_3: float
    branch_index: int = 0
    n_roots: int = 1
    residual: float = 0.0

    @property
    def intensity(self) -> float:
        return abs(self.a3s) ** 2

    @property
    def effective_detunings(self) -> tuple[float, float, float]:
        return (self.delta_1, self.delta_2, self.delta_3)

    @property
    def middle_branch(self) -> bool:
        """True for the middle root of a bistable triple."""
        return self.n_roots == 3 and self.branch_index == 1

    def amplitudes(self) -> np.ndarray:
        return np.array([self.a1s, self.a2s, self.a3s, self.b1s, self.b2s])


def drive_superposition(d) -> complex:
    """Omega_d1 e^{i Phi_d1} + Omega_d2 e^{i Phi_d2}."""
    return d.omega_d1 * cmath.exp(1j * d.phi_d1) + d.omega_d2 * cmath.exp(1j * d.phi_d2)


def _mech_lorentz(p: SystemParams) -> tuple[float, float]:
    """omega_mj / (gamma_j^2 + omega_mj^2) for both resonators."""
    return tuple(m.omega_m / (m.gamma**2 + m.omega_m**2) for m in p.mech)


def backaction_coefficient(p: SystemParams) -> float:
    """beta such that Delta_3 = Delta_a3 - beta * I3."""
    l1, l2 = _mech_lorentz(p)
    c = p.coupling
    return 2.0 * (c.o_m31**2 * l1 + c.o_m32**2 * l2)


def _detuning_shifts(p: SystemParams, intensity: float) -> tuple[float, float, float]:
    """Static shifts Delta_a_i - Delta_i produced by intensity I3."""
    l1, l2 = _mech_lorentz(p)
    c = p.coupling
    # b_js + b_js^* = 2 O_m3j I3 omega_mj / (gamma_j^2 + omega_mj^2)
    x1 = 2.0 * c.o_m31 * intensity * l1
    x2 = 2.0 * c.o_m32 * intensity * l2
    return (c.o_m1 * x1, c.o_m2 * x2, c.o_m31 * x1 + c.o_m32 * x2)


def _cubic_defect(intensity, kappa3, delta_a3, beta, drive2):
    return intensity * (kappa3**2 + (delta_a3 - beta * intensity) ** 2) - drive2


def _real_cubic_roots(delta: float, kappa: float, pressure: float) -> list[float]:
    """Real roots of y^3 - 2 delta y^2 + (kappa^2 + delta^2) y - pressure = 0."""
    a, b, c = -2.0 * delta, kappa**2 + delta**2, -pressure
    shift = -a / 3.0
    pp = b - a * a / 3.0
    qq = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    disc = (qq / 2.0) ** 2 + (pp / 3.0) ** 3
    if disc < 0.0 and pp < 0.0:
        r = 2.0 * math.sqrt(-pp / 3.0)
        arg = 3.0 * qq / (pp * r)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        roots = [r * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]
    else:
        s = math.sqrt(max(disc, 0.0))
        t = np.cbrt(-qq / 2.0 + s) + np.cbrt(-qq / 2.0 - s)
        roots = [float(t) + shift]
    return sorted(roots)


def _polish(intensity, kappa3, delta_a3, beta, drive2):
    x = max(float(intensity), 0.0)
    for _ in range(NEWTON_MAX_ITER):
        u = delta_a3 - beta * x
        f = x * (kappa3**2 + u * u) - drive2
        df = kappa3**2 + u * u - 2.0 * beta * x * u
        if df == 0.0:
            break
        step = f / df
        x_new = x - step
        if x_new < 0.0:
            x_new = 0.5 * x
        if abs(x_new - x) <= 4e-16 * max(abs(x_new), 1e-300):
            x = x_new
            break
        x = x_new
    return x


def solve_intensity_cubic(p: SystemParams) -> list[float]:
    """All real non-negative roots I3 of the steady-state cubic, ascending.

    Roots come from the closed-form cubic in y = beta * I3 followed by
    Newton polishing in I3.  Coincident roots are reported once.
    """
    kappa3, delta_a3 = p.optical[2].kappa, p.optical[2].delta_a
    drive2 = abs(drive_superposition(p.drive)) ** 2
    if drive2 == 0.0:
        return [0.0]
    beta = backaction_coefficient(p)
    linear = drive2 / (kappa3**2 + delta_a3**2)
    if beta == 0.0:
        return [linear]

    candidates = [y / beta for y in _real_cubic_roots(delta_a3, kappa3, beta * drive2)]
    roots: list[float] = []
    tol = ROOT_DEFECT_TOL * drive2
    for guess in candidates:
        root = _polish(guess, kappa3, delta_a3, beta, drive2)
        if abs(_cubic_defect(root, kappa3, delta_a3, beta, drive2)) > tol:
            raise SteadyStateError(
                f"root polishing did not converge (guess {guess!r}, "
                f"defect {_cubic_defect(root, kappa3, delta_a3, beta, drive2)!r})"
            )
        if all(abs(root - r) > 1e-9 * max(root, r, linear) for r in roots):
            roots.append(root)
    roots.sort()
    return roots


def bare_from_effective(p: SystemParams, targets) -> tuple[float, float, float]:
    """Bare detunings Delta_a_i that produce the effective ``targets``.

    With Delta_3 fixed, I3 = |D_d|^2 / (kappa_3^2 + Delta_3^2) is explicit,
    so the inversion needs no root finding.
    """
    d1, d2, d3 = (float(t) for t in targets)
    drive2 = abs(drive_superposition(p.drive)) ** 2
    intensity = drive2 / (p.optical[2].kappa ** 2 + d3**2)
    s1, s2, s3 = _detuning_shifts(p, intensity)
    return (d1 + s1, d2 + s2, d3 + s3)


def resolve_detunings(p: SystemParams) -> SystemParams:
    """Replace bare detunings by those implied by ``target_detunings``."""
    if p.target_detunings is None:
        return p
    bare = bare_from_effective(p, p.target_detunings)
    optical = tuple(OpticalModeParams(m.kappa, d) for m, d in zip(p.optical, bare))
    return replace(p, optical=optical)


def _solution_for_intensity(p, intensity, index, n_roots) -> SteadyStateSolution:
    dd = drive_superposition(p.drive)
    c = p.coupling
    (m1, m2) = p.mech
    b1 = 1j * c.o_m31 * intensity / (m1.gamma + 1j * m1.omega_m)
    b2 = 1j * c.o_m32 * intensity / (m2.gamma + 1j * m2.omega_m)
    da1, da2, da3 = p.bare_detunings
    d1 = da1 - c.o_m1 * 2.0 * b1.real
    d2 = da2 - c.o_m2 * 2.0 * b2.real
    d3 = da3 - c.o_m31 * 2.0 * b1.real - c.o_m32 * 2.0 * b2.real
    k1, k2, k3 = p.kappas
    sol = SteadyStateSolution(
        a1s=complex(dd / (k1 + 1j * d1)),
        a2s=complex(dd / (k2 + 1j * d2)),
        a3s=complex(dd / (k3 + 1j * d3)),
        b1s=complex(b1),
        b2s=complex(b2),
        delta_1=float(d1),
        delta_2=float(d2),
        delta_3=float(d3),
        branch_index=index,
        n_roots=n_roots,
    )
    return replace(sol, residual=steady_state_residual(p, sol))


def fixed_point_intensity(p: SystemParams) -> float:
    """I3 reached by relaxed iteration I <- |D_d|^2 / (kappa_3^2 + Delta_3(I)^2) from I = 0.

    Independent of the cubic solver, so it serves as a check on it.
    """
    kappa3, delta_a3 = p.optical[2].kappa, p.optical[2].delta_a
    drive2 = abs(drive_superposition(p.drive)) ** 2
    beta = backaction_coefficient(p)
    x = 0.0
    for _ in range(FIXED_POINT_MAX_ITER):
        u = delta_a3 - beta * x
        den = kappa3**2 + u * u
        target = drive2 / den
        # relax only where the map is decreasing, which is where plain iteration oscillates
        slope = 2.0 * beta * u * target / den
        alpha = 1.0 / (1.0 - slope) if slope < 0 else 1.0
        x_new = (1.0 - alpha) * x + alpha * target
        if abs(x_new - x) <= 1e-14 * max(x_new, 1e-300):
            return x_new
        x = x_new
    raise SteadyStateError("fixed-point iteration did not converge")


def steady_state(p: SystemParams, policy: BranchPolicy | None = None):
    """Steady amplitudes for the branch selected by ``policy``.

    Returns a list of solutions for ``ALL_ROOTS``, otherwise one solution.
    Effective-detuning targets on ``p`` are honoured by solving with the
    bare detunings from :func:`bare_from_effective`.
    """
    policy = BranchPolicy(policy if policy is not None else p.branch)
    p = resolve_detunings(p)
    roots = solve_intensity_cubic(p)
    assert roots, "the steady-state cubic always has a real root"
    n = len(roots)
    if policy is BranchPolicy.ALL_ROOTS:
        return [_solution_for_intensity(p, r, i, n) for i, r in enumerate(roots)]
    if policy is BranchPolicy.SMALLEST_INTENSITY:
        return _solution_for_intensity(p, roots[0], 0, n)
    attractor = fixed_point_intensity(p)
    index = int(np.argmin([abs(r - attractor) for r in roots]))
    return _solution_for_intensity(p, roots[index], index, n)


def steady_state_residual(p: SystemParams, s: SteadyStateSolution) -> float:
    """Largest defect of the five probe-free mean-value equations at ``s``."""
    p = resolve_detunings(p)
    dd = drive_superposition(p.drive)
    c = p.coupling
    a1, a2, a3, b1, b2 = s.a1s, s.a2s, s.a3s, s.b1s, s.b2s
    (o1, o2, o3) = p.optical
    (m1, m2) = p.mech
    x1 = b1 + b1.conjugate()
    x2 = b2 + b2.conjugate()
    eqs = (
        -(o1.kappa + 1j * o1.delta_a) * a1 + 1j * c.o_m1 * x1 * a1 + dd,
        -(o2.kappa + 1j * o2.delta_a) * a2 + 1j * c.o_m2 * x2 * a2 + dd,
        -(o3.kappa + 1j * o3.delta_a) * a3 + 1j * (c.o_m31 * x1 + c.o_m32 * x2) * a3 + dd,
        -(m1.gamma + 1j * m1.omega_m) * b1 + 1j * c.o_m31 * abs(a3) ** 2,
        -(m2.gamma + 1j * m2.omega_m) * b2 + 1j * c.o_m32 * abs(a3) ** 2,
    )
    return float(max(abs(e) for e in eqs))
