"""Linearized probe response, output fields and port transmissions.

The sideband amplitudes at probe offset x = Delta_p - omega_m1 obey five
linear equations (three cavities, two resonators)::

    -U_1 da1 - i O_m1  a1s  db1              = D
    -U_2 da2 - i O_m2  a2s  db2              = D
    -U_3 da3 - i a3s (O_m31 db1 + O_m32 db2) = D
    -V_1 db1 - i O_m31 a3s* da3              = 0
    -V_2 db2 - i O_m32 a3s* da3              = 0

with D the probe superposition.  They are solved two ways, by the
eliminated closed form for (da1, da2) and by a dense linear solve, and the
two must agree.  Every function here accepts a scalar or an array of x.
"""

from __future__ import annotations

import cmath

from dataclasses import dataclass

import numpy as np

from .model import Convention, SystemParams
from .steady_state import SteadyStateSolution, resolve_detunings, steady_state

__all__ = [
    "FluctuationAmplitudes",
    "ResponseCoefficients",
    "SingularResponseError",
    "Spectrum",
    "TransmissionPoint",
    "closed_form_delta_a",
    "output_fields",
    "probe_superposition",
    "response_coefficients",
    "solve_fluctuation_system",
    "spectrum",
    "spectrum_arrays",
    "transmission_point",
]

POLE_TOL = 1e-12
SOLVE_DEFECT_TOL = 1e-10


class SingularResponseError(ArithmeticError):
    """Raised when a response denominator vanishes (zero damping at a pole)."""


@dataclass(frozen=True)
class ResponseCoefficients:
    u1: complex | np.ndarray
    u2: complex | np.ndarray
    u3: complex | np.ndarray
    v1: complex | np.ndarray
    v2: complex | np.ndarray
    zeta: complex | np.ndarray
    zeta_prime: complex | np.ndarray
    d_probe: complex


@dataclass(frozen=True)
class FluctuationAmplitudes:
    da1p: complex | np.ndarray
    da2p: complex | np.ndarray
    da3p: complex | np.ndarray
    db1p: complex | np.ndarray
    db2p: complex | np.ndarray
    x: float | np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(self.da1p, self.da2p, self.da3p, self.db1p, self.db2p), axis=-1)


@dataclass(frozen=True)
class TransmissionPoint:
    x: float
    delta_p: float
    eps_out_1: complex
    eps_out_2: complex
    t_21: float
    t_12: float


@dataclass(frozen=True)
class Spectrum:
    """Column form of a list of TransmissionPoints."""

    x: np.ndarray
    delta_p: np.ndarray
    eps_out_1: np.ndarray
    eps_out_2: np.ndarray
    t_21: np.ndarray
    t_12: np.ndarray

    def points(self) -> list[TransmissionPoint]:
        return [
            TransmissionPoint(float(a), float(b), complex(c), complex(d), float(e), float(f))
            for a, b, c, d, e, f in zip(
                self.x, self.delta_p, self.eps_out_1, self.eps_out_2, self.t_21, self.t_12
            )
        ]


def probe_superposition(probe) -> complex:
    """D = Omega_p1 e^{i Phi_p1} + Omega_p2 e^{i Phi_p2}."""
    return probe.omega_p1 * cmath.exp(1j * probe.phi_p1) + probe.omega_p2 * cmath.exp(1j * probe.phi_p2)


def _offsets(p: SystemParams, s: SteadyStateSolution):
    """Natural frequencies of the five fluctuation modes in the sideband frame."""
    w1 = p.omega_m1
    if p.convention is Convention.LITERAL:
        opt = resolve_detunings(p).bare_detunings
        mech = (p.mech[0].omega_m, p.mech[1].omega_m)
    else:
        opt = tuple(d - w1 for d in s.effective_detunings)
        mech = (p.mech[0].omega_m - w1, p.mech[1].omega_m - w1)
    return opt, mech


def response_coefficients(p: SystemParams, s: SteadyStateSolution, x, *, flip_product_sign: bool = False):
    """U_i, V_j, zeta, zeta' and D at probe offset(s) ``x``.

    ``zeta' = U_3 V_2 - O_m2 O_m32 a2s a3s*`` is the value that follows from
    eliminating the resonator equations.  ``flip_product_sign=True`` flips the sign
    of the product term, which breaks agreement with the linear solve and is
    kept only for comparison.
    """
    x = np.asarray(x, dtype=float)
    opt, mech = _offsets(p, s)
    k1, k2, k3 = p.kappas
    c = p.coupling
    u1 = 1j * x - 1j * opt[0] - k1
    u2 = 1j * x - 1j * opt[1] - k2
    u3 = 1j * x - 1j * opt[2] - k3
    v1 = 1j * x - 1j * mech[0] - p.mech[0].gamma
    v2 = 1j * x - 1j * mech[1] - p.mech[1].gamma
    a3c = np.conj(s.a3s)
    zeta = u3 * v1 - c.o_m1 * c.o_m31 * s.a1s * a3c
    sign = -1.0 if flip_product_sign else 1.0
    zeta_prime = u3 * v2 - sign * c.o_m2 * c.o_m32 * s.a2s * a3c
    return ResponseCoefficients(u1, u2, u3, v1, v2, zeta, zeta_prime, probe_superposition(p.probe))


def _offending_x(x, mask):
    x = np.atleast_1d(x)
    mask = np.broadcast_to(mask, x.shape)
    return float(x[np.argmax(mask)])


def closed_form_delta_a(p: SystemParams, s: SteadyStateSolution, x, *, flip_product_sign: bool = False):
    """Closed-form (da1+, da2+) after eliminating the resonators and cavity 3."""
    r = response_coefficients(p, s, x, flip_product_sign=flip_product_sign)
    c = p.coupling
    i3 = abs(s.a3s) ** 2
    mixed = i3 * (c.o_m31**2 * r.v2 + c.o_m32**2 * r.v1)
    core = r.u3 * r.v1 * r.v2 + mixed
    scale_core = np.abs(r.u3 * r.v1 * r.v2) + i3 * (c.o_m31**2 * np.abs(r.v2) + c.o_m32**2 * np.abs(r.v1))
    den1 = r.u1 * core
    den2 = r.u2 * core
    for den, u in ((den1, r.u1), (den2, r.u2)):
        bad = np.abs(den) <= POLE_TOL * np.abs(u) * scale_core
        if np.any(bad):
            raise SingularResponseError(f"near-singular response denominator at x = {_offending_x(x, bad)!r}")
    da1 = -r.d_probe * (r.v2 * r.zeta + mixed) / den1
    da2 = -r.d_probe * (r.v1 * r.zeta_prime + mixed) / den2
    return da1, da2


def fluctuation_matrix(p: SystemParams, s: SteadyStateSolution, x) -> np.ndarray:
    """Coefficient matrices of the five sideband equations, shape (..., 5, 5)."""
    r = response_coefficients(p, s, x)
    c = p.coupling
    shape = np.shape(r.u1)
    m = np.zeros(shape + (5, 5), dtype=complex)
    m[..., 0, 0] = -r.u1
    m[..., 0, 3] = -1j * c.o_m1 * s.a1s
    m[..., 1, 1] = -r.u2
    m[..., 1, 4] = -1j * c.o_m2 * s.a2s
    m[..., 2, 2] = -r.u3
    m[..., 2, 3] = -1j * c.o_m31 * s.a3s
    m[..., 2, 4] = -1j * c.o_m32 * s.a3s
    m[..., 3, 3] = -r.v1
    m[..., 3, 2] = -1j * c.o_m31 * np.conj(s.a3s)
    m[..., 4, 4] = -r.v2
    m[..., 4, 2] = -1j * c.o_m32 * np.conj(s.a3s)
    return m


def solve_fluctuation_system(p: SystemParams, s: SteadyStateSolution, x) -> FluctuationAmplitudes:
    """Sideband amplitudes of all five modes from a dense 5x5 solve."""
    x_arr = np.asarray(x, dtype=float)
    m = fluctuation_matrix(p, s, x_arr)
    d = probe_superposition(p.probe)
    rhs = np.zeros(m.shape[:-1], dtype=complex)
    rhs[..., :3] = d
    try:
        z = np.linalg.solve(m, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError as exc:
        raise SingularResponseError(f"singular fluctuation system: {exc}") from None
    defect = np.linalg.norm(np.einsum("...ij,...j->...i", m, z) - rhs, axis=-1)
    scale = np.linalg.norm(m, axis=(-2, -1)) * np.linalg.norm(z, axis=-1) + np.linalg.norm(rhs, axis=-1)
    bad = ~(defect <= SOLVE_DEFECT_TOL * scale)
    if np.any(bad):
        raise SingularResponseError(f"fluctuation solve defect too large at x = {_offending_x(x_arr, bad)!r}")
    zs = [z[..., k] for k in range(5)]
    if x_arr.ndim == 0:
        zs = [complex(v) for v in zs]
        x_out = float(x_arr)
    else:
        x_out = x_arr
    return FluctuationAmplitudes(*zs, x=x_out)


def output_fields(p: SystemParams, da1p, da2p):
    """Port outputs eps_out,j = 2 kappa_j da_j+ - Omega_pj."""
    k1, k2 = p.optical[0].kappa, p.optical[1].kappa
    return 2.0 * k1 * da1p - p.probe.omega_p1, 2.0 * k2 * da2p - p.probe.omega_p2


def _check_probes(p: SystemParams):
    if not (p.probe.omega_p1 > 0 and p.probe.omega_p2 > 0):
        raise ValueError("transmissions need both probe strengths > 0")


def spectrum_arrays(p: SystemParams, x, s: SteadyStateSolution | None = None, *, method: str = "closed_form") -> Spectrum:
    """Transmissions over an array of probe offsets, steady state solved once."""
    _check_probes(p)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if s is None:
        s = steady_state(p)
    if method == "closed_form":
        da1, da2 = closed_form_delta_a(p, s, x)
    elif method == "linear_solve":
        f = solve_fluctuation_system(p, s, x)
        da1, da2 = f.da1p, f.da2p
    else:
        raise ValueError(f"unknown method {method!r}")
    e1, e2 = output_fields(p, da1, da2)
    t21 = np.abs(e1 / p.probe.omega_p2) ** 2
    t12 = np.abs(e2 / p.probe.omega_p1) ** 2
    bad = ~(np.isfinite(t21) & np.isfinite(t12))
    if np.any(bad):
        raise SingularResponseError(f"non-finite transmission at x = {_offending_x(x, bad)!r}")
    return Spectrum(x, x + p.omega_m1, e1, e2, t21, t12)


def transmission_point(p: SystemParams, x: float, *, method: str = "closed_form") -> TransmissionPoint:
    """Full pipeline (steady state, response, outputs) at one probe offset."""
    return spectrum_arrays(p, [x], method=method).points()[0]


def spectrum(p: SystemParams, grid) -> list[TransmissionPoint]:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return spectrum_arrays(p, grid).points()
