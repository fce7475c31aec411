"""Time-domain oracle: integrate the nonlinear mean-value equations.

The five coupled equations (three cavities, two resonators) are integrated
with a fixed-step classical RK4 including the time-dependent probe
``sum_k Omega_pk exp(-i (w t - Phi_pk))``.  After the transient the
deviation from the steady state is projected onto the probe sideband and
compared with the frequency-domain response.

Which probe frequency ``w`` corresponds to a sideband offset x depends on
the convention.  ROTATED denominators are the drive-frame equations seen
from a frame turning at omega_m1, so the probe sits at w = x + omega_m1.
LITERAL denominators are the drive-frame equations themselves (with bare
detunings), so the probe sits at w = x.  Either way the sideband is
extracted at w in the drive frame.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .model import Convention, SystemParams
from .response import probe_superposition, solve_fluctuation_system
from .steady_state import drive_superposition, resolve_detunings, steady_state

__all__ = [
    "ComparisonReport",
    "DivergenceError",
    "TimeGrid",
    "Trajectory",
    "WindowTooShortError",
    "cross_check_response",
    "demodulate_sideband",
    "free_exponents",
    "integrate_mean_field",
    "probe_frequency",
    "write_trajectory_csv",
]

MAX_STEPS = 10**8
DT_RULE = 0.05
MIN_BEAT_PERIODS = 50
DIVERGENCE_FACTOR = 1e6


class DivergenceError(RuntimeError):
    pass


class WindowTooShortError(ValueError):
    def __init__(self, message: str, required_t_end: float):
        super().__init__(message)
        self.required_t_end = required_t_end


@dataclass(frozen=True)
class TimeGrid:
    t_end: float
    dt: float
    transient_fraction: float = 0.8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not 0.0 < self.transient_fraction < 1.0:
            raise ValueError("transient_fraction must lie in (0, 1)")
        if self.t_end / self.dt > MAX_STEPS:
            raise ValueError(f"t_end/dt exceeds {MAX_STEPS:.0e} steps")

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def t_transient(self) -> float:
        return self.transient_fraction * self.t_end


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def stacked(self) -> np.ndarray:
        return np.stack([self.a1, self.a2, self.a3, self.b1, self.b2], axis=-1)

    @classmethod
    def from_stacked(cls, times, z) -> "Trajectory":
        return cls(np.asarray(times), *(np.ascontiguousarray(z[:, k]) for k in range(5)))


@numba.njit(cache=True)
def _drift(z, t, prm, dd, dp, w_probe, out):
    k1, k2, k3, da1, da2, da3, w1, w2, g1, g2, o1, o2, o31, o32 = prm
    a1, a2, a3, b1, b2 = z[0], z[1], z[2], z[3], z[4]
    x1 = 2.0 * b1.real
    x2 = 2.0 * b2.real
    force = dd + dp * np.exp(-1j * w_probe * t)
    n3 = a3.real * a3.real + a3.imag * a3.imag
    out[0] = -(k1 + 1j * da1) * a1 + 1j * o1 * x1 * a1 + force
    out[1] = -(k2 + 1j * da2) * a2 + 1j * o2 * x2 * a2 + force
    out[2] = -(k3 + 1j * da3) * a3 + 1j * (o31 * x1 + o32 * x2) * a3 + force
    out[3] = -(g1 + 1j * w1) * b1 + 1j * o31 * n3
    out[4] = -(g2 + 1j * w2) * b2 + 1j * o32 * n3


@numba.njit(cache=True)
def _rhs(y, t, prm, dd, dp, w_probe, ref, nu, rotated, zbuf, out):
    if rotated:
        for k in range(5):
            zbuf[k] = ref[k] + y[k] * np.exp(-1j * nu[k] * t)
        _drift(zbuf, t, prm, dd, dp, w_probe, out)
        for k in range(5):
            out[k] = out[k] * np.exp(1j * nu[k] * t) + 1j * nu[k] * y[k]
    else:
        _drift(y, t, prm, dd, dp, w_probe, out)


@numba.njit(cache=True)
def _rk4_run(y0, dt, n_steps, stride, prm, dd, dp, w_probe, ref, nu, rotated, limit):
    n_samples = n_steps // stride + 1
    samples = np.empty((n_samples, 5), dtype=np.complex128)
    times = np.empty(n_samples)
    y = y0.copy()
    k1 = np.empty(5, dtype=np.complex128)
    k2 = np.empty(5, dtype=np.complex128)
    k3 = np.empty(5, dtype=np.complex128)
    k4 = np.empty(5, dtype=np.complex128)
    tmp = np.empty(5, dtype=np.complex128)
    zbuf = np.empty(5, dtype=np.complex128)
    samples[0] = y
    times[0] = 0.0
    j = 1
    for n in range(n_steps):
        t = n * dt
        _rhs(y, t, prm, dd, dp, w_probe, ref, nu, rotated, zbuf, k1)
        for k in range(5):
            tmp[k] = y[k] + 0.5 * dt * k1[k]
        _rhs(tmp, t + 0.5 * dt, prm, dd, dp, w_probe, ref, nu, rotated, zbuf, k2)
        for k in range(5):
            tmp[k] = y[k] + 0.5 * dt * k2[k]
        _rhs(tmp, t + 0.5 * dt, prm, dd, dp, w_probe, ref, nu, rotated, zbuf, k3)
        for k in range(5):
            tmp[k] = y[k] + dt * k3[k]
        _rhs(tmp, t + dt, prm, dd, dp, w_probe, ref, nu, rotated, zbuf, k4)
        for k in range(5):
            y[k] = y[k] + dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
        if (n + 1) % stride == 0:
            for k in range(5):
                if not abs(y[k]) <= limit:
                    return times[:j], samples[:j], n + 1
            samples[j] = y
            times[j] = (n + 1) * dt
            j += 1
    return times[:j], samples[:j], -1


def _param_vector(p: SystemParams) -> np.ndarray:
    c = p.coupling
    return np.array(
        [*p.kappas, *p.bare_detunings, p.mech[0].omega_m, p.mech[1].omega_m,
         p.mech[0].gamma, p.mech[1].gamma, c.o_m1, c.o_m2, c.o_m31, c.o_m32],
        dtype=float,
    )


def fastest_rate(p: SystemParams) -> float:
    p = resolve_detunings(p)
    return max(
        *(m.omega_m for m in p.mech),
        *(abs(d) for d in p.bare_detunings),
        *p.kappas,
        abs(p.probe.delta_p),
    )


def integrate_mean_field(
    p: SystemParams,
    grid: TimeGrid,
    init=None,
    *,
    frame: str = "drive",
    stride: int = 1,
    frame_frequencies=None,
) -> Trajectory:
    """Integrate the mean-value equations with RK4 from ``init``.

    The probe runs at ``p.probe.delta_p`` in the drive frame.  ``init``
    defaults to the probe-free steady state.  With ``frame="rotated"`` the
    integrated variables are the deviations from the steady state, each
    turned by exp(i nu_k t) with nu = (Delta_a1, Delta_a2, Delta_a3,
    omega_m1, omega_m2) unless ``frame_frequencies`` is given; the result is
    mapped back to the drive frame either way.
    """
    p = resolve_detunings(p)
    rate = fastest_rate(p)
    if grid.dt > DT_RULE / rate * (1 + 1e-9):
        raise ValueError(f"dt = {grid.dt:g} too coarse; need dt <= {DT_RULE / rate:g}")
    if frame not in ("drive", "rotated"):
        raise ValueError(f"unknown frame {frame!r}")
    stride = max(1, int(stride))

    ref = steady_state(p).amplitudes()
    z0 = ref.copy() if init is None else np.asarray(init, dtype=complex).reshape(5)
    dd = complex(drive_superposition(p.drive))
    dp = probe_superposition(p.probe)
    scale = (abs(dd) + abs(dp)) / min(p.kappas) + float(np.max(np.abs(z0))) + float(np.max(np.abs(ref)))
    limit = DIVERGENCE_FACTOR * max(scale, 1.0)

    rotated = frame == "rotated"
    if frame_frequencies is None:
        nu = np.array([*p.bare_detunings, p.mech[0].omega_m, p.mech[1].omega_m], dtype=float)
    else:
        nu = np.asarray(frame_frequencies, dtype=float).reshape(5)
    y0 = z0 - ref if rotated else z0

    times, samples, bad_step = _rk4_run(
        y0.astype(np.complex128), float(grid.dt), grid.n_steps, stride, _param_vector(p),
        dd, dp, float(p.probe.delta_p), ref.astype(np.complex128), nu, rotated, limit,
    )
    if bad_step >= 0:
        raise DivergenceError(
            f"amplitude exceeded {limit:.3g} at step {bad_step} (t = {bad_step * grid.dt:.6g}); "
            "the state is unstable or dt too large"
        )
    if rotated:
        samples = ref[None, :] + samples * np.exp(-1j * np.outer(times, nu))
    return Trajectory.from_stacked(times, samples)


def free_exponents(p: SystemParams, s=None) -> np.ndarray:
    """Eigenvalues of the drive-frame linearization around the steady state.

    Free deviations evolve as sums of exp(lambda t); the vector is (z, z*)
    so the Jacobian is 10 x 10 and captures counter-rotating coupling.
    """
    p = resolve_detunings(p)
    if s is None:
        s = steady_state(p)
    c = p.coupling
    a1, a2, a3 = s.a1s, s.a2s, s.a3s
    k1, k2, k3 = p.kappas
    d1, d2, d3 = s.effective_detunings
    (m1, m2) = p.mech
    jz = np.zeros((5, 5), dtype=complex)
    jc = np.zeros((5, 5), dtype=complex)
    jz[0, 0] = -(k1 + 1j * d1)
    jz[1, 1] = -(k2 + 1j * d2)
    jz[2, 2] = -(k3 + 1j * d3)
    jz[3, 3] = -(m1.gamma + 1j * m1.omega_m)
    jz[4, 4] = -(m2.gamma + 1j * m2.omega_m)
    for row, col, g in ((0, 3, 1j * c.o_m1 * a1), (1, 4, 1j * c.o_m2 * a2),
                        (2, 3, 1j * c.o_m31 * a3), (2, 4, 1j * c.o_m32 * a3)):
        jz[row, col] += g
        jc[row, col] += g
    jz[3, 2] = 1j * c.o_m31 * np.conj(a3)
    jc[3, 2] = 1j * c.o_m31 * a3
    jz[4, 2] = 1j * c.o_m32 * np.conj(a3)
    jc[4, 2] = 1j * c.o_m32 * a3
    full = np.block([[jz, jc], [np.conj(jc), np.conj(jz)]])
    return np.linalg.eigvals(full)


def _slow_exponents(exponents, frequency: float, span: float) -> list[complex]:
    """Exponents still visible in the window, minus duplicates and the signal itself."""
    out: list[complex] = []
    for lam in exponents:
        lam = complex(lam)
        if lam.real * span < -27.0 and lam.real < 0:
            continue
        tol = 1e-9 * max(1.0, abs(lam))
        if abs(lam + 1j * frequency) <= tol or abs(lam) <= tol:
            continue
        if all(abs(lam - u) > tol for u in out):
            out.append(lam)
    return out


def _beat(frequency: float, exponents) -> float:
    beats = [abs(frequency)] + [abs(lam + 1j * frequency) for lam in exponents]
    beats = [b for b in beats if b > 0]
    return min(beats) if beats else 0.0


def demodulate_sideband(tr: Trajectory, x: float, grid: TimeGrid, steady=None, exponents=()) -> np.ndarray:
    """Amplitudes of the exp(-i x t) component of each mode after the transient.

    The post-transient samples, minus ``steady`` when given, are projected
    by least squares onto {1, exp(-i x t), exp(+i x t)} plus exp(lambda t)
    for each slowly decaying free exponent lambda, which would otherwise
    leak into the fit.  The window must span 50 periods of the closest beat
    among these tones.  For x = 0 the tail mean minus ``steady`` is returned
    and ``steady`` is required.
    """
    t = np.asarray(tr.times)
    y = tr.stacked()
    if steady is not None:
        y = y - np.asarray(steady, dtype=complex)[None, :]
    window = t >= grid.t_transient - 1e-12 * grid.t_end
    t_w, y_w = t[window], y[window]
    if t_w.size < 3:
        raise WindowTooShortError("fewer than 3 samples after the transient", grid.t_end / grid.transient_fraction)
    if x == 0:
        if steady is None:
            raise ValueError("x = 0 needs the steady value to subtract")
        return y_w.mean(axis=0)
    span = t_w[-1] - t_w[0]
    extra = _slow_exponents(exponents, x, span)
    need = MIN_BEAT_PERIODS * 2 * math.pi / _beat(x, extra)
    if span < need * (1 - 1e-9):
        # same transient fraction, with a little slack for sampling
        required = 1.01 * need / (1.0 - grid.transient_fraction)
        raise WindowTooShortError(
            f"analysis window {span:.4g} covers fewer than {MIN_BEAT_PERIODS} beat periods; "
            f"need t_end >= {required:.6g}",
            required,
        )
    # phases referenced to the window start keep the basis well conditioned
    tau = t_w - t_w[0]
    cols = [np.ones_like(tau, dtype=complex), np.exp(-1j * x * tau), np.exp(1j * x * tau)]
    cols += [np.exp(lam * tau) for lam in extra]
    coef, *_ = np.linalg.lstsq(np.stack(cols, axis=1), y_w, rcond=None)
    return coef[1] * np.exp(1j * x * t_w[0])


def probe_frequency(p: SystemParams, x: float) -> float:
    """Drive-frame probe frequency that realizes sideband offset ``x``."""
    if p.convention is Convention.LITERAL:
        return float(x)
    return float(x) + p.omega_m1


@dataclass(frozen=True)
class ComparisonReport:
    x: float
    convention: str
    analytic: np.ndarray
    demodulated: np.ndarray
    relative_deviation: np.ndarray
    tolerance: float
    grid: TimeGrid

    @property
    def passed(self) -> bool:
        return bool(np.all(self.relative_deviation <= self.tolerance))

    def as_dict(self) -> dict:
        modes = ("a1", "a2", "a3", "b1", "b2")
        return {
            "x": self.x,
            "convention": self.convention,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "t_end": self.grid.t_end,
            "dt": self.grid.dt,
            "modes": {
                m: {
                    "analytic": [float(a.real), float(a.imag)],
                    "demodulated": [float(d.real), float(d.imag)],
                    "relative_deviation": float(r),
                }
                for m, a, d, r in zip(modes, self.analytic, self.demodulated, self.relative_deviation)
            },
        }


def _linear_probe(p: SystemParams, probe_ratio: float) -> SystemParams:
    drive = max(p.drive.omega_d1, p.drive.omega_d2)
    probe = max(p.probe.omega_p1, p.probe.omega_p2)
    if drive == 0 or probe == 0 or probe <= probe_ratio * drive:
        return p
    f = probe_ratio * drive / probe
    return replace(p, probe=replace(p.probe, omega_p1=p.probe.omega_p1 * f, omega_p2=p.probe.omega_p2 * f))


def auto_grid(p: SystemParams, x: float, *, t_relax: float | None = None, dt_factor: float = DT_RULE) -> TimeGrid:
    """Grid with a 50-beat analysis window after ``t_relax`` (25/min kappa by default)."""
    w = probe_frequency(p, x)
    q = replace(p, probe=replace(p.probe, delta_p=w))
    dt = dt_factor / fastest_rate(q)
    if t_relax is None:
        t_relax = 25.0 / min(p.kappas)
    slow = [lam for lam in free_exponents(p) if -lam.real * t_relax < 27.0]
    beat = _beat(w, slow)
    window = MIN_BEAT_PERIODS * 2 * math.pi / beat if beat > 0 else 10 * t_relax
    # a few extra samples so the window clears the beat requirement after striding
    t_end = (t_relax + window) * 1.01
    return TimeGrid(t_end=t_end, dt=dt, transient_fraction=t_relax / t_end)


def cross_check_response(
    p: SystemParams,
    x: float,
    *,
    tolerance: float = 5e-3,
    probe_ratio: float = 1e-3,
    grid: TimeGrid | None = None,
    frame: str = "rotated",
    t_relax: float | None = None,
) -> ComparisonReport:
    """Compare the linear solve at ``x`` with the demodulated nonlinear trajectory."""
    q = _linear_probe(resolve_detunings(p), probe_ratio)
    w = probe_frequency(q, x)
    q = replace(q, probe=replace(q.probe, delta_p=w))
    if grid is None:
        grid = auto_grid(q, x, t_relax=t_relax)
    s = steady_state(q)
    analytic = solve_fluctuation_system(q, s, x).as_array()
    # sample a few times per period of the fastest free oscillation
    stride = max(1, int((2 * math.pi / fastest_rate(q)) / (8 * grid.dt)))
    tr = integrate_mean_field(q, grid, frame=frame, stride=stride)
    demod = demodulate_sideband(tr, w, grid, steady=s.amplitudes(), exponents=free_exponents(q, s))
    floor = 1e-12 * float(np.max(np.abs(analytic)))
    rel = np.abs(demod - analytic) / np.maximum(np.abs(analytic), max(floor, 1e-300))
    return ComparisonReport(float(x), q.convention.value, analytic, demod, rel, tolerance, grid)


def write_trajectory_csv(tr: Trajectory, path) -> None:
    """Debug dump: t and Re/Im of the five modes."""
    header = ["t"] + [f"{part}_{m}" for m in ("a1", "a2", "a3", "b1", "b2") for part in ("re", "im")]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        z = tr.stacked()
        for t, row in zip(tr.times, z):
            w.writerow([repr(float(t))] + [repr(float(v)) for c in row for v in (c.real, c.imag)])
