"""Parameter sweeps over transmission spectra and peak extraction.

Every sweep point re-solves the steady state, since the swept parameter may
move it, and then evaluates the closed-form response over the whole x grid
in one vectorized call.  Rows are independent, so they may be evaluated on a
thread pool; results are written into preallocated arrays by index, which
makes the output independent of the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import SystemParams, get_value, set_value
from .response import SingularResponseError, Spectrum, TransmissionPoint, spectrum_arrays
from .steady_state import SteadyStateError, steady_state

__all__ = [
    "Peak",
    "SweepAxis",
    "SweepGrid",
    "default_x_grid",
    "find_peaks",
    "find_peaks_xy",
    "sweep_1d",
    "sweep_2d",
    "zoom_spectrum",
]

X_AXIS = "x"
PHI_REL_NOTE = "phi_rel/2 added to each probe phase, drive phases set to 0"


def canonical_name(name: str) -> str:
    """Accept the mixed-case spellings used in configs ("O_m3", "Omega_p1")."""
    return name.strip().lower()


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "parameter", canonical_name(self.parameter))
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("axis endpoints must be finite")
        if not self.start < self.stop:
            raise ValueError(f"axis {self.parameter!r}: start must be < stop")
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis {self.parameter!r}: count must be an integer >= 2")
        if self.scale != "linear":
            raise ValueError(f"unsupported axis scale {self.scale!r}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, int(self.count))

    def check(self, p: SystemParams) -> None:
        if self.parameter != X_AXIS:
            get_value(p, self.parameter)


@dataclass
class SweepGrid:
    """Dense sweep result; arrays have shape (count_1, count_2, len(x_grid)).

    For a 1-D sweep or a 2-D sweep with x as one axis the middle dimension
    has length 1.  Failed points hold NaN and their message is in ``errors``.
    """

    axis1: SweepAxis
    axis2: SweepAxis | None
    x_grid: np.ndarray
    t_12: np.ndarray
    t_21: np.ndarray
    eps_out_1: np.ndarray
    eps_out_2: np.ndarray
    omega_m1: float
    n_roots: np.ndarray
    branch_index: np.ndarray
    errors: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.t_12.shape

    def point(self, i: int, j: int, k: int) -> TransmissionPoint:
        x = float(self.x_grid[k])
        return TransmissionPoint(
            x, x + self.omega_m1, complex(self.eps_out_1[i, j, k]), complex(self.eps_out_2[i, j, k]),
            float(self.t_21[i, j, k]), float(self.t_12[i, j, k]),
        )

    def spectrum(self, i: int, j: int = 0) -> Spectrum:
        x = np.asarray(self.x_grid)
        return Spectrum(x, x + self.omega_m1, self.eps_out_1[i, j], self.eps_out_2[i, j], self.t_21[i, j], self.t_12[i, j])


def default_x_grid(p: SystemParams, span=(-0.2, 0.2), count: int = 2001) -> np.ndarray:
    """Probe-offset grid in the units of ``p``, spanning ``span`` x omega_m1."""
    return np.linspace(span[0], span[1], count) * p.omega_m1


def _apply(p: SystemParams, name: str, value: float) -> SystemParams:
    return p if name == X_AXIS else set_value(p, name, value)


def _row(p: SystemParams, x: np.ndarray):
    s = steady_state(p)
    sp = spectrum_arrays(p, x, s)
    return sp, s.n_roots, s.branch_index


def _run(p, param_axes, x_grid, threads):
    names = [a.parameter for a in param_axes]
    values = [a.values() for a in param_axes]
    shape = tuple(len(v) for v in values) + (1,) * (2 - len(values))
    nx = len(x_grid)
    t12 = np.full(shape + (nx,), np.nan)
    t21 = np.full(shape + (nx,), np.nan)
    e1 = np.full(shape + (nx,), np.nan + 0j, dtype=complex)
    e2 = np.full(shape + (nx,), np.nan + 0j, dtype=complex)
    roots = np.zeros(shape, dtype=int)
    branch = np.full(shape, -1, dtype=int)
    errors: dict = {}

    def task(ij):
        i, j = ij
        q = p
        for name, vals, idx in zip(names, values, (i, j)):
            q = _apply(q, name, vals[idx])
        try:
            sp, n, b = _row(q, x_grid)
        except (SteadyStateError, SingularResponseError, ValueError, ArithmeticError) as exc:
            errors[(i, j)] = f"{type(exc).__name__}: {exc}"
            return
        t12[i, j], t21[i, j] = sp.t_12, sp.t_21
        e1[i, j], e2[i, j] = sp.eps_out_1, sp.eps_out_2
        roots[i, j], branch[i, j] = n, b

    cells = [(i, j) for i in range(shape[0]) for j in range(shape[1])]
    workers = max(1, int(threads or os.cpu_count() or 1))
    if workers == 1:
        for c in cells:
            task(c)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(task, cells))
    return t12, t21, e1, e2, roots, branch, dict(sorted(errors.items()))


def _branch_switches(roots: np.ndarray, branch: np.ndarray) -> list[list[int]]:
    """Neighbouring cells (along either sweep axis) whose root count or branch differs."""
    out = []
    key = roots * 10 + branch
    for axis in (0, 1):
        d = np.diff(key, axis=axis)
        for idx in zip(*np.nonzero(d)):
            out.append([int(v) for v in idx] + [axis])
    return sorted(out)


def _metadata(p, axes):
    meta = {
        "axes": [{"parameter": a.parameter, "start": a.start, "stop": a.stop, "count": a.count} for a in axes],
        "branch_policy": p.branch.value,
        "convention": p.convention.value,
    }
    if any(a.parameter == "phi_rel" for a in axes):
        meta["phi_rel_attribution"] = PHI_REL_NOTE
        meta["phi_rel_units"] = "rad"
    return meta


def _assemble(p, axis1, axis2, x_grid, threads, param_axes):
    x_grid = np.asarray(x_grid, dtype=float)
    if x_grid.ndim != 1 or x_grid.size == 0:
        raise ValueError("x_grid must be a non-empty 1-D sequence")
    for a in param_axes:
        a.check(p)
    t12, t21, e1, e2, roots, branch, errors = _run(p, param_axes, x_grid, threads)
    meta = _metadata(p, [a for a in (axis1, axis2) if a is not None])
    meta["branch_switches"] = _branch_switches(roots, branch)
    if errors:
        meta["failed_points"] = len(errors)
    return SweepGrid(axis1, axis2, x_grid, t12, t21, e1, e2, p.omega_m1, roots, branch, errors, meta)


def sweep_1d(p: SystemParams, axis: SweepAxis, x_grid, threads: int | None = None) -> SweepGrid:
    """Spectra over ``x_grid`` for every value on ``axis``; shape (count, 1, nx)."""
    if axis.parameter == X_AXIS:
        raise ValueError("sweep_1d needs a parameter axis; pass the x grid separately")
    return _assemble(p, axis, None, x_grid, threads, [axis])


def sweep_2d(p: SystemParams, axis1: SweepAxis, axis2: SweepAxis, x_grid=None, threads: int | None = None) -> SweepGrid:
    """Two-axis sweep.  Either axis may be "x", in which case it replaces ``x_grid``.

    With x as an axis the parameter axis becomes the first array dimension
    and x the last, whatever order the axes were given in.
    """
    xs = [a for a in (axis1, axis2) if a.parameter == X_AXIS]
    if len(xs) == 2:
        raise ValueError("at most one axis may be x")
    if xs:
        if x_grid is not None:
            raise ValueError("x is already an axis; do not pass x_grid too")
        param = axis2 if axis1.parameter == X_AXIS else axis1
        return _assemble(p, axis1, axis2, xs[0].values(), threads, [param])
    if x_grid is None:
        raise ValueError("x_grid is required when neither axis is x")
    if axis1.parameter == axis2.parameter:
        raise ValueError("the two axes must vary different parameters")
    return _assemble(p, axis1, axis2, x_grid, threads, [axis1, axis2])


def zoom_spectrum(p: SystemParams, center: float, half_width: float, count: int = 2001) -> Spectrum:
    """Dense spectrum around ``center``, for features narrower than the main grid."""
    if not half_width > 0:
        raise ValueError("half_width must be positive")
    return spectrum_arrays(p, np.linspace(center - half_width, center + half_width, count))


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    fwhm: float


def _half_crossing(x, y, k, half, step):
    i = k
    while 0 <= i + step < len(y):
        j = i + step
        if y[j] < half:
            # linear interpolation between i (>= half) and j (< half)
            return x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i])
        i = j
    return None


def find_peaks_xy(x, y, min_height: float = 0.0) -> list[Peak]:
    """Local maxima of y(x) above ``min_height``, refined by a parabola through three points."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if x.size < 3:
        raise ValueError("need at least 3 points")
    peaks = []
    for k in range(1, x.size - 1):
        if not (y[k] >= y[k - 1] and y[k] > y[k + 1]) or y[k] < min_height:
            continue
        x0, x1, x2 = x[k - 1], x[k], x[k + 1]
        y0, y1, y2 = y[k - 1], y[k], y[k + 1]
        d01, d12 = (y1 - y0) / (x1 - x0), (y2 - y1) / (x2 - x1)
        curv = (d12 - d01) / (x2 - x0)
        pos, height = x1, y1
        if curv < 0:
            # vertex of y0 + d01 (x - x0) + curv (x - x0)(x - x1)
            vertex = 0.5 * (x0 + x1) - 0.5 * d01 / curv
            if x0 <= vertex <= x2:
                pos = vertex
                height = max(y0 + d01 * (vertex - x0) + curv * (vertex - x0) * (vertex - x1), y1)
        half = 0.5 * height
        left = _half_crossing(x, y, k, half, -1)
        right = _half_crossing(x, y, k, half, +1)
        if left is None and right is None:
            width = x[-1] - x[0]
        elif left is None:
            width = 2.0 * (right - pos)
        elif right is None:
            width = 2.0 * (pos - left)
        else:
            width = right - left
        peaks.append(Peak(float(pos), float(height), float(max(width, np.finfo(float).tiny))))
    return peaks


def find_peaks(spectrum, channel: str = "t_21", min_height: float = 0.0) -> list[Peak]:
    """Peaks of one transmission channel of a Spectrum or a list of TransmissionPoints."""
    if channel not in ("t_12", "t_21"):
        raise ValueError("channel must be 't_12' or 't_21'")
    if isinstance(spectrum, Spectrum):
        x, y = spectrum.x, getattr(spectrum, channel)
    else:
        pts = list(spectrum)
        x = np.array([pt.x for pt in pts])
        y = np.array([getattr(pt, channel) for pt in pts])
    return find_peaks_xy(x, y, min_height)
