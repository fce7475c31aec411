"""Command-line front end.

    oms <steady-state|spectrum|sweep|verify|presets> [--config FILE]
        [--preset NAME] [--out DIR] [--threads N] [--format csv|json]

Each run writes one data file and a ``.meta.json`` sidecar into ``--out``.
Exit status: 0 success, 1 invalid input, 2 I/O failure, 3 solver failure
(including an oracle mismatch in ``verify``).  Failures also print a JSON
error record on stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import __version__
from .config import ConfigError, JobKind, JobSpec, dump_config, parse_config
from .model import BranchPolicy, flat_items, validate_params
from .presets import get_preset, list_presets
from .response import SingularResponseError, spectrum_arrays
from .steady_state import SteadyStateError, resolve_detunings, steady_state
from .sweep import X_AXIS, sweep_1d, sweep_2d
from .time_domain import DivergenceError, WindowTooShortError, cross_check_response

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_SOLVER = 0, 1, 2, 3
SUBCOMMANDS = {
    "steady-state": JobKind.STEADY_STATE,
    "spectrum": JobKind.SPECTRUM,
    "sweep": None,
    "verify": JobKind.VERIFY,
}
VERIFY_X_RANGE = (0.02, 0.2)


class SolverFailure(RuntimeError):
    pass


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _csv(header: list[str], rows) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n")
    return buf.getvalue().encode("utf-8")


def _json(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n").encode("utf-8")


def _cplx(z) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _steady_state_data(job: JobSpec):
    p = job.params
    w = p.omega_m1
    roots = steady_state(p, BranchPolicy.ALL_ROOTS)
    chosen = steady_state(p)
    header = ["branch_index", "selected", "intensity"]
    for m in ("a1s", "a2s", "a3s", "b1s", "b2s"):
        header += [f"re_{m}", f"im_{m}"]
    header += ["delta_1_over_omega_m1", "delta_2_over_omega_m1", "delta_3_over_omega_m1", "residual"]
    rows = []
    for s in roots:
        row = [str(s.branch_index), str(int(s.branch_index == chosen.branch_index)), s.intensity]
        for a in s.amplitudes():
            row += _cplx(a)
        row += [d / w for d in s.effective_detunings] + [s.residual]
        rows.append(row)
    return header, rows, {"n_roots": chosen.n_roots, "selected_branch": chosen.branch_index}


def _spectrum_data(job: JobSpec):
    p = job.params
    sp = spectrum_arrays(p, job.x_grid())
    w = p.omega_m1
    header = ["x_over_omega_m1", "delta_p_over_omega_m1", "T_12", "T_21"]
    rows = [[x / w, d / w, a, b] for x, d, a, b in zip(sp.x, sp.delta_p, sp.t_12, sp.t_21)]
    s = steady_state(p)
    return header, rows, {"n_roots": s.n_roots, "selected_branch": s.branch_index}


def _sweep_data(job: JobSpec, threads):
    p = job.params
    w = p.omega_m1
    if job.kind is JobKind.SWEEP1D:
        g = sweep_1d(p, job.axes[0], job.x_grid(), threads=threads)
        params = [job.axes[0]]
    elif any(a.parameter == X_AXIS for a in job.axes):
        g = sweep_2d(p, job.axes[0], job.axes[1], threads=threads)
        params = [a for a in job.axes if a.parameter != X_AXIS]
    else:
        g = sweep_2d(p, job.axes[0], job.axes[1], job.x_grid(), threads=threads)
        params = list(job.axes)
    header = [a.parameter for a in params] + ["x_over_omega_m1", "delta_p_over_omega_m1", "T_12", "T_21", "status"]
    v1 = params[0].values()
    v2 = params[1].values() if len(params) == 2 else [None]
    rows = []
    for i, a in enumerate(v1):
        for j, b in enumerate(v2):
            status = "ok" if (i, j) not in g.errors else "failed"
            lead = [a] if b is None else [a, b]
            for k, x in enumerate(g.x_grid):
                rows.append(lead + [x / w, x / w + 1.0, g.t_12[i, j, k], g.t_21[i, j, k], status])
    meta = dict(g.metadata)
    meta["errors"] = {f"{i},{j}": msg for (i, j), msg in g.errors.items()}
    return header, rows, meta


def verify_points(job: JobSpec) -> np.ndarray:
    """Random offsets with |x| in [0.02, 0.2] omega_m1 and random sign."""
    rng = np.random.default_rng(job.seed)
    mag = rng.uniform(*VERIFY_X_RANGE, size=job.n_points)
    sign = rng.choice([-1.0, 1.0], size=job.n_points)
    return mag * sign * job.params.omega_m1


def _verify_data(job: JobSpec):
    reports = [cross_check_response(job.params, x, tolerance=job.tolerance) for x in verify_points(job)]
    w = job.params.omega_m1
    entries = []
    for r in reports:
        d = r.as_dict()
        d["x_over_omega_m1"] = r.x / w
        entries.append(d)
    passed = all(r.passed for r in reports)
    return {"passed": passed, "tolerance": job.tolerance, "points": entries}, passed


def _bare_record(job: JobSpec) -> dict:
    p = job.params
    u = p.rate_unit
    rec = {"resolved_bare_detunings_rad_per_s": [d * u for d in resolve_detunings(p).bare_detunings]}
    if p.target_detunings is not None:
        rec["effective_detuning_targets_rad_per_s"] = [d * u for d in p.target_detunings]
    if job.preset is not None:
        rec["caption_bare_detunings_rad_per_s"] = list(get_preset(job.preset).caption_bare_detunings)
    return rec


def build_outputs(job: JobSpec, threads: int | None = None) -> tuple[str, bytes, dict]:
    """Run ``job`` and return (extension, data bytes, metadata without the hash)."""
    report = validate_params(job.params)
    if not report.ok:
        raise ConfigError("; ".join(report.errors))
    extra: dict = {}
    passed = True
    if job.kind is JobKind.VERIFY:
        obj, passed = _verify_data(job)
        ext, data = "json", _json(obj)
    else:
        if job.kind is JobKind.STEADY_STATE:
            header, rows, extra = _steady_state_data(job)
        elif job.kind is JobKind.SPECTRUM:
            header, rows, extra = _spectrum_data(job)
        else:
            header, rows, extra = _sweep_data(job, threads)
        if job.format == "json":
            ext = "json"
            data = _json({"columns": header, "rows": [[v if isinstance(v, str) else float(v) for v in r] for r in rows]})
        else:
            ext, data = "csv", _csv(header, rows)
    p = job.params
    meta = {
        "tool": "oms",
        "version": __version__,
        "kind": job.kind.value,
        "preset": job.preset,
        "convention": p.convention.value,
        "branch_policy": p.branch.value,
        "unit_mode": p.unit_mode.value,
        "rate_unit_rad_per_s": p.rate_unit,
        "parameters": {k: v for k, v in flat_items(p)},
        "detunings": _bare_record(job),
        "warnings": report.warnings,
        "config": dump_config(job),
        **extra,
    }
    if job.kind is JobKind.VERIFY:
        meta["verify_passed"] = passed
    return ext, data, meta


def _write_atomic(files: list[tuple[str, bytes]]) -> None:
    """Write every file to a temporary name first, then rename them all."""
    temps = []
    try:
        for path, data in files:
            d = os.path.dirname(os.path.abspath(path))
            fd, tmp = tempfile.mkstemp(dir=d, prefix=".oms-", suffix=".tmp")
            temps.append((tmp, path))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
        for tmp, path in temps:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in temps:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def run_job(job: JobSpec, out_dir: str, threads: int | None = None) -> tuple[int, list[str]]:
    """Run ``job`` and write its files; returns (exit status, written paths).

    Raises the underlying exception on failure; :func:`main` maps those to
    exit codes.
    """
    ext, data, meta = build_outputs(job, threads)
    base = os.path.join(out_dir, job.output)
    data_path = f"{base}.{ext}"
    meta["data_file"] = os.path.basename(data_path)
    meta["sha256"] = hashlib.sha256(data).hexdigest()
    meta_path = f"{base}.meta.json"
    os.makedirs(out_dir, exist_ok=True)
    _write_atomic([(data_path, data), (meta_path, _json(meta))])
    status = EXIT_OK if meta.get("verify_passed", True) else EXIT_SOLVER
    return status, [data_path, meta_path]


def _error(code: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_status": code}, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oms", description="Optomechanical transmission model runner.")
    ap.add_argument("--version", action="version", version=f"oms {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="TOML job file")
        sp.add_argument("--preset", help="named scenario; overrides the file's preset")
        sp.add_argument("--out", default=".", help="output directory (default: .)")
        sp.add_argument("--threads", type=int, default=None, help="worker cap for sweeps")
        sp.add_argument("--format", choices=("csv", "json"), default=None)
    sub.add_parser("presets", help="list named scenarios")
    return ap


def load_job(args) -> JobSpec:
    if args.config is None and args.preset is None:
        raise ConfigError("give --config, --preset or both")
    text = ""
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    kind = SUBCOMMANDS[args.command]
    if kind is None:
        # "sweep" picks 1-D or 2-D from the file, or from the preset's axes
        job = parse_config(text, preset=args.preset, kind=None)
        if job.kind not in (JobKind.SWEEP1D, JobKind.SWEEP2D):
            preset = args.preset or job.preset
            two = preset is not None and get_preset(preset).sweep_parameter == "phi_rel"
            job = parse_config(text, preset=args.preset, kind="sweep2d" if two else "sweep1d")
    else:
        job = parse_config(text, preset=args.preset, kind=kind.value)
    if args.format is not None:
        job = replace(job, format=args.format)
    return job


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name, desc in list_presets():
            print(f"{name}: {desc}")
        return EXIT_OK
    try:
        job = load_job(args)
    except OSError as exc:
        return _error(EXIT_IO, "io", str(exc))
    except (ConfigError, KeyError, ValueError) as exc:
        return _error(EXIT_INPUT, "invalid_input", str(exc))
    try:
        status, paths = run_job(job, args.out, args.threads)
    except ConfigError as exc:
        return _error(EXIT_INPUT, "invalid_input", str(exc))
    except OSError as exc:
        return _error(EXIT_IO, "io", str(exc))
    except (SteadyStateError, SingularResponseError, DivergenceError, WindowTooShortError, SolverFailure) as exc:
        return _error(EXIT_SOLVER, "solver", str(exc))
    for path in paths:
        print(path)
    if status == EXIT_SOLVER:
        return _error(EXIT_SOLVER, "oracle_mismatch", "time-domain check exceeded tolerance; see report")
    return status


if __name__ == "__main__":
    sys.exit(main())
