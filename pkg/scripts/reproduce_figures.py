"""Write spectra and sweeps for every preset and print a peak summary.

    python scripts/reproduce_figures.py --out figures
"""

import argparse
import os
import time

from oms.cli import run_job
from oms.config import parse_config
from oms.presets import PRESETS
from oms.response import spectrum_arrays
from oms.sweep import default_x_grid, find_peaks


def summarize(name: str) -> str:
    p = PRESETS[name].params
    sp = spectrum_arrays(p, default_x_grid(p))
    w = p.omega_m1
    parts = []
    for ch in ("t_21", "t_12"):
        peaks = sorted(find_peaks(sp, ch), key=lambda q: -q.height)[:2]
        txt = ", ".join(f"{q.position / w:+.4f} ({q.height:.3g})" for q in peaks) or "none"
        parts.append(f"{ch} peaks {txt}")
    return f"{name:7s} " + "; ".join(parts)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--skip-sweeps", action="store_true")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    for name in sorted(PRESETS):
        kinds = ["spectrum"]
        if PRESETS[name].sweep_parameter and not args.skip_sweeps:
            kinds.append("sweep2d" if PRESETS[name].sweep_parameter == "phi_rel" else "sweep1d")
        for kind in kinds:
            job = parse_config(f'[system]\npreset = "{name}"\n[job]\noutput = "{name}_{kind}"\n', kind=kind)
            t0 = time.perf_counter()
            _, paths = run_job(job, args.out, args.threads)
            print(f"wrote {paths[0]} in {time.perf_counter() - t0:.2f} s")

    print("\npeak positions in units of omega_m1 (height in parentheses)")
    for name in sorted(PRESETS):
        print(summarize(name))


if __name__ == "__main__":
    main()
