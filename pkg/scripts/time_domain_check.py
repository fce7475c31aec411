"""Compare the linear response with demodulated mean-field integration.

    python scripts/time_domain_check.py --preset fig2a --convention literal --points 20
"""

import argparse
import time
from dataclasses import replace

import numpy as np

from oms.model import Convention, UnitMode, normalize_units
from oms.presets import PRESETS
from oms.time_domain import cross_check_response

MODES = ("da1+", "da2+", "da3+", "db1+", "db2+")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="fig2a", choices=sorted(PRESETS))
    ap.add_argument("--convention", default="literal", choices=[c.value for c in Convention])
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--tolerance", type=float, default=5e-3)
    args = ap.parse_args()

    p = normalize_units(PRESETS[args.preset].params, UnitMode.OMEGA_M1_UNITS)
    p = replace(p, convention=Convention(args.convention))
    rng = np.random.default_rng(args.seed)
    xs = rng.uniform(0.02, 0.2, args.points) * rng.choice([-1.0, 1.0], args.points)

    print(f"{'x':>9s} " + " ".join(f"{m:>9s}" for m in MODES) + "  t_end     seconds")
    worst = 0.0
    t_all = time.perf_counter()
    for x in xs:
        t0 = time.perf_counter()
        r = cross_check_response(p, float(x), tolerance=args.tolerance)
        worst = max(worst, float(np.max(r.relative_deviation[:2])))
        devs = " ".join(f"{d:9.2e}" for d in r.relative_deviation)
        print(f"{x:+9.4f} {devs}  {r.grid.t_end:8.0f}  {time.perf_counter() - t0:6.2f}")
    print(f"max deviation of da1+, da2+: {worst:.3e} (tolerance {args.tolerance}); total {time.perf_counter() - t_all:.1f} s")


if __name__ == "__main__":
    main()
